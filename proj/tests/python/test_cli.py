import csv
import json
import os
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

CLI = os.environ.get("BTD_CLI") or shutil.which("btd")
pytestmark = pytest.mark.skipif(not CLI, reason="btd executable not available")


def run(*args, check=None):
    p = subprocess.run([CLI, *map(str, args)], capture_output=True, text=True)
    if check is not None:
        assert p.returncode == check, p.stdout + p.stderr
    return p


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def read_meta(path):
    out = {}
    section = ""
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            section = line.strip("[]") + "."
            continue
        key, _, value = line.partition("=")
        out[section + key.strip()] = value.strip()
    return out


@pytest.fixture(scope="module")
def synth(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    run("synth", "--dims", "14,13,12", "--ranks", "2,3", "--snr", "inf", "--seed", "5", "--out", out, check=0)
    return out


def test_synth_outputs(synth):
    assert (synth / "tensor.t3").read_bytes().startswith(b"T3 14 13 12\n")
    assert (synth / "truth" / "meta").exists()
    assert (synth / "run.meta").exists()


def t3_norm(path):
    raw = Path(path).read_bytes()
    body = raw[raw.index(b"\n") + 1:]
    return float(np.linalg.norm(np.frombuffer(body, dtype="<f8")))


def test_decompose_noise_free(synth, tmp_path):
    out = tmp_path / "dec"
    lam = 1e-2 * t3_norm(synth / "tensor.t3")
    p = run("decompose", synth / "tensor.t3", "--r-ini", 4, "--l-ini", 4, "--weighting", "majorizer",
            "--lambda", lam, "--seed", 1, "--restarts", 3, "--out", out)
    assert p.returncode in (0, 3), p.stderr
    report = json.loads((out / "ranks.json").read_text())
    assert report["R"] == 2
    assert sorted(report["L"]) == [2, 3]
    rows = read_csv(out / "trace.csv")
    assert rows[0] == ["iter", "objective", "data_fit", "reg", "rel_diff", "active_R", "active_L_json", "wall_ms"]
    assert 1 <= len(rows) - 1 <= 200
    objective = [float(r[1]) for r in rows[1:]]
    assert all(v == v for v in objective)
    assert (out / "factors" / "C.mat").exists()
    meta = read_meta(out / "run.meta")
    assert meta["resolved.command"] == "decompose"


def test_decompose_single_entry(tmp_path):
    t = tmp_path / "one.txt"
    t.write_text("# dims 1 1 1\n0 0 0 2.5\n")
    out = tmp_path / "one"
    p = run("decompose", t, "--r-ini", 2, "--l-ini", 2, "--out", out)
    assert p.returncode in (0, 3), p.stderr
    report = json.loads((out / "ranks.json").read_text())
    assert report["R"] == 1
    assert report["L"] == [1]


def test_decompose_als_routing(synth, tmp_path):
    out = tmp_path / "als"
    p = run("decompose", synth / "tensor.t3", "--algo", "als", "--R", 3, "--L", "4,4,4", "--out", out)
    assert p.returncode in (0, 3), p.stderr
    meta = (out / "factors" / "meta").read_text()
    assert "ranks 4 4 4" in meta


def test_config_precedence_and_rerun(synth, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\nmax_iters = 3  # cap\nr-ini = 3\nl-ini = 3\nlambda = 0.5\n")
    out1 = tmp_path / "c1"
    p = run("decompose", synth / "tensor.t3", "--config", cfg, "--max-iters", 5, "--out", out1)
    assert p.returncode in (0, 3), p.stderr
    meta = read_meta(out1 / "run.meta")
    assert meta["max-iters"] == "5"
    assert meta["r-ini"] == "3"
    rows = read_csv(out1 / "trace.csv")
    assert len(rows) - 1 <= 5

    out2 = tmp_path / "c2"
    p = run("decompose", synth / "tensor.t3", "--config", out1 / "run.meta", "--out", out2)
    assert p.returncode in (0, 3), p.stderr
    assert (out1 / "trace.csv").read_text().split("\n")[1].split(",")[:6] == \
        (out2 / "trace.csv").read_text().split("\n")[1].split(",")[:6]


def test_usage_and_parse_errors(synth, tmp_path):
    bad_cfg = tmp_path / "bad.cfg"
    bad_cfg.write_text("no_such_key = 1\n")
    assert run("decompose", synth / "tensor.t3", "--config", bad_cfg, "--out", tmp_path / "x").returncode == 2
    assert run("decompose", tmp_path / "missing.t3", "--out", tmp_path / "x").returncode == 2
    assert run("decompose", synth / "tensor.t3", "--lambda", 1, "--sigma-hat", 1).returncode == 2
    truncated = tmp_path / "trunc.t3"
    truncated.write_bytes((synth / "tensor.t3").read_bytes()[:100])
    p = run("decompose", truncated, "--out", tmp_path / "x")
    assert p.returncode == 4
    assert "byte" in p.stderr
    assert run("denoise", synth / "tensor.t3", "--sigma-hat", 0.1, "--ssim", "--out", tmp_path / "d").returncode == 2


def test_max_iters_exit_code(synth, tmp_path):
    p = run("decompose", synth / "tensor.t3", "--max-iters", 1, "--lambda", 1, "--out", tmp_path / "m")
    assert p.returncode == 3


def test_bench_rank_smoke(tmp_path):
    out = tmp_path / "rank"
    run("bench-rank", "--trials", 1, "--max-iters", 20, "--out", out, check=0)
    hist = read_csv(out / "rank_hist.csv")
    assert hist[0] == ["block", "true_L", "est_L", "count", "frequency"]
    assert sum(int(r[3]) for r in hist[1:]) == 3
    summary = read_csv(out / "rank_summary.csv")
    assert summary[0][0] == "trials"
    assert (out / "run.meta").exists()


def test_bench_snr_and_trace_smoke(tmp_path):
    out = tmp_path / "snr"
    run("bench-snr", "--dims", "10,9,8", "--blocks", 2, "--l-range", "2,3", "--snrs", "10,20", "--trials", 1,
        "--restarts", 1, "--r-ini", 4, "--l-ini", 4, "--als-rank", 4, "--out", out, check=0)
    table = read_csv(out / "snr_table.csv")
    assert table[0] == ["snr", "algo", "median_nmse", "mean_run_s", "trials"]
    assert len(table) == 5

    out = tmp_path / "trace"
    run("trace", "--dims", "10,9,8", "--blocks", 2, "--l-range", "2,3", "--trials", 2, "--r-ini", 4,
        "--l-ini", 4, "--out", out, check=0)
    rows = read_csv(out / "nmse_trace.csv")
    assert rows[0] == ["trial", "iter", "nmse", "objective", "data_fit", "reg", "rel_diff", "active_R"]
    assert len(rows) - 1 <= 2 * 200


def test_denoise_with_reference(tmp_path):
    src = tmp_path / "cube"
    run("synth", "--dims", "20,18,20", "--ranks", "3,2", "--snr", 5, "--seed", 2, "--out", src, check=0)
    sigma = float(read_meta(src / "run.meta")["resolved.sigma"])
    out = tmp_path / "den"
    p = run("denoise", src / "tensor.t3", "--reference", src / "clean.t3", "--ssim", "--sigma-hat", sigma,
            "--r-ini", 6, "--l-ini", 6, "--out", out)
    assert p.returncode in (0, 3), p.stderr
    rows = read_csv(out / "ssim.csv")[1:]
    assert len(rows) == 20
    better = sum(float(r[1]) > float(r[2]) for r in rows)
    assert better >= 0.9 * len(rows)
    assert (out / "denoised.t3").exists()
    assert (out / "ranks.json").exists()

    out = tmp_path / "self"
    run("denoise", src / "clean.t3", "--reference", src / "clean.t3", "--ssim", "--sigma-hat", sigma, "--r-ini", 6,
        "--l-ini", 6, "--out", out)
    assert all(float(r[2]) == 1.0 for r in read_csv(out / "ssim.csv")[1:])
