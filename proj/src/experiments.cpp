#include "btd/experiments.hpp"

#include "btd/error.hpp"
#include "btd/metrics.hpp"
#include "btd/synth.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

namespace btd {

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double median(std::vector<double> v) {
  if (v.empty()) throw UsageError("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

// Factors restricted to the blocks counted as active.
BtdFactors active_part(const BtdFactors& f, const RankEstimate& est) {
  BtdFactors out;
  out.C.resize(f.rows_c(), static_cast<Index>(est.active_blocks.size()));
  for (std::size_t n = 0; n < est.active_blocks.size(); ++n) {
    const auto r = static_cast<std::size_t>(est.active_blocks[n]);
    out.A.push_back(f.A[r]);
    out.B.push_back(f.B[r]);
    out.C.col(static_cast<Index>(n)) = f.C.col(static_cast<Index>(r));
  }
  return out;
}

}  // namespace

BenchSnrResult bench_snr(const BenchSnrConfig& cfg) {
  if (cfg.trials < 1 || cfg.restarts < 1) throw UsageError("trials and restarts must be >= 1");
  if (cfg.snrs.empty()) throw UsageError("the SNR list is empty");
  cfg.solver.validate();
  const int per_snr = cfg.trials;
  const int jobs = static_cast<int>(cfg.snrs.size()) * per_snr;
  std::vector<SnrTrial> hirls(static_cast<std::size_t>(jobs)), als(static_cast<std::size_t>(jobs));

  parallel_for(jobs, cfg.threads, [&](int job) {
    const int si = job / per_snr;
    const int t = job % per_snr;
    const double snr = cfg.snrs[static_cast<std::size_t>(si)];
    const auto ut = static_cast<std::uint64_t>(t);
    const auto key = ut * 1000 + static_cast<std::uint64_t>(si);
    const auto ranks = random_ranks(cfg.true_blocks, cfg.l_lo, cfg.l_hi, derive_seed(cfg.seed, 1, ut));
    const auto truth = gen_btd(cfg.dims, ranks, derive_seed(cfg.seed, 2, ut));
    const auto noisy = add_noise_snr(truth.tensor, snr, derive_seed(cfg.seed, 3, key));

    SolverConfig sc = cfg.solver;
    if (!(sc.sigma_hat > 0.0)) sc.sigma_hat = noisy.sigma;
    sc.seed = derive_seed(cfg.seed, 4, key);
    auto t0 = std::chrono::steady_clock::now();
    const SolverResult res = run_multistart(noisy.tensor, sc, cfg.restarts, &truth.factors);
    SnrTrial& h = hirls[static_cast<std::size_t>(job)];
    h.wall_ms = elapsed_ms(t0);
    h.snr = snr;
    h.trial = t;
    h.algo = "hirls";
    h.true_ranks = ranks;
    h.sigma = noisy.sigma;
    h.lambda = res.trace.lambda;
    h.nmse = nmse_blocks(truth.factors, res.factors).nmse;
    h.r_est = res.ranks.num_blocks;
    h.l_est = res.ranks.ranks;
    h.iterations = res.trace.iterations();
    h.converged = res.trace.converged;

    if (!cfg.run_als) return;
    AlsConfig ac;
    ac.max_iters = cfg.solver.max_iters;
    ac.rel_tol = cfg.solver.rel_tol;
    ac.seed = derive_seed(cfg.seed, 5, key);
    t0 = std::chrono::steady_clock::now();
    const AlsResult ares = run_als_multistart(noisy.tensor, std::vector<Index>(static_cast<std::size_t>(cfg.true_blocks), cfg.als_rank),
                                              ac, cfg.restarts, &truth.factors);
    SnrTrial& a = als[static_cast<std::size_t>(job)];
    a.wall_ms = elapsed_ms(t0);
    a.snr = snr;
    a.trial = t;
    a.algo = "als";
    a.true_ranks = ranks;
    a.sigma = noisy.sigma;
    a.nmse = nmse_blocks(truth.factors, ares.factors).nmse;
    a.r_est = ares.factors.num_blocks();
    a.l_est = ares.factors.ranks();
    a.iterations = ares.trace.iterations();
    a.converged = ares.trace.converged;
  });

  BenchSnrResult out;
  for (std::size_t si = 0; si < cfg.snrs.size(); ++si) {
    for (const auto* group : {&hirls, &als}) {
      if (group == &als && !cfg.run_als) continue;
      std::vector<double> nmse;
      double run_ms = 0.0;
      for (int t = 0; t < per_snr; ++t) {
        const SnrTrial& tr = (*group)[si * static_cast<std::size_t>(per_snr) + static_cast<std::size_t>(t)];
        nmse.push_back(tr.nmse);
        run_ms += tr.wall_ms / cfg.restarts;
        out.trials.push_back(tr);
      }
      SnrRow row;
      row.snr = cfg.snrs[si];
      row.algo = group == &hirls ? "hirls" : "als";
      row.median_nmse = median(nmse);
      row.mean_run_s = run_ms / per_snr / 1000.0;
      row.trials = per_snr;
      out.rows.push_back(row);
    }
  }
  return out;
}

BenchRankResult bench_rank(const BenchRankConfig& cfg) {
  if (cfg.trials < 1 || cfg.restarts < 1) throw UsageError("trials and restarts must be >= 1");
  if (cfg.true_ranks.empty()) throw UsageError("true ranks are empty");
  cfg.solver.validate();
  const std::size_t nb = cfg.true_ranks.size();
  BenchRankResult out;
  out.true_ranks = cfg.true_ranks;
  out.trials.resize(static_cast<std::size_t>(cfg.trials));

  parallel_for(cfg.trials, cfg.threads, [&](int t) {
    const auto ut = static_cast<std::uint64_t>(t);
    const auto truth = gen_btd(cfg.dims, cfg.true_ranks, derive_seed(cfg.seed, 2, ut));
    const auto noisy = add_noise_snr(truth.tensor, cfg.snr, derive_seed(cfg.seed, 3, ut));
    SolverConfig sc = cfg.solver;
    if (!(sc.sigma_hat > 0.0)) sc.sigma_hat = noisy.sigma;
    sc.seed = derive_seed(cfg.seed, 4, ut);
    const auto t0 = std::chrono::steady_clock::now();
    const SolverResult res = run_multistart(noisy.tensor, sc, cfg.restarts, &truth.factors);
    RankTrial& rt = out.trials[static_cast<std::size_t>(t)];
    rt.wall_ms = elapsed_ms(t0);
    rt.trial = t;
    rt.r_est = res.ranks.num_blocks;
    rt.l_est = res.ranks.ranks;
    rt.iterations = res.trace.iterations();
    const auto matched = nmse_blocks(truth.factors, active_part(res.factors, res.ranks));
    rt.nmse = matched.nmse;
    rt.matched_l.assign(nb, 0);
    for (std::size_t r = 0; r < nb; ++r) {
      const Index c = matched.assignment.row_to_col[r];
      if (c >= 0) rt.matched_l[r] = res.ranks.ranks[static_cast<std::size_t>(c)];
    }
  });

  out.l_counts.assign(nb, {});
  int r_ok = 0;
  for (const auto& rt : out.trials) {
    r_ok += rt.r_est == static_cast<Index>(nb);
    for (std::size_t r = 0; r < nb; ++r) ++out.l_counts[r][rt.matched_l[r]];
  }
  out.r_success_rate = static_cast<double>(r_ok) / cfg.trials;
  for (std::size_t r = 0; r < nb; ++r) {
    Index mode = 0;
    int best = -1;
    for (const auto& [l, count] : out.l_counts[r]) {
      if (count > best) {
        best = count;
        mode = l;
      }
    }
    out.modal_l.push_back(mode);
    const auto it = out.l_counts[r].find(cfg.true_ranks[r]);
    out.l_success_rate.push_back(it == out.l_counts[r].end() ? 0.0 : static_cast<double>(it->second) / cfg.trials);
  }
  return out;
}

TraceResult trace_experiment(const TraceConfig& cfg) {
  if (cfg.trials < 1) throw UsageError("trials must be >= 1");
  cfg.solver.validate();
  TraceResult out;
  out.runs.resize(static_cast<std::size_t>(cfg.trials));
  parallel_for(cfg.trials, cfg.threads, [&](int t) {
    const auto ut = static_cast<std::uint64_t>(t);
    TraceRun& run = out.runs[static_cast<std::size_t>(t)];
    run.trial = t;
    run.true_ranks = random_ranks(cfg.true_blocks, cfg.l_lo, cfg.l_hi, derive_seed(cfg.seed, 1, ut));
    const auto truth = gen_btd(cfg.dims, run.true_ranks, derive_seed(cfg.seed, 2, ut));
    const auto noisy = add_noise_snr(truth.tensor, cfg.snr, derive_seed(cfg.seed, 3, ut));
    SolverConfig sc = cfg.solver;
    if (!(sc.sigma_hat > 0.0)) sc.sigma_hat = noisy.sigma;
    sc.seed = derive_seed(cfg.seed, 4, ut);
    const SolverResult res = run_hirls(noisy.tensor, sc, [&](int, const BtdFactors& f) {
      run.nmse.push_back(nmse_blocks(truth.factors, f).nmse);
    });
    run.trace = res.trace;
    run.ranks = res.ranks;
  });
  for (const auto& run : out.runs)
    out.within_budget += run.trace.converged && run.trace.iterations() <= cfg.iteration_budget;
  return out;
}

DenoiseConfig denoise_defaults() {
  DenoiseConfig cfg;
  cfg.solver.r_ini = 50;
  cfg.solver.l_ini = 10;
  return cfg;
}

DenoiseResult denoise(const DenseTensor3& noisy, const DenoiseConfig& cfg, const DenseTensor3* reference) {
  if (noisy.dims().K < 2) throw UsageError("denoise needs at least two bands (K >= 2)");
  if (reference && !(reference->dims() == noisy.dims())) throw UsageError("reference cube shape differs from the input");
  DenoiseResult out;
  out.solve = run_multistart(noisy, cfg.solver, cfg.restarts);
  out.denoised = reconstruct(out.solve.factors);
  if (reference) {
    out.dynamic_range = cfg.dynamic_range ? *cfg.dynamic_range : value_range(*reference);
    if (!(out.dynamic_range > 0.0)) out.dynamic_range = 1.0;
    out.ssim_denoised = band_ssim_curve(out.denoised, *reference, cfg.ssim_window, out.dynamic_range);
    out.ssim_noisy = band_ssim_curve(noisy, *reference, cfg.ssim_window, out.dynamic_range);
  }
  return out;
}

std::string ranks_json(const std::vector<Index>& ranks) { return nlohmann::json(ranks).dump(); }

void write_trace_csv(std::ostream& out, const SolverTrace& trace) {
  out << "iter,objective,data_fit,reg,rel_diff,active_R,active_L_json,wall_ms\n";
  for (const auto& r : trace.records) {
    out << r.iter << ',' << num(r.objective) << ',' << num(r.data_fit) << ',' << num(r.reg) << ','
        << num(r.rel_diff) << ',' << r.active_r << ',' << quoted(ranks_json(r.active_l)) << ',' << num(r.wall_ms)
        << '\n';
  }
}

void write_snr_table_csv(std::ostream& out, const BenchSnrResult& r) {
  out << "snr,algo,median_nmse,mean_run_s,trials\n";
  for (const auto& row : r.rows)
    out << num(row.snr) << ',' << row.algo << ',' << num(row.median_nmse) << ',' << num(row.mean_run_s) << ','
        << row.trials << '\n';
}

void write_snr_trials_csv(std::ostream& out, const BenchSnrResult& r) {
  out << "snr,trial,algo,true_L_json,sigma,lambda,nmse,R_est,L_est_json,iterations,converged,wall_ms\n";
  for (const auto& t : r.trials)
    out << num(t.snr) << ',' << t.trial << ',' << t.algo << ',' << quoted(ranks_json(t.true_ranks)) << ','
        << num(t.sigma) << ',' << num(t.lambda) << ',' << num(t.nmse) << ',' << t.r_est << ','
        << quoted(ranks_json(t.l_est)) << ',' << t.iterations << ',' << (t.converged ? 1 : 0) << ','
        << num(t.wall_ms) << '\n';
}

void write_rank_hist_csv(std::ostream& out, const BenchRankResult& r) {
  out << "block,true_L,est_L,count,frequency\n";
  const double n = static_cast<double>(r.trials.size());
  for (std::size_t b = 0; b < r.l_counts.size(); ++b)
    for (const auto& [l, count] : r.l_counts[b])
      out << b + 1 << ',' << r.true_ranks[b] << ',' << l << ',' << count << ',' << num(count / n) << '\n';
}

void write_rank_summary_csv(std::ostream& out, const BenchRankResult& r) {
  out << "trials,R_true,R_success_rate,true_L_json,modal_L_json,L_success_json\n";
  out << r.trials.size() << ',' << r.true_ranks.size() << ',' << num(r.r_success_rate) << ','
      << quoted(ranks_json(r.true_ranks)) << ',' << quoted(ranks_json(r.modal_l)) << ','
      << quoted(nlohmann::json(r.l_success_rate).dump()) << '\n';
}

void write_rank_trials_csv(std::ostream& out, const BenchRankResult& r) {
  out << "trial,R_est,L_est_json,matched_L_json,nmse,iterations,wall_ms\n";
  for (const auto& t : r.trials)
    out << t.trial << ',' << t.r_est << ',' << quoted(ranks_json(t.l_est)) << ',' << quoted(ranks_json(t.matched_l))
        << ',' << num(t.nmse) << ',' << t.iterations << ',' << num(t.wall_ms) << '\n';
}

void write_nmse_trace_csv(std::ostream& out, const TraceResult& r) {
  out << "trial,iter,nmse,objective,data_fit,reg,rel_diff,active_R\n";
  for (const auto& run : r.runs) {
    for (std::size_t n = 0; n < run.trace.records.size(); ++n) {
      const auto& rec = run.trace.records[n];
      out << run.trial << ',' << rec.iter << ',' << num(run.nmse[n]) << ',' << num(rec.objective) << ','
          << num(rec.data_fit) << ',' << num(rec.reg) << ',' << num(rec.rel_diff) << ',' << rec.active_r << '\n';
    }
  }
}

void write_trace_summary_csv(std::ostream& out, const TraceResult& r) {
  out << "trial,true_L_json,iterations,converged,final_nmse,R_est,L_est_json\n";
  for (const auto& run : r.runs)
    out << run.trial << ',' << quoted(ranks_json(run.true_ranks)) << ',' << run.trace.iterations() << ','
        << (run.trace.converged ? 1 : 0) << ',' << num(run.nmse.empty() ? 1.0 : run.nmse.back()) << ','
        << run.ranks.num_blocks << ',' << quoted(ranks_json(run.ranks.ranks)) << '\n';
}

void write_ssim_csv(std::ostream& out, const DenoiseResult& r) {
  out << "band,ssim_denoised,ssim_noisy\n";
  for (std::size_t k = 0; k < r.ssim_denoised.size(); ++k)
    out << k << ',' << num(r.ssim_denoised[k]) << ',' << num(r.ssim_noisy[k]) << '\n';
}

void write_rank_report(std::ostream& out, const RankEstimate& est) {
  out << "R " << est.num_blocks << "\nL";
  for (Index l : est.ranks) out << ' ' << l;
  out << "\nblocks";
  for (Index b : est.active_blocks) out << ' ' << b;
  out << '\n';
  for (std::size_t r = 0; r < est.c_energies.size(); ++r) {
    out << "block " << r << " c_energy " << num(est.c_energies[r]) << " columns";
    for (double e : est.column_energies[r]) out << ' ' << num(e);
    out << '\n';
  }
}

std::string rank_report_json(const RankEstimate& est) {
  nlohmann::json j;
  j["R"] = est.num_blocks;
  j["L"] = est.ranks;
  j["L_sorted"] = est.sorted_ranks();
  j["active_blocks"] = est.active_blocks;
  j["c_energies"] = est.c_energies;
  j["column_energies"] = est.column_energies;
  return j.dump(2);
}

}  // namespace btd
