// btd: command-line front end for the block-term decomposition toolkit.
//
// Exit codes: 0 success (converged), 3 stopped at max-iters, 2 usage error,
// 4 malformed input file, 5 solver failure, 1 other runtime error.

#include "btd/als.hpp"
#include "btd/error.hpp"
#include "btd/experiments.hpp"
#include "btd/hirls.hpp"
#include "btd/metrics.hpp"
#include "btd/model_io.hpp"
#include "btd/synth.hpp"
#include "btd/tensor_io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace btd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitMaxIters = 3;
constexpr int kExitParse = 4;
constexpr int kExitSolver = 5;

struct Common {
  std::uint64_t seed = 0;
  std::optional<double> lambda;
  std::optional<double> sigma_hat;
  double lambda_scale = 1.0;
  double eta = 1e-8;
  int max_iters = 200;
  double rel_tol = 1e-5;
  Index r_ini = 10;
  Index l_ini = 10;
  std::string update_mode = "gauss_seidel";
  std::string prune = "blocks";
  std::string weighting = "plain";
  double block_tol = 1e-2;
  double col_tol = 1e-2;
  int restarts = 1;
  std::string out = "btd_out";
  std::string config;
  int threads = 0;
};

void add_out_seed_config(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Random seed");
  sub->add_option("--out", c.out, "Output directory");
  sub->add_option("--config", c.config, "File of 'key = value' lines (command-line flags take precedence)");
}

void add_common(CLI::App* sub, Common& c) {
  add_out_seed_config(sub, c);
  auto* lam = sub->add_option("--lambda", c.lambda, "Regularization weight");
  auto* sig = sub->add_option("--sigma-hat", c.sigma_hat, "Noise standard deviation guess for the lambda heuristic");
  lam->excludes(sig);
  sig->excludes(lam);
  sub->add_option("--lambda-scale", c.lambda_scale, "Multiplier on the lambda heuristic");
  sub->add_option("--eta", c.eta, "Smoothing constant");
  sub->add_option("--max-iters", c.max_iters, "Iteration cap");
  sub->add_option("--rel-tol", c.rel_tol, "Stop when the relative change of |Y - X| falls below this");
  sub->add_option("--r-ini", c.r_ini, "Initial number of blocks");
  sub->add_option("--l-ini", c.l_ini, "Initial rank of every block");
  sub->add_option("--update-mode", c.update_mode, "gauss_seidel | as_tabulated")
      ->check(CLI::IsMember({"gauss_seidel", "as_tabulated"}));
  sub->add_option("--prune", c.prune, "off | blocks | blocks+columns")
      ->check(CLI::IsMember({"off", "blocks", "blocks+columns"}));
  sub->add_option("--weighting", c.weighting, "plain | majorizer")->check(CLI::IsMember({"plain", "majorizer"}));
  sub->add_option("--block-tol", c.block_tol, "Relative block energy threshold");
  sub->add_option("--col-tol", c.col_tol, "Relative column energy threshold");
  sub->add_option("--restarts", c.restarts, "Random restarts (best run kept)");
  sub->add_option("--threads", c.threads, "Worker threads for independent trials (0 = all cores)");
}

SolverConfig solver_config(const Common& c) {
  SolverConfig cfg;
  cfg.r_ini = c.r_ini;
  cfg.l_ini = c.l_ini;
  cfg.lambda = c.lambda;
  cfg.sigma_hat = c.sigma_hat.value_or(0.0);
  cfg.lambda_scale = c.lambda_scale;
  cfg.eta = c.eta;
  cfg.max_iters = c.max_iters;
  cfg.rel_tol = c.rel_tol;
  cfg.prune = parse_prune_mode(c.prune);
  cfg.thresholds = {c.block_tol, c.col_tol};
  cfg.update_mode = parse_update_mode(c.update_mode);
  cfg.weighting = parse_weighting(c.weighting);
  cfg.seed = c.seed;
  cfg.validate();
  return cfg;
}

std::string join(const std::vector<std::string>& v, const char* sep = ",") {
  std::string s;
  for (std::size_t n = 0; n < v.size(); ++n) s += (n ? sep : "") + v[n];
  return s;
}

template <class T>
std::string join_values(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t n = 0; n < v.size(); ++n) os << (n ? "," : "") << v[n];
  return os.str();
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

using Resolved = std::vector<std::pair<std::string, std::string>>;

// Resolved settings as 'key = value' lines. The top section is valid input
// for --config; derived values go under [resolved], which --config skips.
void write_meta(const fs::path& dir, const CLI::App* sub, const Resolved& resolved) {
  std::ofstream out(dir / "run.meta");
  if (!out) throw UsageError("cannot write " + (dir / "run.meta").string());
  out << "# btd run.meta\n";
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    std::string value;
    if (opt->get_expected_min() == 0) {
      value = opt->count() ? "true" : "false";
    } else if (opt->count()) {
      value = join(opt->results());
    } else {
      value = opt->get_default_str();
    }
    if (value.empty() || value == "{}" || value == "[]") continue;
    out << name << " = " << value << '\n';
  }
  out << "\n[resolved]\ncommand = " << sub->get_name() << '\n';
  for (const auto& [k, v] : resolved) out << k << " = " << v << '\n';
}

fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path.string());
  fn(out);
}

Dims3 dims_from(const std::vector<Index>& v) {
  if (v.size() != 3 || v[0] < 1 || v[1] < 1 || v[2] < 1) throw UsageError("--dims needs three positive integers I,J,K");
  return {v[0], v[1], v[2]};
}

void report_ranks(const fs::path& out, const RankEstimate& est) {
  write_file(out / "ranks.txt", [&](std::ostream& os) { write_rank_report(os, est); });
  write_file(out / "ranks.json", [&](std::ostream& os) { os << rank_report_json(est) << '\n'; });
  std::cout << "R_est " << est.num_blocks << "  L_est " << ranks_json(est.ranks) << '\n';
}

// ------------------------------------------------------------- config merge

bool given_on_command_line(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

// Appends '--key value' for every config entry not already on the command line.
std::vector<std::string> merge_config(CLI::App& app, std::vector<std::string> args) {
  if (args.size() < 2) return args;
  CLI::App* sub = app.get_subcommand_no_throw(args[1]);
  if (sub == nullptr) return args;
  std::string path;
  for (std::size_t n = 2; n < args.size(); ++n) {
    if (args[n] == "--config" && n + 1 < args.size()) path = args[n + 1];
    if (args[n].rfind("--config=", 0) == 0) path = args[n].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  const auto items = CLI::ConfigTOML().from_config(in);
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && item.parents.front() != sub->get_name()) continue;
    std::string key = item.name;
    for (char& ch : key)
      if (ch == '_') ch = '-';
    if (key == "config") continue;
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw UsageError("unknown config key '" + item.name + "' for " + sub->get_name());
    if (given_on_command_line(args, key)) continue;
    if (opt->get_expected_min() == 0) {
      if (!item.inputs.empty() && CLI::detail::to_flag_value(item.inputs.front()) > 0) args.push_back("--" + key);
      continue;
    }
    args.push_back("--" + key);
    args.push_back(join(item.inputs));
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank-(Lr,Lr,1) block-term decomposition with joint estimation of R and the Lr"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  std::function<int()> action;

  // ---------------------------------------------------------------- decompose
  Common dc;
  std::string dc_tensor, dc_algo = "hirls", dc_init;
  std::optional<Index> dc_r;
  std::vector<Index> dc_l;
  auto* decompose = app.add_subcommand("decompose", "Decompose a tensor file (T3 or triplet text)");
  decompose->add_option("tensor", dc_tensor, "Input tensor")->required();
  add_common(decompose, dc);
  decompose->add_option("--algo", dc_algo, "hirls | als")->check(CLI::IsMember({"hirls", "als"}));
  decompose->add_option("--R", dc_r, "Number of blocks (als)");
  decompose->add_option("--L", dc_l, "Block ranks, comma separated or one value for all (als)")->delimiter(',');
  decompose->add_option("--init", dc_init, "Factor directory to start from");
  decompose->callback([&] {
    action = [&]() -> int {
      const fs::path out = prepare_out(dc.out);
      const DenseTensor3 y = read_tensor(dc_tensor);
      std::optional<BtdFactors> init;
      if (!dc_init.empty()) init = read_factors(dc_init);
      Resolved resolved{{"input", dc_tensor}};
      BtdFactors factors;
      SolverTrace trace;
      RankEstimate est;
      if (dc_algo == "als") {
        std::vector<Index> ranks = dc_l;
        if (ranks.empty() && init) ranks = init->ranks();
        if (ranks.empty()) throw UsageError("--algo als needs --L");
        if (dc_r) {
          if (ranks.size() == 1) ranks.assign(static_cast<std::size_t>(*dc_r), ranks.front());
          if (static_cast<Index>(ranks.size()) != *dc_r) throw UsageError("--R disagrees with the length of --L");
        }
        AlsConfig ac;
        ac.max_iters = dc.max_iters;
        ac.rel_tol = dc.rel_tol;
        ac.seed = dc.seed;
        ac.init = init;
        AlsResult res = dc.restarts > 1 ? run_als_multistart(y, ranks, ac, dc.restarts) : run_als(y, ranks, ac);
        factors = std::move(res.factors);
        trace = std::move(res.trace);
        est = count_effective_ranks(factors, {dc.block_tol, dc.col_tol});
        resolved.push_back({"ranks", join_values(ranks)});
      } else {
        SolverConfig cfg = solver_config(dc);
        cfg.init = init;
        SolverResult res = dc.restarts > 1 ? run_multistart(y, cfg, dc.restarts) : run_hirls(y, cfg);
        factors = std::move(res.factors);
        trace = std::move(res.trace);
        est = res.ranks;
        resolved.push_back({"selected_seed", std::to_string(res.seed)});
      }
      write_factors(out / "factors", factors);
      write_file(out / "trace.csv", [&](std::ostream& os) { write_trace_csv(os, trace); });
      report_ranks(out, est);
      const double rel_err = frobenius_norm(y) > 0.0 ? reconstruction_error(y, factors) : 0.0;
      resolved.push_back({"lambda", fmt(trace.lambda)});
      resolved.push_back({"iterations", std::to_string(trace.iterations())});
      resolved.push_back({"converged", trace.converged ? "true" : "false"});
      resolved.push_back({"relative_error", fmt(rel_err)});
      write_meta(out, decompose, resolved);
      std::cout << (trace.converged ? "converged" : "stopped at max-iters") << " after " << trace.iterations()
                << " iterations, relative error " << rel_err << '\n';
      return trace.converged ? kExitOk : kExitMaxIters;
    };
  });

  // -------------------------------------------------------------------- synth
  Common sc;
  sc.out = "btd_synth";
  std::vector<Index> sy_dims{20, 20, 15}, sy_ranks, sy_lrange{2, 9};
  Index sy_blocks = 3;
  double sy_snr = std::numeric_limits<double>::infinity();
  auto* synth = app.add_subcommand("synth", "Generate a random BTD tensor with optional noise");
  add_out_seed_config(synth, sc);
  synth->add_option("--dims", sy_dims, "I,J,K")->delimiter(',')->expected(3);
  synth->add_option("--ranks", sy_ranks, "Block ranks L_1,...,L_R (overrides --blocks/--l-range)")->delimiter(',');
  synth->add_option("--blocks", sy_blocks, "Number of blocks when ranks are drawn at random");
  synth->add_option("--l-range", sy_lrange, "Inclusive range lo,hi for random ranks")->delimiter(',')->expected(2);
  synth->add_option("--snr", sy_snr, "SNR in dB (inf for no noise)");
  synth->callback([&] {
    action = [&]() -> int {
      const fs::path out = prepare_out(sc.out);
      const Dims3 dims = dims_from(sy_dims);
      std::vector<Index> ranks = sy_ranks;
      if (ranks.empty()) ranks = random_ranks(sy_blocks, sy_lrange[0], sy_lrange[1], derive_seed(sc.seed, 1));
      const auto truth = gen_btd(dims, ranks, derive_seed(sc.seed, 2));
      const auto noisy = add_noise_snr(truth.tensor, sy_snr, derive_seed(sc.seed, 3));
      write_t3(out / "tensor.t3", noisy.tensor);
      write_t3(out / "clean.t3", truth.tensor);
      write_factors(out / "truth", truth.factors);
      write_meta(out, synth, {{"ranks", join_values(ranks)}, {"sigma", fmt(noisy.sigma)}});
      std::cout << "wrote " << (out / "tensor.t3").string() << "  ranks " << ranks_json(ranks) << "  sigma "
                << noisy.sigma << '\n';
      return kExitOk;
    };
  });

  // ---------------------------------------------------------------- bench-snr
  Common bs;
  bs.out = "btd_bench_snr";
  bs.restarts = 10;
  std::vector<Index> bs_dims{60, 50, 55}, bs_lrange{2, 9};
  std::vector<double> bs_snrs{5, 10, 15, 20};
  Index bs_blocks = 5, bs_als_rank = 10;
  int bs_trials = 10;
  bool bs_no_als = false;
  auto* bench_snr_cmd = app.add_subcommand("bench-snr", "Median block NMSE vs SNR for HIRLS and ALS");
  add_common(bench_snr_cmd, bs);
  bench_snr_cmd->add_option("--dims", bs_dims, "I,J,K")->delimiter(',')->expected(3);
  bench_snr_cmd->add_option("--blocks", bs_blocks, "True number of blocks");
  bench_snr_cmd->add_option("--l-range", bs_lrange, "Inclusive range lo,hi of the true ranks")->delimiter(',')->expected(2);
  bench_snr_cmd->add_option("--snrs", bs_snrs, "SNR list in dB")->delimiter(',');
  bench_snr_cmd->add_option("--trials", bs_trials, "Independent realizations per SNR");
  bench_snr_cmd->add_option("--als-rank", bs_als_rank, "Rank of every ALS block");
  bench_snr_cmd->add_flag("--no-als", bs_no_als, "Skip the ALS baseline");
  bench_snr_cmd->callback([&] {
    action = [&]() -> int {
      const fs::path out = prepare_out(bs.out);
      BenchSnrConfig cfg;
      cfg.dims = dims_from(bs_dims);
      cfg.true_blocks = bs_blocks;
      cfg.l_lo = bs_lrange[0];
      cfg.l_hi = bs_lrange[1];
      cfg.snrs = bs_snrs;
      cfg.trials = bs_trials;
      cfg.restarts = bs.restarts;
      cfg.solver = solver_config(bs);
      cfg.run_als = !bs_no_als;
      cfg.als_rank = bs_als_rank;
      cfg.seed = bs.seed;
      cfg.threads = bs.threads;
      const auto res = bench_snr(cfg);
      write_file(out / "snr_table.csv", [&](std::ostream& os) { write_snr_table_csv(os, res); });
      write_file(out / "snr_trials.csv", [&](std::ostream& os) { write_snr_trials_csv(os, res); });
      write_meta(out, bench_snr_cmd, {});
      write_snr_table_csv(std::cout, res);
      return kExitOk;
    };
  });

  // --------------------------------------------------------------- bench-rank
  Common br;
  br.out = "btd_bench_rank";
  std::vector<Index> br_dims{18, 18, 10}, br_ranks;
  std::string br_scenario = "I";
  double br_snr = 15.0;
  int br_trials = 100;
  auto* bench_rank_cmd = app.add_subcommand("bench-rank", "Rank-recovery frequencies over random trials");
  add_common(bench_rank_cmd, br);
  bench_rank_cmd->add_option("--scenario", br_scenario, "I (ranks 8,6,4) or II (ranks 9,7,5)")
      ->check(CLI::IsMember({"I", "II"}));
  bench_rank_cmd->add_option("--ranks", br_ranks, "True ranks (overrides --scenario)")->delimiter(',');
  bench_rank_cmd->add_option("--dims", br_dims, "I,J,K")->delimiter(',')->expected(3);
  bench_rank_cmd->add_option("--snr", br_snr, "SNR in dB");
  bench_rank_cmd->add_option("--trials", br_trials, "Independent realizations");
  bench_rank_cmd->callback([&] {
    action = [&]() -> int {
      const fs::path out = prepare_out(br.out);
      BenchRankConfig cfg;
      cfg.dims = dims_from(br_dims);
      cfg.true_ranks = !br_ranks.empty() ? br_ranks
                       : br_scenario == "I" ? std::vector<Index>{8, 6, 4}
                                            : std::vector<Index>{9, 7, 5};
      cfg.snr = br_snr;
      cfg.trials = br_trials;
      cfg.restarts = br.restarts;
      cfg.solver = solver_config(br);
      cfg.seed = br.seed;
      cfg.threads = br.threads;
      const auto res = bench_rank(cfg);
      write_file(out / "rank_hist.csv", [&](std::ostream& os) { write_rank_hist_csv(os, res); });
      write_file(out / "rank_summary.csv", [&](std::ostream& os) { write_rank_summary_csv(os, res); });
      write_file(out / "rank_trials.csv", [&](std::ostream& os) { write_rank_trials_csv(os, res); });
      write_meta(out, bench_rank_cmd, {{"true_ranks", join_values(cfg.true_ranks)}});
      write_rank_summary_csv(std::cout, res);
      return kExitOk;
    };
  });

  // -------------------------------------------------------------------- trace
  Common tr;
  tr.out = "btd_trace";
  std::vector<Index> tr_dims{60, 50, 55}, tr_lrange{2, 9};
  Index tr_blocks = 5;
  double tr_snr = 10.0;
  int tr_trials = 10, tr_budget = 50;
  auto* trace_cmd = app.add_subcommand("trace", "Per-iteration NMSE traces over random realizations");
  add_common(trace_cmd, tr);
  trace_cmd->add_option("--dims", tr_dims, "I,J,K")->delimiter(',')->expected(3);
  trace_cmd->add_option("--blocks", tr_blocks, "True number of blocks");
  trace_cmd->add_option("--l-range", tr_lrange, "Inclusive range lo,hi of the true ranks")->delimiter(',')->expected(2);
  trace_cmd->add_option("--snr", tr_snr, "SNR in dB");
  trace_cmd->add_option("--trials", tr_trials, "Independent realizations");
  trace_cmd->add_option("--budget", tr_budget, "Iteration budget reported in the summary");
  trace_cmd->callback([&] {
    action = [&]() -> int {
      const fs::path out = prepare_out(tr.out);
      TraceConfig cfg;
      cfg.dims = dims_from(tr_dims);
      cfg.true_blocks = tr_blocks;
      cfg.l_lo = tr_lrange[0];
      cfg.l_hi = tr_lrange[1];
      cfg.snr = tr_snr;
      cfg.trials = tr_trials;
      cfg.iteration_budget = tr_budget;
      cfg.solver = solver_config(tr);
      cfg.seed = tr.seed;
      cfg.threads = tr.threads;
      const auto res = trace_experiment(cfg);
      write_file(out / "nmse_trace.csv", [&](std::ostream& os) { write_nmse_trace_csv(os, res); });
      write_file(out / "trace_summary.csv", [&](std::ostream& os) { write_trace_summary_csv(os, res); });
      for (const auto& run : res.runs)
        write_file(out / ("trace_" + std::to_string(run.trial) + ".csv"),
                   [&](std::ostream& os) { write_trace_csv(os, run.trace); });
      write_meta(out, trace_cmd, {{"within_budget", std::to_string(res.within_budget)}});
      std::cout << res.within_budget << " of " << res.runs.size() << " runs met the stopping rule within "
                << tr_budget << " iterations\n";
      return kExitOk;
    };
  });

  // ------------------------------------------------------------------ denoise
  Common dn;
  dn.out = "btd_denoise";
  dn.r_ini = 50;
  dn.l_ini = 10;
  std::string dn_cube, dn_reference;
  bool dn_ssim = false;
  int dn_window = 7;
  std::optional<double> dn_range;
  auto* denoise_cmd = app.add_subcommand("denoise", "Low-rank BTD denoising of a data cube");
  denoise_cmd->add_option("cube", dn_cube, "Noisy cube (T3 or triplet text)")->required();
  add_common(denoise_cmd, dn);
  denoise_cmd->add_option("--reference", dn_reference, "Clean cube for per-band SSIM");
  denoise_cmd->add_flag("--ssim", dn_ssim, "Require and report per-band SSIM");
  denoise_cmd->add_option("--window", dn_window, "SSIM window (odd, >= 3)");
  denoise_cmd->add_option("--range", dn_range, "SSIM dynamic range (default: max - min of the reference)");
  denoise_cmd->callback([&] {
    action = [&]() -> int {
      if (dn_ssim && dn_reference.empty()) throw UsageError("--ssim needs --reference");
      if (!dn.lambda && !dn.sigma_hat) throw UsageError("denoise needs --lambda or --sigma-hat");
      const fs::path out = prepare_out(dn.out);
      const DenseTensor3 y = read_tensor(dn_cube);
      std::optional<DenseTensor3> ref;
      if (!dn_reference.empty()) ref = read_tensor(dn_reference);
      DenoiseConfig cfg;
      cfg.solver = solver_config(dn);
      cfg.restarts = dn.restarts;
      cfg.ssim_window = dn_window;
      cfg.dynamic_range = dn_range;
      const auto res = denoise(y, cfg, ref ? &*ref : nullptr);
      write_t3(out / "denoised.t3", res.denoised);
      write_factors(out / "factors", res.solve.factors);
      write_file(out / "trace.csv", [&](std::ostream& os) { write_trace_csv(os, res.solve.trace); });
      report_ranks(out, res.solve.ranks);
      Resolved resolved{{"input", dn_cube}, {"lambda", fmt(res.solve.trace.lambda)}};
      if (ref) {
        write_file(out / "ssim.csv", [&](std::ostream& os) { write_ssim_csv(os, res); });
        int better = 0;
        for (std::size_t k = 0; k < res.ssim_denoised.size(); ++k) better += res.ssim_denoised[k] > res.ssim_noisy[k];
        resolved.push_back({"ssim_range", fmt(res.dynamic_range)});
        resolved.push_back({"bands_improved", std::to_string(better)});
        std::cout << "SSIM improved on " << better << " of " << res.ssim_denoised.size() << " bands\n";
      }
      write_meta(out, denoise_cmd, resolved);
      return res.solve.trace.converged ? kExitOk : kExitMaxIters;
    };
  });

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = merge_config(app, args);
    std::vector<char*> cargs;
    for (auto& a : args) cargs.push_back(a.data());
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
