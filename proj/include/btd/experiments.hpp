#pragma once

#include "btd/als.hpp"
#include "btd/hirls.hpp"
#include "btd/model.hpp"
#include "btd/tensor.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace btd {

/// Runs fn(0) .. fn(n-1) on up to `threads` workers (0 = hardware concurrency).
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

double median(std::vector<double> v);

// ---------------------------------------------------------------- bench-snr

struct BenchSnrConfig {
  Dims3 dims{60, 50, 55};
  Index true_blocks = 5;
  Index l_lo = 2;
  Index l_hi = 9;
  std::vector<double> snrs{5.0, 10.0, 15.0, 20.0};
  int trials = 10;
  int restarts = 10;
  /// HIRLS settings. Unless lambda or a positive sigma_hat is set, lambda comes
  /// from the heuristic with sigma_hat = the realized noise level of each trial.
  SolverConfig solver;
  bool run_als = true;
  Index als_rank = 10;  // every ALS block uses this rank; the block count is the true one
  std::uint64_t seed = 0;
  int threads = 0;
};

struct SnrTrial {
  double snr = 0.0;
  int trial = 0;
  std::string algo;  // "hirls" or "als"
  std::vector<Index> true_ranks;
  double sigma = 0.0;
  double lambda = 0.0;
  double nmse = 0.0;
  Index r_est = 0;
  std::vector<Index> l_est;
  int iterations = 0;
  bool converged = false;
  double wall_ms = 0.0;  // all restarts of the trial
};

struct SnrRow {
  double snr = 0.0;
  std::string algo;
  double median_nmse = 0.0;
  double mean_run_s = 0.0;  // per single run (restart)
  int trials = 0;
};

struct BenchSnrResult {
  std::vector<SnrTrial> trials;
  std::vector<SnrRow> rows;
};

BenchSnrResult bench_snr(const BenchSnrConfig& cfg);

// --------------------------------------------------------------- bench-rank

struct BenchRankConfig {
  Dims3 dims{18, 18, 10};
  std::vector<Index> true_ranks{8, 6, 4};
  double snr = 15.0;
  int trials = 100;
  int restarts = 1;
  SolverConfig solver;  // lambda rule as in BenchSnrConfig
  std::uint64_t seed = 0;
  int threads = 0;
};

struct RankTrial {
  int trial = 0;
  Index r_est = 0;
  std::vector<Index> l_est;          // estimated ranks in block order
  std::vector<Index> matched_l;      // per true block; 0 when no estimated block is assigned
  double nmse = 0.0;
  int iterations = 0;
  double wall_ms = 0.0;
};

struct BenchRankResult {
  std::vector<Index> true_ranks;
  std::vector<RankTrial> trials;
  double r_success_rate = 0.0;                  // fraction with r_est == R
  std::vector<std::map<Index, int>> l_counts;   // per true block: estimated L -> count
  std::vector<Index> modal_l;                   // per true block
  std::vector<double> l_success_rate;           // per true block
};

BenchRankResult bench_rank(const BenchRankConfig& cfg);

// -------------------------------------------------------------------- trace

struct TraceConfig {
  Dims3 dims{60, 50, 55};
  Index true_blocks = 5;
  Index l_lo = 2;
  Index l_hi = 9;
  double snr = 10.0;
  int trials = 10;
  SolverConfig solver;  // lambda rule as in BenchSnrConfig
  int iteration_budget = 50;  // reported: converged within this many iterations
  std::uint64_t seed = 0;
  int threads = 0;
};

struct TraceRun {
  int trial = 0;
  std::vector<Index> true_ranks;
  SolverTrace trace;
  std::vector<double> nmse;  // one per iteration record
  RankEstimate ranks;
};

struct TraceResult {
  std::vector<TraceRun> runs;
  int within_budget = 0;  // runs whose stopping rule fired within iteration_budget iterations
};

TraceResult trace_experiment(const TraceConfig& cfg);

// ------------------------------------------------------------------ denoise

struct DenoiseConfig {
  SolverConfig solver;  // defaults r_ini = 50, l_ini = 10 are set by denoise_defaults()
  int restarts = 1;
  int ssim_window = 7;
  /// Dynamic range for SSIM; max - min of the reference when unset.
  std::optional<double> dynamic_range;
};

DenoiseConfig denoise_defaults();

struct DenoiseResult {
  SolverResult solve;
  DenseTensor3 denoised;
  std::vector<double> ssim_denoised;  // per band, empty without a reference
  std::vector<double> ssim_noisy;
  double dynamic_range = 0.0;
};

DenoiseResult denoise(const DenseTensor3& noisy, const DenoiseConfig& cfg,
                      const DenseTensor3* reference = nullptr);

// --------------------------------------------------------------------- CSV

/// Header: iter,objective,data_fit,reg,rel_diff,active_R,active_L_json,wall_ms
void write_trace_csv(std::ostream& out, const SolverTrace& trace);
/// JSON array text such as [2,3,4].
std::string ranks_json(const std::vector<Index>& ranks);

/// Header: snr,algo,median_nmse,mean_run_s,trials
void write_snr_table_csv(std::ostream& out, const BenchSnrResult& r);
/// Header: snr,trial,algo,true_L_json,sigma,lambda,nmse,R_est,L_est_json,iterations,converged,wall_ms
void write_snr_trials_csv(std::ostream& out, const BenchSnrResult& r);

/// Header: block,true_L,est_L,count,frequency
void write_rank_hist_csv(std::ostream& out, const BenchRankResult& r);
/// Header: trials,R_true,R_success_rate,true_L_json,modal_L_json,L_success_json
void write_rank_summary_csv(std::ostream& out, const BenchRankResult& r);
/// Header: trial,R_est,L_est_json,matched_L_json,nmse,iterations,wall_ms
void write_rank_trials_csv(std::ostream& out, const BenchRankResult& r);

/// Header: trial,iter,nmse,objective,data_fit,reg,rel_diff,active_R
void write_nmse_trace_csv(std::ostream& out, const TraceResult& r);
/// Header: trial,true_L_json,iterations,converged,final_nmse,R_est,L_est_json
void write_trace_summary_csv(std::ostream& out, const TraceResult& r);

/// Header: band,ssim_denoised,ssim_noisy
void write_ssim_csv(std::ostream& out, const DenoiseResult& r);

/// Rank report: "R <n>" and "L <l1> <l2> ..." lines followed by per-block energies.
void write_rank_report(std::ostream& out, const RankEstimate& est);
/// Same information as JSON.
std::string rank_report_json(const RankEstimate& est);

}  // namespace btd
