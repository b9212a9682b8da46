#include "btd/als.hpp"

#include "btd/error.hpp"
#include "btd/metrics.hpp"
#include "btd/synth.hpp"
#include "normal_equations.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <limits>

namespace btd {

DenseMatrix solve_min_norm(const DenseMatrix& gram, const DenseMatrix& rhs, double cutoff) {
  if (gram.rows() != gram.cols() || rhs.cols() != gram.rows()) throw UsageError("solve_min_norm: shape mismatch");
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(gram);
  const Vector& ev = eig.eigenvalues();
  const double top = ev.size() ? ev.maxCoeff() : 0.0;
  Vector inv = Vector::Zero(ev.size());
  for (Index n = 0; n < ev.size(); ++n)
    if (ev(n) > cutoff * top && ev(n) > 0.0) inv(n) = 1.0 / ev(n);
  const DenseMatrix& v = eig.eigenvectors();
  return ((rhs * v) * inv.asDiagonal()) * v.transpose();
}

AlsResult run_als(const DenseTensor3& y, const std::vector<Index>& ranks, const AlsConfig& cfg) {
  if (ranks.empty()) throw UsageError("run_als: at least one block is required");
  for (Index l : ranks)
    if (l < 1) throw UsageError("run_als: ranks must be >= 1");
  if (cfg.max_iters < 1) throw UsageError("run_als: max_iters must be >= 1");
  if (!(cfg.rel_tol > 0.0)) throw UsageError("run_als: rel_tol must be positive");
  if (!y.all_finite()) throw UsageError("input tensor contains non-finite values");

  AlsResult result;
  BtdFactors& f = result.factors;
  if (cfg.init) {
    f = *cfg.init;
    f.validate();
    if (!(f.dims() == y.dims()) || f.ranks() != ranks) throw UsageError("run_als: initial factors do not match");
  } else {
    Rng rng(cfg.seed);
    f = random_factors(y.dims(), ranks, rng);
  }

  const auto start = std::chrono::steady_clock::now();
  DenseMatrix s = build_s(f.A, f.B);
  double err_prev = std::sqrt(detail::residual_squared(y, s, f.C));
  result.trace.initial_objective = 0.5 * err_prev * err_prev;

  for (int it = 1; it <= cfg.max_iters; ++it) {
    const DenseMatrix contracted = detail::mode3_contract(y, f.C);
    auto ne = detail::normal_equations_a(y, contracted, f.B, f.C);
    f.A = split_columns(solve_min_norm(ne.gram, ne.rhs, cfg.pinv_cutoff), ranks);
    ne = detail::normal_equations_b(y, contracted, f.A, f.C);
    f.B = split_columns(solve_min_norm(ne.gram, ne.rhs, cfg.pinv_cutoff), ranks);
    s = build_s(f.A, f.B);
    ne = detail::normal_equations_c(y, s);
    f.C = solve_min_norm(ne.gram, ne.rhs, cfg.pinv_cutoff);

    const double err = std::sqrt(detail::residual_squared(y, s, f.C));
    IterationRecord rec;
    rec.iter = it;
    rec.data_fit = 0.5 * err * err;
    rec.objective = rec.data_fit;
    rec.rel_diff = err_prev > 0.0 ? std::abs(err - err_prev) / err_prev : 0.0;
    if (!std::isfinite(err)) throw SolverError("ALS residual became non-finite", it);
    rec.active_r = f.num_blocks();
    rec.active_l = ranks;
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.trace.records.push_back(std::move(rec));
    err_prev = err;
    if (result.trace.records.back().rel_diff < cfg.rel_tol) {
      result.trace.converged = true;
      break;
    }
  }
  return result;
}

AlsResult run_als_multistart(const DenseTensor3& y, const std::vector<Index>& ranks, const AlsConfig& cfg,
                             int n_starts, const BtdFactors* truth) {
  if (n_starts < 1) throw UsageError("n_starts must be >= 1");
  std::optional<AlsResult> best;
  double best_score = std::numeric_limits<double>::infinity();
  for (int n = 0; n < n_starts; ++n) {
    AlsConfig run_cfg = cfg;
    run_cfg.seed = cfg.seed + static_cast<std::uint64_t>(n);
    AlsResult res = run_als(y, ranks, run_cfg);
    const double score = truth ? nmse_blocks(*truth, res.factors).nmse : data_fit(res.factors, y);
    if (!best || score < best_score) {
      best_score = score;
      best = std::move(res);
    }
  }
  return std::move(*best);
}

}  // namespace btd
