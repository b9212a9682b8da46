#include "btd/hirls.hpp"

#include "btd/error.hpp"
#include "btd/metrics.hpp"
#include "btd/synth.hpp"
#include "normal_equations.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <limits>

namespace btd {

using detail::block_offsets;
using detail::NormalEquations;

std::string to_string(UpdateMode m) {
  return m == UpdateMode::kGaussSeidel ? "gauss_seidel" : "as_tabulated";
}

std::string to_string(PruneMode m) {
  switch (m) {
    case PruneMode::kOff: return "off";
    case PruneMode::kBlocks: return "blocks";
    default: return "blocks+columns";
  }
}

std::string to_string(Weighting w) { return w == Weighting::kMajorizer ? "majorizer" : "plain"; }

UpdateMode parse_update_mode(const std::string& s) {
  if (s == "gauss_seidel") return UpdateMode::kGaussSeidel;
  if (s == "as_tabulated") return UpdateMode::kAsTabulated;
  throw UsageError("unknown update mode '" + s + "' (gauss_seidel | as_tabulated)");
}

PruneMode parse_prune_mode(const std::string& s) {
  if (s == "off") return PruneMode::kOff;
  if (s == "blocks") return PruneMode::kBlocks;
  if (s == "blocks+columns") return PruneMode::kBlocksAndColumns;
  throw UsageError("unknown prune mode '" + s + "' (off | blocks | blocks+columns)");
}

Weighting parse_weighting(const std::string& s) {
  if (s == "majorizer") return Weighting::kMajorizer;
  if (s == "plain") return Weighting::kPlain;
  throw UsageError("unknown weighting '" + s + "' (majorizer | plain)");
}

void SolverConfig::validate() const {
  if (r_ini < 1 || l_ini < 1) throw UsageError("r_ini and l_ini must be >= 1");
  if (!(eta > 0.0)) throw UsageError("eta must be > 0");
  if (!(rel_tol > 0.0)) throw UsageError("rel_tol must be > 0");
  if (max_iters < 1) throw UsageError("max_iters must be >= 1");
  if (lambda && !(*lambda >= 0.0)) throw UsageError("lambda must be >= 0");
  if (!(sigma_hat >= 0.0)) throw UsageError("sigma_hat must be >= 0");
  if (!(lambda_scale > 0.0)) throw UsageError("lambda_scale must be > 0");
  if (!(thresholds.block_tol > 0.0 && thresholds.block_tol < 1.0 && thresholds.col_tol > 0.0 &&
        thresholds.col_tol < 1.0)) {
    throw UsageError("pruning tolerances must lie in (0, 1)");
  }
  if (init) init->validate();
}

double SolverConfig::resolve_lambda(const DenseTensor3& y) const {
  if (lambda) return *lambda;
  const double y_norm = frobenius_norm(y);
  if (sigma_hat == 0.0) return lambda_floor(y_norm);
  return lambda_scale * lambda_heuristic(y.dims(), r_ini, l_ini, sigma_hat, y_norm);
}

double lambda_floor(double y_norm) { return y_norm > 0.0 ? 1e-8 * y_norm : 1e-8; }

double lambda_heuristic(Dims3 dims, Index r_ini, Index l_ini, double sigma_hat, double y_norm) {
  if (!(sigma_hat >= 0.0)) throw UsageError("sigma_hat must be >= 0");
  if (sigma_hat == 0.0) return lambda_floor(y_norm);
  return static_cast<double>(l_ini * r_ini * (dims.I + dims.J + dims.K)) * sigma_hat;
}

Vector compute_d1(const BtdFactors& f, double eta) {
  const auto norms = column_norms(f, eta);
  Vector d1(f.num_blocks());
  for (Index r = 0; r < f.num_blocks(); ++r) {
    const double s = norms[static_cast<std::size_t>(r)].sum();
    d1(r) = 1.0 / std::sqrt(s * s + f.C.col(r).squaredNorm() + eta * eta);
  }
  return d1;
}

Vector compute_d2(const BtdFactors& f, double eta) {
  const auto norms = column_norms(f, eta);
  Vector d2(f.total_rank());
  Index c0 = 0;
  for (const auto& v : norms) {
    d2.segment(c0, v.size()) = v.cwiseInverse();
    c0 += v.size();
  }
  return d2;
}

Vector compose_d(const Vector& d1, const Vector& d2, const std::vector<Index>& ranks) {
  const auto off = block_offsets(ranks);
  if (static_cast<Index>(ranks.size()) != d1.size() || off.back() != d2.size()) {
    throw UsageError("compose_d: D1/D2 lengths do not match the block ranks");
  }
  Vector d(d2.size());
  for (std::size_t r = 0; r < ranks.size(); ++r) {
    d.segment(off[r], ranks[r]) = d1(static_cast<Index>(r)) * d2.segment(off[r], ranks[r]);
  }
  return d;
}

Vector factor_weights(const BtdFactors& f, double eta, Weighting weighting) {
  const auto ranks = f.ranks();
  Vector d = compose_d(compute_d1(f, eta), compute_d2(f, eta), ranks);
  if (weighting == Weighting::kPlain) return d;
  const auto norms = column_norms(f, eta);
  const auto off = block_offsets(ranks);
  for (std::size_t r = 0; r < ranks.size(); ++r) d.segment(off[r], ranks[r]) *= norms[r].sum();
  return d;
}

DenseMatrix solve_regularized(const DenseMatrix& gram, const DenseMatrix& rhs, const Vector& d,
                              double lambda, int iteration) {
  if (gram.rows() != gram.cols() || gram.rows() != d.size() || rhs.cols() != gram.rows()) {
    throw UsageError("solve_regularized: inconsistent system sizes");
  }
  DenseMatrix system = gram;
  system.diagonal() += lambda * d;
  Eigen::LLT<DenseMatrix> llt(system);
  if (llt.info() != Eigen::Success) {
    throw SolverError("normal-equation matrix is not positive definite; use lambda > 0", iteration);
  }
  DenseMatrix x = llt.solve(rhs.transpose()).transpose();
  if (!x.allFinite()) {
    throw SolverError("normal-equation solve produced non-finite values; use lambda > 0", iteration);
  }
  return x;
}

namespace {

void check_update_shapes(const DenseMatrix& y, const DenseMatrix& k, const Vector& d) {
  if (y.cols() != k.rows() || k.cols() != d.size()) {
    throw UsageError("update: unfolding, product and weight shapes disagree");
  }
}

}  // namespace

DenseMatrix update_a(const DenseMatrix& y1, const DenseMatrix& p, const Vector& d, double lambda) {
  check_update_shapes(y1, p, d);
  return solve_regularized(p.transpose() * p, y1 * p, d, lambda);
}

DenseMatrix update_b(const DenseMatrix& y2, const DenseMatrix& q, const Vector& d, double lambda) {
  check_update_shapes(y2, q, d);
  return solve_regularized(q.transpose() * q, y2 * q, d, lambda);
}

DenseMatrix update_c(const DenseMatrix& y3, const DenseMatrix& s, const Vector& d1, double lambda) {
  check_update_shapes(y3, s, d1);
  return solve_regularized(s.transpose() * s, y3 * s, d1, lambda);
}

DenseMatrix product_p(const BtdFactors& f) {
  const auto c = column_blocks(f.C);
  return khatri_rao_partitioned(f.B, c);
}

DenseMatrix product_q(const BtdFactors& f) {
  const auto c = column_blocks(f.C);
  return khatri_rao_partitioned(c, f.A);
}

double data_fit(const BtdFactors& f, const DenseTensor3& y) {
  f.validate();
  if (!(f.dims() == y.dims())) throw UsageError("factor and tensor dimensions differ");
  return 0.5 * detail::residual_squared(y, build_s(f.A, f.B), f.C);
}

double objective(const BtdFactors& f, const DenseTensor3& y, double lambda, double eta) {
  return data_fit(f, y) + lambda * regularizer_value(f, eta);
}

DenseMatrix get_factor(const BtdFactors& f, FactorBlock which) {
  switch (which) {
    case FactorBlock::kA: return f.stacked_a();
    case FactorBlock::kB: return f.stacked_b();
    default: return f.C;
  }
}

BtdFactors with_factor(const BtdFactors& f, FactorBlock which, const DenseMatrix& x) {
  BtdFactors out = f;
  switch (which) {
    case FactorBlock::kA: out.A = split_columns(x, f.ranks()); break;
    case FactorBlock::kB: out.B = split_columns(x, f.ranks()); break;
    default: out.C = x; break;
  }
  out.validate();
  return out;
}

namespace {

NormalEquations normal_equations(FactorBlock which, const BtdFactors& f, const DenseTensor3& y) {
  f.validate();
  if (!(f.dims() == y.dims())) throw UsageError("factor and tensor dimensions differ");
  switch (which) {
    case FactorBlock::kA:
      return detail::normal_equations_a(y, detail::mode3_contract(y, f.C), f.B, f.C);
    case FactorBlock::kB:
      return detail::normal_equations_b(y, detail::mode3_contract(y, f.C), f.A, f.C);
    default:
      return detail::normal_equations_c(y, build_s(f.A, f.B));
  }
}

Vector solve_weights(FactorBlock which, const BtdFactors& f, double eta, Weighting weighting) {
  return which == FactorBlock::kC ? compute_d1(f, eta) : factor_weights(f, eta, weighting);
}

}  // namespace

DenseMatrix objective_gradient(FactorBlock which, const BtdFactors& f, const DenseTensor3& y,
                               double lambda, double eta) {
  const auto ne = normal_equations(which, f, y);
  const DenseMatrix x = get_factor(f, which);
  // The exact penalty gradient is x_rl * s_r D1(r) D2(r,l) for A/B and
  // c_r D1(r) for C, i.e. the majorizer weights.
  const Vector w = solve_weights(which, f, eta, Weighting::kMajorizer);
  return x * ne.gram - ne.rhs + lambda * (x * w.asDiagonal());
}

double surrogate_value(FactorBlock which, const DenseMatrix& x, const BtdFactors& at,
                       const DenseTensor3& y, double lambda, double eta, Weighting weighting) {
  const auto ne = normal_equations(which, at, y);
  const DenseMatrix x0 = get_factor(at, which);
  if (x.rows() != x0.rows() || x.cols() != x0.cols()) throw UsageError("surrogate: shape mismatch");
  const DenseMatrix delta = x - x0;
  DenseMatrix h = ne.gram;
  h.diagonal() += lambda * solve_weights(which, at, eta, weighting);
  const DenseMatrix grad = objective_gradient(which, at, y, lambda, eta);
  return objective(at, y, lambda, eta) + (delta.cwiseProduct(grad)).sum() +
         0.5 * (delta * h).cwiseProduct(delta).sum();
}

DenseMatrix closed_form_update(FactorBlock which, const BtdFactors& at, const DenseTensor3& y,
                               double lambda, double eta, Weighting weighting) {
  const auto ne = normal_equations(which, at, y);
  return solve_regularized(ne.gram, ne.rhs, solve_weights(which, at, eta, weighting), lambda);
}

double reweighted_objective(FactorBlock which, const DenseMatrix& x, const BtdFactors& at,
                            const DenseTensor3& y, double lambda, double eta, Weighting weighting) {
  const double fit = data_fit(with_factor(at, which, x), y);
  if (which != FactorBlock::kC) {
    const Vector w = factor_weights(at, eta, weighting);
    return fit + 0.5 * lambda * (x.colwise().squaredNorm().transpose().cwiseProduct(w)).sum();
  }
  const Vector d1 = compute_d1(at, eta);
  const auto norms = column_norms(at, eta);
  double pen = 0.0;
  for (Index r = 0; r < x.cols(); ++r) {
    const double s = norms[static_cast<std::size_t>(r)].sum();
    pen += (s * s + x.col(r).squaredNorm() + eta * eta) * d1(r);
  }
  return fit + 0.5 * lambda * pen;
}

DenseMatrix hessian_gap_a(const BtdFactors& at, const DenseTensor3& y, double lambda, double eta,
                          Weighting weighting) {
  const DenseMatrix a0 = at.stacked_a();
  const Index rows = a0.rows();
  const Index n = a0.cols();
  const Index dim = rows * n;
  if (dim > 64) throw UsageError("hessian_gap_a: I * sum(L_r) must be <= 64");

  const auto ne = normal_equations(FactorBlock::kA, at, y);
  DenseMatrix block = ne.gram;
  block.diagonal() += lambda * factor_weights(at, eta, weighting);
  DenseMatrix gap = DenseMatrix::Zero(dim, dim);
  for (Index i = 0; i < rows; ++i) gap.block(i * n, i * n, n, n) = block;

  const double h = 1e-5 * (1.0 + a0.cwiseAbs().maxCoeff());
  auto vec_grad = [&](const DenseMatrix& a) {
    const DenseMatrix g = objective_gradient(FactorBlock::kA, with_factor(at, FactorBlock::kA, a), y,
                                             lambda, eta);
    RowMajorMatrix gr = g;
    return Vector(Eigen::Map<const Vector>(gr.data(), dim));
  };
  DenseMatrix hess(dim, dim);
  for (Index i = 0; i < rows; ++i) {
    for (Index c = 0; c < n; ++c) {
      DenseMatrix plus = a0, minus = a0;
      plus(i, c) += h;
      minus(i, c) -= h;
      hess.col(i * n + c) = (vec_grad(plus) - vec_grad(minus)) / (2.0 * h);
    }
  }
  gap -= 0.5 * (hess + hess.transpose());
  return gap;
}

double hessian_gap_min_eig(const BtdFactors& at, const DenseTensor3& y, double lambda, double eta,
                           Weighting weighting) {
  const DenseMatrix gap = hessian_gap_a(at, y, lambda, eta, weighting);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(gap, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

BtdFactors random_init(Dims3 dims, Index blocks, Index rank, std::uint64_t seed) {
  Rng rng(seed);
  return random_factors(dims, std::vector<Index>(static_cast<std::size_t>(blocks), rank), rng);
}

SolverResult run_hirls(const DenseTensor3& y, const SolverConfig& cfg, const IterationObserver& observer) {
  cfg.validate();
  if (!y.all_finite()) throw UsageError("input tensor contains non-finite values");
  const double lambda = cfg.resolve_lambda(y);
  const double eta = cfg.eta;

  SolverResult result;
  result.seed = cfg.seed;
  BtdFactors& f = result.factors;
  f = cfg.init ? *cfg.init : random_init(y.dims(), cfg.r_ini, cfg.l_ini, cfg.seed);
  if (!(f.dims() == y.dims())) throw UsageError("initial factors do not match the tensor dimensions");

  SolverTrace& trace = result.trace;
  trace.lambda = lambda;
  const auto start = std::chrono::steady_clock::now();

  DenseMatrix s = build_s(f.A, f.B);
  double err_prev = std::sqrt(detail::residual_squared(y, s, f.C));
  trace.initial_objective = 0.5 * err_prev * err_prev + lambda * regularizer_value(f, eta);

  for (int it = 1; it <= cfg.max_iters; ++it) {
    const auto ranks = f.ranks();
    if (cfg.update_mode == UpdateMode::kGaussSeidel) {
      // With the majorizer weighting the weights are refreshed before every
      // block, so each solve minimizes a bound tangent at the current point.
      // The plain weighting keeps D1, D2 from the start of the sweep.
      const bool refresh = cfg.weighting == Weighting::kMajorizer;
      const Vector w0 = factor_weights(f, eta, cfg.weighting);
      const Vector d1_0 = compute_d1(f, eta);
      const DenseMatrix contracted = detail::mode3_contract(y, f.C);
      auto ne = detail::normal_equations_a(y, contracted, f.B, f.C);
      f.A = split_columns(solve_regularized(ne.gram, ne.rhs, w0, lambda, it), ranks);
      ne = detail::normal_equations_b(y, contracted, f.A, f.C);
      f.B = split_columns(
          solve_regularized(ne.gram, ne.rhs, refresh ? factor_weights(f, eta, cfg.weighting) : w0, lambda, it),
          ranks);
      s = build_s(f.A, f.B);
      ne = detail::normal_equations_c(y, s);
      f.C = solve_regularized(ne.gram, ne.rhs, refresh ? compute_d1(f, eta) : d1_0, lambda, it);
    } else {
      const Vector w = factor_weights(f, eta, cfg.weighting);
      const Vector d1 = compute_d1(f, eta);
      const DenseMatrix contracted = detail::mode3_contract(y, f.C);
      const auto ne_a = detail::normal_equations_a(y, contracted, f.B, f.C);
      const auto ne_b = detail::normal_equations_b(y, contracted, f.A, f.C);
      const auto ne_c = detail::normal_equations_c(y, s);
      f.A = split_columns(solve_regularized(ne_a.gram, ne_a.rhs, w, lambda, it), ranks);
      f.B = split_columns(solve_regularized(ne_b.gram, ne_b.rhs, w, lambda, it), ranks);
      f.C = solve_regularized(ne_c.gram, ne_c.rhs, d1, lambda, it);
    }

    if (cfg.prune != PruneMode::kOff) {
      f = prune_blocks(f, cfg.thresholds.block_tol);
      if (cfg.prune == PruneMode::kBlocksAndColumns) f = prune_columns(f, cfg.thresholds.col_tol);
    }
    s = build_s(f.A, f.B);

    const double err = std::sqrt(detail::residual_squared(y, s, f.C));
    IterationRecord rec;
    rec.iter = it;
    rec.data_fit = 0.5 * err * err;
    rec.reg = regularizer_value(f, eta);
    rec.objective = rec.data_fit + lambda * rec.reg;
    rec.rel_diff = err_prev > 0.0 ? std::abs(err - err_prev) / err_prev : 0.0;
    if (!std::isfinite(rec.objective)) throw SolverError("objective became non-finite", it);
    const auto est = count_effective_ranks(f, cfg.thresholds);
    rec.active_r = est.num_blocks;
    rec.active_l = est.ranks;
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    trace.records.push_back(std::move(rec));
    if (observer) observer(it, f);

    err_prev = err;
    if (trace.records.back().rel_diff < cfg.rel_tol) {
      trace.converged = true;
      break;
    }
  }
  result.ranks = count_effective_ranks(f, cfg.thresholds);
  return result;
}

SolverResult run_multistart(const DenseTensor3& y, const SolverConfig& cfg, int n_starts,
                            const BtdFactors* truth) {
  if (n_starts < 1) throw UsageError("n_starts must be >= 1");
  std::optional<SolverResult> best;
  double best_score = std::numeric_limits<double>::infinity();
  for (int n = 0; n < n_starts; ++n) {
    SolverConfig run_cfg = cfg;
    run_cfg.seed = cfg.seed + static_cast<std::uint64_t>(n);
    SolverResult res = run_hirls(y, run_cfg);
    const double score = truth ? nmse_blocks(*truth, res.factors).nmse : data_fit(res.factors, y);
    if (!best || score < best_score) {
      best_score = score;
      best = std::move(res);
    }
  }
  return std::move(*best);
}

}  // namespace btd
