#pragma once

#include "btd/model.hpp"
#include "btd/tensor.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace btd {

/// Which factors the A, B and C products of one sweep are built from.
enum class UpdateMode {
  kGaussSeidel,  // P(B^k, C^k), Q(C^k, A^{k+1}), S(A^{k+1}, B^{k+1})
  kAsTabulated,  // every product from the iteration-k factors
};

enum class PruneMode { kOff, kBlocks, kBlocksAndColumns };

/**
 * Diagonal weights applied to the A and B solves.
 *
 * kPlain uses D = (D1 kron I) D2. kMajorizer uses s_r * D1(r) * D2(r,l) with
 * s_r = sum_l sqrt(|a_rl|^2 + |b_rl|^2 + eta^2), the curvature of a quadratic
 * upper bound of the hierarchical penalty that is tangent at the current
 * factors, so every Gauss-Seidel sweep is a true block upper-bound
 * minimization step and the objective never increases. kPlain carries no
 * such guarantee but is what the lambda heuristic is calibrated for.
 */
enum class Weighting { kMajorizer, kPlain };

std::string to_string(UpdateMode m);
std::string to_string(PruneMode m);
std::string to_string(Weighting w);
UpdateMode parse_update_mode(const std::string& s);
PruneMode parse_prune_mode(const std::string& s);
Weighting parse_weighting(const std::string& s);

struct SolverConfig {
  Index r_ini = 10;
  Index l_ini = 10;
  /// Explicit regularization weight; when unset lambda is derived from sigma_hat.
  std::optional<double> lambda;
  double sigma_hat = 0.0;
  /// Multiplier on the sigma_hat heuristic (ignored when lambda is set or sigma_hat == 0).
  double lambda_scale = 1.0;
  double eta = 1e-8;
  int max_iters = 200;
  double rel_tol = 1e-5;
  PruneMode prune = PruneMode::kBlocks;
  RankThresholds thresholds;
  UpdateMode update_mode = UpdateMode::kGaussSeidel;
  Weighting weighting = Weighting::kPlain;
  std::uint64_t seed = 0;
  /// Starting point; i.i.d. N(0,1) factors of size (r_ini, l_ini) when unset.
  std::optional<BtdFactors> init;

  void validate() const;
  /// lambda if set, otherwise lambda_scale * lambda_heuristic(...) for this tensor.
  double resolve_lambda(const DenseTensor3& y) const;
};

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;  // data_fit + lambda * reg
  double data_fit = 0.0;   // 0.5 |Y - X|_F^2
  double reg = 0.0;        // regularizer_value (without lambda)
  double rel_diff = 0.0;   // relative change of |Y - X|_F
  Index active_r = 0;
  std::vector<Index> active_l;
  double wall_ms = 0.0;    // since the start of the run
};

struct SolverTrace {
  double lambda = 0.0;
  double initial_objective = 0.0;
  bool converged = false;
  std::vector<IterationRecord> records;

  int iterations() const { return static_cast<int>(records.size()); }
};

struct SolverResult {
  BtdFactors factors;
  SolverTrace trace;
  RankEstimate ranks;
  std::uint64_t seed = 0;
};

/// Called after every sweep with the iteration index (1-based) and current factors.
using IterationObserver = std::function<void(int, const BtdFactors&)>;

/// Floor used when no noise level is given: 1e-8 * |Y|_F (1e-8 for a zero tensor).
double lambda_floor(double y_norm);

/// lambda = L_ini * R_ini * (I + J + K) * sigma_hat, or lambda_floor(y_norm) when sigma_hat == 0.
double lambda_heuristic(Dims3 dims, Index r_ini, Index l_ini, double sigma_hat, double y_norm);

/// D1(r) = [ (sum_l sqrt(|a_rl|^2 + |b_rl|^2 + eta^2))^2 + |c_r|^2 + eta^2 ]^(-1/2).
Vector compute_d1(const BtdFactors& f, double eta);
/// D2(r,l) = (|a_rl|^2 + |b_rl|^2 + eta^2)^(-1/2), blocks concatenated.
Vector compute_d2(const BtdFactors& f, double eta);
/// D(r,l) = D1(r) * D2(r,l).
Vector compose_d(const Vector& d1, const Vector& d2, const std::vector<Index>& ranks);
/// Per-column weights of the A and B solves under the chosen weighting.
Vector factor_weights(const BtdFactors& f, double eta, Weighting weighting);

/**
 * Solves X (gram + lambda diag(d)) = rhs by Cholesky; never forms an inverse.
 * Throws SolverError when the system is not positive definite.
 */
DenseMatrix solve_regularized(const DenseMatrix& gram, const DenseMatrix& rhs, const Vector& d,
                              double lambda, int iteration = 0);

/// A = Y_(1) P (P^T P + lambda D)^{-1}.
DenseMatrix update_a(const DenseMatrix& y1, const DenseMatrix& p, const Vector& d, double lambda);
/// B = Y_(2) Q (Q^T Q + lambda D)^{-1}.
DenseMatrix update_b(const DenseMatrix& y2, const DenseMatrix& q, const Vector& d, double lambda);
/// C = Y_(3) S (S^T S + lambda D1)^{-1}.
DenseMatrix update_c(const DenseMatrix& y3, const DenseMatrix& s, const Vector& d1, double lambda);

/// P = B (.) C and Q = C (.) A from factor blocks.
DenseMatrix product_p(const BtdFactors& f);
DenseMatrix product_q(const BtdFactors& f);

double data_fit(const BtdFactors& f, const DenseTensor3& y);
double objective(const BtdFactors& f, const DenseTensor3& y, double lambda, double eta);

enum class FactorBlock { kA, kB, kC };

/// Analytic gradient of objective() w.r.t. the stacked A, stacked B, or C.
DenseMatrix objective_gradient(FactorBlock which, const BtdFactors& f, const DenseTensor3& y,
                               double lambda, double eta);

/// Returns `f` with the stacked A, stacked B or C replaced by `x`.
BtdFactors with_factor(const BtdFactors& f, FactorBlock which, const DenseMatrix& x);
DenseMatrix get_factor(const BtdFactors& f, FactorBlock which);

/**
 * Second-order surrogate of objective() in one factor, expanded at `at`:
 *
 *   g(X) = f(X_k) + <X - X_k, grad f(X_k)> + 1/2 sum_rows (x - x_k) H (x - x_k)^T
 *
 * with H = P^T P + lambda W (A), Q^T Q + lambda W (B), S^T S + lambda D1 (C).
 */
double surrogate_value(FactorBlock which, const DenseMatrix& x, const BtdFactors& at,
                       const DenseTensor3& y, double lambda, double eta, Weighting weighting);

/// Closed-form update of one factor from the expansion point `at`.
DenseMatrix closed_form_update(FactorBlock which, const BtdFactors& at, const DenseTensor3& y,
                               double lambda, double eta, Weighting weighting);

/**
 * Reweighted least-squares objective whose minimizer is closed_form_update:
 *   A/B: 1/2 |Y_(n)^T - P X^T|^2 + lambda/2 sum_rl w_rl |x_rl|^2
 *   C:   1/2 |Y_(3)^T - S C^T|^2 + lambda/2 sum_r (s_r^2 + |c_r|^2 + eta^2) / rho_r
 * with the weights frozen at `at`.
 */
double reweighted_objective(FactorBlock which, const DenseMatrix& x, const BtdFactors& at,
                            const DenseTensor3& y, double lambda, double eta, Weighting weighting);

/**
 * H_bar - H for the A subproblem at `at`, where H_bar = I_I kron (P^T P + lambda W)
 * and H is the Hessian of objective() in A from central differences of the
 * analytic gradient. Row-wise vectorization of A. Requires I * sum(L_r) <= 64.
 */
DenseMatrix hessian_gap_a(const BtdFactors& at, const DenseTensor3& y, double lambda, double eta,
                          Weighting weighting);
double hessian_gap_min_eig(const BtdFactors& at, const DenseTensor3& y, double lambda, double eta,
                           Weighting weighting);

SolverResult run_hirls(const DenseTensor3& y, const SolverConfig& cfg,
                       const IterationObserver& observer = {});

/**
 * Runs run_hirls with seeds cfg.seed .. cfg.seed + n_starts - 1 and keeps the
 * run with the lowest final data fit, or the lowest block NMSE against
 * `truth` when given.
 */
SolverResult run_multistart(const DenseTensor3& y, const SolverConfig& cfg, int n_starts,
                            const BtdFactors* truth = nullptr);

/// Random N(0,1) starting factors with `blocks` blocks of rank `rank`.
BtdFactors random_init(Dims3 dims, Index blocks, Index rank, std::uint64_t seed);

}  // namespace btd
