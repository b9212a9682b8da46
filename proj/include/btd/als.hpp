#pragma once

#include "btd/hirls.hpp"
#include "btd/model.hpp"
#include "btd/tensor.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace btd {

struct AlsConfig {
  int max_iters = 200;
  double rel_tol = 1e-5;
  std::uint64_t seed = 0;
  /// Starting point; i.i.d. N(0,1) factors with the requested ranks when unset.
  std::optional<BtdFactors> init;
  /// Eigenvalues below cutoff * max eigenvalue of a Gram matrix are treated as zero.
  double pinv_cutoff = 1e-12;
};

struct AlsResult {
  BtdFactors factors;
  SolverTrace trace;  // lambda = 0, reg = 0, objective = data_fit
};

/// X = rhs * gram^+ via a symmetric eigendecomposition (minimum-norm least squares).
DenseMatrix solve_min_norm(const DenseMatrix& gram, const DenseMatrix& rhs, double cutoff = 1e-12);

/**
 * Unregularized alternating least squares for fixed ranks: A, B, C are the
 * minimum-norm least-squares solutions against the mode-1, mode-2 and
 * mode-3 unfoldings, in that order. Stops when the relative change of
 * |Y - X|_F drops below rel_tol.
 */
AlsResult run_als(const DenseTensor3& y, const std::vector<Index>& ranks, const AlsConfig& cfg = {});

/// Best of n_starts runs (seeds seed..seed+n-1) by block NMSE against `truth`, else by data fit.
AlsResult run_als_multistart(const DenseTensor3& y, const std::vector<Index>& ranks, const AlsConfig& cfg,
                             int n_starts, const BtdFactors* truth = nullptr);

}  // namespace btd
