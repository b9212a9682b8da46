#pragma once

#include "btd/tensor.hpp"

#include <vector>

namespace btd {

/**
 * Factors of a rank-(L_r, L_r, 1) block-term decomposition
 *
 *   X = sum_r (A_r B_r^T) o c_r,
 *
 * with A_r: I x L_r, B_r: J x L_r and c_r the r-th column of C (K x R).
 * Column l of A_r / B_r is a_rl / b_rl.
 */
struct BtdFactors {
  std::vector<DenseMatrix> A;
  std::vector<DenseMatrix> B;
  DenseMatrix C;

  Index num_blocks() const { return static_cast<Index>(A.size()); }
  Index rows_a() const { return A.empty() ? 0 : A.front().rows(); }
  Index rows_b() const { return B.empty() ? 0 : B.front().rows(); }
  Index rows_c() const { return C.rows(); }
  Dims3 dims() const { return {rows_a(), rows_b(), rows_c()}; }

  std::vector<Index> ranks() const;
  Index total_rank() const;

  /// Throws UsageError unless the block structure is consistent.
  void validate() const;

  /// Horizontal concatenations [A_1 ... A_R] and [B_1 ... B_R].
  DenseMatrix stacked_a() const;
  DenseMatrix stacked_b() const;
};

/// Zero factors with R blocks of rank L each.
BtdFactors zero_factors(Dims3 dims, Index blocks, Index rank);

/// Splits a stacked I x sum(L_r) matrix into blocks of the given widths.
std::vector<DenseMatrix> split_columns(const DenseMatrix& stacked, const std::vector<Index>& ranks);

struct RankEstimate {
  Index num_blocks = 0;                      // R_est
  std::vector<Index> ranks;                  // L_est, one per active block (in block order)
  std::vector<Index> active_blocks;          // indices into the input factors
  std::vector<std::vector<double>> column_energies;  // sqrt(|a_rl|^2 + |b_rl|^2), all blocks
  std::vector<double> c_energies;            // |c_r|_2, all blocks

  /// L_est sorted ascending.
  std::vector<Index> sorted_ranks() const;
};

/// S = [ (A_1 (.)c B_1) 1, ..., (A_R (.)c B_R) 1 ]; column r is vec(A_r B_r^T) in i*J + j order.
DenseMatrix build_s(const std::vector<DenseMatrix>& a_blocks, const std::vector<DenseMatrix>& b_blocks);

DenseTensor3 reconstruct(const BtdFactors& f);

/// The rank-(L_r, L_r, 1) term (A_r B_r^T) o c_r as a full tensor.
DenseTensor3 block_tensor(const BtdFactors& f, Index r);

/// 2 x R matrix with rows |G_r|_{1,2} and |c_r|_2.
DenseMatrix matrix_f(const BtdFactors& f);

/// sqrt(|a_rl|^2 + |b_rl|^2 + eta^2) for every column of every block.
std::vector<Vector> column_norms(const BtdFactors& f, double eta);

/**
 * Smoothed hierarchical l1,2 penalty (without the lambda factor):
 *
 *   sum_r sqrt( (sum_l sqrt(|a_rl|^2 + |b_rl|^2 + eta^2))^2 + |c_r|^2 + eta^2 ).
 */
double regularizer_value(const BtdFactors& f, double eta);

struct RankThresholds {
  double block_tol = 1e-2;
  double col_tol = 1e-2;
};

RankEstimate count_effective_ranks(const BtdFactors& f, RankThresholds tol = {});

/// Drops blocks whose |c_r| is below block_tol * max_s |c_s|; keeps at least one.
BtdFactors prune_blocks(const BtdFactors& f, double block_tol);

/// Drops columns l of (A_r, B_r) whose joint norm is below col_tol times the
/// largest joint column norm; every block keeps at least one column.
BtdFactors prune_columns(const BtdFactors& f, double col_tol);

}  // namespace btd
