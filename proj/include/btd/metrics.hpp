#pragma once

#include "btd/model.hpp"
#include "btd/tensor.hpp"

#include <vector>

namespace btd {

struct AssignmentResult {
  std::vector<Index> row_to_col;  // -1 when the row is unassigned
  std::vector<Index> col_to_row;  // -1 when the column is unassigned
  double total_cost = 0.0;        // summed in row order
  DenseMatrix costs;
};

/// Minimum-cost injective assignment of min(rows, cols) pairs (Hungarian method).
AssignmentResult linear_assignment(const DenseMatrix& cost);

struct BlockNmse {
  double nmse = 0.0;
  /// Rows are true blocks, columns estimated blocks; unmatched true blocks cost 1.
  AssignmentResult assignment;
  std::vector<double> per_block;  // one entry per true block
};

/**
 * Block NMSE after optimal block matching:
 *
 *   (1/R) sum_r |T_r - T_hat_{pi(r)}|_F^2 / |T_r|_F^2
 *
 * with T_r = (A_r B_r^T) o c_r. Costs are computed on the block tensors, so
 * the metric is blind to block order and per-block scaling.
 */
BlockNmse nmse_blocks(const BtdFactors& truth, const BtdFactors& estimate);

/// |Y - reconstruct(F)|_F / |Y|_F.
double reconstruction_error(const DenseTensor3& y, const BtdFactors& f);

/**
 * Mean SSIM over all window x window patches (uniform weights, population
 * statistics), with C1 = (0.01 range)^2 and C2 = (0.03 range)^2. The window
 * is odd, >= 3, and shrunk to the largest odd size that fits the image.
 */
double ssim(const DenseMatrix& a, const DenseMatrix& b, int window = 7, double dynamic_range = 1.0);

/// Frontal slice k (I x J) of a tensor.
DenseMatrix band(const DenseTensor3& t, Index k);

/// ssim of every frontal slice (band) pair; length K.
std::vector<double> band_ssim_curve(const DenseTensor3& a, const DenseTensor3& b, int window = 7,
                                    double dynamic_range = 1.0);

/// max - min over all entries.
double value_range(const DenseTensor3& t);

}  // namespace btd
