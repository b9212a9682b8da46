#pragma once

#include <Eigen/Dense>

#include <array>
#include <span>
#include <vector>

namespace btd {

using Index = Eigen::Index;
using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Dims3 {
  Index I = 0;
  Index J = 0;
  Index K = 0;

  Index size() const { return I * J * K; }
  friend bool operator==(const Dims3&, const Dims3&) = default;
};

/**
 * Dense real I x J x K tensor.
 *
 * Element (i, j, k) lives at linear offset (i*J + j)*K + k, so the mode-1
 * unfolding is the row-major I x (J*K) view of the storage and the mode-3
 * unfolding is its column-major K x (I*J) view.
 */
class DenseTensor3 {
 public:
  DenseTensor3() = default;
  explicit DenseTensor3(Dims3 dims);
  DenseTensor3(Dims3 dims, std::vector<double> values);

  const Dims3& dims() const { return dims_; }
  Index dim(int mode) const;
  Index size() const { return dims_.size(); }

  double operator()(Index i, Index j, Index k) const { return values_[offset(i, j, k)]; }
  double& operator()(Index i, Index j, Index k) { return values_[offset(i, j, k)]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  const double* data() const { return values_.data(); }
  double* data() { return values_.data(); }

  /// True when every entry is finite.
  bool all_finite() const;

  DenseTensor3& operator*=(double alpha);
  DenseTensor3& operator+=(const DenseTensor3& other);
  DenseTensor3& operator-=(const DenseTensor3& other);

 private:
  Index offset(Index i, Index j, Index k) const { return (i * dims_.J + j) * dims_.K + k; }

  Dims3 dims_;
  std::vector<double> values_;
};

DenseTensor3 operator-(DenseTensor3 lhs, const DenseTensor3& rhs);
DenseTensor3 operator+(DenseTensor3 lhs, const DenseTensor3& rhs);
DenseTensor3 operator*(double alpha, DenseTensor3 t);

// Zero-copy views of the two unfoldings that coincide with the storage.
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
Eigen::Map<const RowMajorMatrix> mode1_view(const DenseTensor3& t);
Eigen::Map<const DenseMatrix> mode3_view(const DenseTensor3& t);

/**
 * Mode-n unfolding, materialized.
 *
 *   mode 1: I x (J*K), column j*K + k
 *   mode 2: J x (K*I), column k*I + i
 *   mode 3: K x (I*J), column i*J + j
 *
 * With these conventions X_(1)^T = (B (.) C) A^T, X_(2)^T = (C (.) A) B^T and
 * X_(3)^T = S C^T hold for block-term tensors.
 */
DenseMatrix unfold(const DenseTensor3& t, int mode);

/// Inverse of unfold for the given dims.
DenseTensor3 fold(const DenseMatrix& m, int mode, Dims3 dims);

/// (M kron N)[p*rowsN + q, s*colsN + t] = M[p,s] * N[q,t].
DenseMatrix kronecker(const DenseMatrix& m, const DenseMatrix& n);

/// Partition-wise Khatri-Rao product: horizontally stacked kronecker(M_r, N_r).
DenseMatrix khatri_rao_partitioned(std::span<const DenseMatrix> m_blocks,
                                   std::span<const DenseMatrix> n_blocks);

/// Column-wise Khatri-Rao product: column l is kron(M(:,l), N(:,l)).
DenseMatrix khatri_rao_columnwise(const DenseMatrix& m, const DenseMatrix& n);

double frobenius_norm(const DenseTensor3& t);
double frobenius_norm(const DenseMatrix& m);
double squared_norm(const DenseTensor3& t);

/// Splits the K x R matrix C into R single-column blocks.
std::vector<DenseMatrix> column_blocks(const DenseMatrix& c);

}  // namespace btd
