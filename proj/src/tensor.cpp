#include "btd/tensor.hpp"

#include "btd/error.hpp"

#include <cmath>
#include <string>

namespace btd {

namespace {

void check_dims(const Dims3& d) {
  if (d.I <= 0 || d.J <= 0 || d.K <= 0) {
    throw UsageError("tensor dimensions must be positive, got " + std::to_string(d.I) + "x" +
                     std::to_string(d.J) + "x" + std::to_string(d.K));
  }
}

void check_mode(int mode) {
  if (mode < 1 || mode > 3) {
    throw UsageError("mode must be 1, 2 or 3, got " + std::to_string(mode));
  }
}

}  // namespace

DenseTensor3::DenseTensor3(Dims3 dims) : dims_(dims) {
  check_dims(dims_);
  values_.assign(static_cast<std::size_t>(dims_.size()), 0.0);
}

DenseTensor3::DenseTensor3(Dims3 dims, std::vector<double> values)
    : dims_(dims), values_(std::move(values)) {
  check_dims(dims_);
  if (static_cast<Index>(values_.size()) != dims_.size()) {
    throw UsageError("tensor value count " + std::to_string(values_.size()) +
                     " does not match I*J*K = " + std::to_string(dims_.size()));
  }
}

Index DenseTensor3::dim(int mode) const {
  check_mode(mode);
  return mode == 1 ? dims_.I : mode == 2 ? dims_.J : dims_.K;
}

bool DenseTensor3::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

DenseTensor3& DenseTensor3::operator*=(double alpha) {
  for (double& v : values_) v *= alpha;
  return *this;
}

DenseTensor3& DenseTensor3::operator+=(const DenseTensor3& other) {
  if (!(dims_ == other.dims_)) throw UsageError("tensor dims mismatch in +=");
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += other.values_[n];
  return *this;
}

DenseTensor3& DenseTensor3::operator-=(const DenseTensor3& other) {
  if (!(dims_ == other.dims_)) throw UsageError("tensor dims mismatch in -=");
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] -= other.values_[n];
  return *this;
}

DenseTensor3 operator-(DenseTensor3 lhs, const DenseTensor3& rhs) { return lhs -= rhs; }
DenseTensor3 operator+(DenseTensor3 lhs, const DenseTensor3& rhs) { return lhs += rhs; }
DenseTensor3 operator*(double alpha, DenseTensor3 t) { return t *= alpha; }

Eigen::Map<const RowMajorMatrix> mode1_view(const DenseTensor3& t) {
  const auto& d = t.dims();
  return {t.data(), d.I, d.J * d.K};
}

Eigen::Map<const DenseMatrix> mode3_view(const DenseTensor3& t) {
  const auto& d = t.dims();
  return {t.data(), d.K, d.I * d.J};
}

DenseMatrix unfold(const DenseTensor3& t, int mode) {
  check_mode(mode);
  const auto [I, J, K] = t.dims();
  switch (mode) {
    case 1:
      return mode1_view(t);
    case 2: {
      DenseMatrix m(J, K * I);
      for (Index i = 0; i < I; ++i)
        for (Index j = 0; j < J; ++j)
          for (Index k = 0; k < K; ++k) m(j, k * I + i) = t(i, j, k);
      return m;
    }
    default:
      return mode3_view(t);
  }
}

DenseTensor3 fold(const DenseMatrix& m, int mode, Dims3 dims) {
  check_mode(mode);
  check_dims(dims);
  const auto [I, J, K] = dims;
  const Index rows = mode == 1 ? I : mode == 2 ? J : K;
  const Index cols = dims.size() / rows;
  if (m.rows() != rows || m.cols() != cols) {
    throw UsageError("fold: matrix is " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + ", mode-" + std::to_string(mode) +
                     " unfolding needs " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  DenseTensor3 t(dims);
  for (Index i = 0; i < I; ++i) {
    for (Index j = 0; j < J; ++j) {
      for (Index k = 0; k < K; ++k) {
        switch (mode) {
          case 1: t(i, j, k) = m(i, j * K + k); break;
          case 2: t(i, j, k) = m(j, k * I + i); break;
          default: t(i, j, k) = m(k, i * J + j); break;
        }
      }
    }
  }
  return t;
}

DenseMatrix kronecker(const DenseMatrix& m, const DenseMatrix& n) {
  DenseMatrix out(m.rows() * n.rows(), m.cols() * n.cols());
  for (Index p = 0; p < m.rows(); ++p)
    for (Index s = 0; s < m.cols(); ++s)
      out.block(p * n.rows(), s * n.cols(), n.rows(), n.cols()) = m(p, s) * n;
  return out;
}

DenseMatrix khatri_rao_partitioned(std::span<const DenseMatrix> m_blocks,
                                   std::span<const DenseMatrix> n_blocks) {
  if (m_blocks.size() != n_blocks.size()) {
    throw UsageError("khatri_rao_partitioned: " + std::to_string(m_blocks.size()) + " vs " +
                     std::to_string(n_blocks.size()) + " blocks");
  }
  if (m_blocks.empty()) return {};
  Index rows = m_blocks.front().rows() * n_blocks.front().rows();
  Index cols = 0;
  for (std::size_t r = 0; r < m_blocks.size(); ++r) {
    if (m_blocks[r].rows() * n_blocks[r].rows() != rows) {
      throw UsageError("khatri_rao_partitioned: inconsistent block row counts");
    }
    cols += m_blocks[r].cols() * n_blocks[r].cols();
  }
  DenseMatrix out(rows, cols);
  Index c0 = 0;
  for (std::size_t r = 0; r < m_blocks.size(); ++r) {
    const Index w = m_blocks[r].cols() * n_blocks[r].cols();
    out.middleCols(c0, w) = kronecker(m_blocks[r], n_blocks[r]);
    c0 += w;
  }
  return out;
}

DenseMatrix khatri_rao_columnwise(const DenseMatrix& m, const DenseMatrix& n) {
  if (m.cols() != n.cols()) {
    throw UsageError("khatri_rao_columnwise: column counts " + std::to_string(m.cols()) +
                     " and " + std::to_string(n.cols()) + " differ");
  }
  DenseMatrix out(m.rows() * n.rows(), m.cols());
  for (Index l = 0; l < m.cols(); ++l)
    for (Index p = 0; p < m.rows(); ++p)
      out.col(l).segment(p * n.rows(), n.rows()) = m(p, l) * n.col(l);
  return out;
}

double squared_norm(const DenseTensor3& t) {
  double s = 0.0;
  for (double v : t.values()) s += v * v;
  return s;
}

double frobenius_norm(const DenseTensor3& t) { return std::sqrt(squared_norm(t)); }

double frobenius_norm(const DenseMatrix& m) { return m.norm(); }

std::vector<DenseMatrix> column_blocks(const DenseMatrix& c) {
  std::vector<DenseMatrix> out;
  out.reserve(static_cast<std::size_t>(c.cols()));
  for (Index r = 0; r < c.cols(); ++r) out.emplace_back(c.col(r));
  return out;
}

}  // namespace btd
