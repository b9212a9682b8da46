#include "btd/model.hpp"

#include "btd/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace btd {

std::vector<Index> BtdFactors::ranks() const {
  std::vector<Index> out;
  out.reserve(A.size());
  for (const auto& a : A) out.push_back(a.cols());
  return out;
}

Index BtdFactors::total_rank() const {
  Index n = 0;
  for (const auto& a : A) n += a.cols();
  return n;
}

void BtdFactors::validate() const {
  const auto R = A.size();
  if (R == 0) throw UsageError("factors must contain at least one block");
  if (B.size() != R || static_cast<std::size_t>(C.cols()) != R) {
    throw UsageError("block count mismatch: " + std::to_string(A.size()) + " A blocks, " +
                     std::to_string(B.size()) + " B blocks, " + std::to_string(C.cols()) +
                     " columns of C");
  }
  if (C.rows() <= 0) throw UsageError("C must have at least one row");
  for (std::size_t r = 0; r < R; ++r) {
    if (A[r].cols() < 1 || A[r].cols() != B[r].cols()) {
      throw UsageError("block " + std::to_string(r) + ": A_r and B_r must share L_r >= 1 columns");
    }
    if (A[r].rows() != A.front().rows() || B[r].rows() != B.front().rows() || A[r].rows() <= 0 ||
        B[r].rows() <= 0) {
      throw UsageError("block " + std::to_string(r) + ": inconsistent row count");
    }
  }
}

namespace {

DenseMatrix hcat(const std::vector<DenseMatrix>& blocks) {
  if (blocks.empty()) return {};
  Index cols = 0;
  for (const auto& b : blocks) cols += b.cols();
  DenseMatrix out(blocks.front().rows(), cols);
  Index c0 = 0;
  for (const auto& b : blocks) {
    out.middleCols(c0, b.cols()) = b;
    c0 += b.cols();
  }
  return out;
}

}  // namespace

DenseMatrix BtdFactors::stacked_a() const { return hcat(A); }
DenseMatrix BtdFactors::stacked_b() const { return hcat(B); }

BtdFactors zero_factors(Dims3 dims, Index blocks, Index rank) {
  BtdFactors f;
  for (Index r = 0; r < blocks; ++r) {
    f.A.push_back(DenseMatrix::Zero(dims.I, rank));
    f.B.push_back(DenseMatrix::Zero(dims.J, rank));
  }
  f.C = DenseMatrix::Zero(dims.K, blocks);
  return f;
}

std::vector<DenseMatrix> split_columns(const DenseMatrix& stacked, const std::vector<Index>& ranks) {
  std::vector<DenseMatrix> out;
  out.reserve(ranks.size());
  Index c0 = 0;
  for (Index l : ranks) {
    out.emplace_back(stacked.middleCols(c0, l));
    c0 += l;
  }
  if (c0 != stacked.cols()) throw UsageError("split_columns: ranks do not cover the matrix");
  return out;
}

std::vector<Index> RankEstimate::sorted_ranks() const {
  auto out = ranks;
  std::sort(out.begin(), out.end());
  return out;
}

DenseMatrix build_s(const std::vector<DenseMatrix>& a_blocks, const std::vector<DenseMatrix>& b_blocks) {
  if (a_blocks.size() != b_blocks.size()) throw UsageError("build_s: block count mismatch");
  if (a_blocks.empty()) return {};
  const Index I = a_blocks.front().rows();
  const Index J = b_blocks.front().rows();
  DenseMatrix s(I * J, static_cast<Index>(a_blocks.size()));
  for (std::size_t r = 0; r < a_blocks.size(); ++r) {
    if (a_blocks[r].cols() != b_blocks[r].cols()) throw UsageError("build_s: A_r/B_r width mismatch");
    // vec of the row-major I x J matrix A_r B_r^T equals the column-major
    // storage of B_r A_r^T.
    DenseMatrix e_t = b_blocks[r] * a_blocks[r].transpose();
    s.col(static_cast<Index>(r)) = Eigen::Map<const Vector>(e_t.data(), I * J);
  }
  return s;
}

DenseTensor3 reconstruct(const BtdFactors& f) {
  f.validate();
  const Dims3 dims = f.dims();
  // X_(3)^T = S C^T, and the (IJ) x K row-major layout of X_(3)^T is exactly
  // the tensor storage.
  const DenseMatrix x3 = f.C * build_s(f.A, f.B).transpose();  // K x IJ, column-major
  return DenseTensor3(dims, std::vector<double>(x3.data(), x3.data() + x3.size()));
}

DenseTensor3 block_tensor(const BtdFactors& f, Index r) {
  const Dims3 dims = f.dims();
  const DenseMatrix e = f.A[static_cast<std::size_t>(r)] * f.B[static_cast<std::size_t>(r)].transpose();
  DenseTensor3 t(dims);
  for (Index i = 0; i < dims.I; ++i)
    for (Index j = 0; j < dims.J; ++j)
      for (Index k = 0; k < dims.K; ++k) t(i, j, k) = e(i, j) * f.C(k, r);
  return t;
}

std::vector<Vector> column_norms(const BtdFactors& f, double eta) {
  std::vector<Vector> out;
  out.reserve(f.A.size());
  for (std::size_t r = 0; r < f.A.size(); ++r) {
    Vector v = (f.A[r].colwise().squaredNorm() + f.B[r].colwise().squaredNorm()).transpose();
    out.push_back((v.array() + eta * eta).sqrt().matrix());
  }
  return out;
}

DenseMatrix matrix_f(const BtdFactors& f) {
  f.validate();
  const auto norms = column_norms(f, 0.0);
  DenseMatrix m(2, f.num_blocks());
  for (Index r = 0; r < f.num_blocks(); ++r) {
    m(0, r) = norms[static_cast<std::size_t>(r)].sum();
    m(1, r) = f.C.col(r).norm();
  }
  return m;
}

double regularizer_value(const BtdFactors& f, double eta) {
  f.validate();
  const auto norms = column_norms(f, eta);
  double total = 0.0;
  for (Index r = 0; r < f.num_blocks(); ++r) {
    const double s = norms[static_cast<std::size_t>(r)].sum();
    total += std::sqrt(s * s + f.C.col(r).squaredNorm() + eta * eta);
  }
  return total;
}

namespace {

void check_tol(double tol, const char* name) {
  if (!(tol > 0.0 && tol < 1.0)) throw UsageError(std::string(name) + " must lie in (0, 1)");
}

// Indices whose energy passes tol * max (and is nonzero); the largest entry
// when nothing passes.
std::vector<Index> passing(const std::vector<double>& energy, double tol) {
  std::vector<Index> keep;
  if (energy.empty()) return keep;
  const double peak = *std::max_element(energy.begin(), energy.end());
  for (std::size_t n = 0; n < energy.size(); ++n) {
    if (energy[n] > 0.0 && energy[n] >= tol * peak) keep.push_back(static_cast<Index>(n));
  }
  if (keep.empty()) {
    keep.push_back(static_cast<Index>(std::max_element(energy.begin(), energy.end()) - energy.begin()));
  }
  return keep;
}

std::vector<double> c_norms(const BtdFactors& f) {
  std::vector<double> out;
  for (Index r = 0; r < f.C.cols(); ++r) out.push_back(f.C.col(r).norm());
  return out;
}

// Active columns of each listed block, thresholded against the largest
// column norm among those blocks.
std::vector<std::vector<Index>> active_columns(const std::vector<Vector>& norms,
                                               const std::vector<Index>& blocks, double tol) {
  double peak = 0.0;
  for (Index r : blocks) peak = std::max(peak, norms[static_cast<std::size_t>(r)].maxCoeff());
  std::vector<std::vector<Index>> out;
  for (Index r : blocks) {
    const Vector& v = norms[static_cast<std::size_t>(r)];
    std::vector<Index> cols;
    for (Index l = 0; l < v.size(); ++l) {
      if (v(l) > 0.0 && v(l) >= tol * peak) cols.push_back(l);
    }
    if (cols.empty()) {
      Index best = 0;
      v.maxCoeff(&best);
      cols.push_back(best);
    }
    out.push_back(std::move(cols));
  }
  return out;
}

BtdFactors select(const BtdFactors& f, const std::vector<Index>& blocks,
                  const std::vector<std::vector<Index>>* columns) {
  BtdFactors out;
  out.C.resize(f.C.rows(), static_cast<Index>(blocks.size()));
  for (std::size_t n = 0; n < blocks.size(); ++n) {
    const auto r = static_cast<std::size_t>(blocks[n]);
    out.C.col(static_cast<Index>(n)) = f.C.col(blocks[n]);
    if (columns == nullptr) {
      out.A.push_back(f.A[r]);
      out.B.push_back(f.B[r]);
      continue;
    }
    const auto& cols = (*columns)[n];
    DenseMatrix a(f.A[r].rows(), static_cast<Index>(cols.size()));
    DenseMatrix b(f.B[r].rows(), static_cast<Index>(cols.size()));
    for (std::size_t m = 0; m < cols.size(); ++m) {
      a.col(static_cast<Index>(m)) = f.A[r].col(cols[m]);
      b.col(static_cast<Index>(m)) = f.B[r].col(cols[m]);
    }
    out.A.push_back(std::move(a));
    out.B.push_back(std::move(b));
  }
  return out;
}

}  // namespace

RankEstimate count_effective_ranks(const BtdFactors& f, RankThresholds tol) {
  f.validate();
  check_tol(tol.block_tol, "block_tol");
  check_tol(tol.col_tol, "col_tol");
  RankEstimate est;
  est.c_energies = c_norms(f);
  const auto norms = column_norms(f, 0.0);
  for (const auto& v : norms) est.column_energies.emplace_back(v.data(), v.data() + v.size());

  est.active_blocks = passing(est.c_energies, tol.block_tol);
  const auto cols = active_columns(norms, est.active_blocks, tol.col_tol);
  for (const auto& c : cols) est.ranks.push_back(static_cast<Index>(c.size()));
  est.num_blocks = static_cast<Index>(est.active_blocks.size());
  return est;
}

BtdFactors prune_blocks(const BtdFactors& f, double block_tol) {
  f.validate();
  check_tol(block_tol, "block_tol");
  const auto keep = passing(c_norms(f), block_tol);
  if (static_cast<Index>(keep.size()) == f.num_blocks()) return f;
  return select(f, keep, nullptr);
}

BtdFactors prune_columns(const BtdFactors& f, double col_tol) {
  f.validate();
  check_tol(col_tol, "col_tol");
  std::vector<Index> all(static_cast<std::size_t>(f.num_blocks()));
  std::iota(all.begin(), all.end(), Index{0});
  const auto cols = active_columns(column_norms(f, 0.0), all, col_tol);
  bool unchanged = true;
  for (std::size_t r = 0; r < cols.size(); ++r) {
    unchanged = unchanged && static_cast<Index>(cols[r].size()) == f.A[r].cols();
  }
  if (unchanged) return f;
  return select(f, all, &cols);
}

}  // namespace btd
