#include "normal_equations.hpp"

namespace btd::detail {

std::vector<Index> block_offsets(const std::vector<Index>& ranks) {
  std::vector<Index> off(ranks.size() + 1, 0);
  for (std::size_t r = 0; r < ranks.size(); ++r) off[r + 1] = off[r] + ranks[r];
  return off;
}

DenseMatrix mode3_contract(const DenseTensor3& y, const DenseMatrix& c) {
  return mode3_view(y).transpose() * c;
}

namespace {

DenseMatrix block_hadamard_gram(const std::vector<DenseMatrix>& f, const DenseMatrix& c) {
  std::vector<Index> ranks;
  for (const auto& m : f) ranks.push_back(m.cols());
  const auto off = block_offsets(ranks);
  const Index n = off.back();
  DenseMatrix stacked(f.front().rows(), n);
  for (std::size_t r = 0; r < f.size(); ++r) stacked.middleCols(off[r], ranks[r]) = f[r];
  DenseMatrix gram(n, n);
  gram.noalias() = stacked.transpose() * stacked;
  const DenseMatrix cc = c.transpose() * c;
  for (std::size_t r = 0; r < f.size(); ++r)
    for (std::size_t s = 0; s < f.size(); ++s)
      gram.block(off[r], off[s], ranks[r], ranks[s]) *= cc(static_cast<Index>(r), static_cast<Index>(s));
  return gram;
}

}  // namespace

NormalEquations normal_equations_a(const DenseTensor3& y, const DenseMatrix& contracted,
                                   const std::vector<DenseMatrix>& b, const DenseMatrix& c) {
  const auto& d = y.dims();
  NormalEquations ne{block_hadamard_gram(b, c), DenseMatrix(d.I, 0)};
  Index n = 0;
  for (const auto& m : b) n += m.cols();
  ne.rhs.resize(d.I, n);
  Index c0 = 0;
  for (std::size_t r = 0; r < b.size(); ++r) {
    Eigen::Map<const RowMajorMatrix> w(contracted.col(static_cast<Index>(r)).data(), d.I, d.J);
    ne.rhs.middleCols(c0, b[r].cols()).noalias() = w * b[r];
    c0 += b[r].cols();
  }
  return ne;
}

NormalEquations normal_equations_b(const DenseTensor3& y, const DenseMatrix& contracted,
                                   const std::vector<DenseMatrix>& a, const DenseMatrix& c) {
  const auto& d = y.dims();
  NormalEquations ne{block_hadamard_gram(a, c), DenseMatrix(d.J, 0)};
  Index n = 0;
  for (const auto& m : a) n += m.cols();
  ne.rhs.resize(d.J, n);
  Index c0 = 0;
  for (std::size_t r = 0; r < a.size(); ++r) {
    Eigen::Map<const RowMajorMatrix> w(contracted.col(static_cast<Index>(r)).data(), d.I, d.J);
    ne.rhs.middleCols(c0, a[r].cols()).noalias() = w.transpose() * a[r];
    c0 += a[r].cols();
  }
  return ne;
}

NormalEquations normal_equations_c(const DenseTensor3& y, const DenseMatrix& s) {
  NormalEquations ne;
  ne.gram.noalias() = s.transpose() * s;
  ne.rhs.noalias() = mode3_view(y) * s;
  return ne;
}

double residual_squared(const DenseTensor3& y, const DenseMatrix& s, const DenseMatrix& c) {
  DenseMatrix x3(c.rows(), s.rows());
  x3.noalias() = c * s.transpose();
  return (mode3_view(y) - x3).squaredNorm();
}

}  // namespace btd::detail
