#include "btd/metrics.hpp"

#include "btd/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace btd {

namespace {

// Shortest augmenting path Hungarian method with potentials; requires rows <= cols.
std::vector<Index> hungarian_rows_le_cols(const DenseMatrix& a) {
  const Index n = a.rows();
  const Index m = a.cols();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(m + 1), 0.0);
  std::vector<Index> p(static_cast<std::size_t>(m + 1), 0), way(static_cast<std::size_t>(m + 1), 0);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(m + 1), inf);
    std::vector<char> used(static_cast<std::size_t>(m + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Index i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= m; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        if (used[uj]) continue;
        const double cur = a(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[uj];
        if (cur < minv[uj]) {
          minv[uj] = cur;
          way[uj] = j0;
        }
        if (minv[uj] < delta) {
          delta = minv[uj];
          j1 = j;
        }
      }
      for (Index j = 0; j <= m; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        if (used[uj]) {
          u[static_cast<std::size_t>(p[uj])] += delta;
          v[uj] -= delta;
        } else {
          minv[uj] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Index> row_to_col(static_cast<std::size_t>(n), -1);
  for (Index j = 1; j <= m; ++j) {
    if (p[static_cast<std::size_t>(j)] != 0) row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  }
  return row_to_col;
}

}  // namespace

AssignmentResult linear_assignment(const DenseMatrix& cost) {
  if (!cost.allFinite()) throw UsageError("linear_assignment: costs must be finite");
  AssignmentResult res;
  res.costs = cost;
  res.row_to_col.assign(static_cast<std::size_t>(cost.rows()), -1);
  res.col_to_row.assign(static_cast<std::size_t>(cost.cols()), -1);
  if (cost.size() == 0) return res;
  if (cost.rows() <= cost.cols()) {
    res.row_to_col = hungarian_rows_le_cols(cost);
    for (Index r = 0; r < cost.rows(); ++r) {
      res.col_to_row[static_cast<std::size_t>(res.row_to_col[static_cast<std::size_t>(r)])] = r;
    }
  } else {
    res.col_to_row = hungarian_rows_le_cols(cost.transpose());
    for (Index c = 0; c < cost.cols(); ++c) {
      res.row_to_col[static_cast<std::size_t>(res.col_to_row[static_cast<std::size_t>(c)])] = c;
    }
  }
  for (Index r = 0; r < cost.rows(); ++r) {
    const Index c = res.row_to_col[static_cast<std::size_t>(r)];
    if (c >= 0) res.total_cost += cost(r, c);
  }
  return res;
}

BlockNmse nmse_blocks(const BtdFactors& truth, const BtdFactors& estimate) {
  truth.validate();
  estimate.validate();
  if (!(truth.dims() == estimate.dims())) throw UsageError("nmse_blocks: dimension mismatch");
  const Index rt = truth.num_blocks();
  const Index re = estimate.num_blocks();

  std::vector<DenseTensor3> true_blocks, est_blocks;
  std::vector<double> true_norm2;
  for (Index r = 0; r < rt; ++r) {
    true_blocks.push_back(block_tensor(truth, r));
    true_norm2.push_back(squared_norm(true_blocks.back()));
    if (!(true_norm2.back() > 0.0)) {
      throw UsageError("nmse_blocks: true block " + std::to_string(r) + " is zero");
    }
  }
  for (Index s = 0; s < re; ++s) est_blocks.push_back(block_tensor(estimate, s));

  // Dummy columns stand for "no estimate", i.e. a zero block with cost 1.
  const Index cols = std::max(re, rt);
  DenseMatrix cost = DenseMatrix::Ones(rt, cols);
  for (Index r = 0; r < rt; ++r) {
    const auto tv = true_blocks[static_cast<std::size_t>(r)].values();
    for (Index s = 0; s < re; ++s) {
      const auto ev = est_blocks[static_cast<std::size_t>(s)].values();
      double d = 0.0;
      for (std::size_t n = 0; n < tv.size(); ++n) {
        const double e = tv[n] - ev[n];
        d += e * e;
      }
      cost(r, s) = d / true_norm2[static_cast<std::size_t>(r)];
    }
  }
  auto full = linear_assignment(cost);

  BlockNmse out;
  out.per_block.resize(static_cast<std::size_t>(rt));
  double total = 0.0;
  for (Index r = 0; r < rt; ++r) {
    const Index c = full.row_to_col[static_cast<std::size_t>(r)];
    out.per_block[static_cast<std::size_t>(r)] = cost(r, c);
    total += cost(r, c);
    if (c >= re) full.row_to_col[static_cast<std::size_t>(r)] = -1;
  }
  out.nmse = total / static_cast<double>(rt);
  full.col_to_row.resize(static_cast<std::size_t>(re));
  full.costs = cost.leftCols(re);
  out.assignment = std::move(full);
  return out;
}

double reconstruction_error(const DenseTensor3& y, const BtdFactors& f) {
  const double ynorm = frobenius_norm(y);
  if (!(ynorm > 0.0)) throw UsageError("reconstruction_error: reference tensor is zero");
  return frobenius_norm(y - reconstruct(f)) / ynorm;
}

namespace {

// Summed-area table with a zero border: s(i+1, j+1) = sum of m(0..i, 0..j).
DenseMatrix integral(const DenseMatrix& m) {
  DenseMatrix s = DenseMatrix::Zero(m.rows() + 1, m.cols() + 1);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) s(i + 1, j + 1) = m(i, j) + s(i, j + 1) + s(i + 1, j) - s(i, j);
  return s;
}

double window_sum(const DenseMatrix& s, Index i, Index j, Index w) {
  return s(i + w, j + w) - s(i, j + w) - s(i + w, j) + s(i, j);
}

}  // namespace

double ssim(const DenseMatrix& a, const DenseMatrix& b, int window, double dynamic_range) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw UsageError("ssim: image shapes differ");
  if (window < 3 || window % 2 == 0) throw UsageError("ssim: window must be odd and >= 3");
  if (!(dynamic_range > 0.0)) throw UsageError("ssim: dynamic range must be positive");
  Index w = std::min<Index>(window, std::min(a.rows(), a.cols()));
  if (w % 2 == 0) --w;
  if (w < 1) throw UsageError("ssim: empty image");

  const double c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
  const double c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);
  const DenseMatrix sa = integral(a), sb = integral(b);
  const DenseMatrix saa = integral(a.cwiseProduct(a)), sbb = integral(b.cwiseProduct(b));
  const DenseMatrix sab = integral(a.cwiseProduct(b));
  const double npix = static_cast<double>(w * w);

  double total = 0.0;
  Index count = 0;
  for (Index i = 0; i + w <= a.rows(); ++i) {
    for (Index j = 0; j + w <= a.cols(); ++j) {
      const double mu_a = window_sum(sa, i, j, w) / npix;
      const double mu_b = window_sum(sb, i, j, w) / npix;
      const double var_a = window_sum(saa, i, j, w) / npix - mu_a * mu_a;
      const double var_b = window_sum(sbb, i, j, w) / npix - mu_b * mu_b;
      const double cov = window_sum(sab, i, j, w) / npix - mu_a * mu_b;
      total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

DenseMatrix band(const DenseTensor3& t, Index k) {
  const auto& d = t.dims();
  if (k < 0 || k >= d.K) throw UsageError("band index out of range");
  DenseMatrix m(d.I, d.J);
  for (Index i = 0; i < d.I; ++i)
    for (Index j = 0; j < d.J; ++j) m(i, j) = t(i, j, k);
  return m;
}

std::vector<double> band_ssim_curve(const DenseTensor3& a, const DenseTensor3& b, int window,
                                    double dynamic_range) {
  if (!(a.dims() == b.dims())) throw UsageError("band_ssim_curve: cube shapes differ");
  std::vector<double> out;
  for (Index k = 0; k < a.dims().K; ++k) out.push_back(ssim(band(a, k), band(b, k), window, dynamic_range));
  return out;
}

double value_range(const DenseTensor3& t) {
  const auto v = t.values();
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

}  // namespace btd
