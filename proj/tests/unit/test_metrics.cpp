#include "btd/error.hpp"
#include "btd/metrics.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <limits>
#include <numeric>

using namespace btd;
using btd::testing::make_factors;

namespace {

// Minimum over all injections of the smaller side into the larger one.
double brute_force_min(const DenseMatrix& cost) {
  const bool tall = cost.rows() > cost.cols();
  const DenseMatrix c = tall ? DenseMatrix(cost.transpose()) : cost;
  std::vector<Index> cols(static_cast<std::size_t>(c.cols()));
  std::iota(cols.begin(), cols.end(), Index{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (Index r = 0; r < c.rows(); ++r) total += c(r, cols[static_cast<std::size_t>(r)]);
    best = std::min(best, total);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

double oracle_ssim(const DenseMatrix& a, const DenseMatrix& b, Index w, double range) {
  const double c1 = std::pow(0.01 * range, 2), c2 = std::pow(0.03 * range, 2);
  double total = 0.0;
  int count = 0;
  for (Index i = 0; i + w <= a.rows(); ++i)
    for (Index j = 0; j + w <= a.cols(); ++j) {
      const DenseMatrix pa = a.block(i, j, w, w), pb = b.block(i, j, w, w);
      const double ma = pa.mean(), mb = pb.mean();
      const double va = (pa.array() - ma).square().mean();
      const double vb = (pb.array() - mb).square().mean();
      const double cov = ((pa.array() - ma) * (pb.array() - mb)).mean();
      total += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return total / count;
}

BtdFactors permuted_scaled(const BtdFactors& f) {
  BtdFactors g;
  const Index r = f.num_blocks();
  g.C.resize(f.C.rows(), r);
  for (Index n = 0; n < r; ++n) {
    const Index src = r - 1 - n;
    const double alpha = n % 2 == 0 ? 4.0 : -0.5;
    g.A.push_back(alpha * f.A[static_cast<std::size_t>(src)]);
    g.B.push_back(f.B[static_cast<std::size_t>(src)] / alpha);
    g.C.col(n) = f.C.col(src);
  }
  return g;
}

}  // namespace

TEST_CASE("assignment: diagonal preference and the 3x3 example") {
  DenseMatrix d = DenseMatrix::Constant(4, 4, 5.0);
  d.diagonal().setZero();
  const AssignmentResult r = linear_assignment(d);
  for (Index n = 0; n < 4; ++n) CHECK(r.row_to_col[static_cast<std::size_t>(n)] == n);
  CHECK(r.total_cost == 0.0);

  const DenseMatrix c{{1, 2, 3}, {2, 4, 6}, {3, 6, 9}};
  const AssignmentResult a = linear_assignment(c);
  CHECK(a.total_cost == brute_force_min(c));
  CHECK(a.total_cost == 10.0);
}

TEST_CASE("assignment matches brute force on random rectangular costs") {
  Rng rng(123);
  for (int n = 0; n < 200; ++n) {
    const Index rows = rng.uniform_int(1, 5), cols = rng.uniform_int(1, 5);
    DenseMatrix c(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) c(i, j) = static_cast<double>(rng.uniform_int(0, 20));
    const AssignmentResult a = linear_assignment(c);
    CHECK(a.total_cost == brute_force_min(c));
    std::vector<int> used(static_cast<std::size_t>(cols), 0);
    Index pairs = 0;
    double sum = 0.0;
    for (Index i = 0; i < rows; ++i) {
      const Index j = a.row_to_col[static_cast<std::size_t>(i)];
      if (j < 0) continue;
      ++pairs;
      sum += c(i, j);
      CHECK(++used[static_cast<std::size_t>(j)] == 1);
      CHECK(a.col_to_row[static_cast<std::size_t>(j)] == i);
    }
    CHECK(pairs == std::min(rows, cols));
    CHECK(sum == a.total_cost);
  }
}

TEST_CASE("assignment rejects non-finite costs") {
  DenseMatrix c = DenseMatrix::Ones(2, 2);
  c(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(linear_assignment(c), UsageError);
}

TEST_CASE("block NMSE examples") {
  const BtdFactors t = make_factors({5, 4, 6}, {2, 3, 1}, 3);
  CHECK(nmse_blocks(t, t).nmse == 0.0);
  CHECK(nmse_blocks(t, permuted_scaled(t)).nmse == 0.0);
  CHECK(nmse_blocks(t, zero_factors(t.dims(), 3, 2)).nmse == doctest::Approx(1.0).epsilon(1e-15));

  // Two exact blocks plus a spurious one: the spurious block is left unmatched.
  BtdFactors two;
  two.A = {t.A[0], t.A[1]};
  two.B = {t.B[0], t.B[1]};
  two.C = t.C.leftCols(2);
  const BlockNmse r = nmse_blocks(two, t);
  CHECK(r.nmse == 0.0);
  CHECK(r.assignment.row_to_col == std::vector<Index>{0, 1});

  // Fewer estimated than true blocks: the missing block counts as a full miss.
  const BlockNmse under = nmse_blocks(t, two);
  CHECK(under.nmse == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(under.assignment.row_to_col[2] == -1);
  CHECK(under.per_block.size() == 3);
}

TEST_CASE("block NMSE errors") {
  const BtdFactors t = make_factors({3, 3, 3}, {1, 1}, 1);
  BtdFactors z = t;
  z.C.col(1).setZero();
  CHECK_THROWS_AS(nmse_blocks(z, t), UsageError);
  CHECK_THROWS_AS(nmse_blocks(t, make_factors({3, 3, 4}, {1}, 2)), UsageError);
}

TEST_CASE("reconstruction error") {
  const auto g = gen_btd({4, 5, 3}, {2}, 6);
  CHECK(reconstruction_error(g.tensor, g.factors) == 0.0);
  CHECK(reconstruction_error(g.tensor, zero_factors(g.tensor.dims(), 1, 1)) == 1.0);
  const BtdFactors other = make_factors({4, 5, 3}, {1}, 7);
  const DenseTensor3 diff = g.tensor - btd::testing::loop_reconstruct(other);
  CHECK(reconstruction_error(g.tensor, other) ==
        doctest::Approx(frobenius_norm(diff) / frobenius_norm(g.tensor)).epsilon(1e-12));
  CHECK_THROWS_AS(reconstruction_error(DenseTensor3(Dims3{4, 5, 3}), other), UsageError);
}

TEST_CASE("SSIM matches a direct sliding-window evaluation") {
  Rng rng(42);
  DenseMatrix a(8, 8), b(8, 8);
  for (Index i = 0; i < 8; ++i)
    for (Index j = 0; j < 8; ++j) {
      a(i, j) = rng.uniform();
      b(i, j) = 0.7 * a(i, j) + 0.3 * rng.uniform();
    }
  for (int w : {3, 5, 7}) CHECK(ssim(a, b, w, 1.0) == doctest::Approx(oracle_ssim(a, b, w, 1.0)).epsilon(1e-12));
  // A window larger than the image shrinks to the largest odd size that fits.
  CHECK(ssim(a, b, 11, 1.0) == doctest::Approx(oracle_ssim(a, b, 7, 1.0)).epsilon(1e-12));
  CHECK(ssim(a, b, 7, 2.0) == doctest::Approx(oracle_ssim(a, b, 7, 2.0)).epsilon(1e-12));
}

TEST_CASE("SSIM identities") {
  Rng rng(7);
  DenseMatrix a(12, 10), b(12, 10);
  for (Index i = 0; i < 12; ++i)
    for (Index j = 0; j < 10; ++j) {
      a(i, j) = rng.normal();
      b(i, j) = rng.normal();
    }
  CHECK(ssim(a, a) == 1.0);
  CHECK(ssim(a, b) == ssim(b, a));

  // Every 3x3 window of this pattern has zero mean.
  const double g[] = {1.0, -2.0, 1.0};
  DenseMatrix pattern(9, 9);
  for (Index i = 0; i < 9; ++i)
    for (Index j = 0; j < 9; ++j) pattern(i, j) = g[i % 3] * g[j % 3];
  CHECK(ssim(pattern, -pattern, 3, 8.0) <= 0.0);

  CHECK_THROWS_AS(ssim(a, DenseMatrix::Zero(3, 3)), UsageError);
  CHECK_THROWS_AS(ssim(a, b, 4), UsageError);
  CHECK_THROWS_AS(ssim(a, b, 1), UsageError);
  CHECK_THROWS_AS(ssim(a, b, 7, 0.0), UsageError);
}

TEST_CASE("band SSIM curves") {
  const auto g = gen_btd({16, 14, 5}, {2, 2}, 9);
  const double range = value_range(g.tensor);
  const auto same = band_ssim_curve(g.tensor, g.tensor, 7, range);
  REQUIRE(same.size() == 5);
  for (double v : same) CHECK(v == 1.0);

  const auto mild = add_noise_snr(g.tensor, 20.0, 1).tensor;
  const auto heavy = add_noise_snr(g.tensor, 5.0, 1).tensor;
  const auto s_mild = band_ssim_curve(g.tensor, mild, 7, range);
  const auto s_heavy = band_ssim_curve(g.tensor, heavy, 7, range);
  for (std::size_t k = 0; k < 5; ++k) CHECK(s_heavy[k] < s_mild[k]);

  CHECK(band(g.tensor, 2)(3, 4) == g.tensor(3, 4, 2));
  CHECK_THROWS_AS(band(g.tensor, 5), UsageError);
}
