#include "btd/error.hpp"
#include "btd/model.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>

using namespace btd;
using btd::testing::loop_reconstruct;
using btd::testing::make_factors;
using btd::testing::max_abs_diff;

namespace {

// Pads every block with zero columns up to `l` and appends zero blocks up to `r`.
BtdFactors zero_pad(const BtdFactors& f, Index r, Index l) {
  const Dims3 d = f.dims();
  BtdFactors out = zero_factors(d, r, l);
  for (Index b = 0; b < f.num_blocks(); ++b) {
    const auto s = static_cast<std::size_t>(b);
    out.A[s].leftCols(f.A[s].cols()) = f.A[s];
    out.B[s].leftCols(f.B[s].cols()) = f.B[s];
    out.C.col(b) = f.C.col(b);
  }
  return out;
}

}  // namespace

TEST_CASE("reconstruct: rank-1 example and zero C") {
  BtdFactors f;
  f.A = {DenseMatrix{{1.0}, {2.0}}};
  f.B = {DenseMatrix{{3.0}}};
  f.C = DenseMatrix{{4.0}, {5.0}};
  const DenseTensor3 x = reconstruct(f);
  CHECK(x(0, 0, 0) == 12.0);
  CHECK(x(1, 0, 1) == 30.0);

  BtdFactors g = make_factors({3, 4, 2}, {2, 1}, 3);
  g.C.setZero();
  CHECK(frobenius_norm(reconstruct(g)) == 0.0);
}

TEST_CASE("reconstruct matches the loop oracle and block tensors sum to it") {
  const BtdFactors f = make_factors({5, 4, 6}, {3, 1, 2}, 12);
  const DenseTensor3 x = reconstruct(f);
  CHECK(max_abs_diff(x, loop_reconstruct(f)) <= 1e-12);
  DenseTensor3 sum(f.dims());
  for (Index r = 0; r < f.num_blocks(); ++r) sum += block_tensor(f, r);
  CHECK(max_abs_diff(sum, x) <= 1e-12);
}

TEST_CASE("reconstruct is invariant to block order and per-block scaling") {
  const BtdFactors f = make_factors({4, 5, 3}, {2, 3, 1}, 31);
  const DenseTensor3 x = reconstruct(f);

  BtdFactors p;
  for (Index r : {2, 0, 1}) {
    p.A.push_back(f.A[static_cast<std::size_t>(r)]);
    p.B.push_back(f.B[static_cast<std::size_t>(r)]);
  }
  p.C.resize(f.C.rows(), 3);
  p.C << f.C.col(2), f.C.col(0), f.C.col(1);
  CHECK(max_abs_diff(reconstruct(p), x) <= 1e-12);

  BtdFactors s = f;
  const double alpha[] = {3.0, -0.25, 7.5};
  for (std::size_t r = 0; r < 3; ++r) {
    s.A[r] *= alpha[r];
    s.C.col(static_cast<Index>(r)) /= alpha[r];
  }
  CHECK(max_abs_diff(reconstruct(s), x) <= 1e-12);

  BtdFactors t = f;
  for (std::size_t r = 0; r < 3; ++r) {
    t.A[r] *= alpha[r];
    t.B[r] /= alpha[r];
  }
  CHECK(max_abs_diff(reconstruct(t), x) <= 1e-12);
}

TEST_CASE("build_s columns are vec(A_r B_r^T)") {
  BtdFactors f = make_factors({3, 2, 4}, {1, 2}, 2);
  const DenseMatrix s = build_s(f.A, f.B);
  CHECK(Vector(s.col(0)) == Vector(kronecker(f.A[0], f.B[0])));
  const DenseMatrix e = f.A[1] * f.B[1].transpose();
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 2; ++j) CHECK(s(i * 2 + j, 1) == doctest::Approx(e(i, j)).epsilon(1e-15));
  f.A[1].setZero();
  CHECK(build_s(f.A, f.B).col(1).norm() == 0.0);
}

TEST_CASE("matrix_F") {
  CHECK(matrix_f(zero_factors({3, 3, 3}, 2, 2)) == DenseMatrix::Zero(2, 2));
  BtdFactors f;
  f.A = {DenseMatrix{{3.0}, {0.0}}};
  f.B = {DenseMatrix{{0.0}, {4.0}}};
  f.C = DenseMatrix{{0.0}, {12.0}, {0.0}};
  const DenseMatrix m = matrix_f(f);
  CHECK(m(0, 0) == 5.0);
  CHECK(m(1, 0) == 12.0);
}

TEST_CASE("regularizer value identities") {
  CHECK(regularizer_value(zero_factors({2, 3, 4}, 3, 2), 0.0) == 0.0);
  const double eta = 1e-3;
  CHECK(regularizer_value(zero_factors({2, 3, 4}, 3, 2), eta) ==
        doctest::Approx(3.0 * std::sqrt(4.0 * eta * eta + eta * eta)).epsilon(1e-14));

  // With eta = 0 the penalty is the l1,2 norm (sum of column norms) of F.
  const BtdFactors f = make_factors({4, 5, 3}, {2, 3, 1}, 44);
  const DenseMatrix m = matrix_f(f);
  double l12 = 0.0;
  for (Index r = 0; r < m.cols(); ++r) l12 += m.col(r).norm();
  CHECK(regularizer_value(f, 0.0) == doctest::Approx(l12).epsilon(1e-14));

  double prev = regularizer_value(f, 0.0);
  for (double e : {1e-6, 1e-3, 1e-1, 1.0, 10.0}) {
    const double v = regularizer_value(f, e);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("rank counting ignores exact zero padding for any tolerance") {
  const BtdFactors f = make_factors({8, 7, 6}, {2, 3, 4}, 5);
  const BtdFactors padded = zero_pad(f, 10, 10);
  for (double tol : {1e-9, 1e-4, 1e-2}) {
    const RankEstimate est = count_effective_ranks(padded, {tol, tol});
    CHECK(est.num_blocks == 3);
    CHECK(est.ranks == std::vector<Index>{2, 3, 4});
    CHECK(est.active_blocks == std::vector<Index>{0, 1, 2});
    CHECK(est.column_energies.size() == 10);
    CHECK(est.c_energies.size() == 10);
  }
}

TEST_CASE("rank counting: single rank-1 block and degenerate input") {
  const BtdFactors one = make_factors({3, 3, 3}, {1}, 9);
  const RankEstimate e1 = count_effective_ranks(one);
  CHECK(e1.num_blocks == 1);
  CHECK(e1.ranks == std::vector<Index>{1});

  const RankEstimate ez = count_effective_ranks(zero_factors({3, 3, 3}, 4, 3));
  CHECK(ez.num_blocks == 1);
  CHECK(ez.ranks.size() == 1);
  CHECK(ez.ranks[0] >= 1);

  CHECK_THROWS_AS(count_effective_ranks(one, {0.0, 0.5}), UsageError);
  CHECK_THROWS_AS(count_effective_ranks(one, {0.5, 1.0}), UsageError);
}

TEST_CASE("rank counting thresholds are relative to the peak energy") {
  BtdFactors f = make_factors({6, 6, 5}, {3, 3}, 17);
  f.C.col(1) *= 1e-3 / f.C.col(1).norm() * f.C.col(0).norm();
  f.A[0].col(2) *= 1e-4;
  f.B[0].col(2) *= 1e-4;
  const RankEstimate est = count_effective_ranks(f, {1e-2, 1e-2});
  CHECK(est.num_blocks == 1);
  CHECK(est.ranks == std::vector<Index>{2});
  const RankEstimate loose = count_effective_ranks(f, {1e-4, 1e-6});
  CHECK(loose.num_blocks == 2);
  CHECK(loose.ranks == std::vector<Index>{3, 3});
}

TEST_CASE("pruning removes padding and leaves survivors untouched") {
  const BtdFactors f = make_factors({6, 5, 4}, {2, 3}, 23);
  const BtdFactors padded = zero_pad(f, 5, 4);

  const BtdFactors pb = prune_blocks(padded, 1e-2);
  CHECK(pb.num_blocks() == 2);
  CHECK(pb.ranks() == std::vector<Index>{4, 4});

  const BtdFactors pc = prune_columns(pb, 1e-2);
  CHECK(pc.ranks() == std::vector<Index>{2, 3});
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(pc.A[r] == f.A[r]);
    CHECK(pc.B[r] == f.B[r]);
  }
  CHECK(pc.C == f.C);

  const BtdFactors same = prune_blocks(f, 1e-2);
  CHECK(same.ranks() == f.ranks());
  CHECK(same.C == f.C);
  CHECK(prune_columns(f, 1e-2).ranks() == f.ranks());
}

TEST_CASE("pruning never grows ranks and every block keeps a column") {
  const BtdFactors zero = zero_factors({3, 3, 3}, 3, 2);
  const BtdFactors pb = prune_blocks(zero, 0.5);
  CHECK(pb.num_blocks() == 1);
  const BtdFactors pc = prune_columns(zero, 0.5);
  CHECK(pc.num_blocks() == 3);
  for (Index l : pc.ranks()) CHECK(l == 1);
}

TEST_CASE("block pruning changes the reconstruction by at most the pruned block norms") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    BtdFactors f = make_factors({5, 6, 4}, {2, 2, 3, 1}, 300 + seed);
    f.C.col(1) *= 1e-3;
    f.C.col(3) *= 5e-3;
    const double tol = 1e-2;
    const BtdFactors p = prune_blocks(f, tol);
    double bound = 0.0;
    const double peak = std::max({f.C.col(0).norm(), f.C.col(1).norm(), f.C.col(2).norm(),
                                  f.C.col(3).norm()});
    for (Index r = 0; r < 4; ++r) {
      if (f.C.col(r).norm() < tol * peak) {
        bound += (f.A[static_cast<std::size_t>(r)] * f.B[static_cast<std::size_t>(r)].transpose()).norm() *
                 f.C.col(r).norm();
      }
    }
    const double change = frobenius_norm(reconstruct(f) - reconstruct(p));
    CHECK(p.num_blocks() <= f.num_blocks());
    CHECK(change <= bound * (1.0 + 1e-12));
  }
}

TEST_CASE("factor validation") {
  BtdFactors f = make_factors({3, 3, 3}, {2, 1}, 1);
  CHECK_NOTHROW(f.validate());
  BtdFactors g = f;
  g.B[1] = DenseMatrix::Zero(3, 2);
  CHECK_THROWS_AS(g.validate(), UsageError);
  BtdFactors h = f;
  h.C = DenseMatrix::Zero(3, 3);
  CHECK_THROWS_AS(h.validate(), UsageError);
  BtdFactors e;
  CHECK_THROWS_AS(e.validate(), UsageError);
  CHECK(split_columns(f.stacked_a(), f.ranks())[1] == f.A[1]);
}
