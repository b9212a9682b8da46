#include "btd/error.hpp"
#include "btd/synth.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>

using namespace btd;

TEST_CASE("splitmix64 reference outputs") {
  // First outputs for seed 0 of the published SplitMix64 generator.
  Rng rng(0);
  CHECK(rng.next_u64() == 0xE220A8397B1DCDAFULL);
  CHECK(rng.next_u64() == 0x6E789E6AA1B965F4ULL);
  CHECK(rng.next_u64() == 0x06C45D188009454FULL);
}

TEST_CASE("uniform draws stay in range") {
  Rng rng(3);
  for (int n = 0; n < 10000; ++n) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const auto k = rng.uniform_int(-2, 3);
    CHECK(k >= -2);
    CHECK(k <= 3);
  }
  CHECK(rng.uniform_int(5, 5) == 5);
}

TEST_CASE("gen_btd is deterministic and consistent") {
  const auto a = gen_btd({6, 5, 4}, {2, 3}, 99);
  const auto b = gen_btd({6, 5, 4}, {2, 3}, 99);
  CHECK(a.factors.C == b.factors.C);
  CHECK(a.factors.A[1] == b.factors.A[1]);
  CHECK(btd::testing::max_abs_diff(a.tensor, b.tensor) == 0.0);
  CHECK(btd::testing::max_abs_diff(a.tensor, reconstruct(a.factors)) == 0.0);
  const auto c = gen_btd({6, 5, 4}, {2, 3}, 100);
  CHECK(a.factors.C != c.factors.C);
}

TEST_CASE("factor entries are standard normal") {
  const auto g = gen_btd({100, 100, 100}, {250, 250}, 5);
  double sum = 0.0, sq = 0.0;
  long n = 0;
  auto add = [&](const DenseMatrix& m) {
    sum += m.sum();
    sq += m.squaredNorm();
    n += static_cast<long>(m.size());
  };
  for (const auto& a : g.factors.A) add(a);
  for (const auto& b : g.factors.B) add(b);
  add(g.factors.C);
  REQUIRE(n >= 100000);
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) <= 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) <= 3.0 * std::sqrt(2.0 / n));
}

TEST_CASE("random ranks are uniform over the range") {
  CHECK(random_ranks(6, 3, 3, 1) == std::vector<Index>(6, 3));
  const auto r = random_ranks(10000, 2, 9, 17);
  std::map<Index, int> counts;
  for (Index l : r) {
    CHECK(l >= 2);
    CHECK(l <= 9);
    ++counts[l];
  }
  const double expected = 10000.0 / 8.0;
  double chi2 = 0.0;
  for (Index l = 2; l <= 9; ++l) chi2 += std::pow(counts[l] - expected, 2) / expected;
  // 7 degrees of freedom: the 0.999 quantile is 24.32.
  CHECK(chi2 < 24.32);
}

TEST_CASE("noise is calibrated to the realized SNR") {
  const auto g = gen_btd({8, 7, 6}, {2, 2}, 2);
  const double xn = frobenius_norm(g.tensor);

  const NoisyTensor z = add_noise_snr(g.tensor, 0.0, 3);
  CHECK(z.sigma * z.noise_norm == doctest::Approx(xn).epsilon(1e-15));

  for (double snr : {-5.0, 5.0, 10.0, 20.0}) {
    const NoisyTensor y = add_noise_snr(g.tensor, snr, 4);
    const double realized = 10.0 * std::log10(xn * xn / (y.sigma * y.sigma * y.noise_norm * y.noise_norm));
    CHECK(std::abs(realized - snr) <= 1e-12);
    const DenseTensor3 n = y.tensor - g.tensor;
    CHECK(frobenius_norm(n) == doctest::Approx(y.sigma * y.noise_norm).epsilon(1e-12));
  }

  const NoisyTensor inf = add_noise_snr(g.tensor, std::numeric_limits<double>::infinity(), 5);
  CHECK(inf.sigma == 0.0);
  CHECK(btd::testing::max_abs_diff(inf.tensor, g.tensor) == 0.0);

  CHECK_THROWS_AS(add_noise_snr(DenseTensor3(Dims3{2, 2, 2}), 10.0, 1), UsageError);
}

TEST_CASE("derived seeds differ across streams") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}
