#include "btd/synth.hpp"

#include "btd/error.hpp"

#include <cmath>
#include <numbers>

namespace btd {

std::uint64_t Rng::next_u64() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw UsageError("uniform_int: empty range");
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(next_u64());
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t v = 0;
  do {
    v = next_u64();
  } while (v >= limit);
  return lo + static_cast<std::int64_t>(v % span);
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  Rng r(seed ^ (0xD1B54A32D192ED03ull * (a + 1)) ^ (0x8CB92BA72F3D8DD7ull * (b + 1)));
  r.next_u64();
  return r.next_u64();
}

DenseMatrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

DenseTensor3 gaussian_tensor(Dims3 dims, Rng& rng) {
  DenseTensor3 t(dims);
  for (double& v : t.values()) v = rng.normal();
  return t;
}

BtdFactors random_factors(Dims3 dims, const std::vector<Index>& ranks, Rng& rng) {
  if (ranks.empty()) throw UsageError("at least one block is required");
  for (Index l : ranks) {
    if (l < 1) throw UsageError("block ranks must be positive");
  }
  BtdFactors f;
  for (Index l : ranks) f.A.push_back(gaussian_matrix(dims.I, l, rng));
  for (Index l : ranks) f.B.push_back(gaussian_matrix(dims.J, l, rng));
  f.C = gaussian_matrix(dims.K, static_cast<Index>(ranks.size()), rng);
  f.validate();
  return f;
}

SyntheticBtd gen_btd(Dims3 dims, const std::vector<Index>& ranks, std::uint64_t seed) {
  Rng rng(seed);
  SyntheticBtd out{random_factors(dims, ranks, rng), DenseTensor3{}};
  out.tensor = reconstruct(out.factors);
  return out;
}

std::vector<Index> random_ranks(Index blocks, Index lo, Index hi, std::uint64_t seed) {
  if (blocks < 1 || lo < 1 || hi < lo) throw UsageError("random_ranks: need blocks >= 1, 1 <= lo <= hi");
  Rng rng(seed);
  std::vector<Index> out;
  for (Index r = 0; r < blocks; ++r) out.push_back(static_cast<Index>(rng.uniform_int(lo, hi)));
  return out;
}

NoisyTensor add_noise_snr(const DenseTensor3& x, double snr_db, std::uint64_t seed) {
  const double xnorm = frobenius_norm(x);
  if (!(xnorm > 0.0)) throw UsageError("add_noise_snr: signal tensor is zero");
  if (std::isnan(snr_db)) throw UsageError("add_noise_snr: SNR is NaN");
  Rng rng(seed);
  DenseTensor3 noise = gaussian_tensor(x.dims(), rng);
  NoisyTensor out{x, 0.0, frobenius_norm(noise)};
  if (std::isinf(snr_db) && snr_db > 0) return out;
  out.sigma = xnorm / (out.noise_norm * std::pow(10.0, snr_db / 20.0));
  noise *= out.sigma;
  out.tensor += noise;
  return out;
}

}  // namespace btd
