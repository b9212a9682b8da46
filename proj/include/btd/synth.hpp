#pragma once

#include "btd/model.hpp"
#include "btd/tensor.hpp"

#include <cstdint>
#include <vector>

namespace btd {

/**
 * SplitMix64 generator. State advances by 0x9E3779B97F4A7C15 per draw and
 * the output is mixed with the (30, 27, 31) shift / 0xBF58476D1CE4E5B9,
 * 0x94D049BB133111EB multiply finalizer.
 *
 * Uniforms take the top 53 bits; normals use the Box-Muller transform and
 * cache the second variate. This makes every fixture reproducible from its
 * seed independently of the standard library.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform integer on [lo, hi] by rejection (no modulo bias).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double normal();

 private:
  std::uint64_t state_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

/// Derives an independent stream seed from (seed, a, b).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

DenseMatrix gaussian_matrix(Index rows, Index cols, Rng& rng);
DenseTensor3 gaussian_tensor(Dims3 dims, Rng& rng);

/// Factors with i.i.d. N(0,1) entries, drawn as A_1..A_R, B_1..B_R (row-major), then C (row-major).
BtdFactors random_factors(Dims3 dims, const std::vector<Index>& ranks, Rng& rng);

struct SyntheticBtd {
  BtdFactors factors;
  DenseTensor3 tensor;
};

SyntheticBtd gen_btd(Dims3 dims, const std::vector<Index>& ranks, std::uint64_t seed);

std::vector<Index> random_ranks(Index blocks, Index lo, Index hi, std::uint64_t seed);

struct NoisyTensor {
  DenseTensor3 tensor;   // X + sigma N
  double sigma = 0.0;
  double noise_norm = 0.0;  // |N|_F of the realized unit-variance draw
};

/**
 * Adds sigma * N with N i.i.d. N(0,1), sigma = |X|_F / (|N|_F 10^(snr_db/20)),
 * so the realized SNR is exactly snr_db. snr_db = +inf returns X unchanged.
 */
NoisyTensor add_noise_snr(const DenseTensor3& x, double snr_db, std::uint64_t seed);

}  // namespace btd
