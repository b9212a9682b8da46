#pragma once

#include "btd/model.hpp"
#include "btd/synth.hpp"
#include "btd/tensor.hpp"

#include <vector>

namespace btd::testing {

// X[i,j,k] = sum_r sum_l A_r[i,l] B_r[j,l] C[k,r], straight from the definition.
inline DenseTensor3 loop_reconstruct(const BtdFactors& f) {
  DenseTensor3 x(f.dims());
  for (Index r = 0; r < f.num_blocks(); ++r) {
    const auto& a = f.A[static_cast<std::size_t>(r)];
    const auto& b = f.B[static_cast<std::size_t>(r)];
    for (Index i = 0; i < a.rows(); ++i)
      for (Index j = 0; j < b.rows(); ++j)
        for (Index k = 0; k < f.C.rows(); ++k)
          for (Index l = 0; l < a.cols(); ++l) x(i, j, k) += a(i, l) * b(j, l) * f.C(k, r);
  }
  return x;
}

inline double max_abs_diff(const DenseTensor3& a, const DenseTensor3& b) {
  double m = 0.0;
  for (Index n = 0; n < a.size(); ++n) m = std::max(m, std::abs(a.data()[n] - b.data()[n]));
  return m;
}

inline BtdFactors make_factors(Dims3 d, const std::vector<Index>& ranks, std::uint64_t seed) {
  Rng rng(seed);
  return random_factors(d, ranks, rng);
}

}  // namespace btd::testing
