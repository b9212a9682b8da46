#pragma once

// Structured normal equations for the three factor updates. These avoid
// materializing the Khatri-Rao products P = B (.) C and Q = C (.) A:
//
//   P^T P = (B^T B) * (C^T C expanded to blocks)      (Hadamard)
//   Y_(1) P [:, block r] = W_r B_r,   W_r = Y x_3 c_r  (I x J)
//   Q^T Q = (A^T A) * (C^T C expanded to blocks)
//   Y_(2) Q [:, block r] = W_r^T A_r

#include "btd/model.hpp"
#include "btd/tensor.hpp"

#include <vector>

namespace btd::detail {

struct NormalEquations {
  DenseMatrix gram;  // n x n
  DenseMatrix rhs;   // rows x n, i.e. Y_(m) times the Khatri-Rao product
};

/// (I*J) x R matrix whose column r is vec(Y x_3 c_r) in i*J + j order.
DenseMatrix mode3_contract(const DenseTensor3& y, const DenseMatrix& c);

NormalEquations normal_equations_a(const DenseTensor3& y, const DenseMatrix& contracted,
                                   const std::vector<DenseMatrix>& b, const DenseMatrix& c);
NormalEquations normal_equations_b(const DenseTensor3& y, const DenseMatrix& contracted,
                                   const std::vector<DenseMatrix>& a, const DenseMatrix& c);
/// Normal equations for C given S = build_s(A, B).
NormalEquations normal_equations_c(const DenseTensor3& y, const DenseMatrix& s);

/// |Y - X|_F^2 where X_(3) = C S^T.
double residual_squared(const DenseTensor3& y, const DenseMatrix& s, const DenseMatrix& c);

std::vector<Index> block_offsets(const std::vector<Index>& ranks);

}  // namespace btd::detail
