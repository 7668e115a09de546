#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "vbs/matching.hpp"

namespace vbs {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Kronecker product a (x) b; the left factor owns the most significant index bits.
template <typename DerivedA, typename DerivedB>
MatrixX<typename DerivedA::Scalar> kron(const Eigen::MatrixBase<DerivedA>& a,
                                        const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  MatrixX<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

namespace pauli {

template <typename Scalar>
MatrixX<Scalar> id() {
  return MatrixX<Scalar>::Identity(2, 2);
}

template <typename Scalar>
MatrixX<Scalar> x() {
  MatrixX<Scalar> m(2, 2);
  m << Scalar(0), Scalar(1), Scalar(1), Scalar(0);
  return m;
}

template <typename Scalar>
MatrixX<Scalar> z() {
  MatrixX<Scalar> m(2, 2);
  m << Scalar(1), Scalar(0), Scalar(0), Scalar(-1);
  return m;
}

/// i * sigma^y, which is real: [[0, 1], [-1, 0]].
template <typename Scalar>
MatrixX<Scalar> iy() {
  MatrixX<Scalar> m(2, 2);
  m << Scalar(0), Scalar(1), Scalar(-1), Scalar(0);
  return m;
}

}  // namespace pauli

/// Bit of leg `leg` in basis index `state` for `legs` Kronecker factors
/// (leg 0 is the leftmost factor). 0 = spin up.
inline int leg_bit(std::uint32_t state, int leg, int legs) {
  return static_cast<int>((state >> (legs - 1 - leg)) & 1u);
}

/// Dense 2^legs matrix of prod_{(i,j) in mu} (sigma_i . sigma_j).
///
/// Uses sigma_i . sigma_j = 2 P_ij - 1 with P_ij the swap of legs i and j,
/// so the result is built without complex arithmetic.
template <typename Scalar>
MatrixX<Scalar> matching_operator(const PartialMatching& mu, int legs) {
  const std::uint32_t dim = 1u << legs;
  const std::size_t k = mu.size();
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(dim, dim);
  for (std::uint32_t s = 0; s < dim; ++s) {
    for (std::uint32_t subset = 0; subset < (1u << k); ++subset) {
      std::uint32_t t = s;
      int swaps = 0;
      for (std::size_t p = 0; p < k; ++p) {
        if (!((subset >> p) & 1u)) continue;
        ++swaps;
        const auto [i, j] = mu.pairs[p];
        const std::uint32_t bi = 1u << (legs - 1 - i);
        const std::uint32_t bj = 1u << (legs - 1 - j);
        if (((t & bi) != 0) != ((t & bj) != 0)) t ^= (bi | bj);
      }
      // coefficient 2^swaps * (-1)^(k - swaps)
      Scalar c = Scalar(1 << swaps);
      if ((k - swaps) % 2 == 1) c = -c;
      out(t, s) += c;
    }
  }
  return out;
}

/// Global spin flip prod_k sigma^x_k as a permutation matrix.
template <typename Scalar>
MatrixX<Scalar> global_flip(int legs) {
  const std::uint32_t dim = 1u << legs;
  MatrixX<Scalar> f = MatrixX<Scalar>::Zero(dim, dim);
  for (std::uint32_t s = 0; s < dim; ++s) f(s ^ (dim - 1), s) = Scalar(1);
  return f;
}

}  // namespace vbs
