#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vbs/errors.hpp"
#include "vbs/pauli.hpp"

namespace vbs {

template <typename Scalar>
struct SymmetricEigen {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;  // descending
  MatrixX<Scalar> vectors;                          // columns match values
  int sweeps = 0;
  Scalar off_norm = 0;
};

/// Cyclic Jacobi eigensolver for dense real symmetric matrices.
///
/// Sweeps over all (p, q) pairs until the off-diagonal Frobenius norm drops
/// below 1e-13 ||A||_F, at most 64 sweeps. Rejects inputs whose asymmetry
/// exceeds 1e-12 max|A_ij|.
template <typename Derived>
SymmetricEigen<typename Derived::Scalar> eig_symmetric(const Eigen::MatrixBase<Derived>& input,
                                                       bool compute_vectors = true) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  using std::sqrt;
  constexpr int kMaxSweeps = 64;

  if (input.rows() != input.cols()) throw UsageError("eig_symmetric: matrix is not square");
  const Eigen::Index n = input.rows();
  MatrixX<Scalar> a = input;

  const Scalar max_abs = n > 0 ? a.cwiseAbs().maxCoeff() : Scalar(0);
  const Scalar asym = n > 0 ? (a - a.transpose()).cwiseAbs().maxCoeff() : Scalar(0);
  if (asym > Scalar(1e-12) * max_abs) {
    std::ostringstream msg;
    msg << "eig_symmetric: input not symmetric (max asymmetry " << asym << ")";
    throw UsageError(msg.str());
  }
  a = (a + a.transpose()) / Scalar(2);

  SymmetricEigen<Scalar> out;
  MatrixX<Scalar> v;
  if (compute_vectors) v = MatrixX<Scalar>::Identity(n, n);

  const Scalar norm = a.norm();
  const Scalar tol = Scalar(1e-13) * norm;
  const Scalar negligible = Scalar(1e-18) * norm;

  auto off_norm = [&a, n]() {
    Scalar s = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = j + 1; i < n; ++i) s += a(i, j) * a(i, j);
    return sqrt(Scalar(2) * s);
  };

  Scalar off = off_norm();
  int sweep = 0;
  while (off > tol) {
    if (sweep == kMaxSweeps) {
      std::ostringstream msg;
      msg << "eig_symmetric: no convergence after " << kMaxSweeps
          << " sweeps, off-diagonal residual " << off << " (target " << tol << ")";
      throw NumericalError(msg.str());
    }
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (abs(apq) <= negligible) continue;
        const Scalar app = a(p, p);
        const Scalar aqq = a(q, q);
        const Scalar theta = (aqq - app) / (Scalar(2) * apq);
        Scalar t = Scalar(1) / (abs(theta) + sqrt(theta * theta + Scalar(1)));
        if (theta < 0) t = -t;
        const Scalar c = Scalar(1) / sqrt(t * t + Scalar(1));
        const Scalar s = t * c;

        auto col_p = a.col(p);
        auto col_q = a.col(q);
        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> old_p = col_p;
        col_p = c * old_p - s * col_q;
        col_q = s * old_p + c * col_q;
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = Scalar(0);
        a(q, p) = Scalar(0);
        a.row(p) = col_p.transpose();
        a.row(q) = col_q.transpose();

        if (compute_vectors) {
          auto vp = v.col(p);
          auto vq = v.col(q);
          const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> old_vp = vp;
          vp = c * old_vp - s * vq;
          vq = s * old_vp + c * vq;
        }
      }
    }
    ++sweep;
    off = off_norm();
  }

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&a](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
  out.values.resize(n);
  if (compute_vectors) out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]);
    if (compute_vectors) out.vectors.col(k) = v.col(order[k]);
  }
  out.sweeps = sweep;
  out.off_norm = off;
  return out;
}

/// Entanglement spectrum derived from overlap-matrix eigenvalues d_tau.
struct EntropySpectrum {
  std::vector<double> eigenvalues;    // descending
  std::vector<double> probabilities;  // p_tau = d_tau^2 / sum d^2
  double entropy = 0;                 // nats
  double per_bond = 0;
  int boundary_size = 0;
  std::vector<std::string> warnings;
};

/// p_tau = d_tau^2 / sum d^2 and S = -sum p ln p (0 ln 0 = 0).
/// Eigenvalues are sorted descending in the result.
EntropySpectrum entropy_from_spectrum(std::span<const double> d, int boundary_size);

/// Diagonalizes `z` with eig_symmetric and returns its entanglement spectrum.
EntropySpectrum entropy_of_matrix(const Eigen::MatrixXd& z, int boundary_size);

/// Entropy of a matrix that commutes with total S^z, diagonalized sector by
/// sector. Sectors k and legs-k are related by the global flip, so only
/// k <= legs/2 are diagonalized when `flip_symmetric` is set.
EntropySpectrum entropy_by_sz_sectors(const Eigen::MatrixXd& z, int legs, bool flip_symmetric);

}  // namespace vbs
