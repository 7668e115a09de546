#pragma once

#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vbs/matching.hpp"
#include "vbs/pauli.hpp"
#include "vbs/rational.hpp"
#include "vbs/spectrum.hpp"

namespace vbs {

enum class LadderFamily { Square, Hex };

std::string to_string(LadderFamily f);
LadderFamily parse_ladder_family(const std::string& s);

/// Coefficients of an m-leg ladder Z matrix over the partial-matching basis.
///
/// Z = sum_mu sign(mu) coeff[mu] prod_{(i,j) in mu} sigma_i . sigma_j, where
/// sign(mu) is the bipartite sign of the family (square: (-1)^(j-i) per
/// pair, hex: +1). With that convention every coefficient is nonnegative and
/// the 2-leg square ladder reads a - b sigma_1 . sigma_2 with coeff = {a, b}.
/// Legs are ordered by increasing row of the block's own boundary.
struct LadderCoefficients {
  LadderFamily family = LadderFamily::Square;
  int m = 0;
  int n = 0;
  std::vector<Rational> coeff;  // aligned with partial_matchings(m)

  const Rational& at(const PartialMatching& mu) const;
};

/// Linear map on coefficient vectors for one added column.
struct RecursionMatrix {
  std::vector<PartialMatching> basis;
  MatrixX<Rational> entries;
};

inline constexpr int kMaxLadderLegs = 6;

/// sign(mu) for the family, see LadderCoefficients.
int matching_sign(LadderFamily family, const PartialMatching& mu);

/// One-column map derived by integrating the new column's sphere variables
/// one at a time (legs bottom-up). Exact for any m <= kMaxLadderLegs.
/// Hex blocks are mirror images of their parents, so leg j of the old block
/// attaches to leg m+1-j of the new one; the map already includes that.
const RecursionMatrix& generic_recursion(LadderFamily family, int m);

/// Where a ladder step takes its one-column map from.
enum class RecursionSource {
  Auto,       // closed recursion matrices for m <= 3, generic otherwise
  Closed,     // closed matrices only (m <= 3)
  Generic,
};

struct StepOptions {
  RecursionSource source = RecursionSource::Auto;
  Rational q = Rational(1, 3);  // second sphere moment used by the closed matrices
};

/// Closed one-column matrices on the coefficient vectors of the literature:
/// square m=2 on (a, b), square m=3 on (a, b, d) after b = c (`reduced`) or
/// on (a, b, c, d), hex m=2 on (a, b), hex m=3 on (a, b, c, d) where
/// `hex_step` 1 or 2 selects T1 or T2. For m = 3, b, c, d multiply
/// s1.s2, s2.s3, s1.s3.
MatrixX<Rational> closed_matrix(LadderFamily family, int m, const Rational& q,
                                   bool reduced = false, int hex_step = 1);

LadderCoefficients ladder_initial(LadderFamily family, int m);
LadderCoefficients ladder_step(const LadderCoefficients& state, const StepOptions& opts = {});
LadderCoefficients ladder_coefficients(LadderFamily family, int m, int n, const StepOptions& opts = {});

/// Dense 2^m matrix of Z for the given coefficients.
template <typename Scalar>
MatrixX<Scalar> ladder_z_matrix(const LadderCoefficients& state) {
  if (state.m > kMaxLadderLegs) throw UsageError("ladder_z_matrix: more than 6 legs");
  const auto& basis = partial_matchings(state.m);
  const Eigen::Index dim = Eigen::Index{1} << state.m;
  MatrixX<Scalar> z = MatrixX<Scalar>::Zero(dim, dim);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (state.coeff[k] == 0) continue;
    Scalar c;
    if constexpr (std::is_same_v<Scalar, Rational>) {
      c = state.coeff[k];
    } else {
      c = to_double(state.coeff[k]);
    }
    if (matching_sign(state.family, basis[k]) < 0) c = -c;
    z += c * matching_operator<Scalar>(basis[k], state.m);
  }
  return z;
}

/// Same for floating-point coefficients in partial_matchings(m) order.
Eigen::MatrixXd z_matrix_from_coefficients(LadderFamily family, int m, const Eigen::VectorXd& coeff);

EntropySpectrum ladder_entropy(LadderFamily family, int m, int n, const StepOptions& opts = {});

/// (a_n, b_n) of the 2-leg ladders from their closed forms in z_+^n, z_-^n.
std::pair<double, double> closed_form_2leg(LadderFamily family, int n);

struct InfiniteLimit {
  EntropySpectrum spectrum;
  Eigen::VectorXd pf_vector;  // coefficient ratios, pf_vector(0) = 1
  double pf_eigenvalue = 0;   // per column (square root of the two-column value for hex m = 3)
  int iterations = 0;
};

/// Dominant eigenvector of the nonnegative recursion by power iteration,
/// converged to a Rayleigh-quotient residual of 1e-14.
Eigen::VectorXd power_iteration(const Eigen::MatrixXd& t, double& eigenvalue, int& iterations);

InfiniteLimit infinite_limit(LadderFamily family, int m);

/// Largest size accepted by vertical_ladder_z (N_y for square, m for hex).
inline constexpr int kMaxVerticalSize = 12;

/// Z of the N_x = 1 vertical ladder with `size` boundary sites, built by the
/// Kronecker recursion Z(N+1) = Z(N) (x) 1 + sum_a R_a(N+1) (x) sigma^a with
/// R_a(N+1) = c1 Z(N-1) (x) sigma^a + c2 R_a(N) (x) 1, where (c1, c2) is
/// (-q^2, -q) for square and (q^3, q^2) for hex. The sigma^y channel is
/// carried as i sigma^y so everything stays real.
/// Instantiated for double and Rational.
template <typename Scalar>
MatrixX<Scalar> vertical_ladder_z(LadderFamily family, int size);

/// Entropy of the vertical ladder, diagonalizing total-S^z sectors.
EntropySpectrum vertical_ladder_entropy(LadderFamily family, int size);

}  // namespace vbs
