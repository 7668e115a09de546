#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "vbs/rational.hpp"

namespace vbs::sphere {

using Symbol = std::uint16_t;

/// Product of dot products between symbolic 3-vectors, stored as a sorted
/// multiset of (a, b) pairs with a <= b.
using Monomial = std::vector<std::pair<Symbol, Symbol>>;

/// Polynomial in dot products of symbolic vectors with exact coefficients.
///
/// Symbols flagged as unit vectors (sphere variables) satisfy W . W = 1 and can
/// be integrated against the normalized uniform measure on S^2; the others
/// are free vectors that survive integration.
class DotPolynomial {
 public:
  explicit DotPolynomial(std::vector<bool> unit_symbols);

  static DotPolynomial constant(std::vector<bool> unit_symbols, const Rational& c);

  /// Adds c * monomial.
  void add(Monomial monomial, const Rational& c);

  /// *this *= (1 + c (a . b)).
  void multiply_linear(Symbol a, Symbol b, const Rational& c);

  /// Replaces every monomial by its average over the unit sphere in `s`:
  /// odd degree in s vanishes, degree 2k contributes the sum over perfect
  /// matchings of its partners divided by (2k+1)!!.
  void integrate(Symbol s);

  const std::map<Monomial, Rational>& terms() const { return terms_; }
  bool is_unit(Symbol s) const { return unit_[s]; }

 private:
  Monomial canonical(Monomial m) const;

  std::vector<bool> unit_;
  std::map<Monomial, Rational> terms_;
};

/// (2k+1)!! as an exact rational: the denominator of the 2k-th sphere moment.
Rational double_factorial_odd(int k);

}  // namespace vbs::sphere
