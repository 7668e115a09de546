#pragma once

#include <string>
#include <string_view>

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/gmp.hpp>

namespace vbs {

/// Exact rational; expression templates off so it composes with Eigen and auto.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                             boost::multiprecision::et_off>;

/// "p/q" or "p".
std::string to_string(const Rational& r);
Rational parse_rational(std::string_view text);

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// The sphere second moment: mean of (a.W)(W.b) over the unit sphere is q a.b.
inline Rational sphere_q() { return Rational(1, 3); }

Rational pow(const Rational& base, int exponent);

}  // namespace vbs
