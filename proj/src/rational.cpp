#include "vbs/rational.hpp"

#include <string>

#include "vbs/errors.hpp"

namespace vbs {

std::string to_string(const Rational& r) {
  return r.str();
}

Rational parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && s.front() == ' ') s.erase(s.begin());
  while (!s.empty() && s.back() == ' ') s.pop_back();
  if (s.empty()) throw UsageError("empty rational");
  const auto slash = s.find('/');
  auto digits_ok = [](const std::string& part) {
    if (part.empty()) return false;
    std::size_t i = (part[0] == '-' || part[0] == '+') ? 1 : 0;
    if (i == part.size()) return false;
    for (; i < part.size(); ++i)
      if (part[i] < '0' || part[i] > '9') return false;
    return true;
  };
  const std::string num = s.substr(0, slash);
  const std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  if (!digits_ok(num) || !digits_ok(den)) throw UsageError("malformed rational '" + s + "'");
  BigInt n(num[0] == '+' ? num.substr(1) : num);
  BigInt d(den[0] == '+' ? den.substr(1) : den);
  if (d == 0) throw UsageError("zero denominator in '" + s + "'");
  return Rational(n, d);
}

Rational pow(const Rational& base, int exponent) {
  if (exponent < 0) return Rational(1) / pow(base, -exponent);
  Rational result(1);
  Rational b = base;
  while (exponent > 0) {
    if (exponent & 1) result *= b;
    b *= b;
    exponent >>= 1;
  }
  return result;
}

}  // namespace vbs
