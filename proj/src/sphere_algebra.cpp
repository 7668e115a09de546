#include "vbs/sphere_algebra.hpp"

#include <algorithm>

#include "vbs/errors.hpp"

namespace vbs::sphere {

DotPolynomial::DotPolynomial(std::vector<bool> unit_symbols) : unit_(std::move(unit_symbols)) {}

DotPolynomial DotPolynomial::constant(std::vector<bool> unit_symbols, const Rational& c) {
  DotPolynomial p(std::move(unit_symbols));
  p.add({}, c);
  return p;
}

Monomial DotPolynomial::canonical(Monomial m) const {
  Monomial out;
  out.reserve(m.size());
  for (auto [a, b] : m) {
    if (a > b) std::swap(a, b);
    if (a >= unit_.size() || b >= unit_.size()) throw UsageError("DotPolynomial: unknown symbol");
    if (a == b && unit_[a]) continue;  // W . W = 1
    out.emplace_back(a, b);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void DotPolynomial::add(Monomial monomial, const Rational& c) {
  if (c == 0) return;
  auto key = canonical(std::move(monomial));
  auto [it, inserted] = terms_.emplace(std::move(key), c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

void DotPolynomial::multiply_linear(Symbol a, Symbol b, const Rational& c) {
  if (c == 0) return;
  std::map<Monomial, Rational> old;
  old.swap(terms_);
  for (const auto& [mono, coef] : old) {
    add(mono, coef);
    Monomial extended = mono;
    extended.emplace_back(a, b);
    add(std::move(extended), coef * c);
  }
}

namespace {

// Sum over perfect matchings of `partners`, appending each matching's pairs to
// `base` and emitting the result.
template <typename Emit>
void perfect_matchings(std::vector<Symbol>& partners, Monomial& base, Emit&& emit) {
  if (partners.empty()) {
    emit(base);
    return;
  }
  const Symbol first = partners.back();
  partners.pop_back();
  for (std::size_t i = 0; i < partners.size(); ++i) {
    std::swap(partners[i], partners.back());
    const Symbol other = partners.back();
    partners.pop_back();
    base.emplace_back(first, other);
    perfect_matchings(partners, base, emit);
    base.pop_back();
    partners.push_back(other);
    std::swap(partners[i], partners.back());
  }
  partners.push_back(first);
}

}  // namespace

void DotPolynomial::integrate(Symbol s) {
  if (s >= unit_.size() || !unit_[s]) throw UsageError("DotPolynomial: integrating a non-unit symbol");
  std::map<Monomial, Rational> old;
  old.swap(terms_);
  for (const auto& [mono, coef] : old) {
    std::vector<Symbol> partners;
    Monomial rest;
    for (auto [a, b] : mono) {
      if (a == s)
        partners.push_back(b);
      else if (b == s)
        partners.push_back(a);
      else
        rest.emplace_back(a, b);
    }
    if (partners.size() % 2 == 1) continue;
    const Rational weight = coef / double_factorial_odd(static_cast<int>(partners.size() / 2));
    perfect_matchings(partners, rest, [&](const Monomial& m) { add(m, weight); });
  }
}

Rational double_factorial_odd(int k) {
  Rational r(1);
  for (int j = 3; j <= 2 * k + 1; j += 2) r *= j;
  return r;
}

}  // namespace vbs::sphere
