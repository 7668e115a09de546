#include "vbs/transfer.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "vbs/errors.hpp"
#include "vbs/sphere_algebra.hpp"

namespace vbs {

std::string to_string(LadderFamily f) {
  return f == LadderFamily::Square ? "square" : "hex";
}

LadderFamily parse_ladder_family(const std::string& s) {
  if (s == "square") return LadderFamily::Square;
  if (s == "hex" || s == "hexagonal") return LadderFamily::Hex;
  throw UsageError("unknown ladder family '" + s + "' (expected square or hex)");
}

const Rational& LadderCoefficients::at(const PartialMatching& mu) const {
  return coeff.at(matching_index(mu, m));
}

int matching_sign(LadderFamily family, const PartialMatching& mu) {
  if (family == LadderFamily::Hex) return 1;
  int sign = 1;
  for (auto [i, j] : mu.pairs)
    if ((j - i) % 2 == 1) sign = -sign;
  return sign;
}

namespace {

void check_legs(int m) {
  if (m < 1 || m > kMaxLadderLegs)
    throw UsageError("ladders support 1 to " + std::to_string(kMaxLadderLegs) + " legs, got " +
                     std::to_string(m));
}

RecursionMatrix derive_recursion(LadderFamily family, int m) {
  using sphere::DotPolynomial;
  using sphere::Symbol;
  const auto& basis = partial_matchings(m);
  const int sites = family == LadderFamily::Square ? m : 2 * m;

  // Sphere variables of the new column are symbols 0..sites-1 (row y -> y-1),
  // the free boundary vectors s_k follow.
  std::vector<bool> unit(sites + m, false);
  for (int y = 0; y < sites; ++y) unit[y] = true;
  auto boundary_site = [family](int leg) { return family == LadderFamily::Square ? leg : 2 * leg; };
  auto attach_site = [family, m](int old_leg) {
    return family == LadderFamily::Square ? old_leg : 2 * (m - old_leg) - 1;
  };
  std::vector<int> leg_at(sites, -1);
  for (int k = 0; k < m; ++k) leg_at[boundary_site(k)] = k;

  RecursionMatrix out;
  out.basis = basis;
  const auto dim = static_cast<Eigen::Index>(basis.size());
  out.entries = MatrixX<Rational>::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const auto& mu = basis[col];
    DotPolynomial poly(unit);
    sphere::Monomial start;
    for (auto [i, j] : mu.pairs)
      start.emplace_back(static_cast<Symbol>(attach_site(i)), static_cast<Symbol>(attach_site(j)));
    poly.add(start, Rational(1));
    for (int y = 0; y < sites; ++y) {
      if (leg_at[y] >= 0) poly.multiply_linear(static_cast<Symbol>(y), static_cast<Symbol>(sites + leg_at[y]), Rational(1));
      if (y + 1 < sites) poly.multiply_linear(static_cast<Symbol>(y), static_cast<Symbol>(y + 1), Rational(-1));
      poly.integrate(static_cast<Symbol>(y));
    }
    for (const auto& [mono, coef] : poly.terms()) {
      std::vector<std::pair<int, int>> pairs;
      for (auto [a, b] : mono) {
        if (a < sites || b < sites) throw NumericalError("ladder recursion: sphere variable left after integration");
        pairs.emplace_back(a - sites, b - sites);
      }
      const PartialMatching nu(std::move(pairs));
      const auto row = static_cast<Eigen::Index>(matching_index(nu, m));
      const int sign = matching_sign(family, nu) * matching_sign(family, mu);
      out.entries(row, col) += sign > 0 ? coef : Rational(-coef);
    }
  }
  return out;
}

// The literature numbers the three hex legs in a frame fixed to the lattice,
// which coincides with the block's own frame for odd n and is its mirror
// image for even n.
bool hex_frame_mirrored(int n) {
  return n % 2 == 0;
}

// (a, b, c, d) with b = s1.s2, c = s2.s3, d = s1.s3 in partial_matchings(3) order.
constexpr int kA = 0, kB = 1, kD = 2, kC = 3;

}  // namespace

const RecursionMatrix& generic_recursion(LadderFamily family, int m) {
  check_legs(m);
  static std::mutex mutex;
  static std::map<std::pair<int, int>, RecursionMatrix> cache;
  std::lock_guard lock(mutex);
  const auto key = std::make_pair(static_cast<int>(family), m);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, derive_recursion(family, m)).first;
  return it->second;
}

MatrixX<Rational> closed_matrix(LadderFamily family, int m, const Rational& q, bool reduced,
                                   int hex_step) {
  const Rational q2 = q * q, q3 = q2 * q, q4 = q3 * q, q5 = q4 * q, q6 = q5 * q;
  MatrixX<Rational> t;
  if (family == LadderFamily::Square && m == 2) {
    t.resize(2, 2);
    t << Rational(1), q, q2, q2;
  } else if (family == LadderFamily::Square && m == 3 && reduced) {
    t.resize(3, 3);
    // The (d, a) entry is q^3: one column joins legs 1 and 3 through three sites.
    t << Rational(1), 2 * q, q2,
         q2, q2 + q3, q3,
         q3, 2 * q3, q2;
  } else if (family == LadderFamily::Square && m == 3) {
    t.resize(4, 4);
    t << Rational(1), q, q, q2,
         q2, q2, q3, q3,
         q2, q2, q3, q3,
         q3, q3, q3, q2;
  } else if (family == LadderFamily::Hex && m == 2) {
    t.resize(2, 2);
    t << Rational(1), q2, q3, q4;
  } else if (family == LadderFamily::Hex && m == 3 && hex_step == 1) {
    t.resize(4, 4);
    t << Rational(1), q2, q2, q4,
         q3, q4, q5, q6,
         q3, q4, q4, q4,
         q5, q4, q6, q4;
  } else if (family == LadderFamily::Hex && m == 3 && hex_step == 2) {
    t.resize(4, 4);
    t << Rational(1), q2, q2, q4,
         q3, q4, q4, q4,
         q3, q5, q4, q6,
         q5, q6, q4, q4;
  } else {
    throw UsageError("no closed recursion matrix for " + to_string(family) + " ladders with " +
                     std::to_string(m) + " legs");
  }
  return t;
}

LadderCoefficients ladder_initial(LadderFamily family, int m) {
  check_legs(m);
  LadderCoefficients s;
  s.family = family;
  s.m = m;
  s.n = 0;
  s.coeff.assign(partial_matchings(m).size(), Rational(0));
  s.coeff[0] = 1;
  return s;
}

namespace {

std::vector<Rational> apply_matrix(const MatrixX<Rational>& t, const std::vector<Rational>& v) {
  std::vector<Rational> out(t.rows(), Rational(0));
  for (Eigen::Index i = 0; i < t.rows(); ++i)
    for (Eigen::Index j = 0; j < t.cols(); ++j)
      if (t(i, j) != 0 && v[j] != 0) out[i] += t(i, j) * v[j];
  return out;
}

LadderCoefficients closed_step(const LadderCoefficients& s, const Rational& q) {
  LadderCoefficients next = s;
  next.n = s.n + 1;
  if (s.m == 2) {
    next.coeff = apply_matrix(closed_matrix(s.family, 2, q), s.coeff);
    return next;
  }
  if (s.m != 3)
    throw UsageError("closed recursion matrices exist only for 2 and 3 legs");
  const auto& c = s.coeff;
  if (s.family == LadderFamily::Square) {
    if (c[kB] != c[kC]) throw UsageError("reduced 3-leg recursion needs b = c");
    const auto r = apply_matrix(closed_matrix(s.family, 3, q, true), std::vector<Rational>{c[kA], c[kB], c[kD]});
    next.coeff = std::vector<Rational>{r[0], r[1], r[2], r[1]};
    return next;
  }
  // Hex: convert to the fixed frame, apply T1 (odd target) or T2 (even target), convert back.
  std::vector<Rational> v{c[kA], c[kB], c[kC], c[kD]};
  if (hex_frame_mirrored(s.n)) std::swap(v[1], v[2]);
  auto r = apply_matrix(closed_matrix(s.family, 3, q, false, next.n % 2 == 1 ? 1 : 2), v);
  if (hex_frame_mirrored(next.n)) std::swap(r[1], r[2]);
  next.coeff = std::vector<Rational>{r[0], r[1], r[3], r[2]};
  return next;
}

}  // namespace

LadderCoefficients ladder_step(const LadderCoefficients& state, const StepOptions& opts) {
  check_legs(state.m);
  if (state.coeff.size() != partial_matchings(state.m).size())
    throw UsageError("ladder_step: coefficient vector does not match the basis");
  RecursionSource source = opts.source;
  if (source == RecursionSource::Auto)
    source = state.m <= 3 ? RecursionSource::Closed : RecursionSource::Generic;
  if (source == RecursionSource::Closed) {
    if (state.m == 1) source = RecursionSource::Generic;
    else return closed_step(state, opts.q);
  }
  LadderCoefficients next = state;
  next.n = state.n + 1;
  next.coeff = apply_matrix(generic_recursion(state.family, state.m).entries, state.coeff);
  return next;
}

LadderCoefficients ladder_coefficients(LadderFamily family, int m, int n, const StepOptions& opts) {
  if (n < 0) throw UsageError("ladder length must be >= 0");
  auto s = ladder_initial(family, m);
  for (int i = 0; i < n; ++i) s = ladder_step(s, opts);
  return s;
}

Eigen::MatrixXd z_matrix_from_coefficients(LadderFamily family, int m, const Eigen::VectorXd& coeff) {
  check_legs(m);
  const auto& basis = partial_matchings(m);
  if (coeff.size() != static_cast<Eigen::Index>(basis.size()))
    throw UsageError("coefficient vector does not match the basis");
  const Eigen::Index dim = Eigen::Index{1} << m;
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (coeff(k) == 0) continue;
    z += matching_sign(family, basis[k]) * coeff(k) * matching_operator<double>(basis[k], m);
  }
  return z;
}

EntropySpectrum ladder_entropy(LadderFamily family, int m, int n, const StepOptions& opts) {
  if (n < 1) throw UsageError("ladder_entropy needs n >= 1");
  const auto s = ladder_coefficients(family, m, n, opts);
  return entropy_of_matrix(ladder_z_matrix<double>(s), m);
}

std::pair<double, double> closed_form_2leg(LadderFamily family, int n) {
  if (n < 0) throw UsageError("closed_form_2leg needs n >= 0");
  const double r = family == LadderFamily::Square ? std::sqrt(19.0) : std::sqrt(1627.0);
  const double zp = family == LadderFamily::Square ? (5 + r) / 9 : (41 + r) / 81;
  const double zm = family == LadderFamily::Square ? (5 - r) / 9 : (41 - r) / 81;
  const double plus = std::pow(zp, n), minus = std::pow(zm, n);
  if (family == LadderFamily::Square)
    return {(4 * (plus - minus) + r * (plus + minus)) / (2 * r), (plus - minus) / (2 * r)};
  return {(40 * (plus - minus) + r * (plus + minus)) / (2 * r), 3 * (plus - minus) / (2 * r)};
}

Eigen::VectorXd power_iteration(const Eigen::MatrixXd& t, double& eigenvalue, int& iterations) {
  constexpr int kMaxIterations = 100000;
  if (t.rows() != t.cols() || t.rows() == 0) throw UsageError("power_iteration: bad matrix");
  if ((t.array() < 0).any()) throw UsageError("power_iteration: matrix has negative entries");
  Eigen::VectorXd v = Eigen::VectorXd::Ones(t.rows()).normalized();
  for (iterations = 1; iterations <= kMaxIterations; ++iterations) {
    const Eigen::VectorXd w = t * v;
    eigenvalue = v.dot(w);
    const double residual = (w - eigenvalue * v).norm();
    v = w / w.norm();
    if (residual <= 1e-14 * std::abs(eigenvalue)) return v;
  }
  throw NumericalError("power iteration did not converge in 100000 iterations");
}

InfiniteLimit infinite_limit(LadderFamily family, int m) {
  check_legs(m);
  const auto& rec = generic_recursion(family, m);
  Eigen::MatrixXd t(rec.entries.rows(), rec.entries.cols());
  for (Eigen::Index i = 0; i < t.rows(); ++i)
    for (Eigen::Index j = 0; j < t.cols(); ++j) t(i, j) = to_double(rec.entries(i, j));
  InfiniteLimit out;
  Eigen::VectorXd v = power_iteration(t, out.pf_eigenvalue, out.iterations);
  out.pf_vector = v / v(0);
  out.spectrum = entropy_of_matrix(z_matrix_from_coefficients(family, m, out.pf_vector), m);
  return out;
}

template <typename Scalar>
MatrixX<Scalar> vertical_ladder_z(LadderFamily family, int size) {
  if (size < 1 || size > kMaxVerticalSize)
    throw UsageError("vertical ladders support 1 to " + std::to_string(kMaxVerticalSize) +
                     " boundary sites, got " + std::to_string(size));
  const Scalar q = Scalar(1) / Scalar(3);
  const Scalar c1 = family == LadderFamily::Square ? Scalar(-q * q) : Scalar(q * q * q);
  const Scalar c2 = family == LadderFamily::Square ? Scalar(-q) : Scalar(q * q);
  const MatrixX<Scalar> one = pauli::id<Scalar>(), sx = pauli::x<Scalar>(), sz = pauli::z<Scalar>(),
                        tau = pauli::iy<Scalar>();

  MatrixX<Scalar> z_prev = MatrixX<Scalar>::Identity(1, 1);  // Z(N-1)
  MatrixX<Scalar> z = MatrixX<Scalar>::Identity(2, 2);       // Z(N)
  // Operators on legs 1..N-1 that pair with sigma^x, i sigma^y, sigma^z of leg N.
  MatrixX<Scalar> rx = MatrixX<Scalar>::Zero(1, 1), ry = rx, rz = rx;
  for (int n = 1; n < size; ++n) {
    MatrixX<Scalar> nx = c1 * kron(z_prev, sx) + c2 * kron(rx, one);
    MatrixX<Scalar> ny = -c1 * kron(z_prev, tau) + c2 * kron(ry, one);
    MatrixX<Scalar> nz = c1 * kron(z_prev, sz) + c2 * kron(rz, one);
    MatrixX<Scalar> next = kron(z, one);
    next += kron(nx, sx);
    next += kron(ny, tau);
    next += kron(nz, sz);
    z_prev = std::move(z);
    z = std::move(next);
    rx = std::move(nx);
    ry = std::move(ny);
    rz = std::move(nz);
  }
  return z;
}

template MatrixX<double> vertical_ladder_z<double>(LadderFamily, int);
template MatrixX<Rational> vertical_ladder_z<Rational>(LadderFamily, int);

EntropySpectrum vertical_ladder_entropy(LadderFamily family, int size) {
  const Eigen::MatrixXd z = vertical_ladder_z<double>(family, size);
  return entropy_by_sz_sectors(z, size, true);
}

}  // namespace vbs
