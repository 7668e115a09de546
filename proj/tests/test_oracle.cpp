#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "vbs/errors.hpp"
#include "vbs/oracle.hpp"

using namespace vbs;

namespace {

const PartialMatching kEmpty{};
const PartialMatching kPair({{0, 1}});

}  // namespace

TEST_CASE("loop expansion of the 2-leg square ladder") {
  const Rational q = sphere_q();
  const std::vector<Rational> a{1, 1 + pow(q, 3), 1 + 2 * pow(q, 3) + pow(q, 5)};
  const std::vector<Rational> b{q * q, q * q + pow(q, 4), q * q + pow(q, 4) + pow(q, 5) + pow(q, 6)};
  CHECK(a[1] == Rational(28, 27));
  CHECK(a[2] == Rational(262, 243));
  CHECK(b[2] == Rational(94, 729));
  for (int n = 1; n <= 3; ++n) {
    const auto c = loop_ladder_coefficients(LadderFamily::Square, 2, n);
    CHECK(c.at(kEmpty) == a[n - 1]);
    CHECK(c.at(kPair) == b[n - 1]);
  }
}

TEST_CASE("loop expansion equals the transfer engine") {
  LoopOptions opts;
  opts.higher_moments = true;
  for (auto f : {LadderFamily::Square, LadderFamily::Hex})
    for (int m = 1; m <= 3; ++m)
      for (int n = 1; n <= (m == 3 ? 4 : 6); ++n) {
        CAPTURE(m);
        CAPTURE(n);
        CHECK(loop_ladder_coefficients(f, m, n, opts).coeff == ladder_coefficients(f, m, n).coeff);
      }
}

TEST_CASE("two-leg entropies agree bit for bit") {
  for (auto f : {LadderFamily::Square, LadderFamily::Hex})
    for (int n = 1; n <= 6; ++n) {
      const double loop = entropy_of_matrix(ladder_z_matrix<double>(loop_ladder_coefficients(f, 2, n)), 2).per_bond;
      CHECK(loop == ladder_entropy(f, 2, n).per_bond);
    }
}

TEST_CASE("parity filter and symbolic integration agree with the loop sum") {
  const auto g = build_square_half(3, 2);
  LoopOptions all;
  all.parity_filter = false;
  const auto filtered = loop_enumerate_z(g);
  const auto unfiltered = loop_enumerate_z(g, all);
  CHECK(filtered.coeff == unfiltered.coeff);
  CHECK(unfiltered.visited > filtered.visited);
  CHECK(symbolic_z(g).coeff == filtered.coeff);
}

TEST_CASE("loop Z matches quadrature") {
  const auto g = build_hexagonal_half(1, 4);
  const auto quad = testing::quadrature_z(g);
  const Eigen::MatrixXd z = loop_z_matrix(loop_enumerate_z(g)).unaryExpr([](const Rational& x) { return to_double(x); });
  CHECK((quad.real() - z).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("visitor sees every weighted configuration") {
  LoopOptions opts;
  Rational total = 0;
  std::uint64_t calls = 0;
  opts.visit = [&](const LoopConfig& c, const Rational& w) {
    ++calls;
    if (c.open_endpoints.empty()) total += w;
  };
  const auto ex = loop_enumerate_z(build_square_half(1, 2), opts);
  CHECK(calls == ex.configurations);
  CHECK(total == ex.coeff.at(kEmpty));
}

TEST_CASE("out of scope graphs are rejected") {
  CHECK_THROWS_WITH_AS(loop_enumerate_z(build_square_half(3, 3)), doctest::Contains("out of scope"), UsageError);
  LoopOptions tiny;
  tiny.budget = 10;
  tiny.higher_moments = true;
  CHECK_THROWS_WITH_AS(loop_enumerate_z(build_square_half(3, 3), tiny), doctest::Contains("out of scope"), UsageError);
}

TEST_CASE("exact diagonalization: singlet") {
  const auto rdm = exact_vbs_rdm(double_graph(build_square_half(1, 1)));
  CHECK(rdm.spectrum_a.entropy == doctest::Approx(std::numbers::ln2).epsilon(1e-15));
  CHECK(rdm.rho_a.trace() == doctest::Approx(1.0));
}

TEST_CASE("exact diagonalization agrees with the overlap route") {
  for (int nx = 1; nx <= 3; ++nx) {
    const auto rdm = exact_vbs_rdm(double_graph(build_square_half(nx, 2)));
    CHECK(std::abs(rdm.spectrum_a.per_bond - ladder_entropy(LadderFamily::Square, 2, nx).per_bond) <= 1e-10);
    CHECK(rdm.spectrum_a.entropy == doctest::Approx(rdm.spectrum_b.entropy).epsilon(1e-12));
  }
  const auto hex = exact_vbs_rdm(double_graph(build_hexagonal_half(1, 4)));
  CHECK(std::abs(hex.spectrum_a.per_bond - ladder_entropy(LadderFamily::Hex, 2, 1).per_bond) <= 1e-10);
}

TEST_CASE("a single cut bond carries exactly ln 2") {
  for (int nx = 1; nx <= 3; ++nx) {
    const auto rdm = exact_vbs_rdm(double_graph(build_hexagonal_half(nx, 2)));
    CHECK(rdm.spectrum_a.entropy == doctest::Approx(std::numbers::ln2).epsilon(1e-12));
  }
}

TEST_CASE("density matrix is a state") {
  const auto rdm = exact_vbs_rdm(double_graph(build_square_half(2, 2)));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rdm.rho_a);
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  CHECK((rdm.rho_a - rdm.rho_a.transpose()).norm() <= 1e-14);
}

TEST_CASE("exact diagonalization budget") {
  CHECK_THROWS_AS(exact_vbs_rdm(double_graph(build_square_half(3, 3))), UsageError);
}
