#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "vbs/spectrum.hpp"
#include "vbs/transfer.hpp"

using namespace vbs;

namespace {

Eigen::MatrixXd random_symmetric(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return g(rng); });
  return (a + a.transpose()) / 2;
}

}  // namespace

TEST_CASE("jacobi agrees with Eigen and reconstructs its input") {
  std::mt19937_64 rng(3);
  for (int n : {1, 2, 5, 16, 40}) {
    const Eigen::MatrixXd a = random_symmetric(n, rng);
    const auto eig = eig_symmetric(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(a);
    Eigen::VectorXd expected = ref.eigenvalues().reverse();
    CHECK((eig.values - expected).cwiseAbs().maxCoeff() <= 1e-11 * (1 + a.norm()));
    const Eigen::MatrixXd back = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
    CHECK((a - back).norm() <= 1e-10 * a.norm());
    CHECK((eig.vectors.transpose() * eig.vectors - Eigen::MatrixXd::Identity(n, n)).norm() <= 1e-12 * n);
    CHECK(std::is_sorted(eig.values.data(), eig.values.data() + n, std::greater<>()));
  }
}

TEST_CASE("jacobi handles degenerate spectra") {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(6, 6) * 2.5;
  const auto eig = eig_symmetric(a);
  CHECK((eig.values.array() - 2.5).abs().maxCoeff() == doctest::Approx(0.0));
  CHECK(eig.sweeps <= 1);
}

TEST_CASE("entropy of simple spectra") {
  const std::vector<double> flat(8, 0.3);
  CHECK(entropy_from_spectrum(flat, 3).entropy == doctest::Approx(3 * std::numbers::ln2).epsilon(1e-14));
  CHECK(entropy_from_spectrum(flat, 3).per_bond == doctest::Approx(std::numbers::ln2).epsilon(1e-14));

  const std::vector<double> pure{1.0, 0.0, 0.0};
  CHECK(entropy_from_spectrum(pure, 1).entropy == 0.0);

  // p = d^2 / sum d^2
  const std::vector<double> d{1.0, 2.0};
  const auto s = entropy_from_spectrum(d, 1);
  CHECK(s.probabilities[0] == doctest::Approx(0.8));
  CHECK(s.probabilities[1] == doctest::Approx(0.2));
  CHECK(s.eigenvalues[0] == 2.0);
}

TEST_CASE("entropy is invariant under scaling and permutation") {
  const Eigen::MatrixXd z = ladder_z_matrix<double>(ladder_coefficients(LadderFamily::Square, 3, 2));
  const double s = entropy_of_matrix(z, 3).entropy;
  for (double c : {1e-6, 0.5, 3.0, 1e5}) CHECK(entropy_of_matrix(c * z, 3).entropy == doctest::Approx(s).epsilon(1e-13));

  std::mt19937_64 rng(5);
  std::vector<double> d(12);
  std::uniform_real_distribution<double> u(0, 1);
  for (auto& x : d) x = u(rng);
  const double sd = entropy_from_spectrum(d, 2).entropy;
  for (int k = 0; k < 5; ++k) {
    std::shuffle(d.begin(), d.end(), rng);
    CHECK(entropy_from_spectrum(d, 2).entropy == doctest::Approx(sd).epsilon(1e-14));
  }
}

TEST_CASE("entropy matches an independent eigensolver") {
  for (int n = 1; n <= 4; ++n) {
    const Eigen::MatrixXd z = ladder_z_matrix<double>(ladder_coefficients(LadderFamily::Square, 3, n));
    CHECK(entropy_of_matrix(z, 3).entropy == doctest::Approx(testing::reference_entropy(z)).epsilon(1e-12));
  }
}

TEST_CASE("sector-wise diagonalization equals the full one") {
  for (auto family : {LadderFamily::Square, LadderFamily::Hex}) {
    for (int m = 2; m <= 4; ++m) {
      const Eigen::MatrixXd z = ladder_z_matrix<double>(ladder_coefficients(family, m, 2));
      const auto full = entropy_of_matrix(z, m);
      for (bool flip : {false, true}) {
        const auto sectors = entropy_by_sz_sectors(z, m, flip);
        CHECK(sectors.entropy == doctest::Approx(full.entropy).epsilon(1e-12));
        REQUIRE(sectors.eigenvalues.size() == full.eigenvalues.size());
        for (std::size_t k = 0; k < full.eigenvalues.size(); ++k)
          CHECK(sectors.eigenvalues[k] == doctest::Approx(full.eigenvalues[k]).epsilon(1e-12));
      }
    }
  }
}
