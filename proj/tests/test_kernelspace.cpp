#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "palmdpp/errors.hpp"
#include "palmdpp/kernel_model.hpp"

using namespace palmdpp;

namespace {

std::vector<Complex> random_points(std::mt19937_64& eng, double radius, int n) {
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<Complex> out;
  while (static_cast<int>(out.size()) < n) {
    const Complex z(u(eng), u(eng));
    if (std::abs(z) < radius) out.push_back(z);
  }
  return out;
}

// psi_alpha table on [0, R] with spacing h.
TabulatedRadial fock_table(double alpha, double R, double h) {
  TabulatedRadial t;
  const int n = static_cast<int>(std::ceil(R / h));
  for (int i = 0; i <= n; ++i) {
    const double r = R * i / n;
    t.radii.push_back(r);
    t.logWeight.push_back(-std::pow(r, alpha));
  }
  return t;
}

}  // namespace

TEST_CASE("Fock monomial norms follow the Gamma closed form") {
  const auto n2 = monomial_norms(Weight::fock_radial(2.0), 4);
  CHECK(n2[0] * n2[0] == doctest::Approx(kPi).epsilon(1e-14));
  CHECK(n2[3] * n2[3] == doctest::Approx(6.0 * kPi).epsilon(1e-14));
  const auto g = monomial_norms(Weight::fock_gaussian(), 4);
  CHECK(g[3] == doctest::Approx(n2[3]).epsilon(1e-14));
}

TEST_CASE("tabulated psi_2 norms match the closed form") {
  const Weight w(fock_table(2.0, 12.0, 2e-4));
  const auto lt = log_monomial_norms_sq(w, 8);
  for (int n = 0; n < 8; ++n) {
    const double exact = std::log(kPi) + std::lgamma(n + 1.0);
    CHECK(std::abs(std::expm1(lt[n] - exact)) < 1e-8);
  }
}

TEST_CASE("tabulated norms agree with an adaptive quadrature oracle") {
  // A weight with no closed form: log w = -r^2 + sin(3r), tabulated finely.
  TabulatedRadial t;
  for (int i = 0; i <= 40000; ++i) {
    const double r = 8.0 * i / 40000;
    t.radii.push_back(r);
    t.logWeight.push_back(-r * r + std::sin(3.0 * r));
  }
  const auto lt = log_monomial_norms_sq(Weight(t), 4);
  for (int n = 0; n < 4; ++n) {
    auto f = [n](double r) { return 2.0 * kPi * std::pow(r, 2 * n + 1) * std::exp(-r * r + std::sin(3.0 * r)); };
    const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 8.0, 15, 1e-13);
    CHECK(std::abs(std::exp(lt[n]) / ref - 1.0) < 1e-7);
  }
}

TEST_CASE("classical Bergman norms") {
  // ||z^n||^2 = pi n! Gamma(alpha+1) / Gamma(n+alpha+2); alpha = 0 gives pi / (n+1).
  const auto b = log_monomial_norms_sq(Weight::bergman(0.0), 5);
  for (int n = 0; n < 5; ++n) CHECK(std::exp(b[n]) == doctest::Approx(kPi / (n + 1)).epsilon(1e-13));
  const auto b1 = log_monomial_norms_sq(Weight::bergman(1.0), 3);
  CHECK(std::exp(b1[2]) == doctest::Approx(kPi * 2.0 / 24.0).epsilon(1e-13));
}

TEST_CASE("rank one Fock kernel is 1/pi") {
  const auto m = KernelModel::build(Domain::Plane, Weight::fock_gaussian(), 1);
  CHECK(m.kernel({0, 0}, {0, 0}).real() == doctest::Approx(1.0 / kPi).epsilon(1e-15));
  CHECK(m.kernel({1.5, -2}, {0.3, 0.7}).real() == doctest::Approx(1.0 / kPi).epsilon(1e-15));
  CHECK(m.kernel({1.5, -2}, {0.3, 0.7}).imag() == 0.0);
}

TEST_CASE("kernel is Hermitian bit for bit") {
  std::mt19937_64 eng(7);
  for (const auto& m : {KernelModel::build(Domain::Plane, Weight::fock_gaussian(), 40),
                        KernelModel::build(Domain::UnitDisc, Weight::bergman(0.5), 40)}) {
    const double R = m.domain() == Domain::Plane ? 6.0 : 0.95;
    const auto z = random_points(eng, R, 1000), w = random_points(eng, R, 1000);
    int bad = 0;
    for (int i = 0; i < 1000; ++i) {
      const Complex a = m.kernel(z[i], w[i]), b = std::conj(m.kernel(w[i], z[i]));
      bad += (a != b);
      const Complex d = m.kernel(z[i], z[i]);
      bad += !(d.imag() == 0.0 && d.real() >= 0.0);
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("weighted Gram matrices are positive semidefinite") {
  std::mt19937_64 eng(11);
  const auto m = KernelModel::build(Domain::Plane, Weight::fock_radial(1.5), 24);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = random_points(eng, 4.0, 8);
    CMatrix G(8, 8);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) G(i, j) = m.weighted(pts[i], pts[j]);
    const Eigen::SelfAdjointEigenSolver<CMatrix> es(G);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10 * es.eigenvalues().maxCoeff());
  }
}

TEST_CASE("quadrature trace equals the rank") {
  CHECK(expected_count(KernelModel::build(Domain::Plane, Weight::fock_gaussian(), 64), Region::everything()) ==
        doctest::Approx(64.0).epsilon(1e-8));
  CHECK(expected_count(KernelModel::build(Domain::UnitDisc, Weight::bergman(0.0), 32), Region::everything()) ==
        doctest::Approx(32.0).epsilon(1e-8));
  CHECK(expected_count(KernelModel::build(Domain::Plane, Weight::fock_radial(1.0), 16), Region::everything()) ==
        doctest::Approx(16.0).epsilon(1e-8));
}

TEST_CASE("reproducing property: the quadrature Gram of the basis is the identity") {
  const auto m = KernelModel::build(Domain::Plane, Weight::fock_gaussian(), 12);
  const CMatrix G = region_gram(m, Region::everything(), [](Complex) { return 1.0; });
  CHECK((G - CMatrix::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-6);
  // Direct check at a pair of points: int K(x,y) K(y,z) dmu(y) = K(x,z).
  const Complex x(0.4, -0.3), z(-1.0, 0.5);
  const CVector bx = m.basis(x), bz = m.basis(z);
  const Complex viaGram = bx.adjoint() * G * bz;
  CHECK(std::abs(viaGram - m.weighted(z, x)) < 1e-6);
}

TEST_CASE("Ginibre diagonal is 1/pi in the bulk") {
  const auto m = KernelModel::build(Domain::Plane, Weight::fock_gaussian(), 256);
  double worst = 0.0;
  for (double r = 0.0; r <= 5.0; r += 0.25)
    for (double t = 0.0; t < 2 * kPi; t += 0.7) worst = std::max(worst, std::abs(m.intensity(std::polar(r, t)) - 1 / kPi));
  CHECK(worst < 1e-6);
}

TEST_CASE("two-point correlation of the Ginibre kernel") {
  const auto m = KernelModel::build(Domain::Plane, Weight::fock_gaussian(), 128);
  for (double d : {0.3, 1.0, 2.0}) {
    const std::vector<Complex> pts{{0.2, 0.1}, Complex(0.2, 0.1) + std::polar(d, 0.8)};
    CHECK(k_correlation(m, pts) == doctest::Approx((1 - std::exp(-d * d)) / (kPi * kPi)).epsilon(1e-6));
  }
  const std::vector<Complex> one{{0.5, 0.5}};
  CHECK(k_correlation(m, one) == doctest::Approx(m.intensity({0.5, 0.5})).epsilon(1e-14));
  const std::vector<Complex> close{{0.5, 0.5}, {0.5 + 1e-5, 0.5}};
  CHECK(std::abs(k_correlation(m, close)) < 1e-9);
  const std::vector<Complex> dup{{0.5, 0.5}, {0.5, 0.5}};
  CHECK_THROWS_AS(k_correlation(m, dup), DegenerateInputError);
}

TEST_CASE("truncated Bergman kernel converges to the closed form") {
  for (double alpha : {0.0, 1.0}) {
    const Complex z(0.5, 0.3), w(-0.2, 0.6);
    const Complex exact = (alpha + 1) / kPi * std::pow(1.0 - z * std::conj(w), -(alpha + 2));
    double prev = 1e300;
    for (int N : {16, 32, 64, 128}) {
      const auto m = KernelModel::build(Domain::UnitDisc, Weight::bergman(alpha), N);
      const double err = std::abs(m.kernel(z, w) - exact);
      // Monotone until the error reaches roundoff.
      CHECK((err < prev || err < 1e-15));
      prev = err;
    }
    CHECK(prev < 1e-10);
  }
  const auto m = KernelModel::build(Domain::UnitDisc, Weight::bergman(0.0), 200);
  CHECK(m.kernel({0, 0}, {0, 0}).real() == doctest::Approx(1 / kPi).epsilon(1e-14));
}

TEST_CASE("Christ scan on Fock kernels") {
  const auto m = KernelModel::build(Domain::Plane, Weight::fock_gaussian(), 128);
  const auto grid = square_grid(4.0, 0.5);
  const ChristScan s = christ_bound_scan(m, grid, 0.5);
  CHECK(s.maxDiagonal == doctest::Approx(1 / kPi).epsilon(1e-8));
  // |K|^2 / (K K) = exp(-|z-w|^2) for Ginibre.
  CHECK(s.decayRate == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(s.pairs > 0);
  const auto m1 = KernelModel::build(Domain::Plane, Weight::fock_radial(1.0), 96);
  const ChristScan s1 = christ_bound_scan(m1, square_grid(6.0, 0.75), 0.5);
  CHECK(std::isfinite(s1.maxDiagonal));
  CHECK(s1.maxDiagonal > 0.0);
}

TEST_CASE("build and evaluation errors") {
  CHECK_THROWS_AS(KernelModel::build(Domain::UnitDisc, Weight::fock_gaussian(), 4), ConfigError);
  CHECK_THROWS_AS(KernelModel::build(Domain::Plane, Weight::bergman(0.0), 4), ConfigError);
  CHECK_THROWS_AS(Weight::fock_radial(0.0), ConfigError);
  CHECK_THROWS_AS(Weight::bergman(-1.0), ConfigError);
  CHECK_THROWS_AS(Weight(TabulatedRadial{{0.0, 2.0, 1.0}, {0, 0, 0}}), ConfigError);
  const auto d = KernelModel::build(Domain::UnitDisc, Weight::bergman(0.0), 4);
  CHECK_THROWS_AS(d.kernel({1.0, 0.0}, {0, 0}), DomainError);
  const Weight t(TabulatedRadial{{0.0, 1.0, 2.0}, {0, -1, -4}});
  CHECK_THROWS_AS(t.log_density(2.5), DomainError);
  QuadratureSpec bad;
  bad.radialNodes = 4;
  CHECK_THROWS_AS(KernelModel::build(Domain::Plane, Weight::fock_gaussian(), 4, bad), ConfigError);
}

TEST_CASE("expected_beyond matches quadrature of the diagonal") {
  const auto m = KernelModel::build(Domain::Plane, Weight::fock_gaussian(), 20);
  const double R = 3.5;
  CHECK(m.expected_beyond(R) == doctest::Approx(expected_count(m, Region::outside(R))).epsilon(1e-8));
  // Closed form: sum_n Q(n+1, R^2).
  double q = 0.0;
  for (int n = 0; n < 20; ++n) q += boost::math::gamma_q(n + 1.0, R * R);
  CHECK(m.expected_beyond(R) == doctest::Approx(q).epsilon(1e-12));
}
