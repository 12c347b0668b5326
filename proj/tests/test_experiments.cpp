#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "palmdpp/errors.hpp"
#include "palmdpp/experiments.hpp"

using namespace palmdpp;

namespace {

KernelModel fock(int n) { return KernelModel::build(Domain::Plane, Weight::fock_gaussian(), n); }

std::size_t count_failed(const ExperimentReport& r) {
  return std::count_if(r.verdicts.begin(), r.verdicts.end(), [](const Verdict& v) { return !v.pass; });
}

}  // namespace

TEST_CASE("rn-verify with p == q has unit weights") {
  RnVerifyInput in{fock(16), {{0.5, 0.5}}, {{0.5, 0.5}}};
  in.replicas = 2000;
  in.seed = 4;
  const auto rep = rn_verify(in);
  CHECK(rep.all_pass());
  const auto& cols = rep.tableColumns;
  const auto lw = std::find(cols.begin(), cols.end(), "logWeight") - cols.begin();
  REQUIRE(lw < static_cast<long>(cols.size()));
  for (const auto& row : rep.tableRows) CHECK(row[lw] == 0.0);
  // Direct and reweighted estimates use the same stream, so they coincide.
  REQUIRE(rep.estimates.size() % 2 == 0);
  for (std::size_t i = 0; i < rep.estimates.size(); i += 2)
    CHECK(rep.estimates[i].estimate.mean == rep.estimates[i + 1].estimate.mean);
}

TEST_CASE("rn-verify preconditions") {
  RnVerifyInput in{fock(16), {{0.5, 0}, {1, 0}}, {{0, 0}}};
  in.replicas = 100;
  CHECK_THROWS_AS(rn_verify(in), PreconditionError);
  in.q = {{0, 0}, {0, 0}};
  CHECK_THROWS_AS(rn_verify(in), DegenerateInputError);
  in.q = {{0, 0}, {0, 1}};
  in.replicas = 2;
  CHECK_THROWS_AS(rn_verify(in), PreconditionError);
}

TEST_CASE("rn-verify on the plane at small size") {
  RnVerifyInput in{fock(16), {{1, 0}}, {{0, 0}}};
  in.replicas = 20000;
  in.seed = 11;
  const auto rep = rn_verify(in);
  CHECK(count_failed(rep) == 0);
  for (const auto& v : rep.verdicts) CHECK(v.criterion == "radon-nikodym");
  CHECK(rep.details["runs"].size() == 1);
}

TEST_CASE("rigidity bump shape") {
  for (double eps : {0.5, 0.1, 0.02}) {
    const RigidityBump b(eps, 1.0);
    CHECK(b.value(0.0) == 1.0);
    CHECK(b.value(0.5) == 1.0);
    CHECK(b.support_end() == doctest::Approx(std::exp(1.0 / eps)));
    CHECK(b.value(b.support_end()) == 0.0);
    CHECK(b.value(2.0 * b.support_end()) == 0.0);
    double prev = 1.0;
    for (double t = std::log(0.25); t < 1.0 / eps + 1.0; t += 0.01) {
      const double r = std::exp(t);
      const double v = b.value(r);
      CHECK(v <= prev + 1e-15);
      CHECK(v >= 0.0);
      prev = v;
      CHECK(std::abs(b.derivative(r)) <= eps / r * (1 + 1e-12));
      const double h = 1e-6 * r;
      CHECK(b.derivative(r) == doctest::Approx((b.value(r + h) - b.value(r - h)) / (2 * h)).epsilon(1e-5).scale(eps / r));
    }
  }
  CHECK_THROWS_AS(RigidityBump(0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(RigidityBump(0.5, -1.0), ConfigError);
}

TEST_CASE("rigidity gradient integral against adaptive quadrature") {
  for (double eps : {0.5, 0.1, 0.02}) {
    const RigidityBump b(eps, 2.0);
    // In t = log r: |phi'(r)|^2 r dr = |d phi / dt|^2 dt.
    auto f = [&](double t) {
      const double r = std::exp(t);
      const double d = b.derivative(r) * r;
      return d * d;
    };
    const double t0 = std::log(1.0), t1 = std::log(2.0), t3 = std::log(b.support_end());
    const double t2 = t3 - std::log(2.0);
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double oracle = GK::integrate(f, t0, t1, 15, 1e-13) + GK::integrate(f, t1, t2, 15, 1e-13) +
                          GK::integrate(f, t2, t3, 15, 1e-13);
    CHECK(b.gradient_integral() == doctest::Approx(oracle).epsilon(1e-10));
    CHECK(b.gradient_integral() <= eps + eps * eps * std::log(4.0));
  }
}

TEST_CASE("rigidity sweep verdicts") {
  RigidityInput in{fock(64)};
  in.replicas = 4000;
  in.seed = 3;
  const auto rep = rigidity_variance(in);
  CHECK(rep.all_pass());
  CHECK(rep.details["sweep"].size() == 3);
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& row : rep.details["sweep"]) {
    CHECK(row["variance"].get<double>() < prev);
    prev = row["variance"].get<double>();
    CHECK(row["varianceToDirichlet"].get<double>() > 0.0);
  }
  CHECK(rep.estimates.size() == 3);
}

TEST_CASE("Blaschke partial sums") {
  CHECK(blaschke_partial_sum(0) == 0.0);
  CHECK(blaschke_partial_sum(1) == doctest::Approx(1.0 / 3.0));
  CHECK(blaschke_partial_sum(2) == doctest::Approx(1.0 / 3.0 + 1.0 / 5.0));
  // sum_{k=1..K} 1/(2k+1) = H_{2K+1} - H_K / 2 - 1.
  auto H = [](int n) { return boost::math::digamma(n + 1.0) + std::numbers::egamma; };
  for (int K : {10, 1000, 100000}) CHECK(blaschke_partial_sum(K) == doctest::Approx(H(2 * K + 1) - 0.5 * H(K) - 1).epsilon(1e-12));

  BlaschkeInput in;
  in.K = {100, 1000};
  in.replicas = 2000;
  const auto rep = blaschke_divergence(in);
  CHECK(rep.all_pass());
  CHECK(rep.details["slope"].get<double>() == doctest::Approx(0.5).epsilon(0.05));
  in.K = {5};
  CHECK_THROWS_AS(blaschke_divergence(in), PreconditionError);
}

TEST_CASE("moduli law") {
  ModuliInput in;
  in.N = 1;
  in.replicas = 3000;
  const auto one = moduli_law_check(in);
  CHECK(one.all_pass());
  CHECK(one.details.contains("analytic"));
  in.N = 6;
  const auto a = moduli_law_check(in), b = moduli_law_check(in);
  CHECK(a.to_json().dump() == b.to_json().dump());
  CHECK(a.details["perOrder"].size() == 6);
  in.N = 0;
  CHECK_THROWS_AS(moduli_law_check(in), PreconditionError);
}

TEST_CASE("order separation") {
  OrderSeparationInput in{fock(12), {{0, 0}, {1, 0}}, {{0.5, 0.5}}};
  in.replicas = 300;
  const auto rep = order_separation(in);
  CHECK(rep.all_pass());
  CHECK(rep.details["p"]["totalCount"] == 10);
  CHECK(rep.details["q"]["totalCount"] == 11);
  in.q = {{0.5, 0}, {0, 0.5}};
  CHECK_THROWS_AS(order_separation(in), PreconditionError);
}

TEST_CASE("determinant identity") {
  DetSweepInput in{fock(16), {DetPair{1.0, Region::disk(1.0)}, DetPair{0.5, Region::annulus(0.5, 2.0)}}};
  in.replicas = 10000;
  const auto rep = det_identity_sweep(in);
  CHECK(rep.all_pass());
  CHECK(rep.details["pairs"][0]["fredholm"].get<double>() == doctest::Approx(1.0).epsilon(1e-14));
  in.pairs = {};
  CHECK_THROWS_AS(det_identity_sweep(in), ConfigError);
}

TEST_CASE("flat cut trend") {
  FlatCutInput in{fock(64), GSpec::rational({{1, 0}}, {{0, 0}}), RadiusSchedule{{3, 4.5, 6.75}}};
  const auto rep = flat_cut_trend(in);
  CHECK(rep.all_pass());
  CHECK(rep.details["palmRank"] == 63);
  CHECK(rep.details["L"] == "inf");
}

TEST_CASE("report serialization") {
  BlaschkeInput in;
  in.K = {10, 20};
  in.replicas = 50;
  auto rep = blaschke_divergence(in);
  rep.runtimeSeconds = 1.5;
  const auto j = rep.to_json();
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"name", "inputs", "estimates", "verdicts", "pass", "details"});
  CHECK(rep.to_json(true).contains("runtimeSeconds"));
  CHECK(j.dump() == blaschke_divergence(in).to_json().dump());
  for (const auto& v : j["verdicts"])
    for (const char* k : {"criterion", "check", "pass", "measure", "value", "threshold"}) CHECK(v.contains(k));
  for (const auto& e : j["estimates"])
    for (const char* k : {"label", "mean", "standardError", "replicas", "seed"}) CHECK(e.contains(k));

  CHECK(json_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(json_number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(json_number(std::nan("")) == "nan");
  CHECK(json_number(0.25) == 0.25);

  std::ostringstream csv;
  rep.write_table_csv(csv);
  const std::string text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(rep.tableRows.size() + 1));
}

TEST_CASE("default statistics") {
  for (Domain d : {Domain::Plane, Domain::UnitDisc}) {
    const auto s = default_statistics(d);
    CHECK(s.size() == 5);
    const double c = d == Domain::Plane ? 0.5 : 0.2, rho = d == Domain::Plane ? 2.0 : 0.5;
    CHECK(s.back().f({c, 0}) == 1.0);
    CHECK(s.back().f({c + 1.01 * rho, 0}) == 0.0);
    CHECK(s.back().f({c, 1.01 * rho}) == 0.0);
    const double x = 0.5 * rho;
    CHECK(s.back().f({c + x, 0}) == doctest::Approx(std::pow(1 - x * x / (rho * rho), 3)));
  }
}
