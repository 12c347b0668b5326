// One PASS/FAIL line per acceptance criterion. Exit status is 0 only if all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>

#include "palmdpp/errors.hpp"
#include "palmdpp/experiments.hpp"
#include "palmdpp/kernel_model.hpp"
#include "palmdpp/palm.hpp"
#include "support/cli_support.hpp"

using namespace palmdpp;

namespace {

struct Outcome {
  bool pass = false;
  std::string note;
};

KernelModel fock(int n) { return KernelModel::build(Domain::Plane, Weight::fock_gaussian(), n); }

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

std::string failed_checks(const ExperimentReport& r) {
  std::string s;
  for (const auto& v : r.verdicts)
    if (!v.pass) s += (s.empty() ? "" : "; ") + v.check + " " + v.measure + "=" + sci(v.value);
  return s.empty() ? "verdicts: " + std::to_string(r.verdicts.size()) : s;
}

Outcome from_report(const ExperimentReport& r) { return {r.all_pass(), failed_checks(r)}; }

Outcome ginibre_diagonal() {
  const auto m = fock(256);
  double worst = 0.0;
  for (double r = 0.0; r <= 5.0; r += 0.1)
    for (double t = 0.0; t < 2 * kPi; t += 0.3) worst = std::max(worst, std::abs(m.intensity(std::polar(r, t)) - 1 / kPi));
  return {worst < 1e-6, "max deviation " + sci(worst)};
}

Outcome monomial_norms_tabulated() {
  double worst = 0.0;
  for (auto [alpha, R, h] : {std::tuple{1.0, 200.0, 1e-3}, std::tuple{1.5, 30.0, 2e-4}, std::tuple{2.0, 14.0, 2e-4}}) {
    TabulatedRadial t;
    const int n = static_cast<int>(std::ceil(R / h));
    for (int i = 0; i <= n; ++i) {
      const double r = R * i / n;
      t.radii.push_back(r);
      t.logWeight.push_back(-std::pow(r, alpha));
    }
    const auto tab = log_monomial_norms_sq(Weight(t), 33);
    const auto ana = log_monomial_norms_sq(Weight::fock_radial(alpha), 33);
    for (int k = 0; k <= 32; ++k) {
      // ||z^k||^2 = (2 pi / alpha) Gamma((2k + 2) / alpha).
      const double exact = std::log(2 * kPi / alpha) + std::lgamma((2.0 * k + 2.0) / alpha);
      worst = std::max({worst, std::abs(std::expm1(tab[k] - exact)), std::abs(std::expm1(ana[k] - exact))});
    }
  }
  return {worst < 1e-8, "max relative error " + sci(worst)};
}

Outcome palm_downdate_checks() {
  const auto m = fock(32);
  const PalmAnchor a{{{0, 0}, {1, 0.5}, {-0.7, 1.2}}};
  const auto p = palm_downdate(m, a);
  const auto rev = palm_downdate(m, PalmAnchor{{a.points[2], a.points[1], a.points[0]}});
  double vanish = 0.0, order = 0.0, idem = 0.0;
  const auto again = palm_downdate_once(p, a.points[1]);
  for (int i = 0; i < 12; ++i) {
    const Complex y = std::polar(0.35 * i, 2.4 * i);
    for (const auto& q : a.points) vanish = std::max(vanish, std::abs(p.weighted(q, y)));
    for (int k = 0; k < 12; ++k) {
      const Complex z = std::polar(0.3 * k, -1.3 * k);
      order = std::max(order, std::abs(p.weighted(z, y) - rev.weighted(z, y)));
      idem = std::max(idem, std::abs(p.weighted(z, y) - again.weighted(z, y)));
    }
  }
  const double trace = expected_count(p, Region::everything());
  const bool ok = p.rank() == 29 && vanish < 1e-10 && order < 1e-10 && idem < 1e-10 && std::abs(trace - 29.0) < 1e-8;
  char buf[200];
  std::snprintf(buf, sizeof buf, "rank %d, anchor residual %.2e, order %.2e, idempotence %.2e, trace %.10f", p.rank(),
                vanish, order, idem, trace);
  return {ok, buf};
}

Outcome determinant_identity() {
  DetSweepInput in{fock(16),
                   {DetPair{0.5, Region::disk(1.0)}, DetPair{2.0, Region::annulus(0.5, 1.5)},
                    DetPair{0.0, Region::disk(0.5)}}};
  return from_report(det_identity_sweep(in));
}

Outcome rn_disc() {
  RnVerifyInput in{KernelModel::build(Domain::UnitDisc, Weight::bergman(0.0), 64), {{0.4, 0}}, {}};
  in.stabilityRank = 128;
  return from_report(rn_verify(in));
}

Outcome rn_plane() {
  RnVerifyInput in{fock(64), {{1, 0}}, {{0, 0}}};
  return from_report(rn_verify(in));
}

Outcome rigidity() {
  RigidityInput in{fock(128)};
  in.replicas = 4000;
  return from_report(rigidity_variance(in));
}

Outcome blaschke() { return from_report(blaschke_divergence(BlaschkeInput{})); }

Outcome moduli() { return from_report(moduli_law_check(ModuliInput{})); }

Outcome flatcut() {
  FlatCutInput in{fock(64), GSpec::rational({{1, 0}}, {{0, 0}}), RadiusSchedule{{3, 4.5, 6.75}}};
  return from_report(flat_cut_trend(in));
}

Outcome cli_determinism() {
  using namespace palmdpp::testing;
  int mismatches = 0, shapeMismatches = 0, bad = 0;
  for (const char* name : golden_names()) {
    const std::string base = golden_dir() + "/" + name;
    const auto a = run_binary("experiment --config " + base + ".config.json");
    const auto b = run_binary("--threads 1 experiment --config " + base + ".config.json");
    if (a.exitCode != 0 || b.exitCode != 0) {
      ++bad;
      continue;
    }
    mismatches += a.out != b.out;
    shapeMismatches += shape_of(nlohmann::ordered_json::parse(a.out)) !=
                       nlohmann::ordered_json::parse(read_file(base + ".shape.json"));
  }
  return {mismatches == 0 && shapeMismatches == 0 && bad == 0,
          std::to_string(golden_names().size()) + " reports, " + std::to_string(mismatches) + " byte mismatches, " +
              std::to_string(shapeMismatches) + " shape mismatches, " + std::to_string(bad) + " failed runs"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Ginibre diagonal equals 1/pi in the bulk (N=256)", ginibre_diagonal},
      {"tabulated monomial norms (alpha 1, 1.5, 2; n <= 32)", monomial_norms_tabulated},
      {"Palm downdate", palm_downdate_checks},
      {"determinant identity (3 pairs, N=16)", determinant_identity},
      {"Radon-Nikodym on the disc (N=64, stability at 128)", rn_disc},
      {"Radon-Nikodym on the plane (N=64)", rn_plane},
      {"rigidity bound and variance trend (N=128)", rigidity},
      {"Blaschke divergence", blaschke},
      {"moduli law", moduli},
      {"flat-cut trend", flatcut},
      {"CLI determinism and report shapes", cli_determinism},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all = all && o.pass;
    std::printf("%s %2zu %s (%s) [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.note.c_str(), secs);
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
