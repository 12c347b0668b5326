#include "palmdpp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>

#include "palmdpp/errors.hpp"

namespace palmdpp {

namespace {

GaussRule compute_gauss(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton on P_n from the Chebyshev-like initial guess.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

double bump_tail(double t) noexcept { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

struct Patch {
  Complex at;
  double delta;
};

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw ConfigError("Gauss-Legendre rule needs at least one node");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussRule>(compute_gauss(n));
  return *slot;
}

Region Region::outside(double r) { return {r, std::numeric_limits<double>::infinity()}; }
Region Region::everything() { return {0.0, std::numeric_limits<double>::infinity()}; }

double smooth_cutoff(double x) noexcept {
  if (x <= 0.5) return 1.0;
  if (x >= 1.0) return 0.0;
  const double s = 2.0 * (x - 0.5);
  const double a = bump_tail(1.0 - s), b = bump_tail(s);
  return a / (a + b);
}

QuadratureRule build_region_rule(const IntegrationDomain& dom, const Region& region, const QuadratureSpec& spec,
                                 int minAngular, std::span<const SingularPoint> singular) {
  QuadratureRule rule;
  const double a = std::max(0.0, region.inner);
  const double b = std::min(region.outer, dom.edge);
  if (!(b > a)) return rule;

  // Patch radii: well inside the region, the domain, and away from each other.
  std::vector<Patch> patches;
  for (const auto& s : singular) {
    const double rs = std::abs(s.at);
    if (!(rs >= a && rs < b)) continue;
    double delta = 0.5;
    for (const auto& o : singular)
      if (o.at != s.at) delta = std::min(delta, 0.45 * std::abs(o.at - s.at));
    if (a > 0.0) delta = std::min(delta, 0.45 * (rs - a));
    delta = std::min(delta, 0.45 * (b - rs));
    if (!(delta >= 1e-6)) throw QuadratureError("singular point too close to another singular point or region edge");
    patches.push_back({s.at, delta});
  }

  std::vector<double> breaks{a, b};
  if (dom.graded) {
    for (double r = 0.125; r < 0.5; r += 0.125) breaks.push_back(r);
    for (int k = 1; k <= dom.gradedLevels; ++k) breaks.push_back(dom.edge * (1.0 - std::ldexp(1.0, -k)));
  } else {
    for (double r = 1.0; r < dom.edge; r += 1.0) breaks.push_back(r);
  }
  for (const auto& p : patches) {
    const double rs = std::abs(p.at);
    const double lo = std::max(a, rs - p.delta), hi = std::min(b, rs + p.delta);
    const int pieces = static_cast<int>(std::ceil((hi - lo) / (0.5 * p.delta)));
    for (int i = 0; i <= pieces; ++i) breaks.push_back(lo + (hi - lo) * i / pieces);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(), [&](double r) { return r < a || r > b; }), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(), [](double x, double y) { return std::abs(x - y) < 1e-14; }),
               breaks.end());

  const GaussRule& gl = gauss_legendre(spec.radialNodes);
  const int baseAngular = std::max(spec.angularNodes, minAngular);

  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = breaks[i], hi = breaks[i + 1];
    int nth = baseAngular;
    for (const auto& p : patches) {
      const double rs = std::abs(p.at);
      if (hi > rs - p.delta && lo < rs + p.delta && rs > 0.0) {
        nth = std::max(nth, static_cast<int>(std::ceil(16.0 * 2.0 * kPi * (rs + p.delta) / p.delta)));
      }
    }
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    const double dth = 2.0 * kPi / nth;
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
      const double r = mid + half * gl.nodes[k];
      const double wr = gl.weights[k] * half * r * dth;
      for (int j = 0; j < nth; ++j) {
        const Complex z = std::polar(r, dth * j);
        double w = wr;
        for (const auto& p : patches) w *= 1.0 - smooth_cutoff(std::abs(z - p.at) / p.delta);
        if (w == 0.0) continue;
        rule.nodes.push_back(z);
        rule.weights.push_back(w);
      }
    }
  }

  // Local polar patches, rho = delta * t^3 so that log and 1/rho^2 * rho^2
  // type integrands are resolved.
  const int nloc = std::max(spec.angularNodes, 32);
  for (const auto& p : patches) {
    const double dth = 2.0 * kPi / nloc;
    for (int panel = 0; panel < 2; ++panel) {
      const double lo = 0.5 * panel, hi = lo + 0.5;
      const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
      for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
        const double t = mid + half * gl.nodes[k];
        const double rho = p.delta * t * t * t;
        const double jac = 3.0 * p.delta * t * t;
        const double w = gl.weights[k] * half * jac * rho * dth * smooth_cutoff(rho / p.delta);
        if (w == 0.0) continue;
        for (int j = 0; j < nloc; ++j) {
          rule.nodes.push_back(p.at + std::polar(rho, dth * (j + 0.5)));
          rule.weights.push_back(w);
        }
      }
    }
  }
  return rule;
}

}  // namespace palmdpp
