#pragma once

#include <span>
#include <vector>

#include "palmdpp/types.hpp"

namespace palmdpp {

/// Node layout for integrals over the model's domain. Radial direction is
/// composite Gauss-Legendre (`radialNodes` per panel), angular direction is the
/// periodic trapezoid rule with at least `angularNodes` points.
struct QuadratureSpec {
  int radialNodes = 24;
  int angularNodes = 64;
  /// Plane truncation radius. Zero or negative selects one automatically.
  double outerRadius = 0.0;
};

/// Gauss-Legendre nodes and weights on [-1, 1]. Cached per n.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

/// Integrate a scalar function over [a, b] with n-point Gauss-Legendre.
template <class F>
double integrate_gl(F&& f, double a, double b, int n) {
  const GaussRule& rule = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

/// Composite Gauss-Legendre over consecutive breakpoints.
template <class F>
double integrate_composite(F&& f, std::span<const double> breaks, int n) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) sum += integrate_gl(f, breaks[i], breaks[i + 1], n);
  return sum;
}

/// An origin-centred disk (inner == 0) or annulus inner <= |z| < outer.
/// `outer` may be +infinity, meaning "to the edge of the domain".
struct Region {
  double inner = 0.0;
  double outer = 0.0;

  static Region disk(double r) { return {0.0, r}; }
  static Region annulus(double a, double b) { return {a, b}; }
  static Region outside(double r);
  static Region everything();

  bool contains(Complex z) const noexcept {
    const double r = std::abs(z);
    return r >= inner && r < outer;
  }
};

/// A point near which integrands may be singular (zeros and poles of g,
/// anchors). Integrals are split with a smooth partition of unity and the piece
/// near the point is done in local polar coordinates with graded radii.
struct SingularPoint {
  Complex at;
};

/// Flattened 2-D rule: sum_i weights[i] * f(nodes[i]) approximates the
/// Lebesgue integral of f over the region.
struct QuadratureRule {
  std::vector<Complex> nodes;
  std::vector<double> weights;
  std::size_t size() const noexcept { return nodes.size(); }
};

/// Radial extent of the integration: [0, edge). On the disc the radial panels
/// are refined geometrically toward the edge.
struct IntegrationDomain {
  double edge = 1.0;
  bool graded = false;
  int gradedLevels = 20;
};

/// Builds the rule for `region` clipped to `dom`. `minAngular` raises the
/// angular node count, e.g. so products of basis functions integrate exactly.
/// Singular points inside the region get a local graded polar patch, blended
/// in with a smooth partition of unity.
QuadratureRule build_region_rule(const IntegrationDomain& dom, const Region& region, const QuadratureSpec& spec,
                                 int minAngular, std::span<const SingularPoint> singular = {});

/// Smooth bump: 1 on [0, 1/2], 0 on [1, inf), C-infinity in between.
double smooth_cutoff(double x) noexcept;

}  // namespace palmdpp
