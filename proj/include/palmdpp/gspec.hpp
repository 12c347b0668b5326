#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "palmdpp/quadrature.hpp"
#include "palmdpp/types.hpp"

namespace palmdpp {

/// |prod(z - p_j) / prod(z - q_j)|^2 on the plane.
struct RationalModulusSq {
  std::vector<Complex> p;
  std::vector<Complex> q;
};

/// |b_p(z) / b_q(z)|^2 on the disc, b_a(z) = prod (z - a_j) / (1 - conj(a_j) z).
struct BlaschkeModulusSq {
  std::vector<Complex> p;
  std::vector<Complex> q;
};

/// Radial log g tabulated on increasing radii, linear in between. Beyond the
/// last radius log g keeps its last value.
struct CustomLogG {
  std::vector<double> radii;
  std::vector<double> logG;
};

/// The multiplicative weight g >= 0. Evaluation at a pole gives +infinity,
/// never NaN.
class GSpec {
public:
  using Kind = std::variant<RationalModulusSq, BlaschkeModulusSq, CustomLogG>;

  explicit GSpec(Kind kind);

  static GSpec identity() { return GSpec(RationalModulusSq{}); }
  static GSpec rational(std::vector<Complex> p, std::vector<Complex> q) {
    return GSpec(RationalModulusSq{std::move(p), std::move(q)});
  }
  static GSpec blaschke(std::vector<Complex> p, std::vector<Complex> q) {
    return GSpec(BlaschkeModulusSq{std::move(p), std::move(q)});
  }

  const Kind& kind() const noexcept { return kind_; }

  double operator()(Complex z) const;
  /// log g: -infinity at zeros, +infinity at poles.
  double log_g(Complex z) const;

  /// True when g == 1 identically (no factors, p == q as sets, or a zero table).
  /// Such a g evaluates to 1 everywhere, including at the cancelled points.
  bool is_identity() const noexcept { return identity_; }
  /// Throws ConfigError if the kind does not belong on `d` (rational on the
  /// plane, Blaschke on the disc with all points inside).
  void check_domain(Domain d) const;

  const std::vector<Complex>& zeros() const;
  const std::vector<Complex>& poles() const;
  /// Zeros and poles, the points where log g is singular.
  std::vector<SingularPoint> singular_points() const;
  /// Largest modulus of a zero or pole (0 for the custom kind).
  double singular_radius() const;

  std::string name() const;

private:
  Kind kind_;
  bool identity_ = false;
};

}  // namespace palmdpp
