#pragma once

#include <string>
#include <variant>
#include <vector>

#include "palmdpp/types.hpp"

namespace palmdpp {

/// psi(z) = |z|^alpha / 2, reference measure exp(-|z|^alpha) dlambda on the plane.
struct FockRadialAlpha {
  double alpha = 2.0;
};

/// psi(z) = |z|^2 / 2: the Ginibre weight.
struct FockGaussian {};

/// omega(z) = (1 - |z|^2)^alpha on the unit disc.
struct BergmanClassical {
  double alpha = 0.0;
};

/// Radial density tabulated as log values on a strictly increasing radius grid
/// starting at 0. Interpolated linearly in log between nodes; evaluating beyond
/// the last radius is an error.
struct TabulatedRadial {
  std::vector<double> radii;
  std::vector<double> logWeight;
};

/// Reference measure data. All weights are radial, so monomials are orthogonal.
class Weight {
public:
  using Kind = std::variant<FockRadialAlpha, FockGaussian, BergmanClassical, TabulatedRadial>;

  explicit Weight(Kind kind);

  static Weight fock_gaussian() { return Weight(FockGaussian{}); }
  static Weight fock_radial(double alpha) { return Weight(FockRadialAlpha{alpha}); }
  static Weight bergman(double alpha) { return Weight(BergmanClassical{alpha}); }

  const Kind& kind() const noexcept { return kind_; }

  bool is_fock() const noexcept;
  bool is_bergman() const noexcept;
  bool is_tabulated() const noexcept;

  /// Whether the weight may be used on `d` (Fock on the plane, Bergman on the
  /// disc, tabulated on either as long as the table fits the domain).
  bool compatible_with(Domain d) const noexcept;

  /// Radius beyond which the density is undefined (infinity for Fock weights).
  double support_radius() const noexcept;

  /// log of the density of the reference measure with respect to Lebesgue
  /// measure at radius r: -2 psi(r) on the plane, log omega(r) on the disc.
  double log_density(double r) const;

  std::string name() const;

private:
  Kind kind_;
};

/// log ||z^n||^2 in L^2 of the reference measure, n = 0..count-1.
/// Closed forms for Fock and classical Bergman weights, quadrature for tables.
std::vector<double> log_monomial_norms_sq(const Weight& weight, int count);

/// ||z^n|| for n = 0..count-1. Overflows to an error for very large n; use the
/// log form internally.
std::vector<double> monomial_norms(const Weight& weight, int count);

}  // namespace palmdpp
