#include "palmdpp/types.hpp"

#include <string>

#include "palmdpp/errors.hpp"

namespace palmdpp {

ComplexPoint::ComplexPoint(double re, double im) : re_(re), im_(im) {
  if (!std::isfinite(re) || !std::isfinite(im)) throw ConfigError("point has a non-finite component");
}

std::string_view to_string(Domain d) {
  return d == Domain::Plane ? "plane" : "disc";
}

void require_in_domain(Domain d, Complex z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw DomainError("non-finite point");
  if (d == Domain::UnitDisc && std::abs(z) >= 1.0) {
    throw DomainError("point (" + std::to_string(z.real()) + ", " + std::to_string(z.imag()) +
                      ") is not inside the unit disc");
  }
}

}  // namespace palmdpp
