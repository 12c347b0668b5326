#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

namespace palmdpp {

using Complex = std::complex<double>;

/// A point of the plane. Components are always finite.
class ComplexPoint {
public:
  ComplexPoint() = default;
  ComplexPoint(double re, double im);
  explicit ComplexPoint(Complex z) : ComplexPoint(z.real(), z.imag()) {}

  double re() const noexcept { return re_; }
  double im() const noexcept { return im_; }
  Complex value() const noexcept { return {re_, im_}; }
  double modulus() const noexcept { return std::hypot(re_, im_); }

  friend bool operator==(const ComplexPoint&, const ComplexPoint&) = default;

private:
  double re_ = 0.0;
  double im_ = 0.0;
};

enum class Domain { Plane, UnitDisc };

std::string_view to_string(Domain d);

/// Throws DomainError if `z` may not be used with kernels on `d`.
void require_in_domain(Domain d, Complex z);

inline constexpr double kPi = std::numbers::pi;

/// Products written out so that a * conj(b) and conj(b * conj(a)) agree bit for
/// bit; kernel Hermitian symmetry relies on this.
inline Complex mul_conj(Complex a, Complex b) noexcept {
  return {a.real() * b.real() + a.imag() * b.imag(),
          a.imag() * b.real() - a.real() * b.imag()};
}

inline Complex mul(Complex a, Complex b) noexcept {
  return {a.real() * b.real() - a.imag() * b.imag(),
          a.real() * b.imag() + a.imag() * b.real()};
}

}  // namespace palmdpp
