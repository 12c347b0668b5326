#include "palmdpp/weight.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "palmdpp/errors.hpp"
#include "palmdpp/quadrature.hpp"

namespace palmdpp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void validate(const TabulatedRadial& t) {
  if (t.radii.size() < 2) throw ConfigError("tabulated weight needs at least two radii");
  if (t.radii.size() != t.logWeight.size()) throw ConfigError("tabulated weight: radii and logWeight lengths differ");
  if (t.radii.front() != 0.0) throw ConfigError("tabulated weight: radii must start at 0");
  for (std::size_t i = 0; i < t.radii.size(); ++i) {
    if (!std::isfinite(t.radii[i]) || !std::isfinite(t.logWeight[i]))
      throw ConfigError("tabulated weight: non-finite entry");
    if (i > 0 && !(t.radii[i] > t.radii[i - 1])) throw ConfigError("tabulated weight: radii not strictly increasing");
  }
}

double interp_log(const TabulatedRadial& t, double r) {
  if (r < 0.0 || r > t.radii.back()) {
    std::ostringstream os;
    os << "radius " << r << " is outside the tabulated range [0, " << t.radii.back() << "]";
    throw DomainError(os.str());
  }
  auto it = std::upper_bound(t.radii.begin(), t.radii.end(), r);
  std::size_t hi = static_cast<std::size_t>(it - t.radii.begin());
  if (hi >= t.radii.size()) return t.logWeight.back();
  const std::size_t lo = hi - 1;
  const double s = (r - t.radii[lo]) / (t.radii[hi] - t.radii[lo]);
  return t.logWeight[lo] + s * (t.logWeight[hi] - t.logWeight[lo]);
}

// log of 2*pi * int_0^R r^(2n+1) w(r) dr for all n, with m Gauss points per table
// segment. Each n is scaled by its largest node value to stay in range.
std::vector<double> tabulated_log_norms(const TabulatedRadial& t, int count, int m) {
  const GaussRule& rule = gauss_legendre(m);
  const std::size_t segs = t.radii.size() - 1;
  std::vector<double> peak(count, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i <= segs; ++i) {
    const double r = t.radii[i];
    if (r <= 0.0) continue;
    const double lr = std::log(r);
    for (int n = 0; n < count; ++n) peak[n] = std::max(peak[n], (2 * n + 1) * lr + t.logWeight[i]);
  }
  std::vector<double> acc(count, 0.0);
  for (std::size_t i = 0; i < segs; ++i) {
    const double a = t.radii[i], b = t.radii[i + 1];
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    const double slope = (t.logWeight[i + 1] - t.logWeight[i]) / (b - a);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double r = mid + half * rule.nodes[k];
      const double lw = t.logWeight[i] + slope * (r - a);
      const double lr = std::log(r);
      const double wk = rule.weights[k] * half;
      for (int n = 0; n < count; ++n) acc[n] += wk * std::exp((2 * n + 1) * lr + lw - peak[n]);
    }
  }
  std::vector<double> out(count);
  for (int n = 0; n < count; ++n) {
    if (!(acc[n] > 0.0) || !std::isfinite(acc[n])) throw QuadratureError("tabulated weight has no mass for some monomial");
    out[n] = std::log(2.0 * kPi) + peak[n] + std::log(acc[n]);
  }
  return out;
}

}  // namespace

Weight::Weight(Kind kind) : kind_(std::move(kind)) {
  std::visit(overloaded{
                 [](const FockRadialAlpha& f) {
                   if (!(f.alpha > 0.0) || !std::isfinite(f.alpha)) throw ConfigError("fock_radial: alpha must be > 0");
                 },
                 [](const FockGaussian&) {},
                 [](const BergmanClassical& b) {
                   if (!(b.alpha > -1.0) || !std::isfinite(b.alpha))
                     throw ConfigError("bergman_classical: alpha must be > -1");
                 },
                 [](const TabulatedRadial& t) { validate(t); },
             },
             kind_);
}

bool Weight::is_fock() const noexcept {
  return std::holds_alternative<FockRadialAlpha>(kind_) || std::holds_alternative<FockGaussian>(kind_);
}
bool Weight::is_bergman() const noexcept { return std::holds_alternative<BergmanClassical>(kind_); }
bool Weight::is_tabulated() const noexcept { return std::holds_alternative<TabulatedRadial>(kind_); }

bool Weight::compatible_with(Domain d) const noexcept {
  if (is_fock()) return d == Domain::Plane;
  if (is_bergman()) return d == Domain::UnitDisc;
  const auto& t = std::get<TabulatedRadial>(kind_);
  return d == Domain::Plane || t.radii.back() <= 1.0;
}

double Weight::support_radius() const noexcept {
  if (is_fock()) return std::numeric_limits<double>::infinity();
  if (is_bergman()) return 1.0;
  return std::get<TabulatedRadial>(kind_).radii.back();
}

double Weight::log_density(double r) const {
  return std::visit(overloaded{
                        [r](const FockRadialAlpha& f) { return -std::pow(r, f.alpha); },
                        [r](const FockGaussian&) { return -r * r; },
                        [r](const BergmanClassical& b) {
                          if (r >= 1.0) throw DomainError("Bergman weight evaluated outside the unit disc");
                          return b.alpha == 0.0 ? 0.0 : b.alpha * std::log1p(-r * r);
                        },
                        [r](const TabulatedRadial& t) { return interp_log(t, r); },
                    },
                    kind_);
}

std::string Weight::name() const {
  return std::visit(overloaded{
                        [](const FockRadialAlpha&) { return std::string("fock_radial"); },
                        [](const FockGaussian&) { return std::string("fock_gaussian"); },
                        [](const BergmanClassical&) { return std::string("bergman_classical"); },
                        [](const TabulatedRadial&) { return std::string("tabulated"); },
                    },
                    kind_);
}

std::vector<double> log_monomial_norms_sq(const Weight& weight, int count) {
  if (count < 1) throw ConfigError("monomial_norms: need at least one monomial");
  std::vector<double> out(count);
  const double lpi = std::log(kPi);
  std::visit(overloaded{
                 [&](const FockRadialAlpha& f) {
                   for (int n = 0; n < count; ++n)
                     out[n] = std::log(2.0 * kPi / f.alpha) + std::lgamma((2.0 * n + 2.0) / f.alpha);
                 },
                 [&](const FockGaussian&) {
                   for (int n = 0; n < count; ++n) out[n] = lpi + std::lgamma(n + 1.0);
                 },
                 [&](const BergmanClassical& b) {
                   const double la = std::lgamma(b.alpha + 1.0);
                   for (int n = 0; n < count; ++n)
                     out[n] = lpi + std::lgamma(n + 1.0) + la - std::lgamma(n + b.alpha + 2.0);
                 },
                 [&](const TabulatedRadial& t) {
                   const int m = 4;
                   auto coarse = tabulated_log_norms(t, count, m);
                   auto fine = tabulated_log_norms(t, count, 2 * m);
                   for (int n = 0; n < count; ++n) {
                     if (std::abs(std::expm1(coarse[n] - fine[n])) > 1e-9) {
                       std::ostringstream os;
                       os << "monomial norm quadrature did not converge for n=" << n;
                       throw QuadratureError(os.str());
                     }
                   }
                   out = std::move(fine);
                 },
             },
             weight.kind());
  return out;
}

std::vector<double> monomial_norms(const Weight& weight, int count) {
  auto logs = log_monomial_norms_sq(weight, count);
  std::vector<double> out(count);
  for (int n = 0; n < count; ++n) {
    out[n] = std::exp(0.5 * logs[n]);
    if (!std::isfinite(out[n])) throw NumericalError("monomial norm overflows a double");
  }
  return out;
}

}  // namespace palmdpp
