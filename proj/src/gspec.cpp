#include "palmdpp/gspec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "palmdpp/errors.hpp"

namespace palmdpp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const std::vector<Complex> kNone;

bool same_set(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  if (a.size() != b.size()) return false;
  for (const auto& x : a)
    if (std::none_of(b.begin(), b.end(), [&](Complex y) { return x == y; })) return false;
  return true;
}

void check_distinct(const std::vector<Complex>& pts, const char* what) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!std::isfinite(pts[i].real()) || !std::isfinite(pts[i].imag()))
      throw ConfigError(std::string(what) + " points must be finite");
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (pts[i] == pts[j]) throw DegenerateInputError(std::string(what) + " points must be distinct");
  }
}

}  // namespace

GSpec::GSpec(Kind kind) : kind_(std::move(kind)) {
  if (const auto* c = std::get_if<CustomLogG>(&kind_)) {
    if (c->radii.size() < 2 || c->radii.size() != c->logG.size())
      throw ConfigError("custom log g needs at least two (radius, value) pairs");
    for (std::size_t i = 0; i < c->radii.size(); ++i) {
      if (!std::isfinite(c->radii[i]) || !std::isfinite(c->logG[i]))
        throw ConfigError("custom log g table has non-finite entries");
      if (i > 0 && !(c->radii[i] > c->radii[i - 1])) throw ConfigError("custom log g radii must increase");
    }
    if (c->radii.front() != 0.0) throw ConfigError("custom log g radii must start at 0");
    identity_ = std::all_of(c->logG.begin(), c->logG.end(), [](double v) { return v == 0.0; });
    return;
  }
  check_distinct(zeros(), "zero");
  check_distinct(poles(), "pole");
  identity_ = same_set(zeros(), poles());
}

const std::vector<Complex>& GSpec::zeros() const {
  if (const auto* r = std::get_if<RationalModulusSq>(&kind_)) return r->p;
  if (const auto* b = std::get_if<BlaschkeModulusSq>(&kind_)) return b->p;
  return kNone;
}

const std::vector<Complex>& GSpec::poles() const {
  if (const auto* r = std::get_if<RationalModulusSq>(&kind_)) return r->q;
  if (const auto* b = std::get_if<BlaschkeModulusSq>(&kind_)) return b->q;
  return kNone;
}

double GSpec::log_g(Complex z) const {
  if (identity_) return 0.0;
  if (const auto* c = std::get_if<CustomLogG>(&kind_)) {
    const double r = std::abs(z);
    if (r >= c->radii.back()) return c->logG.back();
    const auto it = std::upper_bound(c->radii.begin(), c->radii.end(), r);
    const std::size_t i = static_cast<std::size_t>(it - c->radii.begin()) - 1;
    const double t = (r - c->radii[i]) / (c->radii[i + 1] - c->radii[i]);
    return c->logG[i] + t * (c->logG[i + 1] - c->logG[i]);
  }
  const bool disc = std::holds_alternative<BlaschkeModulusSq>(kind_);
  // Poles win over zeros so a coincidence never yields NaN.
  double lp = 0.0;
  for (const auto& a : poles()) {
    const double d = std::norm(z - a);
    if (d == 0.0) return kInf;
    lp += std::log(d);
    if (disc) lp -= std::log(std::norm(1.0 - std::conj(a) * z));
  }
  double lz = 0.0;
  for (const auto& a : zeros()) {
    const double d = std::norm(z - a);
    if (d == 0.0) return -kInf;
    lz += std::log(d);
    if (disc) lz -= std::log(std::norm(1.0 - std::conj(a) * z));
  }
  return lz - lp;
}

double GSpec::operator()(Complex z) const {
  const double l = log_g(z);
  if (l == kInf) return kInf;
  return std::exp(l);
}

void GSpec::check_domain(Domain d) const {
  if (std::holds_alternative<RationalModulusSq>(kind_) && d != Domain::Plane && !is_identity())
    throw ConfigError("rational g is defined on the plane");
  if (std::holds_alternative<BlaschkeModulusSq>(kind_)) {
    if (d != Domain::UnitDisc) throw ConfigError("Blaschke g is defined on the disc");
    for (const auto& a : zeros())
      if (!(std::abs(a) < 1.0)) throw ConfigError("Blaschke zeros must lie inside the disc");
    for (const auto& a : poles())
      if (!(std::abs(a) < 1.0)) throw ConfigError("Blaschke poles must lie inside the disc");
  }
}

std::vector<SingularPoint> GSpec::singular_points() const {
  std::vector<SingularPoint> out;
  for (const auto& a : zeros()) out.push_back({a});
  for (const auto& a : poles())
    if (std::none_of(out.begin(), out.end(), [&](const SingularPoint& s) { return s.at == a; })) out.push_back({a});
  return out;
}

double GSpec::singular_radius() const {
  double r = 0.0;
  for (const auto& a : zeros()) r = std::max(r, std::abs(a));
  for (const auto& a : poles()) r = std::max(r, std::abs(a));
  return r;
}

std::string GSpec::name() const {
  if (std::holds_alternative<RationalModulusSq>(kind_)) return "rational";
  if (std::holds_alternative<BlaschkeModulusSq>(kind_)) return "blaschke";
  return "custom";
}

}  // namespace palmdpp
