#include "palmdpp/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "palmdpp/errors.hpp"
#include "palmdpp/parallel.hpp"

namespace palmdpp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kChunk = 4096;
constexpr double kCoverage = 1e-3;

QuadratureRule model_rule(const KernelModel& model, const Region& region, std::span<const SingularPoint> singular) {
  return build_region_rule(model.integration_domain(), region, model.quadrature(), 2 * model.basis_size() + 2,
                           singular);
}

// Calls body(points, weights, A) on chunks of the rule; A holds basis(z_i) as
// columns.
template <class Body>
void for_chunks(const KernelModel& model, const QuadratureRule& rule, Body&& body) {
  std::vector<Complex> pts;
  std::vector<double> wts;
  for (std::size_t start = 0; start < rule.size(); start += kChunk) {
    const std::size_t end = std::min(rule.size(), start + kChunk);
    pts.assign(rule.nodes.begin() + static_cast<std::ptrdiff_t>(start),
               rule.nodes.begin() + static_cast<std::ptrdiff_t>(end));
    wts.assign(rule.weights.begin() + static_cast<std::ptrdiff_t>(start),
               rule.weights.begin() + static_cast<std::ptrdiff_t>(end));
    const CMatrix A = model.basis_matrix(pts);
    body(pts, wts, A);
  }
}

double checked(double v) {
  if (!std::isfinite(v)) throw QuadratureError("integrand is not finite at a quadrature node");
  return v;
}

// Keeps the singular points that fall inside the region.
std::vector<SingularPoint> inside(std::span<const SingularPoint> s, const Region& region, double edge) {
  std::vector<SingularPoint> out;
  for (const auto& p : s) {
    const double r = std::abs(p.at);
    if (r >= region.inner && r < std::min(region.outer, edge)) out.push_back(p);
  }
  return out;
}

// Order of vanishing of the diagonal at z: 0 or 2 (a Palm point). Anything
// else is reported as non-integrable.
int diagonal_vanishing_order(const KernelModel& model, Complex z) {
  const double scale = model.features(z).squaredNorm();
  const double d0 = model.intensity(z);
  if (d0 > 1e-12 * scale) return 0;
  double h = 1e-3;
  if (model.domain() == Domain::UnitDisc) h *= std::min(1.0, 1.0 - std::abs(z));
  const double a = model.intensity(z + h) / (h * h);
  const double b = model.intensity(z + 0.1 * h) / (0.01 * h * h);
  if (!(a > 0.0) || std::abs(a - b) > 0.05 * a) {
    std::ostringstream os;
    os << "diagonal does not vanish quadratically at " << z.real() << "," << z.imag();
    throw QuadratureError(os.str());
  }
  return 2;
}

}  // namespace

MCEstimate mc_estimate(std::span<const double> values, std::uint64_t seed) {
  if (values.size() < 2) throw PreconditionError("an MC estimate needs at least two replicas");
  const double n = static_cast<double>(values.size());
  const double mean = pairwise_sum(values.data(), values.size()) / n;
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
  const double var = pairwise_sum(sq) / (n - 1.0);
  return {mean, std::sqrt(var / n), values.size(), seed};
}

RadiusSchedule default_schedule(const KernelModel& model, double singularRadius) {
  RadiusSchedule s;
  const double target = kCoverage * model.rank();
  if (model.domain() == Domain::Plane) {
    const double edge = model.integration_domain().edge;
    for (double R = 3.0;; R *= 1.5) {
      if (R < singularRadius + 0.5) continue;
      s.radii.push_back(R);
      if (s.radii.size() >= 3 && (model.expected_beyond(R) <= target || R >= edge)) break;
    }
  } else {
    const double margin = 0.1 * (1.0 - singularRadius);
    for (int j = 1; j <= 52; ++j) {
      const double r = 1.0 - std::ldexp(1.0, -j);
      if (r < singularRadius + margin) continue;
      s.radii.push_back(r);
      if (s.radii.size() >= 3 && model.expected_beyond(r) <= target) break;
    }
  }
  return s;
}

void validate_schedule(const KernelModel& model, const RadiusSchedule& schedule, bool requireCoverage) {
  const auto& r = schedule.radii;
  if (r.size() < 3) throw ConfigError("a radius schedule needs at least three radii");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0.0) || !std::isfinite(r[i])) throw ConfigError("schedule radii must be positive and finite");
    if (i > 0 && !(r[i] > r[i - 1])) throw ConfigError("schedule radii must increase strictly");
  }
  if (model.domain() == Domain::UnitDisc && !(r.back() < 1.0)) throw ConfigError("disc schedule radii must be < 1");
  if (!requireCoverage) return;
  const double beyond = model.expected_beyond(r.back());
  if (beyond > kCoverage * model.rank()) {
    std::ostringstream os;
    os << "last schedule radius " << r.back() << " leaves " << beyond << " expected points outside";
    throw ConfigError(os.str());
  }
}

double additive_functional(const Configuration& config, const PointFunction& f) {
  double s = 0.0;
  for (const auto& z : config.points) {
    const double v = f(z);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "additive functional is not finite at " << z.real() << "," << z.imag();
      throw EvaluationError(os.str());
    }
    s += v;
  }
  return s;
}

ExpectedValue expected_additive(const KernelModel& model, const PointFunction& f, const Region& region,
                                std::span<const SingularPoint> singular) {
  const auto sing = inside(singular, region, model.integration_domain().edge);
  const QuadratureRule rule = model_rule(model, region, sing);
  double sum = 0.0;
  for_chunks(model, rule, [&](const std::vector<Complex>& pts, const std::vector<double>& wts, const CMatrix& A) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double d = A.col(static_cast<Eigen::Index>(i)).squaredNorm();
      if (d == 0.0) continue;
      sum += checked(wts[i] * f(pts[i]) * d);
    }
  });
  ExpectedValue out;
  out.value = sum;
  if (model.domain() == Domain::Plane && region.outer > model.integration_domain().edge)
    out.tailMass = model.expected_beyond(model.integration_domain().edge);
  return out;
}

double var_pi_f(const KernelModel& model, const PointFunction& f, std::span<const SingularPoint> singular) {
  const int M = model.rank();
  if (M == 0) return 0.0;
  const auto sing = inside(singular, Region::everything(), model.integration_domain().edge);
  const QuadratureRule rule = model_rule(model, Region::everything(), sing);
  // One pass: moments of f against the diagonal, and the Grams of f and 1.
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  CMatrix G = CMatrix::Zero(M, M), G1 = CMatrix::Zero(M, M);
  for_chunks(model, rule, [&](const std::vector<Complex>& pts, const std::vector<double>& wts, const CMatrix& A) {
    CMatrix B = A, B1 = A;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto col = static_cast<Eigen::Index>(i);
      const double fv = checked(f(pts[i]));
      const double d = A.col(col).squaredNorm();
      s0 += wts[i] * d;
      s1 += wts[i] * fv * d;
      s2 += wts[i] * fv * fv * d;
      B.col(col) *= wts[i] * fv;
      B1.col(col) *= wts[i];
    }
    G.noalias() += B * A.adjoint();
    G1.noalias() += B1 * A.adjoint();
  });
  // Shifting f by a constant leaves the variance unchanged and limits
  // cancellation.
  const double c = s0 > 0.0 ? s1 / s0 : 0.0;
  const double trace = s2 - 2.0 * c * s1 + c * c * s0;
  const double frob = (G - c * G1).squaredNorm();
  return std::max(0.0, trace - frob);
}

double var_pi_f_radial(const KernelModel& model, const RadialFunction& f) {
  if (!model.radial()) throw PreconditionError("radial variance needs a radial-basis model");
  const Region all = Region::everything();
  const auto m0 = radial_mode_integrals(model, all, [](double) { return 1.0; });
  const auto m1 = radial_mode_integrals(model, all, f);
  const auto m2 = radial_mode_integrals(model, all, [&](double r) {
    const double v = f(r);
    return v * v;
  });
  double a0 = 0.0, a1 = 0.0;
  for (std::size_t n = 0; n < m0.size(); ++n) {
    a0 += m0[n];
    a1 += m1[n];
  }
  const double c = a1 / a0;
  double var = 0.0;
  for (std::size_t n = 0; n < m0.size(); ++n) {
    const double d = m1[n] - c * m0[n];
    var += (m2[n] - 2.0 * c * m1[n] + c * c * m0[n]) - d * d;
  }
  return std::max(0.0, var);
}

double commutator_double_integral(const KernelModel& model, const PointFunction& f, const Region& region) {
  const QuadratureRule rule = model_rule(model, region, {});
  const std::size_t P = rule.size();
  if (P == 0 || model.rank() == 0) return 0.0;
  const CMatrix A = model.basis_matrix(rule.nodes);
  std::vector<double> fv(P);
  for (std::size_t i = 0; i < P; ++i) fv[i] = checked(f(rule.nodes[i]));
  constexpr Eigen::Index block = 512;
  const auto n = static_cast<Eigen::Index>(P);
  double total = 0.0;
  for (Eigen::Index i0 = 0; i0 < n; i0 += block) {
    const Eigen::Index bi = std::min(block, n - i0);
    for (Eigen::Index j0 = i0; j0 < n; j0 += block) {
      const Eigen::Index bj = std::min(block, n - j0);
      const CMatrix K = A.middleCols(i0, bi).adjoint() * A.middleCols(j0, bj);
      double s = 0.0;
      for (Eigen::Index j = 0; j < bj; ++j)
        for (Eigen::Index i = 0; i < bi; ++i) {
          const std::size_t gi = static_cast<std::size_t>(i0 + i), gj = static_cast<std::size_t>(j0 + j);
          if (j0 == i0 && gj <= gi) continue;
          const double df = fv[gi] - fv[gj];
          s += df * df * std::norm(K(i, j)) * rule.weights[gi] * rule.weights[gj];
        }
      total += s;
    }
  }
  // Off-diagonal pairs counted once; the diagonal contributes nothing.
  return 2.0 * total;
}

double multiplicative_functional(const Configuration& config, const GSpec& g) {
  if (g.is_identity()) return 1.0;
  double prod = 1.0;
  bool pole = false;
  for (const auto& z : config.points) {
    const double v = g(z);
    if (v == kInf) pole = true;
    prod *= v;
  }
  if (pole) return kInf;
  return prod;
}

double multiplicative_functional(const Configuration& config, const PointFunction& g) {
  double prod = 1.0;
  bool pole = false;
  for (const auto& z : config.points) {
    const double v = g(z);
    if (std::isnan(v)) throw EvaluationError("g is NaN at a configuration point");
    if (v == kInf) pole = true;
    prod *= v;
  }
  if (pole) return kInf;
  return prod;
}

double fredholm_expectation(const KernelModel& model, const PointFunction& g, const Region& region,
                            std::span<const SingularPoint> singular) {
  const int M = model.rank();
  if (M == 0) return 1.0;
  const auto sing = inside(singular, region, model.integration_domain().edge);
  const CMatrix G = region_gram(model, region, [&](Complex z) { return g(z) - 1.0; }, sing);
  const CMatrix I = CMatrix::Identity(M, M) + G;
  return Eigen::PartialPivLU<CMatrix>(I).determinant().real();
}

CenteringPlan make_centering(const KernelModel& centeringModel, const GSpec& g, const RadiusSchedule& schedule) {
  validate_schedule(centeringModel, schedule);
  g.check_domain(centeringModel.domain());
  CenteringPlan plan;
  plan.schedule = schedule;
  if (g.is_identity()) {
    plan.expected.assign(schedule.radii.size(), 0.0);
    return plan;
  }
  for (const auto& a : g.poles())
    if (centeringModel.domain() == Domain::Plane || std::abs(a) < 1.0) diagonal_vanishing_order(centeringModel, a);
  const auto sing = g.singular_points();
  auto lg = [&](Complex z) { return g.log_g(z); };
  for (double R : schedule.radii) {
    const ExpectedValue e = expected_additive(centeringModel, lg, Region::disk(R), sing);
    plan.expected.push_back(e.value);
    plan.tailMass = std::max(plan.tailMass, e.tailMass);
  }
  return plan;
}

RegularizedValue regularized_log_functional(const CenteringPlan& plan, const Configuration& config, const GSpec& g,
                                            double tolerance) {
  const auto& radii = plan.schedule.radii;
  RegularizedValue out;
  out.partial.assign(radii.size(), 0.0);
  if (!g.is_identity()) {
    std::vector<double> sums(radii.size(), 0.0);
    for (const auto& z : config.points) {
      const double lg = g.log_g(z);
      if (!std::isfinite(lg)) {
        std::ostringstream os;
        os << "log g is not finite at configuration point " << z.real() << "," << z.imag();
        throw EvaluationError(os.str());
      }
      const double r = std::abs(z);
      for (std::size_t j = 0; j < radii.size(); ++j)
        if (r <= radii[j]) sums[j] += lg;
    }
    for (std::size_t j = 0; j < radii.size(); ++j) out.partial[j] = 0.5 * (sums[j] - plan.expected[j]);
  }
  for (std::size_t j = 1; j < radii.size(); ++j) out.increments.push_back(out.partial[j] - out.partial[j - 1]);
  out.value = out.partial.empty() ? 0.0 : out.partial.back();
  out.converged = out.increments.empty() || std::abs(out.increments.back()) <= tolerance;
  return out;
}

RegularizedValue regularized_log_functional(const KernelModel& model, const Configuration& config, const GSpec& g,
                                            const RadiusSchedule& schedule, double tolerance) {
  return regularized_log_functional(make_centering(model, g, schedule), config, g, tolerance);
}

double normalized_rn_weight(const RegularizedValue& value, const MCEstimate& normalizer) {
  if (!(normalizer.mean > 0.0)) throw PreconditionError("normalizer mean must be positive");
  return std::exp(2.0 * value.value) / normalizer.mean;
}

ConditionReport condition_integrals(const KernelModel& model, const GSpec& g, const RadiusSchedule& schedule) {
  validate_schedule(model, schedule, false);
  g.check_domain(model.domain());
  ConditionReport rep;
  rep.radii = schedule.radii;
  const std::size_t J = schedule.radii.size();
  if (g.is_identity()) {
    rep.singularity.assign(J, 0.0);
    rep.decay.assign(J, 0.0);
    rep.variance.assign(J, 0.0);
    rep.flatcut.assign(J, 0.0);
    return rep;
  }
  bool pole = false;
  for (const auto& a : g.poles()) {
    // A pole against a non-vanishing diagonal makes even the local integral
    // of |g - 1| diverge.
    if (diagonal_vanishing_order(model, a) == 0) {
      std::ostringstream os;
      os << "g has a pole at " << a.real() << "," << a.imag() << " where the diagonal does not vanish";
      throw QuadratureError(os.str());
    }
    pole = true;
  }
  const auto sing = g.singular_points();
  auto gm1 = [&](Complex z) { return g(z) - 1.0; };
  auto abs1 = [&](Complex z) { return std::abs(gm1(z)); };
  auto cube = [&](Complex z) {
    const double v = std::abs(gm1(z));
    return v * v * v;
  };
  auto sq = [&](Complex z) {
    const double v = gm1(z);
    return v * v;
  };
  // With a quadratically vanishing diagonal at a pole, |g-1|^3 Pi(x,x) ~ rho^-4
  // and g^2 Pi(x,x) ~ rho^-2: both diverge.
  if (pole) {
    rep.L = kInf;
    rep.V = kInf;
  } else {
    rep.L = expected_additive(model, cube, Region::everything(), sing).value;
    rep.V = 2.0 * var_pi_f(model, gm1, sing);
  }
  for (double R : schedule.radii) {
    const Region in = Region::disk(R), out = Region::outside(R);
    rep.singularity.push_back(expected_additive(model, abs1, in, sing).value);
    rep.decay.push_back(expected_additive(model, cube, out, sing).value);
    const auto outSing = inside(sing, out, model.integration_domain().edge);
    const CMatrix F = region_gram(model, out, gm1, outSing);
    const CMatrix F2 = region_gram(model, out, sq, outSing);
    const CMatrix O1 = region_gram(model, out, [](Complex) { return 1.0; });
    const CMatrix I1 = region_gram(model, in, [](Complex) { return 1.0; });
    const double var = 2.0 * ((F2 * O1).trace().real() - (F * F).trace().real());
    rep.variance.push_back(std::max(0.0, var));
    rep.flatcut.push_back(std::max(0.0, (F2 * I1).trace().real()));
  }
  return rep;
}

}  // namespace palmdpp
