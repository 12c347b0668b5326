#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "palmdpp/gspec.hpp"
#include "palmdpp/kernel_model.hpp"
#include "palmdpp/sampler.hpp"

namespace palmdpp {

using PointFunction = std::function<double(Complex)>;
using RadialFunction = std::function<double(double)>;

/// Monte Carlo mean with its standard error.
struct MCEstimate {
  double mean = 0.0;
  double standardError = 0.0;
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
};

/// Mean and standard error (n - 1 denominator) with pairwise summation.
/// Throws PreconditionError for fewer than two values.
MCEstimate mc_estimate(std::span<const double> values, std::uint64_t seed);

/// Exhausting radii R_1 < ... < R_J.
struct RadiusSchedule {
  std::vector<double> radii;
};

/// Default schedule: 3, 4.5, 6.75, ... on the plane, 1 - 2^-j on the disc,
/// extended until J >= 3, the last radius clears every singular point of g by a
/// margin, and at most 0.1% of the expected points lie beyond it.
RadiusSchedule default_schedule(const KernelModel& model, double singularRadius = 0.0);
/// Checks J >= 3, strict increase, domain fit and, if asked, 99.9% coverage.
void validate_schedule(const KernelModel& model, const RadiusSchedule& schedule, bool requireCoverage = true);

/// sum over the configuration of f. A non-finite value is an EvaluationError.
double additive_functional(const Configuration& config, const PointFunction& f);

struct ExpectedValue {
  double value = 0.0;
  /// Expected number of points beyond the quadrature edge (plane truncation).
  double tailMass = 0.0;
};

/// Integral of f times the one-point intensity over the region. Singular points
/// of f (log singularities, poles against a vanishing diagonal) get local
/// refinement.
ExpectedValue expected_additive(const KernelModel& model, const PointFunction& f,
                                const Region& region = Region::everything(),
                                std::span<const SingularPoint> singular = {});

/// Var(Pi, f) = tr(M_{f^2}) - ||M_f||_F^2 where M_h is the compression of
/// multiplication by h to the range of the projection; equal to half the
/// squared Hilbert-Schmidt norm of the commutator [f, Pi].
double var_pi_f(const KernelModel& model, const PointFunction& f, std::span<const SingularPoint> singular = {});
/// Same for a radial model and radial f, where M_f is diagonal.
double var_pi_f_radial(const KernelModel& model, const RadialFunction& f);

/// Direct double quadrature of iint_{A x A} |f(x) - f(y)|^2 |Pi(x,y)|^2 over a
/// region A. Costs (nodes)^2 * rank; meant for cross-checks at small sizes.
double commutator_double_integral(const KernelModel& model, const PointFunction& f,
                                  const Region& region = Region::everything());

/// prod g(x): 1 for the empty configuration, +infinity if a pole is hit, 0 if
/// a zero is hit (and no pole).
double multiplicative_functional(const Configuration& config, const GSpec& g);
double multiplicative_functional(const Configuration& config, const PointFunction& g);

/// det(I + M), M = compression of (g - 1) * chi_region. Equals E prod g(x)
/// when g - 1 vanishes outside the region.
double fredholm_expectation(const KernelModel& model, const PointFunction& g, const Region& region,
                            std::span<const SingularPoint> singular = {});

/// Precomputed centering E sum_{|x| <= R_j} log g(x) under the centering model.
struct CenteringPlan {
  RadiusSchedule schedule;
  std::vector<double> expected;
  double tailMass = 0.0;
};

CenteringPlan make_centering(const KernelModel& centeringModel, const GSpec& g, const RadiusSchedule& schedule);

struct RegularizedValue {
  /// Half the centered sum of log g at the last radius, so that
  /// exp(2 * value) is the regularized multiplicative functional.
  double value = 0.0;
  std::vector<double> partial;     // the same quantity at every radius
  std::vector<double> increments;  // partial[j] - partial[j-1], j >= 1
  bool converged = true;           // |last increment| <= tolerance
};

/// Throws EvaluationError if a configuration point sits on a pole or zero.
RegularizedValue regularized_log_functional(const CenteringPlan& plan, const Configuration& config, const GSpec& g,
                                            double tolerance = 1e-3);
/// Builds the centering from `model` and evaluates one configuration.
RegularizedValue regularized_log_functional(const KernelModel& model, const Configuration& config, const GSpec& g,
                                            const RadiusSchedule& schedule, double tolerance = 1e-3);

/// exp(2 * value) / normalizer.mean. Throws PreconditionError if the mean is
/// not positive.
double normalized_rn_weight(const RegularizedValue& value, const MCEstimate& normalizer);

struct ConditionReport {
  /// int |g - 1|^3 Pi(x,x) dmu, +infinity when a pole makes it diverge.
  double L = 0.0;
  /// iint |g(x) - g(y)|^2 |Pi(x,y)|^2, +infinity likewise.
  double V = 0.0;
  std::vector<double> radii;
  std::vector<double> singularity;  // int_{E_n} |g - 1| Pi(x,x)
  std::vector<double> decay;        // int_{E_n^c} |g - 1|^3 Pi(x,x)
  std::vector<double> variance;     // iint_{E_n^c x E_n^c} |g(x) - g(y)|^2 |Pi|^2
  std::vector<double> flatcut;      // tr(chi_n Pi |g-1|^2 chi_n^c Pi chi_n)
  /// At finite rank the transformed projection is trace class, so this always
  /// holds.
  bool extra = true;
};

/// Throws QuadratureError when g has a pole where the diagonal does not vanish
/// quadratically (the singularity integral would diverge).
ConditionReport condition_integrals(const KernelModel& model, const GSpec& g, const RadiusSchedule& schedule);

}  // namespace palmdpp
