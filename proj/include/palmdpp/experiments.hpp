#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "palmdpp/functionals.hpp"

namespace palmdpp {

/// Pre-registered decision thresholds.
struct Thresholds {
  double zScore = 3.0;
  double pValue = 1e-3;
  double slopeRelative = 0.05;
  double boundSlack = 1e-8;
};

struct Verdict {
  std::string criterion;  // named acceptance criterion
  std::string check;
  bool pass = false;
  std::string measure;  // "zScore", "pValue", "residual", ...
  double value = 0.0;
  double threshold = 0.0;
};

struct NamedEstimate {
  std::string label;
  MCEstimate estimate;
};

struct ExperimentReport {
  std::string name;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  std::vector<NamedEstimate> estimates;
  std::vector<Verdict> verdicts;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
  double runtimeSeconds = 0.0;
  /// Per-replica values for external plotting; not part of the JSON.
  std::vector<std::string> tableColumns;
  std::vector<std::vector<double>> tableRows;

  bool all_pass() const;
  /// runtimeSeconds is left out unless asked for, so reruns are byte-identical.
  nlohmann::ordered_json to_json(bool includeRuntime = false) const;
  void write_table_csv(std::ostream& os) const;
};

/// Finite doubles as numbers, the rest as "inf", "-inf" or "nan".
nlohmann::ordered_json json_number(double x);

/// A linear statistic h(x) summed over the configuration.
struct LinearStatistic {
  std::string name;
  PointFunction f;
};

/// Counts in four annuli plus a smooth compactly supported bump
/// (1 - |z - c|^2 / rho^2)^3_+, scaled to the domain.
std::vector<LinearStatistic> default_statistics(Domain d);

struct RnVerifyInput {
  KernelModel model;
  std::vector<Complex> p;
  std::vector<Complex> q;
  std::size_t replicas = 100000;
  std::uint64_t seed = 1;
  std::optional<RadiusSchedule> schedule;
  /// If positive, the whole comparison is repeated at this rank and the
  /// verdict pattern must not change.
  int stabilityRank = 0;
  Thresholds thresholds;
};

/// Estimates E_{P^p}[h] directly and as E_{P^q}[w h] with the regularized
/// weight w. The normalizer is cross-fitted: the q-samples are split in two
/// halves and each half is normalized by the other half's mean of exp(2 Sigma).
/// On the plane |p| must equal |q| (PreconditionError otherwise).
ExperimentReport rn_verify(const RnVerifyInput& in);

/// C^2 radial cutoff: 1 on [0, r0/2], logarithmic taper with |phi'| <= eps / r,
/// 0 from r0 exp(1/eps) on (inside the support [r0/2, 2 r0 exp(1/eps)]).
class RigidityBump {
public:
  RigidityBump(double epsilon, double r0);
  double value(double r) const;
  double derivative(double r) const;
  double epsilon() const noexcept { return eps_; }
  double r0() const noexcept { return r0_; }
  /// Radius from which the bump is identically 0.
  double support_end() const noexcept;
  /// int_0^inf |phi'(r)|^2 r dr by Gauss-Legendre in log r.
  double gradient_integral() const;

private:
  double ramp_integral(double t) const;  // int of the log-derivative profile up to t = log r
  double eps_, r0_, t0_, t1_, t2_, t3_;
};

struct RigidityInput {
  KernelModel model;
  std::vector<double> epsilons{0.5, 0.1, 0.02};
  double r0 = 1.0;
  /// Replicas for the empirical variance; 0 skips it.
  std::size_t replicas = 0;
  std::uint64_t seed = 1;
  Thresholds thresholds;
};

ExperimentReport rigidity_variance(const RigidityInput& in);

struct BlaschkeInput {
  std::vector<int> K{100, 1000, 10000};
  std::size_t replicas = 10000;
  std::uint64_t seed = 1;
  Thresholds thresholds;
};

/// sum_{k<=K} 1/(2k+1) analytically and by MC over the hyperbolic moduli law,
/// and the slope of the partial sums against log K.
ExperimentReport blaschke_divergence(const BlaschkeInput& in);
/// sum_{k=1..K} 1/(2k+1).
double blaschke_partial_sum(int K);

struct ModuliInput {
  int N = 8;
  std::size_t replicas = 10000;
  std::uint64_t seed = 1;
  Thresholds thresholds;
};

/// Two-sample KS between moduli of the rank-N disc DPP (omega = 1) and the set
/// {U_k^(1/(2k))}, per order statistic and pooled.
ExperimentReport moduli_law_check(const ModuliInput& in);

struct OrderSeparationInput {
  KernelModel model;
  std::vector<Complex> p;
  std::vector<Complex> q;
  Region window = Region::disk(1.0);
  std::size_t replicas = 1000;
  std::uint64_t seed = 1;
};

/// Point counts under P^p and P^q with |p| != |q| (PreconditionError if equal).
ExperimentReport order_separation(const OrderSeparationInput& in);

struct DetPair {
  double g = 0.5;  // constant value of g on the region, 1 elsewhere
  Region region = Region::disk(1.0);
};

struct DetSweepInput {
  KernelModel model;
  std::vector<DetPair> pairs;
  std::size_t replicas = 100000;
  std::uint64_t seed = 1;
  Thresholds thresholds;
};

/// Fredholm determinant against the MC mean of prod g for every pair.
ExperimentReport det_identity_sweep(const DetSweepInput& in);

struct FlatCutInput {
  KernelModel model;
  GSpec g = GSpec::identity();
  RadiusSchedule schedule;
};

/// Condition integrals for g against the Palm kernel of `model` at the poles of
/// g (the pair that enters the Radon-Nikodym formula). The verdict requires the
/// flat-cut sequence to decrease strictly.
ExperimentReport flat_cut_trend(const FlatCutInput& in);

}  // namespace palmdpp
