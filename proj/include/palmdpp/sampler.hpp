#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "palmdpp/kernel_model.hpp"
#include "palmdpp/palm.hpp"
#include "palmdpp/rng.hpp"

namespace palmdpp {

/// One sample of a finite-rank projection DPP.
struct Configuration {
  std::vector<Complex> points;
  int modelRank = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Per-model data reused across samples (radial tables for tabulated weights).
class SamplerPlan {
public:
  explicit SamplerPlan(KernelModel model);
  const KernelModel& model() const noexcept { return model_; }
  /// Radius distributed with density proportional to r^(2n+1) w(r).
  double draw_mode_radius(int n, RngStream& rng) const;
  /// |e_n(r)| for all n (weighted normalized monomial moduli).
  void mode_moduli(double r, double* out) const;

private:
  KernelModel model_;
  std::vector<double> ratio_;                     // c_{n-1} / c_n
  std::vector<std::vector<double>> segmentCdf_;  // tabulated weights only
};

/// Exact sequential sampler. Each step picks a column q of an orthonormal basis
/// of the current (conditioned) space uniformly, draws the radius from the
/// radial marginal sum_n |q_n|^2 rho_n and the angle by rejection against the
/// Cauchy-Schwarz bound (sum_n |q_n| |e_n(r)|)^2, then removes the accepted
/// direction with a Householder reflection. Throws EnvelopeError if a single
/// angle draw needs more than a million proposals.
Configuration sample_projection_dpp(const SamplerPlan& plan, RngStream& rng);
Configuration sample_projection_dpp(const KernelModel& model, RngStream& rng);

/// sample_projection_dpp(palm_downdate(model, anchor), rng).
Configuration sample_palm(const KernelModel& model, const PalmAnchor& anchor, RngStream& rng);

/// {U_k^(1/(2k)) : k = 1..K}, U_k i.i.d. uniform.
std::vector<double> sample_moduli_hyperbolic(int K, RngStream& rng);

/// Replica i uses RngStream(baseSeed, i). The result is independent of the
/// thread count.
std::vector<Configuration> batch_sample(const KernelModel& model, const PalmAnchor& anchor, std::size_t replicas,
                                        std::uint64_t baseSeed);

/// JSONL: {"replica": i, "seed": s, "points": [[re,im],...]} per line.
void write_jsonl(std::ostream& os, const std::vector<Configuration>& samples);
std::vector<Configuration> read_jsonl(std::istream& is);
/// CSV with columns replica,re,im.
void write_csv(std::ostream& os, const std::vector<Configuration>& samples);

}  // namespace palmdpp
