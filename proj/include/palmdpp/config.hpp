#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "palmdpp/experiments.hpp"

namespace palmdpp {

/// Parameters of the "experiment" object; which fields apply depends on kind.
struct ExperimentSpec {
  std::string kind;  // rn-verify | rigidity | blaschke | moduli | detcheck | order-sep | flatcut
  std::vector<Complex> p;
  std::vector<Complex> q;
  int stabilityRank = 0;
  std::vector<double> epsilons{0.5, 0.1, 0.02};
  double r0 = 1.0;
  std::vector<int> K{100, 1000, 10000};
  int N = 8;
  std::vector<DetPair> pairs;
  Region window = Region::disk(1.0);
};

struct OutputPaths {
  std::string report;
  std::string samples;
  std::string csv;
};

/// Whole run description. Model keys (domain, weight, rank, quadrature,
/// coefficients) sit at the top level, so a model written by `palm` is itself a
/// valid config.
struct RunConfig {
  std::optional<Domain> domain;
  std::optional<Weight> weight;
  std::optional<int> rank;
  QuadratureSpec quadrature;
  std::optional<CMatrix> coefficients;

  std::vector<Complex> anchor;
  std::optional<GSpec> g;
  std::optional<RadiusSchedule> schedule;
  std::optional<std::size_t> replicas;
  std::uint64_t seed = 1;
  OutputPaths output;
  Thresholds thresholds;
  std::optional<ExperimentSpec> experiment;

  bool has_model() const noexcept { return domain && weight && rank; }
  /// Throws ConfigError if the model keys are missing.
  KernelModel build_model() const;
};

/// Validates the schema (unknown keys are rejected at every level) and
/// returns the parsed config. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

/// Model keys of a config: domain, weight, rank, quadrature, and coefficients
/// (row-major [re, im] pairs) when the model is not the radial truncation.
nlohmann::ordered_json model_to_json(const KernelModel& model);

/// "re,im" to a complex number; throws ConfigError.
Complex parse_point(const std::string& text);

}  // namespace palmdpp
