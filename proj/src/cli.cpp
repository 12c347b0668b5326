#include "palmdpp/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "palmdpp/config.hpp"
#include "palmdpp/errors.hpp"
#include "palmdpp/format.hpp"
#include "palmdpp/parallel.hpp"
#include "palmdpp/sampler.hpp"

namespace palmdpp {

using ojson = nlohmann::ordered_json;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<long long> replicas;
  std::string out;
  std::string csv;
  int threads = 0;
  bool timing = false;
  std::vector<std::string> anchor;
  bool anchorGiven = false;
  std::vector<std::string> at;

  std::string kernelOp;
  double christRadius = 5.0;
  double christSpacing = 0.5;
  double christDelta = 0.5;
  std::string experimentKind;
};

// Writes to `path`, or to `fallback` when the path is empty.
template <class Writer>
void emit(const std::string& path, std::ostream& fallback, Writer&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open " + path + " for writing");
  write(f);
  f.flush();
  if (!f) throw ConfigError("failed writing " + path);
}

RunConfig load(const Options& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.replicas) {
    if (*o.replicas < 0) throw ConfigError("--replicas must be non-negative");
    c.replicas = static_cast<std::size_t>(*o.replicas);
  }
  if (o.anchorGiven) {
    c.anchor.clear();
    for (const auto& s : o.anchor) c.anchor.push_back(parse_point(s));
  }
  return c;
}

std::vector<Complex> at_points(const Options& o) {
  std::vector<Complex> pts;
  for (const auto& s : o.at) pts.push_back(parse_point(s));
  return pts;
}

std::string complex_text(Complex z) { return format_double(z.real()) + " " + format_double(z.imag()); }

int cmd_kernel(const Options& o, std::ostream& out) {
  const RunConfig c = load(o);
  const KernelModel m = c.build_model();
  const auto pts = at_points(o);
  std::string text;
  if (o.kernelOp == "eval" || o.kernelOp == "weighted") {
    if (pts.size() != 2) throw ConfigError("kernel " + o.kernelOp + " needs --at z w");
    const Complex v = o.kernelOp == "eval" ? m.kernel(pts[0], pts[1]) : m.weighted(pts[0], pts[1]);
    text = complex_text(v) + "\n";
  } else if (o.kernelOp == "corr") {
    if (pts.empty()) throw ConfigError("kernel corr needs at least one --at point");
    text = format_double(k_correlation(m, pts)) + "\n";
  } else if (o.kernelOp == "trace") {
    text = format_double(expected_count(m, Region::everything())) + "\n";
  } else {
    if (!(o.christRadius > 0.0) || !(o.christSpacing > 0.0)) throw ConfigError("christ needs positive radius and spacing");
    const auto grid = square_grid(o.christRadius, o.christSpacing);
    const ChristScan s = christ_bound_scan(m, grid, o.christDelta);
    ojson j = {{"maxDiagonal", json_number(s.maxDiagonal)},
               {"christConstant", json_number(s.christConstant)},
               {"maxOffDiagonalDecayViolation", json_number(s.maxOffDiagonalDecayViolation)},
               {"decayRate", json_number(s.decayRate)},
               {"pairs", s.pairs},
               {"radius", o.christRadius},
               {"spacing", o.christSpacing},
               {"delta", o.christDelta}};
    text = j.dump(2) + "\n";
  }
  emit(o.out, out, [&](std::ostream& s) { s << text; });
  return 0;
}

int cmd_sample(const Options& o, std::ostream& out) {
  const RunConfig c = load(o);
  const KernelModel m = c.build_model();
  if (!c.replicas) throw ConfigError("sample needs replicas (config or --replicas)");
  if (*c.replicas == 0) throw ConfigError("replicas must be positive");
  const PalmAnchor anchor{c.anchor};
  validate_anchor(m, anchor);
  const auto samples = batch_sample(m, anchor, *c.replicas, c.seed);
  emit(o.out.empty() ? c.output.samples : o.out, out, [&](std::ostream& s) { write_jsonl(s, samples); });
  const std::string csv = o.csv.empty() ? c.output.csv : o.csv;
  if (!csv.empty()) emit(csv, out, [&](std::ostream& s) { write_csv(s, samples); });
  return 0;
}

int cmd_palm(const Options& o, std::ostream& out) {
  const RunConfig c = load(o);
  const KernelModel m = c.build_model();
  const PalmAnchor anchor{c.anchor};
  validate_anchor(m, anchor);
  const KernelModel p = anchor.empty() ? m : palm_downdate(m, anchor);
  const std::string text = model_to_json(p).dump(2) + "\n";
  emit(o.out, out, [&](std::ostream& s) { s << text; });
  return 0;
}

ExperimentReport dispatch(const std::string& kind, const RunConfig& c, const ExperimentSpec& e) {
  auto reps = [&](std::size_t fallback) {
    const std::size_t r = c.replicas.value_or(fallback);
    return r;
  };
  if (kind == "rn-verify") {
    RnVerifyInput in{.model = c.build_model(), .p = e.p, .q = e.q};
    in.replicas = reps(in.replicas);
    in.seed = c.seed;
    in.schedule = c.schedule;
    in.stabilityRank = e.stabilityRank;
    in.thresholds = c.thresholds;
    return rn_verify(in);
  }
  if (kind == "rigidity") {
    RigidityInput in{.model = c.build_model()};
    in.epsilons = e.epsilons;
    in.r0 = e.r0;
    in.replicas = reps(0);
    in.seed = c.seed;
    in.thresholds = c.thresholds;
    return rigidity_variance(in);
  }
  if (kind == "blaschke") {
    BlaschkeInput in;
    in.K = e.K;
    in.replicas = reps(in.replicas);
    in.seed = c.seed;
    in.thresholds = c.thresholds;
    return blaschke_divergence(in);
  }
  if (kind == "moduli") {
    ModuliInput in;
    in.N = e.N;
    in.replicas = reps(in.replicas);
    in.seed = c.seed;
    in.thresholds = c.thresholds;
    return moduli_law_check(in);
  }
  if (kind == "detcheck") {
    DetSweepInput in{.model = c.build_model()};
    in.pairs = e.pairs.empty() ? std::vector<DetPair>{DetPair{}} : e.pairs;
    in.replicas = reps(in.replicas);
    in.seed = c.seed;
    in.thresholds = c.thresholds;
    return det_identity_sweep(in);
  }
  if (kind == "order-sep") {
    OrderSeparationInput in{.model = c.build_model(), .p = e.p, .q = e.q};
    in.window = e.window;
    in.replicas = reps(in.replicas);
    in.seed = c.seed;
    return order_separation(in);
  }
  if (kind == "flatcut") {
    if (!c.g) throw ConfigError("flatcut needs g in the config");
    const KernelModel m = c.build_model();
    FlatCutInput in{.model = m, .g = *c.g};
    in.schedule = c.schedule ? *c.schedule : default_schedule(m, c.g->singular_radius());
    return flat_cut_trend(in);
  }
  throw ConfigError("unknown experiment \"" + kind + "\"");
}

int cmd_experiment(const Options& o, const std::string& configText, std::ostream& out) {
  const RunConfig c = load(o);
  ExperimentSpec e = c.experiment.value_or(ExperimentSpec{});
  std::string kind = o.experimentKind.empty() ? e.kind : o.experimentKind;
  if (kind.empty()) throw ConfigError("experiment kind missing (argument or config experiment.kind)");
  if (c.experiment && !o.experimentKind.empty() && c.experiment->kind != o.experimentKind)
    throw ConfigError("experiment argument \"" + o.experimentKind + "\" contradicts config kind \"" +
                      c.experiment->kind + "\"");
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep = dispatch(kind, c, e);
  rep.runtimeSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!configText.empty()) rep.inputs["config"] = ojson::parse(configText);
  const std::string text = rep.to_json(o.timing).dump(2) + "\n";
  emit(o.out.empty() ? c.output.report : o.out, out, [&](std::ostream& s) { s << text; });
  const std::string csv = o.csv.empty() ? c.output.csv : o.csv;
  if (!csv.empty()) emit(csv, out, [&](std::ostream& s) { rep.write_table_csv(s); });
  return rep.all_pass() ? 0 : 1;
}

std::string read_text(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Palm measures of finite-rank determinantal point processes"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", o.config, "JSON config file");
  app.add_option("--seed", o.seed, "base seed");
  app.add_option("--replicas", o.replicas, "number of replicas");
  app.add_option("--out", o.out, "output file (default stdout)");
  app.add_option("--csv", o.csv, "CSV output file");
  app.add_option("--threads", o.threads, "worker threads (default PALMDPP_THREADS, else all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--timing", o.timing, "include runtimeSeconds in reports");
  auto* anchorOpt = app.add_option("--anchor", o.anchor, "anchor points re,im (overrides config)");
  app.add_option("--at", o.at, "evaluation points re,im");

  auto* kernel = app.add_subcommand("kernel", "kernel evaluations");
  kernel->add_option("op", o.kernelOp, "eval | weighted | christ | corr | trace")
      ->required()
      ->check(CLI::IsMember({"eval", "weighted", "christ", "corr", "trace"}));
  kernel->add_option("--radius", o.christRadius, "christ grid radius");
  kernel->add_option("--spacing", o.christSpacing, "christ grid spacing");
  kernel->add_option("--delta", o.christDelta, "christ decay exponent");
  auto* sample = app.add_subcommand("sample", "draw configurations as JSONL");
  auto* palm = app.add_subcommand("palm", "Palm downdate, prints the model JSON");
  auto* experiment = app.add_subcommand("experiment", "run an experiment and print its report");
  experiment->add_option("kind", o.experimentKind, "rn-verify | rigidity | blaschke | moduli | detcheck | order-sep | flatcut")
      ->check(CLI::IsMember({"rn-verify", "rigidity", "blaschke", "moduli", "detcheck", "order-sep", "flatcut"}));

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  o.anchorGiven = anchorOpt->count() > 0;

  try {
    if (o.threads > 0) set_thread_count(o.threads);
    if (kernel->parsed()) return cmd_kernel(o, out);
    if (sample->parsed()) return cmd_sample(o, out);
    if (palm->parsed()) return cmd_palm(o, out);
    if (experiment->parsed()) return cmd_experiment(o, read_text(o.config), out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace palmdpp
