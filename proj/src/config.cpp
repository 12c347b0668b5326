#include "palmdpp/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <type_traits>
#include <variant>

#include "palmdpp/errors.hpp"

namespace palmdpp {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items())
    if (!ok.count(k)) throw ConfigError("unknown key \"" + k + "\" in " + where);
}

double get_real(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(what + " must be finite");
  return x;
}

long long get_int(const json& v, const std::string& what, long long lo, long long hi) {
  if (!v.is_number_integer()) throw ConfigError(what + " must be an integer");
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(hi))
    throw ConfigError(what + " is out of range");
  const long long x = v.get<long long>();
  if (x < lo || x > hi) throw ConfigError(what + " is out of range");
  return x;
}

std::vector<double> get_reals(const json& v, const std::string& what) {
  if (!v.is_array()) throw ConfigError(what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(get_real(x, what));
  return out;
}

Complex get_point(const json& v, const std::string& what) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(what + " must be a [re, im] pair");
  return {get_real(v[0], what), get_real(v[1], what)};
}

std::vector<Complex> get_points(const json& v, const std::string& what) {
  if (!v.is_array()) throw ConfigError(what + " must be an array of [re, im] pairs");
  std::vector<Complex> out;
  for (const auto& x : v) out.push_back(get_point(x, what));
  return out;
}

Domain parse_domain(const json& v) {
  if (v == "plane") return Domain::Plane;
  if (v == "disc") return Domain::UnitDisc;
  throw ConfigError("domain must be \"plane\" or \"disc\"");
}

Weight parse_weight(const json& v) {
  if (!v.is_object() || !v.contains("kind") || !v["kind"].is_string())
    throw ConfigError("weight must be an object with a string \"kind\"");
  const std::string kind = v["kind"];
  if (kind == "fock_gaussian") {
    allow_keys(v, "weight", {"kind"});
    return Weight::fock_gaussian();
  }
  if (kind == "fock_radial") {
    allow_keys(v, "weight", {"kind", "alpha"});
    if (!v.contains("alpha")) throw ConfigError("fock_radial weight needs alpha");
    const double a = get_real(v["alpha"], "weight.alpha");
    if (!(a > 0.0)) throw ConfigError("fock_radial alpha must be positive");
    return Weight::fock_radial(a);
  }
  if (kind == "bergman_classical") {
    allow_keys(v, "weight", {"kind", "alpha"});
    const double a = v.contains("alpha") ? get_real(v["alpha"], "weight.alpha") : 0.0;
    if (!(a > -1.0)) throw ConfigError("bergman_classical alpha must exceed -1");
    return Weight::bergman(a);
  }
  if (kind == "tabulated") {
    allow_keys(v, "weight", {"kind", "radii", "logWeight"});
    if (!v.contains("radii") || !v.contains("logWeight")) throw ConfigError("tabulated weight needs radii and logWeight");
    return Weight(TabulatedRadial{get_reals(v["radii"], "weight.radii"), get_reals(v["logWeight"], "weight.logWeight")});
  }
  throw ConfigError("unknown weight kind \"" + kind + "\"");
}

QuadratureSpec parse_quadrature(const json& v) {
  allow_keys(v, "quadrature", {"radialNodes", "angularNodes", "outerRadius"});
  QuadratureSpec q;
  if (v.contains("radialNodes")) q.radialNodes = static_cast<int>(get_int(v["radialNodes"], "radialNodes", 1, 1 << 20));
  if (v.contains("angularNodes"))
    q.angularNodes = static_cast<int>(get_int(v["angularNodes"], "angularNodes", 1, 1 << 20));
  if (v.contains("outerRadius")) q.outerRadius = get_real(v["outerRadius"], "outerRadius");
  return q;
}

CMatrix parse_coefficients(const json& v) {
  if (!v.is_array()) throw ConfigError("coefficients must be an array of rows");
  const std::size_t rows = v.size();
  std::size_t cols = 0;
  for (const auto& row : v) {
    if (!row.is_array()) throw ConfigError("coefficient rows must be arrays");
    if (cols == 0) cols = row.size();
    if (row.size() != cols) throw ConfigError("coefficient rows must have equal length");
  }
  CMatrix C(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = get_point(v[i][j], "coefficient");
  return C;
}

GSpec parse_g(const json& v) {
  if (!v.is_object() || !v.contains("kind") || !v["kind"].is_string())
    throw ConfigError("g must be an object with a string \"kind\"");
  const std::string kind = v["kind"];
  if (kind == "rational" || kind == "blaschke") {
    allow_keys(v, "g", {"kind", "p", "q"});
    auto p = v.contains("p") ? get_points(v["p"], "g.p") : std::vector<Complex>{};
    auto q = v.contains("q") ? get_points(v["q"], "g.q") : std::vector<Complex>{};
    try {
      return kind == "rational" ? GSpec::rational(std::move(p), std::move(q))
                                : GSpec::blaschke(std::move(p), std::move(q));
    } catch (const DegenerateInputError& e) {
      throw ConfigError(std::string("g: ") + e.what());
    }
  }
  if (kind == "custom") {
    allow_keys(v, "g", {"kind", "radii", "logG"});
    if (!v.contains("radii") || !v.contains("logG")) throw ConfigError("custom g needs radii and logG");
    return GSpec(CustomLogG{get_reals(v["radii"], "g.radii"), get_reals(v["logG"], "g.logG")});
  }
  throw ConfigError("unknown g kind \"" + kind + "\"");
}

Region parse_region(const json& v, const std::string& where) {
  allow_keys(v, where, {"inner", "outer"});
  Region r = Region::disk(1.0);
  if (v.contains("inner")) r.inner = get_real(v["inner"], where + ".inner");
  if (v.contains("outer")) r.outer = get_real(v["outer"], where + ".outer");
  if (!(r.inner >= 0.0) || !(r.outer > r.inner)) throw ConfigError(where + " needs 0 <= inner < outer");
  return r;
}

ExperimentSpec parse_experiment(const json& v) {
  if (!v.is_object() || !v.contains("kind") || !v["kind"].is_string())
    throw ConfigError("experiment must be an object with a string \"kind\"");
  ExperimentSpec e;
  e.kind = v["kind"];
  if (e.kind == "rn-verify") allow_keys(v, "experiment", {"kind", "p", "q", "stabilityRank"});
  else if (e.kind == "rigidity") allow_keys(v, "experiment", {"kind", "epsilons", "r0"});
  else if (e.kind == "blaschke") allow_keys(v, "experiment", {"kind", "K"});
  else if (e.kind == "moduli") allow_keys(v, "experiment", {"kind", "N"});
  else if (e.kind == "detcheck") allow_keys(v, "experiment", {"kind", "pairs"});
  else if (e.kind == "order-sep") allow_keys(v, "experiment", {"kind", "p", "q", "window"});
  else if (e.kind == "flatcut") allow_keys(v, "experiment", {"kind"});
  else throw ConfigError("unknown experiment kind \"" + e.kind + "\"");
  if (v.contains("p")) e.p = get_points(v["p"], "experiment.p");
  if (v.contains("q")) e.q = get_points(v["q"], "experiment.q");
  if (v.contains("stabilityRank")) e.stabilityRank = static_cast<int>(get_int(v["stabilityRank"], "stabilityRank", 0, 1 << 16));
  if (v.contains("epsilons")) e.epsilons = get_reals(v["epsilons"], "experiment.epsilons");
  if (v.contains("r0")) e.r0 = get_real(v["r0"], "experiment.r0");
  if (v.contains("K")) {
    if (!v["K"].is_array()) throw ConfigError("experiment.K must be an array of integers");
    e.K.clear();
    for (const auto& k : v["K"]) e.K.push_back(static_cast<int>(get_int(k, "experiment.K", 1, 100000000)));
  }
  if (v.contains("N")) e.N = static_cast<int>(get_int(v["N"], "experiment.N", 1, 1 << 16));
  if (v.contains("pairs")) {
    if (!v["pairs"].is_array()) throw ConfigError("experiment.pairs must be an array");
    for (const auto& pr : v["pairs"]) {
      allow_keys(pr, "experiment.pairs[]", {"g", "inner", "outer"});
      DetPair d;
      if (pr.contains("g")) d.g = get_real(pr["g"], "pairs.g");
      json reg = json::object();
      if (pr.contains("inner")) reg["inner"] = pr["inner"];
      if (pr.contains("outer")) reg["outer"] = pr["outer"];
      d.region = parse_region(reg, "experiment.pairs[]");
      e.pairs.push_back(d);
    }
  }
  if (v.contains("window")) e.window = parse_region(v["window"], "experiment.window");
  return e;
}

Thresholds parse_thresholds(const json& v) {
  allow_keys(v, "thresholds", {"zScore", "pValue", "slopeRelative", "boundSlack"});
  Thresholds t;
  if (v.contains("zScore")) t.zScore = get_real(v["zScore"], "thresholds.zScore");
  if (v.contains("pValue")) t.pValue = get_real(v["pValue"], "thresholds.pValue");
  if (v.contains("slopeRelative")) t.slopeRelative = get_real(v["slopeRelative"], "thresholds.slopeRelative");
  if (v.contains("boundSlack")) t.boundSlack = get_real(v["boundSlack"], "thresholds.boundSlack");
  return t;
}

}  // namespace

KernelModel RunConfig::build_model() const {
  if (!has_model()) throw ConfigError("config needs domain, weight and rank");
  KernelModel m = KernelModel::build(*domain, *weight, *rank, quadrature);
  if (coefficients) m = m.with_coefficients(*coefficients);
  return m;
}

RunConfig parse_config(const json& j) {
  allow_keys(j, "config", {"domain", "weight", "rank", "quadrature", "coefficients", "anchor", "g", "schedule",
                           "replicas", "seed", "output", "thresholds", "experiment"});
  RunConfig c;
  if (j.contains("domain")) c.domain = parse_domain(j["domain"]);
  if (j.contains("weight")) c.weight = parse_weight(j["weight"]);
  if (j.contains("rank")) c.rank = static_cast<int>(get_int(j["rank"], "rank", 1, 1 << 16));
  if (j.contains("quadrature")) c.quadrature = parse_quadrature(j["quadrature"]);
  if (j.contains("coefficients")) c.coefficients = parse_coefficients(j["coefficients"]);
  if (j.contains("anchor")) c.anchor = get_points(j["anchor"], "anchor");
  if (j.contains("g")) c.g = parse_g(j["g"]);
  if (j.contains("schedule")) c.schedule = RadiusSchedule{get_reals(j["schedule"], "schedule")};
  if (j.contains("replicas"))
    c.replicas = static_cast<std::size_t>(get_int(j["replicas"], "replicas", 0, std::numeric_limits<int>::max()));
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || (j["seed"].is_number_integer() && !j["seed"].is_number_unsigned() &&
                                            j["seed"].get<long long>() < 0))
      throw ConfigError("seed must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    allow_keys(o, "output", {"report", "samples", "csv"});
    for (const char* k : {"report", "samples", "csv"})
      if (o.contains(k) && !o[k].is_string()) throw ConfigError(std::string("output.") + k + " must be a string");
    c.output.report = o.value("report", "");
    c.output.samples = o.value("samples", "");
    c.output.csv = o.value("csv", "");
  }
  if (j.contains("thresholds")) c.thresholds = parse_thresholds(j["thresholds"]);
  if (j.contains("experiment")) c.experiment = parse_experiment(j["experiment"]);
  if ((c.domain || c.weight || c.rank) && !c.has_model())
    throw ConfigError("domain, weight and rank must be given together");
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ojson model_to_json(const KernelModel& model) {
  ojson j;
  j["domain"] = std::string(to_string(model.domain()));
  ojson w;
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        w["kind"] = model.weight().name();
        if constexpr (std::is_same_v<T, FockRadialAlpha> || std::is_same_v<T, BergmanClassical>) w["alpha"] = k.alpha;
        if constexpr (std::is_same_v<T, TabulatedRadial>) {
          w["radii"] = k.radii;
          w["logWeight"] = k.logWeight;
        }
      },
      model.weight().kind());
  j["weight"] = w;
  j["rank"] = model.basis_size();
  const QuadratureSpec& q = model.quadrature();
  j["quadrature"] = {{"radialNodes", q.radialNodes}, {"angularNodes", q.angularNodes}, {"outerRadius", q.outerRadius}};
  if (!model.radial()) {
    const CMatrix C = model.coefficients();
    ojson rows = ojson::array();
    for (Eigen::Index i = 0; i < C.rows(); ++i) {
      ojson row = ojson::array();
      for (Eigen::Index k = 0; k < C.cols(); ++k) row.push_back({C(i, k).real(), C(i, k).imag()});
      rows.push_back(row);
    }
    j["coefficients"] = rows;
  }
  return j;
}

Complex parse_point(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ConfigError("point \"" + text + "\" must be re,im");
  try {
    std::size_t a = 0, b = 0;
    const std::string re = text.substr(0, comma), im = text.substr(comma + 1);
    const double x = std::stod(re, &a), y = std::stod(im, &b);
    if (a != re.size() || b != im.size() || !std::isfinite(x) || !std::isfinite(y)) throw std::invalid_argument("");
    return {x, y};
  } catch (const std::exception&) {
    throw ConfigError("point \"" + text + "\" must be re,im with finite numbers");
  }
}

}  // namespace palmdpp
