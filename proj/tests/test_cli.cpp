#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "palmdpp/cli.hpp"
#include "palmdpp/config.hpp"
#include "palmdpp/palm.hpp"
#include "support/cli_support.hpp"

using namespace palmdpp;
using namespace palmdpp::testing;
namespace fs = std::filesystem;

namespace {

struct InProcess {
  int code;
  std::string out, err;
};

InProcess run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const auto d = fs::temp_directory_path() / ("palmdpp_cli_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

std::string put(const std::string& name, const std::string& text) {
  const auto p = (scratch() / name).string();
  write_file(p, text);
  return p;
}

// Summed from the large end to keep the reference independent of the library.
double blaschke_partial_sum_oracle(int K) {
  long double s = 0;
  for (int k = K; k >= 1; --k) s += 1.0L / (2 * k + 1);
  return static_cast<double>(s);
}

const char* kFock32 = R"({"domain": "plane", "weight": {"kind": "fock_gaussian"}, "rank": 32})";
const char* kDisc8 = R"({"domain": "disc", "weight": {"kind": "bergman_classical"}, "rank": 8})";

}  // namespace

TEST_CASE("kernel evaluation through the binary") {
  const auto cfg = put("f1.json", R"({"domain": "plane", "weight": {"kind": "fock_gaussian"}, "rank": 1})");
  const auto r = run_binary("kernel eval --config " + cfg + " --at 0,0 --at 0,0");
  REQUIRE(r.exitCode == 0);
  std::istringstream in(r.out);
  double re = 0, im = 1;
  in >> re >> im;
  CHECK(re == doctest::Approx(1 / std::numbers::pi).epsilon(1e-15));
  CHECK(im == 0.0);
  const auto t = run(std::vector<std::string>{"--config", put("f32.json", kFock32), "kernel", "trace"});
  CHECK(t.code == 0);
  CHECK(std::stod(t.out) == doctest::Approx(32.0).epsilon(1e-8));
}

TEST_CASE("exit codes") {
  const auto fock = put("f32.json", kFock32);
  const auto disc = put("d8.json", kDisc8);
  CHECK(run_binary("kernel trace --config " + put("bad.json", "{bad")).exitCode == 2);
  CHECK(run_binary("kernel eval --config " + disc + " --at 1.2,0 --at 0,0").exitCode == 3);
  CHECK(run_binary("sample --config " + fock + " --replicas 0").exitCode == 2);
  CHECK(run_binary("palm --config " + fock + " --anchor 0,0 --anchor 0,0").exitCode == 2);
  CHECK(run_binary("kernel trace --config " + put("unk.json", R"({"domain": "plane", "weight": {"kind": "fock_gaussian"}, "rank": 4, "bogus": 1})")).exitCode == 2);
  CHECK(run_binary("kernel trace --config " + put("unkw.json", R"({"domain": "plane", "weight": {"kind": "fock_gaussian", "beta": 1}, "rank": 4})")).exitCode == 2);
  CHECK(run_binary("--no-such-flag kernel trace").exitCode == 2);
  const auto rn = put("rn.json", R"({"domain": "plane", "weight": {"kind": "fock_gaussian"}, "rank": 16,
    "experiment": {"kind": "rn-verify", "p": [[1, 0], [2, 0]], "q": [[0, 0]]}})");
  CHECK(run_binary("experiment --config " + rn + " --replicas 100").exitCode == 2);
  CHECK(run_binary("kernel trace --config /nonexistent/file.json").exitCode == 2);
}

TEST_CASE("blaschke and rigidity through the binary") {
  const auto b = run_binary("--replicas 2000 experiment --config " +
                            put("bl.json", R"({"experiment": {"kind": "blaschke", "K": [100]}})"));
  REQUIRE(b.exitCode == 0);
  const auto j = nlohmann::json::parse(b.out);
  CHECK(j["details"]["partialSums"][0]["analytic"].get<double>() == doctest::Approx(blaschke_partial_sum_oracle(100)));
  CHECK(j["details"]["partialSums"][0].contains("mc"));

  const auto r = run_binary("experiment --config " + put("rg.json", R"({"domain": "plane", "weight": {"kind": "fock_gaussian"},
    "rank": 64, "experiment": {"kind": "rigidity", "epsilons": [0.1]}})"));
  REQUIRE(r.exitCode == 0);
  const auto rj = nlohmann::json::parse(r.out);
  CHECK(rj["pass"] == true);
  CHECK(rj["details"]["sweep"][0]["gradientIntegral"].get<double>() <= 0.1 + 0.01 * std::log(4.0));
}

TEST_CASE("palm output round-trips") {
  const auto fock = put("f32.json", kFock32);
  const auto r = run_binary("palm --config " + fock + " --anchor 0.5,0.25 --anchor -1,1");
  REQUIRE(r.exitCode == 0);
  const auto reloaded = parse_config_text(r.out).build_model();
  const auto direct = palm_downdate(load_config(fock).build_model(), PalmAnchor{{{0.5, 0.25}, {-1, 1}}});
  CHECK(reloaded.rank() == 30);
  double worst = 0.0;
  for (int i = 0; i < 8; ++i)
    for (int k = 0; k < 8; ++k) {
      const Complex z = std::polar(0.4 * i, 1.1 * i), w = std::polar(0.5 * k, -0.7 * k);
      worst = std::max(worst, std::abs(reloaded.weighted(z, w) - direct.weighted(z, w)));
    }
  CHECK(worst <= 1e-15);
  // No anchor: the model is echoed.
  const auto e = run_binary("palm --config " + fock);
  REQUIRE(e.exitCode == 0);
  const auto echoed = nlohmann::json::parse(e.out);
  CHECK(echoed["rank"] == 32);
  CHECK(echoed["domain"] == "plane");
  CHECK(!echoed.contains("coefficients"));
}

TEST_CASE("sample files are deterministic") {
  const auto fock = put("f32.json", kFock32);
  const auto a = (scratch() / "a.jsonl").string(), b = (scratch() / "b.jsonl").string();
  const auto csv = (scratch() / "a.csv").string();
  REQUIRE(run_binary("sample --config " + fock + " --replicas 1000 --seed 9 --out " + a + " --csv " + csv).exitCode == 0);
  REQUIRE(run_binary("--threads 1 sample --config " + fock + " --replicas 1000 --seed 9 --out " + b).exitCode == 0);
  const auto ta = read_file(a);
  CHECK(ta == read_file(b));
  CHECK(std::count(ta.begin(), ta.end(), '\n') == 1000);
  std::istringstream lines(ta);
  std::string line;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    REQUIRE(j["points"].size() == 32);
  }
  const auto tc = read_file(csv);
  CHECK(std::count(tc.begin(), tc.end(), '\n') == 1 + 32 * 1000);
  CHECK(run_binary("sample --config " + fock + " --replicas 1000 --seed 10 --out " + b).exitCode == 0);
  CHECK(ta != read_file(b));
}

TEST_CASE("report shapes match the golden files") {
  const bool update = std::getenv("PALMDPP_UPDATE_GOLDEN") != nullptr;
  for (const char* name : golden_names()) {
    CAPTURE(name);
    const std::string base = golden_dir() + "/" + name;
    const auto first = run_binary("experiment --config " + base + ".config.json");
    REQUIRE(first.exitCode == 0);
    const auto second = run_binary("experiment --config " + base + ".config.json");
    CHECK(first.out == second.out);
    const auto shape = shape_of(nlohmann::ordered_json::parse(first.out));
    if (update) write_file(base + ".shape.json", shape.dump(1) + "\n");
    CHECK(shape == nlohmann::ordered_json::parse(read_file(base + ".shape.json")));
  }
}
