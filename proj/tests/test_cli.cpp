#include <catch_amalgamated.hpp>
#include <chrono>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "acceptance.hpp"
#include "bfsens/datasets.hpp"
#include "bfsens/error.hpp"
#include "bfsens/sensitivity.hpp"
#include "commands.hpp"

using namespace bfsens;
using namespace bfsens::app;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bfsens_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Small, forced curve run so the tests stay fast.
Json quick_curve(const fs::path& out) {
  Json cfg = default_config("curve");
  cfg["grid"]["points"] = {40};
  cfg["chains"]["n_keep"] = 1500;
  cfg["chains"]["n_warmup"] = 1000;
  cfg["force"] = true;
  cfg["out"] = out.string();
  return cfg;
}

int run(const std::string& sub, const Json& cfg, std::string* err_text = nullptr) {
  std::ostringstream log, err;
  const int rc = run_subcommand(sub, cfg, log, err);
  if (err_text) *err_text = err.str();
  return rc;
}

int spawn(const std::string& args) {
  const char* cli = std::getenv("BFSENS_CLI");
  REQUIRE(cli != nullptr);
  const int status = std::system((std::string(cli) + " " + args + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("t-test JSON ingestion") {
  const TTestData d = read_ttest_json(fs::path(BFSENS_DATA_DIR) / "oosterwijk.json");
  CHECK(d.n1 == 53);
  CHECK(d.mean1 == 4.63);
  CHECK(d.sd1 == 1.48);
  CHECK(d.n2 == 57);
  CHECK(d.mean2 == 4.87);
  CHECK(d.sd2 == 1.32);

  const std::string base = R"("mean1": 1, "sd1": 1, "n2": 5, "mean2": 0, "sd2": 1)";
  CHECK_THROWS_WITH(parse_ttest_json("{\"n1\": 1, " + base + "}"), ContainsSubstring("n1"));
  CHECK_THROWS_WITH(parse_ttest_json(R"({"n1": 5, "mean1": 1, "sd1": -2, "n2": 5, "mean2": 0, "sd2": 1})"),
                    ContainsSubstring("sd1"));
  CHECK_THROWS_WITH(parse_ttest_json("{" + base + "}"), ContainsSubstring("n1"));
  CHECK_THROWS_AS(parse_ttest_json("{not json"), ValidationError);
}

TEST_CASE("meta-analysis CSV ingestion") {
  std::istringstream three("effect,se\n0.1,0.2\n-0.3,0.15\n0.5,0.1\n");
  const MetaData d = read_meta_csv(three);
  REQUIRE(d.size() == 3);
  CHECK(d.effects == std::vector<double>{0.1, -0.3, 0.5});
  CHECK(d.ses == std::vector<double>{0.2, 0.15, 0.1});

  std::istringstream empty("");
  CHECK_THROWS_AS(read_meta_csv(empty), ValidationError);
  std::istringstream header_only("effect,se\n");
  CHECK_THROWS_AS(read_meta_csv(header_only), ValidationError);
  std::istringstream bad_se("effect,se\n0.1,0.2\n0.2,-1\n");
  CHECK_THROWS_WITH(read_meta_csv(bad_se), ContainsSubstring("row 2"));
}

TEST_CASE("synthetic meta-analysis generator") {
  SECTION("write then read is bit-exact") {
    const MetaData d = gen_synthetic_meta(SyntheticMetaSpec{});
    std::stringstream ss;
    write_meta_csv(ss, d);
    const MetaData r = read_meta_csv(ss);
    CHECK(r.effects == d.effects);
    CHECK(r.ses == d.ses);
  }
  SECTION("the bundled reference dataset is the default spec") {
    const MetaData bundled = read_meta_csv(fs::path(BFSENS_DATA_DIR) / "synthetic_meta_k9.csv");
    const MetaData d = gen_synthetic_meta(SyntheticMetaSpec{});
    CHECK(bundled.effects == d.effects);
    CHECK(bundled.ses == d.ses);
    CHECK(d.ses.front() == 0.08);
    CHECK_THAT(d.ses.back(), WithinAbs(0.2, 1e-15));
  }
  SECTION("sample mean of a large null dataset") {
    SyntheticMetaSpec s;
    s.k = 10000;
    s.mu = 0.0;
    s.tau = 0.0;
    s.se_range = {1.0, 1.0};
    const MetaData d = gen_synthetic_meta(s);
    double mean = 0.0;
    for (double y : d.effects) mean += y / d.size();
    CHECK(std::abs(mean) < 3.0 / 100.0);
  }
  SECTION("deterministic in the seed") {
    SyntheticMetaSpec s;
    const auto a = gen_synthetic_meta(s);
    const auto b = gen_synthetic_meta(s);
    s.seed += 1;
    const auto c = gen_synthetic_meta(s);
    CHECK(a.effects == b.effects);
    CHECK(a.effects != c.effects);
  }
}

TEST_CASE("config resolution") {
  const fs::path dir = scratch("config");
  SECTION("unknown keys are rejected, nested ones too") {
    std::ofstream(dir / "a.json") << R"({"chains": {"n_keep": 10, "warmup": 5}})";
    CHECK_THROWS_WITH(resolve_config("curve", dir / "a.json", {}), ContainsSubstring("chains.warmup"));
    std::ofstream(dir / "b.json") << R"({"colour": "red"})";
    CHECK_THROWS_AS(resolve_config("bma", dir / "b.json", {}), ValidationError);
  }
  SECTION("file values then flags override the defaults") {
    std::ofstream(dir / "c.json") << R"({"chains": {"n_keep": 123}, "estimators": ["kde"]})";
    Overrides ov;
    ov.seed = 77;
    ov.estimators = std::vector<std::string>{"iwmde"};
    ov.force = true;
    const Json cfg = resolve_config("curve", dir / "c.json", ov);
    CHECK(cfg["chains"]["n_keep"] == 123);
    CHECK(cfg["chains"]["seed"] == 77);
    CHECK(cfg["chains"]["n_warmup"] == 2500);
    CHECK(cfg["estimators"] == Json{"iwmde"});
    CHECK(cfg["force"] == true);
  }
  SECTION("flags a subcommand does not take") {
    Overrides ov;
    ov.strategy = "bridge";
    CHECK_THROWS_AS(resolve_config("curve", std::nullopt, ov), ValidationError);
  }
  SECTION("the defaults reproduce the documented setups") {
    const Json c = default_config("curve");
    CHECK_THAT(c["anchor"][0].get<double>(), WithinAbs(std::sqrt(0.5), 1e-16));
    CHECK(c["hyper"]["upper"][0] == 2.0);
    const Json b = default_config("bma");
    CHECK(b["anchor"][0] == 1.0);
    CHECK(b["strategy"] == "both");
    const Json s = default_config("mcmc-study");
    CHECK(s["draw_counts"] == Json{3000, 10000, 30000, 100000, 300000});
  }
}

TEST_CASE("curve subcommand writes every artifact") {
  const fs::path out = scratch("curve");
  REQUIRE(run("curve", quick_curve(out)) == 0);
  for (const char* f : {"anchor.json", "draws.csv", "diagnostics.csv", "curve_exact.csv", "curve_kde.csv",
                        "curve_iwmde.csv", "errors.csv", "curve.svg", "config.resolved.json"})
    CHECK(fs::exists(out / f));

  std::ifstream in(out / "curve_iwmde.csv");
  const SensitivityCurve c = read_curve_csv(in);
  CHECK(c.size() == 40);
  CHECK(c.grid(0, 0) == 0.002);
  CHECK(c.grid(39, 0) == 2.0);
  const Json anchor = Json::parse(slurp(out / "anchor.json"));
  CHECK_THAT(anchor["log_bf10"].get<double>(), WithinAbs(-1.2364343532434057, 1e-9));

  const std::string svg = slurp(out / "curve.svg");
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("href") == std::string::npos);
  CHECK(svg.find("<script") == std::string::npos);
  // Oracle plus one line per estimator.
  std::size_t lines = 0;
  for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++lines;
  CHECK(lines >= 3);
}

TEST_CASE("curve subcommand honours an estimator subset") {
  const fs::path out = scratch("subset");
  Json cfg = quick_curve(out);
  cfg["estimators"] = {"iwmde"};
  REQUIRE(run("curve", cfg) == 0);
  CHECK(fs::exists(out / "curve_iwmde.csv"));
  CHECK_FALSE(fs::exists(out / "curve_kde.csv"));
}

TEST_CASE("seeded runs are byte-identical") {
  const fs::path a = scratch("det_a") / "out";
  const fs::path b = scratch("det_b") / "out";
  REQUIRE(run("curve", quick_curve(a)) == 0);
  REQUIRE(run("curve", quick_curve(b)) == 0);
  const auto diff = compare_trees(a, b, {"config.resolved.json"});
  CHECK(diff.empty());
}

TEST_CASE("unconverged draws stop the run unless forced") {
  const fs::path out = scratch("unconverged");
  Json cfg = quick_curve(out);
  cfg["force"] = false;
  cfg["chains"]["n_keep"] = 1000;
  std::string err;
  CHECK(run("curve", cfg, &err) != 0);
  CHECK_THAT(err, ContainsSubstring("R-hat"));
  CHECK_THAT(err, ContainsSubstring("--force"));
}

TEST_CASE("surface smoke run") {
  const fs::path out = scratch("surface");
  Json cfg = default_config("surface");
  cfg["grid"] = {{"points", {5, 5}}, {"lower", {0.0, 0.1}}, {"upper", {1.0, 0.9}}};
  cfg["chains"]["n_keep"] = 3000;
  cfg["force"] = true;
  cfg["out"] = out.string();
  const auto t0 = std::chrono::steady_clock::now();
  REQUIRE(run("surface", cfg) == 0);
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::minutes(1));

  std::ifstream e(out / "surface_exact.csv"), k(out / "surface_kde.csv"), i(out / "surface_iwmde.csv");
  const auto exact = read_curve_csv(e);
  for (auto* in : {&k, &i}) {
    const auto c = read_curve_csv(*in);
    const std::size_t node = 12;  // (0.5, 0.5)
    REQUIRE(c.grid(node, 0) == 0.5);
    REQUIRE(c.grid(node, 1) == 0.5);
    CHECK_THAT(c.log_bf[node] - exact.log_bf[node], WithinAbs(0.0, 1e-9));
  }
  CHECK(slurp(out / "surface.svg").find("<rect") != std::string::npos);
}

TEST_CASE("bma subcommand") {
  const fs::path out = scratch("bma");
  Json cfg = default_config("bma");
  cfg["chains"]["n_keep"] = 4000;
  cfg["estimators"] = {"iwmde"};
  cfg["grid"]["points"] = {30};
  cfg["out"] = out.string();
  REQUIRE(run("bma", cfg) == 0);
  CHECK(fs::exists(out / "inclusion_bridge_iwmde.csv"));
  CHECK(fs::exists(out / "inclusion_product-space_iwmde.csv"));
  CHECK(fs::exists(out / "bma.svg"));
  std::ifstream v(out / "validation.csv");
  std::string line;
  std::size_t rows = 0;
  std::getline(v, line);
  while (std::getline(v, line)) ++rows;
  CHECK(rows == 10);

  cfg["strategy"] = "sideways";
  CHECK(run("bma", cfg) != 0);
}

TEST_CASE("gen-meta subcommand reproduces the bundled dataset") {
  const fs::path out = scratch("genmeta");
  Json cfg = default_config("gen-meta");
  cfg["out"] = out.string();
  REQUIRE(run("gen-meta", cfg) == 0);
  CHECK(slurp(out / "synthetic_meta.csv") == slurp(fs::path(BFSENS_DATA_DIR) / "synthetic_meta_k9.csv"));
}

TEST_CASE("validate reports per criterion and fails on a corrupted dataset") {
  const fs::path dir = scratch("validate");
  std::ofstream(dir / "broken.csv") << "effect,se\n0.1,abc\n";
  Json cfg = default_config("validate");
  cfg["meta_data"] = (dir / "broken.csv").string();
  cfg["criteria"] = {1, 6, 7};
  cfg["out"] = (dir / "out").string();
  CHECK(run("validate", cfg) != 0);
  const Json report = Json::parse(slurp(dir / "out" / "validation_report.json"));
  REQUIRE(report["criteria"].size() == 3);
  CHECK(report["criteria"][0]["status"] == "pass");
  CHECK(report["criteria"][1]["status"] == "fail");
  CHECK_THAT(report["criteria"][1]["detail"].get<std::string>(), ContainsSubstring("row 1"));
  CHECK(report["criteria"][2]["status"] == "pass");
  CHECK(report["pass"] == false);
}

TEST_CASE("command-line front end") {
  CHECK(spawn("validate --list") == 0);
  CHECK(spawn("curve --estimators bogus --out " + scratch("bogus").string()) != 0);
  CHECK(spawn("nonsense") != 0);
  const fs::path dir = scratch("flags");
  CHECK(spawn("gen-meta --seed 5 --out " + (dir / "g").string()) == 0);
  const Json cfg = Json::parse(slurp(dir / "g" / "config.resolved.json"));
  CHECK(cfg["seed"] == 5);
}
