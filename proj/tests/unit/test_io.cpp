#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pheno/errors.hpp"
#include "pheno/io.hpp"
#include "pheno/strategies.hpp"

using namespace pheno;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("pheno_test_io_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& f) {
  std::ifstream in(f);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Trajectory small_run() {
  const auto p = paper_params();
  auto [h, c] = paper_initial(make_grid(21));
  SimOptions o;
  o.dt = 0.05;
  o.n_snapshots = 2;
  return simulate(p, h, c, constant_schedule({1.0, 1.0}, 1.0), 1.0, o);
}

}  // namespace

TEST_CASE("config parsing is strict") {
  const auto c = config_from_json(nlohmann::json::parse(R"({"preset":"lorz2013-legacy","nx":51,"dt":0.01,"u1":1})"));
  CHECK(c.nx == 51);
  CHECK(c.dt == 0.01);
  REQUIRE(c.dose);
  CHECK(c.dose->u1 == 1.0);
  CHECK(c.dose->u2 == 0.0);
  CHECK(c.params.mu_C(0.5) == doctest::Approx(paper_params(MuCVariant::legacy).mu_C(0.5)));

  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"nx":51,"bogus":1})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"nx":2.5})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"dt":-1})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"seed":-3})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"([1,2])")), ConfigError);
  try {
    config_from_json(nlohmann::json::parse(R"({"params":{"theta_HC":"0.4x"}})"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("config.params.theta_HC") != std::string::npos);
  }
}

TEST_CASE("config file loading") {
  const auto d = scratch("cfg");
  write_text(d / "ok.json", R"({"seed": 4, "T": 3})");
  const auto c = load_config(d / "ok.json");
  CHECK(c.seed == 4);
  CHECK(*c.T == 3.0);
  write_text(d / "broken.json", "{ nope");
  CHECK_THROWS_AS(load_config(d / "broken.json"), ConfigError);
  CHECK_THROWS_AS(load_config(d / "missing.json"), ConfigError);
}

TEST_CASE("totals csv has unit-tagged headers and one row per step") {
  const auto tr = small_run();
  std::ostringstream os;
  write_totals_csv(os, tr);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t[time],rho_H[cells],rho_C[cells],rho_CS[cells],rho_CR[cells],u1[dose],u2[dose],g1[1],g2[1],mode[-]");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == tr.size());
}

TEST_CASE("snapshot and plot bundles") {
  const auto tr = small_run();
  std::ostringstream a, b;
  write_snapshots_csv(a, tr);
  write_plot_bundle(b, tr);
  CHECK(a.str().rfind("snapshot[-],t[time],x[phenotype]", 0) == 0);
  CHECK(b.str().rfind("panel,series,x,y\n", 0) == 0);
  CHECK(b.str().find("totals,rho_C,") != std::string::npos);
}

TEST_CASE("number formatting") {
  CHECK(fmt_num(0.1) == "0.1");
  CHECK(fmt_num(1.0 / 3.0) == "0.333333333333");
  CHECK(fmt_num(2.5e-7) == "2.5e-07");
}

TEST_CASE("manifest round trip") {
  const auto d = scratch("manifest");
  RunManifest m;
  m.command = "simulate";
  m.preset = "lorz2013-modified";
  m.params = params_to_json(paper_params());
  m.nx = 21;
  m.dt = 0.01;
  m.artifacts = {"totals.csv"};
  m.write(d);
  const auto j = nlohmann::json::parse(slurp(d / "manifest.json"));
  CHECK(j["command"] == "simulate");
  CHECK(j["artifacts"][0] == "totals.csv");
  CHECK(j.contains("wall_time_s"));
}

TEST_CASE("figure output is deterministic") {
  FigureOptions o;
  o.nx = 41;
  o.dt = 1e-2;
  const auto a = scratch("fig_a"), b = scratch("fig_b");
  const auto ra = run_figure(1, a, o);
  const auto rb = run_figure(1, b, o);
  REQUIRE(!ra.artifacts.empty());
  for (const auto& name : ra.artifacts) {
    if (name == "manifest.json") continue;
    CHECK(slurp(a / name) == slurp(b / name));
  }
  CHECK(ra.summary == rb.summary);
  CHECK(fs::exists(a / "manifest.json"));

  const auto c = scratch("fig2");
  const auto r2 = run_figure(2, c, o);
  CHECK(slurp(c / "mu_C.csv").rfind("x[phenotype],mu_C_modified", 0) == 0);
  CHECK_THROWS_AS(run_figure(9, c, o), DomainError);
}
