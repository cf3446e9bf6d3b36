#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qfgp/cli.hpp"
#include "qfgp/config.hpp"
#include "qfgp/error.hpp"
#include "qfgp/output.hpp"

using namespace qfgp;
namespace fs = std::filesystem;

namespace {

std::string error_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind() + ": " + e.what();
  }
  return "";
}

bool has(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Scratch {
  fs::path dir;
  fs::path old;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / name), old(fs::current_path()) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::current_path(dir);
  }
  ~Scratch() {
    fs::current_path(old);
    fs::remove_all(dir);
  }
};

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string kCheap = R"({"system":{"n_cycles":2},"numerics":{"samples_per_cycle":400}})";

}  // namespace

TEST_CASE("minimal config is fully defaulted") {
  const RunConfig c = parse_config_text(
      R"({"material":{"preset":"Au"},"geometry":{"u":0.001,"alpha":0.3,"gamma_dip":1.0},"system":{"theta0":0.6}})");
  CHECK(c.sim.material.omega_pl == 1.37e16);
  CHECK(c.sim.geometry.u == 0.001);
  CHECK(c.sim.geometry.alpha == 0.3);
  CHECK(c.sim.system.theta0 == 0.6);
  CHECK(c.sim.system.delta_ratio == 0.9);
  CHECK(c.sim.system.coupling_g == kCalibratedCoupling);
  CHECK(has(c.defaulted, "system.delta_ratio"));
  CHECK(has(c.defaulted, "numerics.kernel_dt"));
  CHECK(has(c.defaulted, "output.directory"));
  CHECK(!has(c.defaulted, "geometry.u"));
  CHECK(!has(c.defaulted, "system.theta0"));
  CHECK(!c.sweep);

  const RunConfig d = default_config();
  CHECK(d.sim.material.gamma_ratio == 0.1);
  CHECK(d.output.directory == "qfgp-out");
}

TEST_CASE("config validation errors") {
  CHECK(error_of([] { parse_config_text(R"({"material":{"preset":"Au"},"geometry":{"u":0.5}})"); })
            .find("non-relativistic bound") != std::string::npos);
  const std::string unknown = error_of([] { parse_config_text(R"({"geometry":{"speed":1}})"); });
  CHECK(unknown.rfind("validation", 0) == 0);
  CHECK(unknown.find("geometry.speed") != std::string::npos);
  CHECK(error_of([] { parse_config_text(R"({"extras":{}})"); }).rfind("validation", 0) == 0);
  CHECK(error_of([] { parse_config_text(R"({"geometry":{"u":"fast"}})"); }).find("geometry.u") !=
        std::string::npos);
  CHECK(error_of([] { parse_config_text(R"({"system":{"n_cycles":0}})"); }).find("system.n_cycles") !=
        std::string::npos);
  CHECK(error_of([] { parse_config_text(R"({"material":{"preset":"Ag"}})"); }).find("material.preset") !=
        std::string::npos);
}

TEST_CASE("syntax errors carry line and column") {
  const std::string e = error_of([] { parse_config_text("{\n  \"geometry\": {\n    \"u\": 0.1,,\n  }\n}"); });
  CHECK(e.rfind("syntax", 0) == 0);
  CHECK(e.find("line 3") != std::string::npos);
  CHECK(e.find("column") != std::string::npos);
}

TEST_CASE("canonical form round trips") {
  const RunConfig c = parse_config_text(
      R"({"material":{"preset":"nSi"},"geometry":{"u":0.0025},"output":{"formats":["csv","json"]},
          "sweep":{"axes":[{"u":[0.0,0.001]},{"material":["Au","nSi"],"n_cycles":[3,4]}],"rows":"final"}})");
  const std::string text = canonical_text(c);
  const RunConfig back = parse_config_text(text);
  CHECK(canonical_text(back) == text);
  CHECK(config_digest(back) == config_digest(c));
  CHECK(back.sweep);
  CHECK(!back.sweep->all_cycles);
  CHECK(back.output.json);
  CHECK(back.sweep_spec().axes.size() == 2);
  CHECK(back.defaulted == std::vector<std::string>{"system.alpha_pol"});
}

TEST_CASE("flag over file over default") {
  const auto path = fs::temp_directory_path() / "qfgp_precedence.json";
  {
    std::ofstream f(path);
    f << R"({"geometry":{"u":0.01,"alpha":0.4}})";
  }
  const std::vector<std::string> sets{"geometry.u=0.02", "material.preset=\"Au\"", "output.directory=elsewhere"};
  const RunConfig c = parse_config_file(path, sets);
  CHECK(c.sim.geometry.u == 0.02);
  CHECK(c.sim.geometry.alpha == 0.4);
  CHECK(c.sim.geometry.gamma_dip == 0.0);
  CHECK(c.sim.material.label == "Au");
  CHECK(c.output.directory == "elsewhere");
  CHECK(parse_config(path.string()).sim.geometry.u == 0.01);
  CHECK(parse_config(R"({"geometry":{"u":0.03}})").sim.geometry.u == 0.03);
  fs::remove(path);

  nlohmann::json doc = nlohmann::json::object();
  apply_override(doc, "system.theta0=0.5");
  apply_override(doc, "numerics.phase_mode=per_cycle");
  CHECK(doc["system"]["theta0"] == 0.5);
  CHECK(doc["numerics"]["phase_mode"] == "per_cycle");
  CHECK(error_of([&] { apply_override(doc, "theta0=1"); }).rfind("validation", 0) == 0);
  CHECK(error_of([&] { apply_override(doc, "system.theta0"); }).rfind("validation", 0) == 0);
}

TEST_CASE("csv formatting") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(-2.5) == "-2.5");
  Provenance p{"test", default_config(), 1.25, {{"note", "value"}}};
  Table t{{"a", "b", "c"}, {{1.0, 2LL, std::string("x,y")}}};
  const std::string csv = csv_text(p, t);
  CHECK(csv.rfind("# qfgp ", 0) == 0);
  CHECK(csv.find("# config_digest: " + config_digest(p.config)) != std::string::npos);
  CHECK(csv.find("# wall_time_s: 1.250") != std::string::npos);
  CHECK(csv.find("# tolerances: rel_tol=1e-09") != std::string::npos);
  CHECK(csv.find("# note: value") != std::string::npos);
  CHECK(data_section(csv) == "a,b,c\n1,2,\"x,y\"\n");
  CHECK(embedded_config(csv) == canonical_text(p.config));
  const nlohmann::json j = json_document(p, t);
  CHECK(j["rows"][0][2] == "x,y");
  CHECK(j["provenance"]["config_digest"] == config_digest(p.config));
}

TEST_CASE("evolve without coupling keeps unit purity") {
  Scratch s("qfgp_cli_evolve");
  const Run r = cli({"-c", kCheap, "--set", "system.coupling_g=0", "-o", "out", "evolve"});
  REQUIRE(r.code == 0);
  CHECK(r.err.empty());
  const std::string csv = slurp("out/trajectory.csv");
  std::istringstream data(data_section(csv));
  std::string line;
  std::getline(data, line);
  CHECK(line == "t,cycle,x,y,z,purity,re_rho_eg,im_rho_eg");
  int rows = 0;
  while (std::getline(data, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    CHECK(std::abs(std::stod(cells[5]) - 1.0) < 1e-12);
    ++rows;
  }
  CHECK(rows == 2 * 400 + 1);
}

TEST_CASE("phase output is deterministic and reproducible from its header") {
  Scratch s("qfgp_cli_phase");
  REQUIRE(cli({"-c", kCheap, "--set", "geometry.u=0.02", "-o", "a", "phase"}).code == 0);
  REQUIRE(cli({"-c", kCheap, "--set", "geometry.u=0.02", "-o", "b", "-w", "3", "phase"}).code == 0);
  const std::string a = slurp("a/phase.csv"), b = slurp("b/phase.csv");
  CHECK(data_section(a) == data_section(b));
  CHECK(data_section(a).rfind("N,phi_g,phi_c,delta_phi,delta_phi_static,delta_phi_velocity", 0) == 0);

  nlohmann::json embedded = nlohmann::json::parse(embedded_config(a));
  embedded["output"]["directory"] = "c";
  REQUIRE(cli({"-c", embedded.dump(), "phase"}).code == 0);
  CHECK(data_section(slurp("c/phase.csv")) == data_section(a));
}

TEST_CASE("commands write only inside the output directory") {
  Scratch s("qfgp_cli_confined");
  REQUIRE(cli({"-c", kCheap, "-o", "results/run1", "kernels"}).code == 0);
  REQUIRE(cli({"-c", kCheap, "-o", "results/run1", "--set", "output.formats=[\"csv\",\"json\"]", "phase"}).code ==
          0);
  std::vector<std::string> top;
  for (const auto& e : fs::directory_iterator(s.dir)) top.push_back(e.path().filename().string());
  CHECK(top == std::vector<std::string>{"results"});
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(s.dir / "results"))
    if (e.is_regular_file()) files.push_back(e.path().lexically_relative(s.dir).generic_string());
  std::sort(files.begin(), files.end());
  CHECK(files == std::vector<std::string>{"results/run1/kernels.csv", "results/run1/phase.csv",
                                          "results/run1/phase.json"});
  const nlohmann::json j = nlohmann::json::parse(slurp("results/run1/phase.json"));
  CHECK(j["columns"][0] == "N");
  CHECK(j["provenance"]["command"] == "phase");
}

TEST_CASE("exit status follows the error records") {
  Scratch s("qfgp_cli_errors");
  Run r = cli({"-c", R"({"geometry":{"speed":1}})", "phase"});
  CHECK(r.code != 0);
  nlohmann::json rec = nlohmann::json::parse(r.err.substr(0, r.err.find('\n')));
  CHECK(rec["error"]["kind"] == "validation");
  CHECK(rec["error"]["message"].get<std::string>().find("geometry.speed") != std::string::npos);

  r = cli({"-c", "{\"geometry\": {", "phase"});
  CHECK(r.code != 0);
  CHECK(nlohmann::json::parse(r.err.substr(0, r.err.find('\n')))["error"]["kind"] == "syntax");

  r = cli({"bogus"});
  CHECK(r.code == 2);
  CHECK(nlohmann::json::parse(r.err.substr(0, r.err.find('\n')))["error"]["kind"] == "usage");

  r = cli({"figure", "5"});
  CHECK(r.code != 0);

  r = cli({"-c", "missing.json", "phase"});
  CHECK(r.code != 0);
  CHECK(nlohmann::json::parse(r.err.substr(0, r.err.find('\n')))["error"]["kind"] == "io");

  r = cli({"-o", "v", "validate"});
  CHECK(r.code == 0);
  CHECK(r.err.empty());
  const nlohmann::json summary = nlohmann::json::parse(r.out);
  CHECK(summary["errors"] == 0);
  CHECK(fs::exists("v/validate.csv"));
}

TEST_CASE("fast invariant suite passes") {
  for (const CheckResult& c : fast_invariant_suite()) {
    INFO(c.name << " deviation " << c.value);
    CHECK(c.passed);
  }
}

TEST_CASE("sweep command") {
  Scratch s("qfgp_cli_sweep");
  const std::string cfg =
      R"({"system":{"n_cycles":2},"numerics":{"samples_per_cycle":400},
          "sweep":{"name":"grid","axes":[{"u":[0.0,0.01]},{"alpha":[0.1,1.5]}],"rows":"final"}})";
  const Run r = cli({"-c", cfg, "-o", "o", "sweep"});
  REQUIRE(r.code == 0);
  std::istringstream data(data_section(slurp("o/grid_data.csv")));
  std::string header;
  std::getline(data, header);
  CHECK(header.rfind("point,u,alpha,N,phi_g", 0) == 0);
  int rows = 0;
  for (std::string line; std::getline(data, line);) ++rows;
  CHECK(rows == 4);

  CHECK(cli({"-c", kCheap, "-o", "o", "sweep"}).code != 0);
}
