#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "approx.hpp"
#include "pdc/app.hpp"
#include "pdc/config.hpp"
#include "pdc/errors.hpp"
#include "pdc/io.hpp"

using namespace pdc;
namespace fs = std::filesystem;

namespace {
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("pdcsim_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
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

std::map<std::string, std::string> parse_summary(const std::string& line) {
  std::map<std::string, std::string> kv;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    REQUIRE(eq != std::string::npos);
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

const std::string kPaperConfig = std::string(PDC_SOURCE_DIR) + "/configs/default.json";
const std::vector<std::string> kSmallGrid{"--set", "solver.grid.count=200", "--set", "observables.ensemble_size=200",
                                          "--set", "observables.bin_width_THz=0.5"};
}  // namespace

TEST_CASE("shipped config equals the built-in defaults") {
  const RunConfig file = RunConfig::load(kPaperConfig);
  const RunConfig defaults = RunConfig::defaults_with({});
  CHECK(file.to_json() == defaults.to_json());
  CHECK(RunConfig::from_json(defaults.to_json()).to_json() == defaults.to_json());
}

TEST_CASE("config validation reports the field path") {
  auto path_of = [](const std::vector<std::string>& o) {
    try {
      RunConfig::defaults_with(o);
    } catch (const ConfigError& e) {
      return e.path();
    }
    return std::string("<none>");
  };
  CHECK(path_of({"solver.grid.cnt=5"}) == "solver.grid.cnt");
  CHECK(path_of({"solver.grid.count=-1"}) == "solver.grid.count");
  CHECK(path_of({"solver.grid.count=\"many\""}) == "solver.grid.count");
  CHECK(path_of({"solver.coupling_g=1.0", "solver.nu0=0.1"}) == "solver");
  CHECK(path_of({"grating.kind=constant"}) == "solver.nu0");
  CHECK(path_of({"observables.bin_width_THz=0.12"}) == "observables.bin_width_THz");
  CHECK(path_of({"solver.grid.max_THz=400"}) == "solver.grid.max_THz");
  CHECK(path_of({"gain.band_nm=[3000,3100]"}) == "gain.band_nm");
  CHECK(path_of({"dispersion.coefficients=[1,2]"}) == "dispersion");
  CHECK(path_of({"solver.integrator=euler"}) == "solver.integrator");
  CHECK(path_of({"extra=1"}) == "extra");

  // the delay range is checked only when the delay scan is built
  const auto wide = RunConfig::defaults_with({"observables.tau_max_fs=20000"});
  try {
    wide.delays_fs();
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.path() == "observables.tau_max_fs");
  }

  const auto c = RunConfig::defaults_with({"solver.coupling_g=2.5", "grating.kind=constant"});
  CHECK_FALSE(c.solver.nu0.has_value());
  CHECK(*c.solver.coupling_g == 2.5);
  CHECK_THROWS_AS(apply_override(*std::make_unique<nlohmann::json>(), "novalue"), ConfigError);
}

TEST_CASE("CSV helpers") {
  TempDir dir("csv");
  CsvTable t{{"a", "b"}, {}};
  t.add_row({1.0, 0.1});
  t.add_row({-2.5e-300, 1.0 / 3.0});
  CHECK_THROWS_AS(t.add_row({1.0}), DomainError);
  write_file_atomic(dir.path / "t.csv", t.render());
  const CsvTable back = read_csv(dir.path / "t.csv");
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  for (const auto& e : fs::directory_iterator(dir.path)) CHECK(e.path().filename() == "t.csv");
}

TEST_CASE("design writes the grating table") {
  TempDir dir("design");
  const Run r = cli({"design", "--points", "11", "--out", dir.path.string()});
  REQUIRE(r.code == kExitOk);
  const auto kv = parse_summary(r.out);
  CHECK(kv.at("command") == "design");
  CHECK(std::stod(kv.at("K0_rad_per_mm")) == rel(855.0625, 1e-5));
  const CsvTable t = read_csv(dir.path / "design.csv");
  CHECK(t.header == std::vector<std::string>{"z_mm", "K_rad_per_mm", "phi_rad"});
  REQUIRE(t.rows.size() == 11);
  CHECK(t.rows[0][1] == 855.0625);
  CHECK(t.rows[10][0] == 5.0);
  CHECK(t.rows[10][2] == rel(4045.625));
  const auto side = nlohmann::json::parse(slurp(dir.path / "design.json"));
  CHECK(side.contains("timestamp"));
  CHECK(side.contains("version"));
  CHECK(side["config"]["grating"]["alpha"] == 735.0);
}

TEST_CASE("error exits leave no artifacts") {
  TempDir dir("errors");
  const auto missing = cli({"-c", (dir.path / "missing.json").string(), "spectrum", "-o", dir.path.string()});
  CHECK(missing.code == kExitConfig);
  CHECK(missing.err.find("missing.json") != std::string::npos);

  const auto bad = cli({"spectrum", "--set", "grating.alpha=-1", "-o", dir.path.string()});
  CHECK(bad.code == kExitConfig);
  CHECK(bad.err.find("grating") != std::string::npos);

  CHECK(cli({"nosuchcommand"}).code == kExitConfig);
  CHECK(cli({}).code == kExitConfig);

  // zero coupling: the bandwidth is undefined
  std::vector<std::string> args{"spectrum", "--set", "solver.nu0=0", "-o", dir.path.string()};
  args.insert(args.end(), kSmallGrid.begin(), kSmallGrid.end());
  const auto numerical = cli(args);
  CHECK(numerical.code == kExitNumerical);
  CHECK(fs::is_empty(dir.path));
}

TEST_CASE("spectrum output and byte-identical reruns") {
  TempDir dir("spectrum");
  auto run = [&](const std::string& sub, const std::string& workers) {
    std::vector<std::string> args{"-c", kPaperConfig, "-j", workers, "spectrum", "-o", (dir.path / sub).string()};
    args.insert(args.end(), kSmallGrid.begin(), kSmallGrid.end());
    return cli(args);
  };
  const Run a = run("a", "1"), b = run("b", "1"), c = run("c", "4");
  REQUIRE(a.code == kExitOk);
  const auto kv = parse_summary(a.out);
  CHECK(std::stod(kv.at("bandwidth_rms_THz")) > 10.0);
  const std::string csv = slurp(dir.path / "a" / "spectrum.csv");
  CHECK(csv == slurp(dir.path / "b" / "spectrum.csv"));
  CHECK(csv == slurp(dir.path / "c" / "spectrum.csv"));
  const CsvTable t = read_csv(dir.path / "a" / "spectrum.csv");
  CHECK(t.header == std::vector<std::string>{"detuning_THz", "wavelength_nm", "photons_per_mode"});
  CHECK(t.rows.size() == 400);
}

TEST_CASE("output directory precedence") {
  TempDir dir("precedence");
  const fs::path env_dir = dir.path / "env", cfg_dir = dir.path / "cfg", flag_dir = dir.path / "flag";
  ::setenv("PDC_OUTPUT_DIR", env_dir.string().c_str(), 1);
  CHECK(cli({"design", "--points", "3"}).code == kExitOk);
  CHECK(fs::exists(env_dir / "design.csv"));
  CHECK(cli({"design", "--points", "3", "--set", "output_dir=\"" + cfg_dir.string() + "\""}).code == kExitOk);
  CHECK(fs::exists(cfg_dir / "design.csv"));
  CHECK(cli({"design", "--points", "3", "--set", "output_dir=\"" + cfg_dir.string() + "\"", "-o", flag_dir.string()})
            .code == kExitOk);
  CHECK(fs::exists(flag_dir / "design.csv"));
  ::unsetenv("PDC_OUTPUT_DIR");
}

TEST_CASE("fit subcommand on an external table") {
  TempDir dir("fit");
  std::ofstream(dir.path / "in.csv") << "power_mW,flux\n"
                                     << "2,9.2\n4,95\n6,1000\n8,11000\n10,122000\n12,1300000\n";
  const Run r = cli({"fit", "-i", (dir.path / "in.csv").string(), "-o", dir.path.string()});
  REQUIRE(r.code == kExitOk);
  const auto kv = parse_summary(r.out);
  CHECK(std::stod(kv.at("rosenbluth_B_per_mW")) == rel(1.2, 0.02));
  CHECK(fs::exists(dir.path / "fit.csv"));
  CHECK(cli({"fit", "-i", (dir.path / "nope.csv").string(), "-o", dir.path.string()}).code == kExitConfig);
}

TEST_CASE("covariance and sfg subcommands run on a small grid") {
  TempDir dir("obs");
  std::vector<std::string> cov{"covariance", "-o", dir.path.string()};
  cov.insert(cov.end(), kSmallGrid.begin(), kSmallGrid.end());
  const Run c = cli(cov);
  REQUIRE(c.code == kExitOk);
  const auto kv = parse_summary(c.out);
  CHECK(kv.count("R"));
  CHECK(kv.at("R_lower_bound") == "true");
  const CsvTable t = read_csv(dir.path / "covariance.csv");
  CHECK(t.header == std::vector<std::string>{"signal_THz", "idler_THz", "cov", "mean_s", "mean_i"});
  CHECK(t.rows.size() == 200 * 200);

  std::vector<std::string> sfg{"sfg", "--power", "4", "-o", dir.path.string(), "--set", "observables.tau_count=101",
                               "--set", "observables.tau_min_fs=-1000", "--set", "observables.tau_max_fs=1000"};
  sfg.insert(sfg.end(), kSmallGrid.begin(), kSmallGrid.end());
  const Run s = cli(sfg);
  REQUIRE(s.code == kExitOk);
  CHECK(parse_summary(s.out).count("fwhm_fs"));
  CHECK(read_csv(dir.path / "sfg.csv").rows.size() == 101);
}
