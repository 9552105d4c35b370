#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "posmom/classical.hpp"
#include "posmom/defect.hpp"
#include "posmom/fringe.hpp"
#include "posmom/grid.hpp"
#include "posmom/io.hpp"
#include "posmom/states.hpp"

#include "helpers.hpp"

using namespace posmom;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "posmom_io_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text_plain(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

std::string reference_config() {
  return std::string(POSMOM_CONFIG_DIR) + "/reference.json";
}

struct CliRun {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliRun run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out_file = dir / "stdout.txt";
  const fs::path err_file = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + POSMOM_CLI_PATH + "\" " + args +
                          " > " + out_file.string() + " 2> " + err_file.string();
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc >= 0);
  CliRun r;
  r.exit_code = WEXITSTATUS(rc);
  r.out = read_text(out_file);
  r.err = read_text(err_file);
  return r;
}

}  // namespace

TEST_CASE("wavefunction CSV round-trips bit for bit") {
  const auto dir = fresh_dir("wf_roundtrip");
  WaveFunction psi;
  psi.grid = make_centered_grid(64, 2.5e-6);
  psi.amplitudes.resize(64);
  for (std::size_t i = 0; i < 64; ++i) {
    const double a = static_cast<double>(i);
    psi.amplitudes[i] = cdouble{std::sin(a) / 3.0, std::sqrt(a + 0.5)};
  }

  const auto path = dir / "wf.csv";
  write_csv(psi, path);
  REQUIRE_FALSE(fs::exists(dir / "wf.csv.tmp"));

  const auto back = read_wavefunction_csv(path);
  REQUIRE(back.grid.n_points == psi.grid.n_points);
  REQUIRE(back.grid.x_min == psi.grid.x_min);
  REQUIRE_THAT(back.grid.dx, WithinRel(psi.grid.dx, 1e-12));
  for (std::size_t i = 0; i < 64; ++i) {
    REQUIRE(back.amplitudes[i] == psi.amplitudes[i]);
  }
}

TEST_CASE("curve and fringe CSVs round-trip exactly") {
  const auto dir = fresh_dir("csv_roundtrip");

  DefectCurve curve;
  curve.scaled_z = {0.5, 1.0, 1.4, 7.25};
  curve.defect = {0.074640170000000004, 0.081121339999999993, 0.0796, -0.31};
  write_csv(curve, dir / "curve.csv");
  const auto curve_back = read_defect_curve_csv(dir / "curve.csv");
  REQUIRE(curve_back.scaled_z == curve.scaled_z);
  REQUIRE(curve_back.defect == curve.defect);

  FringeDataset data;
  data.positions = {-3e-3, -1e-3, 1e-3, 3e-3, 5e-3, 7e-3};
  data.counts = {0.0, 3.0, 1017.0, 42.5, 7.0, 1.0};
  data.pixel_width = 2e-3;
  write_csv(data, dir / "fringe.csv");
  const auto fringe_back = read_fringe_csv(dir / "fringe.csv");
  REQUIRE(fringe_back.positions == data.positions);
  REQUIRE(fringe_back.counts == data.counts);
  REQUIRE_THAT(fringe_back.pixel_width, WithinRel(data.pixel_width, 1e-9));
  REQUIRE_THAT(fringe_back.total_counts, WithinRel(1070.5, 1e-12));
}

TEST_CASE("ensemble CSV records every sample") {
  const auto dir = fresh_dir("ensemble_csv");
  CorrelatedGaussian spec;
  spec.mean_x = 1e-5;
  spec.mean_p = -2e-31;
  spec.sigma_x = 3e-5;
  spec.sigma_p = 1e-31;
  spec.corr = 0.4;
  const auto ens = sample_joint(spec, 50, 7u);

  write_csv(ens, dir / "ensemble.csv");
  const auto cols = detail::read_csv_columns(dir / "ensemble.csv", "x0_m,px_kgms");
  REQUIRE(cols[0].size() == 50);
  for (std::size_t i = 0; i < 50; ++i) {
    REQUIRE(cols[0][i] == ens.samples[i].x0);
    REQUIRE(cols[1][i] == ens.samples[i].px);
  }
}

TEST_CASE("malformed CSV inputs are rejected") {
  const auto dir = fresh_dir("bad_csv");
  const auto craft = [&](const char* name, const std::string& body) {
    const auto p = dir / name;
    write_text_plain(p, body);
    return p;
  };

  REQUIRE_THROWS_MATCHES(
      read_fringe_csv(craft("header.csv", "x_m,potato\n1,2\n2,3\n")), io_error,
      Catch::Matchers::MessageMatches(ContainsSubstring("expected header")));
  REQUIRE_THROWS_AS(
      read_fringe_csv(craft("ragged.csv", "x_m,counts\n1,2\n3\n")), io_error);
  REQUIRE_THROWS_MATCHES(
      read_fringe_csv(craft("alpha.csv", "x_m,counts\n1,abc\n2,3\n")), io_error,
      Catch::Matchers::MessageMatches(ContainsSubstring("malformed numeric")));
  REQUIRE_THROWS_AS(read_fringe_csv(craft("empty.csv", "")), io_error);
  REQUIRE_THROWS_AS(
      read_fringe_csv(craft("headonly.csv", "x_m,counts\n")), io_error);
  REQUIRE_THROWS_AS(
      read_fringe_csv(craft("onerow.csv", "x_m,counts\n1,5\n")), io_error);
  REQUIRE_THROWS_MATCHES(
      read_wavefunction_csv(craft(
          "lumpy.csv",
          "x_m,re_amplitude,im_amplitude\n0,1,0\n1,1,0\n3,1,0\n")),
      io_error,
      Catch::Matchers::MessageMatches(ContainsSubstring("uniformly spaced")));
  REQUIRE_THROWS_AS(
      read_wavefunction_csv(craft(
          "backwards.csv", "x_m,re_amplitude,im_amplitude\n2,1,0\n1,1,0\n")),
      io_error);
  REQUIRE_THROWS_AS(read_fringe_csv(dir / "does_not_exist.csv"), io_error);
}

TEST_CASE("JSON reports round-trip with fixed schemas") {
  const auto dir = fresh_dir("json_roundtrip");

  SECTION("interval probability report") {
    IntervalProbabilityReport r;
    r.p_L = 0.57393909;
    r.p_B = 0.57292962;
    r.p_M = 0.06724026;
    r.bound_rhs = 0.14686871;
    r.defect = 0.07962845;
    r.t = 5.93203e-10;
    r.M_width = 1.128e-4;
    r.visibility = 0.85;
    const json j = r;
    REQUIRE(j.size() == 8);
    write_json(j, dir / "report.json");
    const auto back = read_json(dir / "report.json").get<IntervalProbabilityReport>();
    REQUIRE(back.p_L == r.p_L);
    REQUIRE(back.p_B == r.p_B);
    REQUIRE(back.p_M == r.p_M);
    REQUIRE(back.bound_rhs == r.bound_rhs);
    REQUIRE(back.defect == r.defect);
    REQUIRE(back.t == r.t);
    REQUIRE(back.M_width == r.M_width);
    REQUIRE(back.visibility == r.visibility);
  }

  SECTION("optimization result carries exactly its four numbers") {
    OptimizationResult r;
    r.optimal_scaled_z = 0.997781;
    r.optimal_lb_fraction = 0.02173750;
    r.max_defect = 0.08115569;
    r.tolerance = 1e-4;
    r.multimodal = true;  // diagnostic flag, deliberately not serialized
    const json j = r;
    REQUIRE(j.size() == 4);
    REQUIRE(j.contains("optimal_scaled_z"));
    REQUIRE(j.contains("optimal_lb_fraction"));
    REQUIRE(j.contains("max_defect"));
    REQUIRE(j.contains("tolerance"));
    write_json(j, dir / "opt.json");
    const auto back = read_json(dir / "opt.json").get<OptimizationResult>();
    REQUIRE(back.optimal_scaled_z == r.optimal_scaled_z);
    REQUIRE(back.optimal_lb_fraction == r.optimal_lb_fraction);
    REQUIRE(back.max_defect == r.max_defect);
    REQUIRE(back.tolerance == r.tolerance);
  }

  SECTION("fit result") {
    FitResult r;
    r.visibility = 0.8505;
    r.center = -1.3e-7;
    r.amplitude = 15625.0;
    r.background = 2.25;
    r.width_params = {4.7e-5, 2.162e-3};
    r.rms_residual = 31.7;
    r.converged = true;
    const json j = r;
    REQUIRE(j.size() == 7);
    write_json(j, dir / "fit.json");
    const auto back = read_json(dir / "fit.json").get<FitResult>();
    REQUIRE(back.visibility == r.visibility);
    REQUIRE(back.center == r.center);
    REQUIRE(back.amplitude == r.amplitude);
    REQUIRE(back.background == r.background);
    REQUIRE(back.width_params == r.width_params);
    REQUIRE(back.rms_residual == r.rms_residual);
    REQUIRE(back.converged == r.converged);
  }

  SECTION("classical report nests its probability block") {
    ClassicalReport r;
    r.report.p_L = 0.31;
    r.report.p_B = 0.52;
    r.report.p_M = 0.99;
    r.report.defect = -1.16;
    r.sigma_L = 1e-3;
    r.sigma_B = 2e-3;
    r.sigma_M = 5e-4;
    r.sigma_defect = 2.5e-3;
    r.n_samples = 100000;
    r.inclusion_violations = 0;
    r.distribution_tag = "point_mass_mixture_4";
    r.seed = 918273645u;
    const json j = r;
    REQUIRE(j.at("report").is_object());
    REQUIRE(j.at("report").contains("p_L"));
    write_json(j, dir / "classical.json");
    const auto back = read_json(dir / "classical.json").get<ClassicalReport>();
    REQUIRE(back.report.defect == r.report.defect);
    REQUIRE(back.sigma_defect == r.sigma_defect);
    REQUIRE(back.n_samples == r.n_samples);
    REQUIRE(back.distribution_tag == r.distribution_tag);
    REQUIRE(back.seed == r.seed);
  }

  SECTION("malformed JSON is an io_error") {
    write_text_plain(dir / "broken.json", "{\"p_L\": 0.5,");
    REQUIRE_THROWS_AS(read_json(dir / "broken.json"), io_error);
  }
}

TEST_CASE("atomic writes replace files cleanly") {
  const auto dir = fresh_dir("atomic");
  const auto path = dir / "target.json";

  write_json(json{{"generation", 1}}, path);
  write_json(json{{"generation", 2}}, path);
  REQUIRE(read_json(path).at("generation").get<int>() == 2);
  REQUIRE_FALSE(fs::exists(dir / "target.json.tmp"));

  REQUIRE_THROWS_AS(
      atomic_write_text(dir / "missing_subdir" / "x.txt", "data"), io_error);
}

TEST_CASE("the command line rejects bad usage and configs") {
  const auto dir = fresh_dir("cli_usage");

  REQUIRE(run_cli("", dir).exit_code == 2);
  REQUIRE(run_cli("frobnicate --config " + reference_config(), dir).exit_code == 2);
  REQUIRE(run_cli("simulate", dir).exit_code == 2);

  const auto missing = run_cli("simulate --config " + (dir / "nope.json").string(), dir);
  REQUIRE(missing.exit_code == 2);
  REQUIRE_THAT(missing.err, ContainsSubstring("config error"));

  write_text_plain(dir / "partial.json",
                   R"({"physics": {"slit_L_m": 4.7e-5, "slit_Lprime_m": 3.7e-5, "focal_f_m": 0.1}})");
  const auto partial =
      run_cli("simulate --config " + (dir / "partial.json").string(), dir);
  REQUIRE(partial.exit_code == 2);
  REQUIRE_THAT(partial.err, ContainsSubstring("wavelength_m"));

  write_text_plain(dir / "syntax.json", "{\"physics\": ");
  REQUIRE(run_cli("simulate --config " + (dir / "syntax.json").string(), dir)
              .exit_code == 2);

  const auto strong = run_cli(
      "simulate --config " + reference_config() + " --visibility 1.5", dir);
  REQUIRE(strong.exit_code == 2);
  REQUIRE_THAT(strong.err, ContainsSubstring("visibility"));

  const auto no_input = run_cli(
      "analyze --config " + reference_config() + " --out " + dir.string(), dir);
  REQUIRE(no_input.exit_code == 2);
  REQUIRE_THAT(no_input.err, ContainsSubstring("io.input"));
}

TEST_CASE("curve subcommand writes the scan it was asked for") {
  const auto dir = fresh_dir("cli_curve");
  const auto r = run_cli("curve --config " + reference_config() + " --out " +
                             dir.string() + " --z 0.8,1.0,1.2,1.4",
                         dir);
  REQUIRE(r.exit_code == 0);
  REQUIRE_THAT(r.out, ContainsSubstring("4 points"));
  REQUIRE_THAT(r.out, ContainsSubstring("positive range=["));

  const auto curve = read_defect_curve_csv(dir / "defect_curve.csv");
  REQUIRE(curve.scaled_z == std::vector<double>{0.8, 1.0, 1.2, 1.4});
  for (double d : curve.defect) {
    REQUIRE(d > 0.02);
    REQUIRE(d < 0.09);
  }
}

TEST_CASE("seeded synthesis is reproducible through the command line") {
  const auto dir_a = fresh_dir("cli_synth_a");
  const auto dir_b = fresh_dir("cli_synth_b");
  const auto dir_c = fresh_dir("cli_synth_c");
  const std::string base = "synth --config " + reference_config() + " --out ";

  REQUIRE(run_cli(base + dir_a.string(), dir_a).exit_code == 0);
  REQUIRE(run_cli(base + dir_b.string(), dir_b).exit_code == 0);
  REQUIRE(run_cli(base + dir_c.string() + " --seed 999", dir_c).exit_code == 0);

  const auto bytes_a = read_text(dir_a / "fringe.csv");
  REQUIRE(bytes_a == read_text(dir_b / "fringe.csv"));
  REQUIRE(bytes_a != read_text(dir_c / "fringe.csv"));
}

TEST_CASE("analyze recovers the contrast the synthesizer embedded") {
  const auto dir = fresh_dir("cli_roundtrip");
  REQUIRE(run_cli("synth --config " + reference_config() + " --out " + dir.string(),
                  dir)
              .exit_code == 0);

  auto cfg = read_json(reference_config());
  cfg["io"]["input"] = (dir / "fringe.csv").string();
  write_json(cfg, dir / "analyze.json");

  const auto r = run_cli("analyze --config " + (dir / "analyze.json").string() +
                             " --out " + dir.string(),
                         dir);
  REQUIRE(r.exit_code == 0);

  const auto fit = read_json(dir / "fit_result.json").get<FitResult>();
  REQUIRE(fit.converged);
  REQUIRE_THAT(fit.visibility, WithinAbs(0.85, 0.02));

  const auto probs =
      read_json(dir / "fit_probabilities.json").get<IntervalProbabilityReport>();
  REQUIRE_THAT(probs.p_L, WithinAbs(0.5655, 0.01));
  REQUIRE_THAT(probs.p_B, WithinAbs(0.5646, 0.01));
  REQUIRE_THAT(probs.defect, WithinAbs(0.0659, 0.015));
}

TEST_CASE("analyze reports numeric failure without crashing") {
  const auto dir = fresh_dir("cli_flatfit");
  std::string csv = "x_m,counts\n";
  for (int i = 0; i < 32; ++i) {
    csv += std::to_string(i * 1e-4) + ",0\n";
  }
  write_text_plain(dir / "flat.csv", csv);

  auto cfg = read_json(reference_config());
  cfg["io"]["input"] = (dir / "flat.csv").string();
  write_json(cfg, dir / "flat.json");

  const auto r = run_cli("analyze --config " + (dir / "flat.json").string() +
                             " --out " + dir.string(),
                         dir);
  REQUIRE(r.exit_code == 1);
  REQUIRE_THAT(r.err, ContainsSubstring("error"));
}

TEST_CASE("visibility overrides flow through simulation") {
  const auto dir = fresh_dir("cli_simulate");
  const auto r = run_cli("simulate --config " + reference_config() + " --out " +
                             dir.string() + " --z 1.4",
                         dir);
  REQUIRE(r.exit_code == 0);

  const auto report =
      read_json(dir / "report_z0.json").get<IntervalProbabilityReport>();
  REQUIRE_THAT(report.defect, WithinAbs(0.06589950, 1e-6));
  REQUIRE(report.visibility == 0.85);

  const auto psi = read_wavefunction_csv(dir / "superposition_z0.csv");
  REQUIRE(psi.grid.n_points == 65536);
  double norm = 0.0;
  for (const auto& a : psi.amplitudes) norm += std::norm(a);
  norm *= psi.grid.dx;
  REQUIRE_THAT(norm, WithinAbs(1.0, 1e-9));

  const auto dir0 = fresh_dir("cli_simulate_v0");
  const auto r0 = run_cli("simulate --config " + reference_config() + " --out " +
                              dir0.string() + " --z 1.4 --visibility 0",
                          dir0);
  REQUIRE(r0.exit_code == 0);
  const auto report0 =
      read_json(dir0 / "report_z0.json").get<IntervalProbabilityReport>();
  REQUIRE(report0.defect < 0.0);
  REQUIRE(report0.visibility == 0.0);
}
