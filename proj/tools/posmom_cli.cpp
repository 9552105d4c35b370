// Command-line front end. One subcommand per invocation, everything driven
// by a JSON config with a few flag overrides, outputs written to --out.
//
// Exit codes: 0 success, 1 numeric failure while running (aliasing risk,
// degenerate fit, non-convergence), 2 config or usage problems.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "posmom/posmom.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::uint64_t kDefaultSeed = 20250816u;

struct ScanSettings {
  double z_lo = 0.5;
  double z_hi = 10.0;
  std::size_t n_z = 96;
};

struct FringeSettings {
  double n_photons = 1e6;
  std::size_t pixels = 512;
  double span = 8e-3;
  double z_over_zM = 1.4;
  std::string plane = "position";
  std::string slit_model = "gaussian";
};

struct ClassicalSettings {
  std::size_t trials = 100;
  std::size_t samples_per_trial = 100000;
  double z_over_zM = 1.4;
  std::size_t adversarial_iterations = 200;
};

struct OptimizeSettings {
  std::string target = "time";
  double lb_min = 0.01;
  double lb_max = 0.05;
};

struct Settings {
  posmom::PhotonContext ctx;
  posmom::ExperimentParams params;
  posmom::Grid grid;
  double visibility = 1.0;
  std::uint64_t seed = kDefaultSeed;
  ScanSettings scan;
  FringeSettings fringe;
  ClassicalSettings classical;
  OptimizeSettings optimize;
  fs::path out_dir = ".";
  fs::path input;
  std::vector<double> z_list;  // --z override, empty when absent
};

[[noreturn]] void missing_field(const std::string& name) {
  throw posmom::invalid_argument("config: missing required field " + name);
}

const json& require_section(const json& j, const char* section) {
  if (!j.contains(section)) missing_field(section);
  return j.at(section);
}

double require_number(const json& j, const char* section, const char* key) {
  if (!j.contains(section) || !j.at(section).contains(key)) {
    missing_field(std::string(section) + "." + key);
  }
  const auto& v = j.at(section).at(key);
  if (!v.is_number()) {
    throw posmom::invalid_argument(std::string("config: field ") + section +
                                   "." + key + " must be a number");
  }
  return v.get<double>();
}

double number_or(const json& j, const char* section, const char* key,
                 double fallback) {
  if (!j.contains(section) || !j.at(section).contains(key)) return fallback;
  const auto& v = j.at(section).at(key);
  if (!v.is_number()) {
    throw posmom::invalid_argument(std::string("config: field ") + section +
                                   "." + key + " must be a number");
  }
  return v.get<double>();
}

std::string string_or(const json& j, const char* section, const char* key,
                      const std::string& fallback) {
  if (!j.contains(section) || !j.at(section).contains(key)) return fallback;
  const auto& v = j.at(section).at(key);
  if (!v.is_string()) {
    throw posmom::invalid_argument(std::string("config: field ") + section +
                                   "." + key + " must be a string");
  }
  return v.get<std::string>();
}

std::size_t count_or(const json& j, const char* section, const char* key,
                     std::size_t fallback) {
  const double v = number_or(j, section, key, static_cast<double>(fallback));
  if (v < 1.0) {
    throw posmom::invalid_argument(std::string("config: field ") + section +
                                   "." + key + " must be at least 1");
  }
  return static_cast<std::size_t>(v);
}

Settings load_settings(const std::string& config_path,
                       const std::string& out_dir,
                       std::optional<std::uint64_t> seed_override,
                       std::optional<double> visibility_override,
                       const std::vector<double>& z_override) {
  const json j = posmom::read_json(config_path);
  require_section(j, "physics");

  Settings s;
  s.ctx = posmom::make_context(require_number(j, "physics", "wavelength_m"));
  s.params = posmom::make_params(require_number(j, "physics", "slit_L_m"),
                                 require_number(j, "physics", "slit_Lprime_m"),
                                 require_number(j, "physics", "focal_f_m"),
                                 s.ctx);

  const auto n_base =
      static_cast<std::size_t>(number_or(j, "numerics", "n_base", 16384.0));
  const auto min_cells = static_cast<std::size_t>(
      number_or(j, "numerics", "min_slit_cells", 23.0));
  const double tail = number_or(j, "numerics", "tail_factor", 50.0);
  s.grid = posmom::auto_grid(s.params.slit_L, s.params.momentum_B, n_base,
                             min_cells, tail);

  s.visibility = visibility_override.value_or(
      j.contains("visibility") ? j.at("visibility").get<double>() : 1.0);
  if (!(s.visibility >= 0.0 && s.visibility <= 1.0)) {
    throw posmom::invalid_argument("config: visibility must lie in [0,1]");
  }

  s.seed = seed_override.value_or(static_cast<std::uint64_t>(
      number_or(j, "io", "seed", static_cast<double>(kDefaultSeed))));

  s.scan.z_lo = number_or(j, "scan", "z_over_zM_min", s.scan.z_lo);
  s.scan.z_hi = number_or(j, "scan", "z_over_zM_max", s.scan.z_hi);
  s.scan.n_z = count_or(j, "scan", "n_z", s.scan.n_z);
  if (!(s.scan.z_lo < s.scan.z_hi) || s.scan.n_z < 2) {
    throw posmom::invalid_argument("config: scan range must satisfy z_over_zM_min < z_over_zM_max with n_z >= 2");
  }

  s.fringe.n_photons = number_or(j, "fringe", "n_photons", s.fringe.n_photons);
  s.fringe.pixels = count_or(j, "fringe", "pixels", s.fringe.pixels);
  s.fringe.span = number_or(j, "fringe", "span_m", s.fringe.span);
  s.fringe.z_over_zM = number_or(j, "fringe", "z_over_zM", s.fringe.z_over_zM);
  s.fringe.plane = string_or(j, "fringe", "plane", s.fringe.plane);
  s.fringe.slit_model = string_or(j, "fringe", "slit_model", s.fringe.slit_model);
  if (s.fringe.plane != "position" && s.fringe.plane != "focal") {
    throw posmom::invalid_argument("config: fringe.plane must be 'position' or 'focal'");
  }
  if (s.fringe.slit_model != "box" && s.fringe.slit_model != "gaussian") {
    throw posmom::invalid_argument("config: fringe.slit_model must be 'box' or 'gaussian'");
  }
  if (!(s.fringe.span > 0.0) || !(s.fringe.n_photons >= 1.0) ||
      !(s.fringe.z_over_zM >= 0.0)) {
    throw posmom::invalid_argument("config: fringe section has a non-positive field");
  }

  s.classical.trials = count_or(j, "classical", "trials", s.classical.trials);
  s.classical.samples_per_trial =
      count_or(j, "classical", "samples_per_trial", s.classical.samples_per_trial);
  s.classical.z_over_zM =
      number_or(j, "classical", "z_over_zM", s.classical.z_over_zM);
  s.classical.adversarial_iterations = count_or(
      j, "classical", "adversarial_iterations", s.classical.adversarial_iterations);

  s.optimize.target = string_or(j, "optimize", "target", s.optimize.target);
  s.optimize.lb_min = number_or(j, "optimize", "lb_min", s.optimize.lb_min);
  s.optimize.lb_max = number_or(j, "optimize", "lb_max", s.optimize.lb_max);
  if (s.optimize.target != "time" && s.optimize.target != "product") {
    throw posmom::invalid_argument("config: optimize.target must be 'time' or 'product'");
  }

  if (j.contains("io") && j.at("io").contains("input")) {
    s.input = j.at("io").at("input").get<std::string>();
  }
  s.out_dir = out_dir;
  s.z_list = z_override;
  return s;
}

fs::path out_path(const Settings& s, const std::string& name) {
  fs::create_directories(s.out_dir);
  return s.out_dir / name;
}

int run_simulate(const Settings& s) {
  std::vector<double> zs = s.z_list.empty() ? std::vector<double>{1.4} : s.z_list;
  posmom::DefectEvaluator ev(s.params, s.ctx, s.visibility, s.grid);
  const auto psi_L = posmom::box_position_state(s.params.slit_L, s.grid);
  const auto psi_B = posmom::sinc_momentum_state(s.params.momentum_B, s.grid);
  const auto sup = posmom::superposition(psi_L, psi_B);
  posmom::IntervalProbabilityReport last;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double t = zs[i] * s.params.t_M;
    const auto state = posmom::free_propagate(sup, t, s.ctx);
    const auto report = ev.report(zs[i]);
    const std::string tag = "_z" + std::to_string(i);
    posmom::write_csv(state, out_path(s, "superposition" + tag + ".csv"));
    posmom::write_json(json(report), out_path(s, "report" + tag + ".json"));
    last = report;
  }
  std::printf("simulate: z/z_M=%g p_L=%.6f p_B=%.6f p_M=%.6f bound=%.6f defect=%.6f\n",
              zs.back(), last.p_L, last.p_B, last.p_M, last.bound_rhs, last.defect);
  return 0;
}

int run_curve(const Settings& s) {
  std::vector<double> zs = s.z_list;
  if (zs.empty()) {
    zs = posmom::detail::linspace(s.scan.z_lo, s.scan.z_hi, s.scan.n_z);
  }
  const auto curve = posmom::defect_curve(s.params, s.ctx, zs, s.visibility, s.grid);
  posmom::write_csv(curve, out_path(s, "defect_curve.csv"));
  const auto range = posmom::violation_range(curve);
  std::size_t peak = 0;
  for (std::size_t i = 1; i < curve.defect.size(); ++i) {
    if (curve.defect[i] > curve.defect[peak]) peak = i;
  }
  std::printf("curve: %zu points, peak defect=%.6f at z/z_M=%.4f, positive range=",
              curve.scaled_z.size(), curve.defect[peak], curve.scaled_z[peak]);
  if (range.empty) {
    std::printf("none\n");
  } else {
    std::printf("[%.4f, %.4f]\n", range.z_lo, range.z_hi);
  }
  return 0;
}

int run_optimize(const Settings& s) {
  posmom::OptimizationResult result;
  if (s.optimize.target == "time") {
    result = posmom::find_optimal_time(s.params, s.ctx, s.visibility);
  } else {
    result = posmom::find_optimal_product(s.ctx, s.optimize.lb_min,
                                          s.optimize.lb_max, s.visibility);
  }
  posmom::write_json(json(result), out_path(s, "optimization.json"));
  std::printf("optimize(%s): z/z_M=%.4f lb=%.6f max_defect=%.6f tolerance=%g%s\n",
              s.optimize.target.c_str(), result.optimal_scaled_z,
              result.optimal_lb_fraction, result.max_defect, result.tolerance,
              result.multimodal ? " (multimodal fallback)" : "");
  return 0;
}

int run_classical(const Settings& s) {
  const double L = s.params.slit_L;
  const double B = s.params.momentum_B;
  const double t = s.classical.z_over_zM * s.params.t_M;

  std::uint64_t split_state = s.seed;
  posmom::Rng spec_rng(posmom::splitmix64(split_state));
  posmom::ClassicalReport worst;
  worst.report.defect = -2.0;
  std::size_t total_violations = 0;
  for (std::size_t i = 0; i < s.classical.trials; ++i) {
    const auto spec = posmom::make_random_spec(spec_rng, L, B);
    const auto ens = posmom::sample_joint(spec, s.classical.samples_per_trial,
                                          posmom::splitmix64(split_state));
    const auto rep = posmom::straightline_report(ens, L, B, t, s.ctx);
    total_violations += rep.inclusion_violations;
    if (rep.report.defect > worst.report.defect) worst = rep;
  }

  const auto adv = posmom::adversarial_search(L, B, t, s.ctx,
                                              s.classical.adversarial_iterations,
                                              posmom::splitmix64(split_state));
  total_violations += adv.report.inclusion_violations;

  const auto dump_ens = posmom::sample_joint(
      adv.spec, std::min<std::size_t>(10000, s.classical.samples_per_trial),
      posmom::splitmix64(split_state));
  posmom::write_csv(dump_ens, out_path(s, "ensemble.csv"));

  json out{{"trials", s.classical.trials},
           {"samples_per_trial", s.classical.samples_per_trial},
           {"scaled_z", s.classical.z_over_zM},
           {"max_trial_defect", worst.report.defect},
           {"max_trial_sigma", worst.sigma_defect},
           {"total_inclusion_violations", total_violations},
           {"worst_trial", worst},
           {"adversarial", adv.report}};
  posmom::write_json(out, out_path(s, "classical_report.json"));
  std::printf("classical: %zu trials, worst defect=%.6f (sigma %.6f), adversarial=%.6f (sigma %.6f), inclusion violations=%zu\n",
              s.classical.trials, worst.report.defect, worst.sigma_defect,
              adv.worst_defect, adv.sigma_defect, total_violations);
  return 0;
}

int run_synth(const Settings& s) {
  const auto psi_L = posmom::box_position_state(s.params.slit_L, s.grid);
  const auto psi_B = posmom::sinc_momentum_state(s.params.momentum_B, s.grid);

  std::vector<double> rho;
  posmom::Grid rho_grid = s.grid;
  double z_phys = 0.0;
  if (s.fringe.plane == "focal") {
    const auto fl_L = posmom::lens_fourier_map(psi_L, s.params.focal_f, s.ctx);
    const auto fl_B = posmom::lens_fourier_map(psi_B, s.params.focal_f, s.ctx);
    rho = posmom::visibility_density(fl_L, fl_B, s.visibility);
    rho_grid = fl_L.grid;
  } else if (s.fringe.z_over_zM == 0.0) {
    rho = posmom::visibility_density(psi_L, psi_B, s.visibility);
  } else {
    const double t = s.fringe.z_over_zM * s.params.t_M;
    z_phys = posmom::t_to_z(t, s.ctx);
    // the guard band suppresses periodic wrap-around before pixels see it
    posmom::PropagateOptions opts;
    opts.guard_factor = 2;
    const auto aL = posmom::free_propagate(psi_L, t, s.ctx, opts);
    const auto aB = posmom::free_propagate(psi_B, t, s.ctx, opts);
    rho = posmom::visibility_density(aL, aB, s.visibility);
  }

  const double pixel_dx = s.fringe.span / static_cast<double>(s.fringe.pixels);
  const auto pixels = posmom::make_centered_grid(s.fringe.pixels, pixel_dx);
  const auto data = posmom::synthesize_fringe(rho, rho_grid, pixels,
                                              s.fringe.n_photons, s.seed,
                                              z_phys, s.fringe.plane);
  posmom::write_csv(data, out_path(s, "fringe.csv"));
  std::printf("synth: plane=%s z/z_M=%g pixels=%zu photons=%g total_counts=%.0f\n",
              s.fringe.plane.c_str(), s.fringe.z_over_zM, s.fringe.pixels,
              s.fringe.n_photons, data.total_counts);
  return 0;
}

int run_analyze(const Settings& s) {
  if (s.input.empty()) {
    std::fprintf(stderr, "config error: missing required field io.input\n");
    return 2;
  }
  const auto data = posmom::read_fringe_csv(s.input);

  posmom::FitConfig fc;
  fc.ctx = s.ctx;
  fc.slit_model = s.fringe.slit_model == "box" ? posmom::SlitModel::box
                                               : posmom::SlitModel::gaussian;
  if (s.fringe.plane == "focal") {
    fc.plane = posmom::FringePlane::focal;
    fc.z = 0.0;
    fc.init_w1 = s.params.slit_Lprime;
    fc.init_w2 = s.params.focal_f * s.ctx.wavelength / s.params.slit_L;
  } else {
    fc.plane = posmom::FringePlane::position;
    fc.z = s.fringe.z_over_zM * s.params.z_M;
    fc.init_w1 = s.params.slit_L;
    fc.init_w2 = s.ctx.planck_h / s.params.momentum_B;
  }

  const auto fit = posmom::fit_fringe(data, fc);
  posmom::write_json(json(fit), out_path(s, "fit_result.json"));
  if (!fit.converged) {
    std::fprintf(stderr, "analyze: fit did not converge\n");
    return 1;
  }
  const auto report = posmom::probabilities_from_fit(fit, fc, s.params);
  posmom::write_json(json(report), out_path(s, "fit_probabilities.json"));
  std::printf("analyze: V=%.4f center=%.3e rms=%.3f p_L=%.6f p_B=%.6f p_M=%.6f bound=%.6f defect=%.6f\n",
              fit.visibility, fit.center, fit.rms_residual, report.p_L,
              report.p_B, report.p_M, report.bound_rhs, report.defect);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"position/momentum superposition laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  std::optional<double> visibility_override;
  std::vector<double> z_override;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file")->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed_override, "RNG seed override");
    cmd->add_option("--visibility", visibility_override, "visibility override");
    cmd->add_option("--z", z_override, "scaled z list override")->delimiter(',');
    return cmd;
  };

  auto* c_sim = add_common(app.add_subcommand("simulate", "propagate the superposition and report window probabilities"));
  auto* c_curve = add_common(app.add_subcommand("curve", "defect vs scaled propagation distance"));
  auto* c_opt = add_common(app.add_subcommand("optimize", "search the defect maximum over z or over the width product"));
  auto* c_cls = add_common(app.add_subcommand("classical", "straight-line Monte-Carlo battery plus adversarial search"));
  auto* c_syn = add_common(app.add_subcommand("synth", "synthesize a photon-counting fringe dataset"));
  auto* c_ana = add_common(app.add_subcommand("analyze", "fit a fringe dataset and extract probabilities"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  Settings settings;
  try {
    settings = load_settings(config_path, out_dir, seed_override,
                             visibility_override, z_override);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }

  try {
    if (c_sim->parsed()) return run_simulate(settings);
    if (c_curve->parsed()) return run_curve(settings);
    if (c_opt->parsed()) return run_optimize(settings);
    if (c_cls->parsed()) return run_classical(settings);
    if (c_syn->parsed()) return run_synth(settings);
    if (c_ana->parsed()) return run_analyze(settings);
  } catch (const posmom::error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
