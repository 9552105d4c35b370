#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "posmom/classical.hpp"
#include "posmom/defect.hpp"
#include "posmom/fringe.hpp"
#include "posmom/wavefunction.hpp"

// File formats are the tool's public surface: CSV for anything plottable,
// JSON for reports. Writers go through a temp-file-plus-rename so a crash
// mid-write never leaves a truncated artifact under the final name.

namespace posmom {

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

inline double parse_double(const std::string& s, const std::string& path) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw io_error(path + ": malformed numeric field '" + s + "'");
  }
}

}  // namespace detail

inline void atomic_write_text(const std::filesystem::path& path,
                              const std::string& content) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw io_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw io_error("rename to " + path.string() + " failed: " + ec.message());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- CSV ----

inline void write_csv(const WaveFunction& psi, const std::filesystem::path& path) {
  std::string s = "x_m,re_amplitude,im_amplitude\n";
  for (std::size_t i = 0; i < psi.grid.n_points; ++i) {
    s += detail::format_double(psi.grid.x(i));
    s += ',';
    s += detail::format_double(psi.amplitudes[i].real());
    s += ',';
    s += detail::format_double(psi.amplitudes[i].imag());
    s += '\n';
  }
  atomic_write_text(path, s);
}

namespace detail {

// positions column -> uniform grid, rejecting non-uniform spacing
inline Grid grid_from_positions(const std::vector<double>& x,
                                const std::string& path) {
  if (x.size() < 2) throw io_error(path + ": need at least two rows");
  const double dx = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
  if (!(dx > 0.0)) throw io_error(path + ": positions must be increasing");
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (std::abs(x[i] - x[i - 1] - dx) > 1e-6 * dx) {
      throw io_error(path + ": positions are not uniformly spaced");
    }
  }
  return Grid{x.front(), x.size(), dx};
}

inline std::vector<std::vector<double>> read_csv_columns(
    const std::filesystem::path& path, const std::string& expected_header) {
  std::stringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line)) throw io_error(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header) {
    throw io_error(path.string() + ": expected header '" + expected_header +
                   "', found '" + line + "'");
  }
  const auto n_cols = split_csv_line(expected_header).size();
  std::vector<std::vector<double>> cols(n_cols);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != n_cols) {
      throw io_error(path.string() + ": row with wrong column count");
    }
    for (std::size_t c = 0; c < n_cols; ++c) {
      cols[c].push_back(parse_double(fields[c], path.string()));
    }
  }
  if (cols[0].empty()) throw io_error(path.string() + ": no data rows");
  return cols;
}

}  // namespace detail

inline WaveFunction read_wavefunction_csv(const std::filesystem::path& path) {
  const auto cols =
      detail::read_csv_columns(path, "x_m,re_amplitude,im_amplitude");
  WaveFunction psi;
  psi.grid = detail::grid_from_positions(cols[0], path.string());
  psi.amplitudes.resize(cols[0].size());
  for (std::size_t i = 0; i < psi.amplitudes.size(); ++i) {
    psi.amplitudes[i] = cdouble{cols[1][i], cols[2][i]};
  }
  return psi;
}

inline void write_csv(const DefectCurve& curve, const std::filesystem::path& path) {
  std::string s = "scaled_z,defect\n";
  for (std::size_t i = 0; i < curve.scaled_z.size(); ++i) {
    s += detail::format_double(curve.scaled_z[i]);
    s += ',';
    s += detail::format_double(curve.defect[i]);
    s += '\n';
  }
  atomic_write_text(path, s);
}

inline DefectCurve read_defect_curve_csv(const std::filesystem::path& path) {
  const auto cols = detail::read_csv_columns(path, "scaled_z,defect");
  DefectCurve curve;
  curve.scaled_z = cols[0];
  curve.defect = cols[1];
  return curve;
}

inline void write_csv(const FringeDataset& data, const std::filesystem::path& path) {
  std::string s = "x_m,counts\n";
  for (std::size_t i = 0; i < data.positions.size(); ++i) {
    s += detail::format_double(data.positions[i]);
    s += ',';
    s += detail::format_double(data.counts[i]);
    s += '\n';
  }
  atomic_write_text(path, s);
}

inline FringeDataset read_fringe_csv(const std::filesystem::path& path) {
  const auto cols = detail::read_csv_columns(path, "x_m,counts");
  FringeDataset data;
  data.positions = cols[0];
  data.counts = cols[1];
  const Grid g = detail::grid_from_positions(cols[0], path.string());
  data.pixel_width = g.dx;
  for (double c : data.counts) data.total_counts += c;
  return data;
}

inline void write_csv(const ClassicalEnsemble& ens, const std::filesystem::path& path) {
  std::string s = "x0_m,px_kgms\n";
  for (const auto& smp : ens.samples) {
    s += detail::format_double(smp.x0);
    s += ',';
    s += detail::format_double(smp.px);
    s += '\n';
  }
  atomic_write_text(path, s);
}

// ---- JSON ----

inline void to_json(nlohmann::json& j, const IntervalProbabilityReport& r) {
  j = nlohmann::json{{"p_L", r.p_L},
                     {"p_B", r.p_B},
                     {"p_M", r.p_M},
                     {"bound_rhs", r.bound_rhs},
                     {"defect", r.defect},
                     {"t", r.t},
                     {"M_width", r.M_width},
                     {"visibility", r.visibility}};
}

inline void from_json(const nlohmann::json& j, IntervalProbabilityReport& r) {
  j.at("p_L").get_to(r.p_L);
  j.at("p_B").get_to(r.p_B);
  j.at("p_M").get_to(r.p_M);
  j.at("bound_rhs").get_to(r.bound_rhs);
  j.at("defect").get_to(r.defect);
  j.at("t").get_to(r.t);
  j.at("M_width").get_to(r.M_width);
  j.at("visibility").get_to(r.visibility);
}

inline void to_json(nlohmann::json& j, const OptimizationResult& r) {
  j = nlohmann::json{{"optimal_scaled_z", r.optimal_scaled_z},
                     {"optimal_lb_fraction", r.optimal_lb_fraction},
                     {"max_defect", r.max_defect},
                     {"tolerance", r.tolerance}};
}

inline void from_json(const nlohmann::json& j, OptimizationResult& r) {
  j.at("optimal_scaled_z").get_to(r.optimal_scaled_z);
  j.at("optimal_lb_fraction").get_to(r.optimal_lb_fraction);
  j.at("max_defect").get_to(r.max_defect);
  j.at("tolerance").get_to(r.tolerance);
}

inline void to_json(nlohmann::json& j, const FitResult& r) {
  j = nlohmann::json{{"visibility", r.visibility},
                     {"center", r.center},
                     {"amplitude", r.amplitude},
                     {"background", r.background},
                     {"width_params", r.width_params},
                     {"rms_residual", r.rms_residual},
                     {"converged", r.converged}};
}

inline void from_json(const nlohmann::json& j, FitResult& r) {
  j.at("visibility").get_to(r.visibility);
  j.at("center").get_to(r.center);
  j.at("amplitude").get_to(r.amplitude);
  j.at("background").get_to(r.background);
  j.at("width_params").get_to(r.width_params);
  j.at("rms_residual").get_to(r.rms_residual);
  j.at("converged").get_to(r.converged);
}

inline void to_json(nlohmann::json& j, const ClassicalReport& r) {
  j = nlohmann::json{{"report", r.report},
                     {"sigma_L", r.sigma_L},
                     {"sigma_B", r.sigma_B},
                     {"sigma_M", r.sigma_M},
                     {"sigma_defect", r.sigma_defect},
                     {"n_samples", r.n_samples},
                     {"inclusion_violations", r.inclusion_violations},
                     {"distribution_tag", r.distribution_tag},
                     {"seed", r.seed}};
}

inline void from_json(const nlohmann::json& j, ClassicalReport& r) {
  j.at("report").get_to(r.report);
  j.at("sigma_L").get_to(r.sigma_L);
  j.at("sigma_B").get_to(r.sigma_B);
  j.at("sigma_M").get_to(r.sigma_M);
  j.at("sigma_defect").get_to(r.sigma_defect);
  j.at("n_samples").get_to(r.n_samples);
  j.at("inclusion_violations").get_to(r.inclusion_violations);
  j.at("distribution_tag").get_to(r.distribution_tag);
  j.at("seed").get_to(r.seed);
}

inline void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
  atomic_write_text(path, j.dump(2) + "\n");
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw io_error(path.string() + ": " + e.what());
  }
}

}  // namespace posmom
