#pragma once

// Mode dispatch for the command-line tool. run() returns the CSV text and
// the JSON summary; writing files is left to the caller.

#include "satcav/config.hpp"
#include "satcav/oracle.hpp"
#include "satcav/scans.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

namespace satcav {

inline constexpr const char* version = "1.0.0";

/// Exit codes of the command-line tool.
enum ExitCode : int {
  exit_ok = 0,
  exit_point_failures = 1, ///< ran to completion, some points failed
  exit_usage = 2,          ///< bad command line or configuration
  exit_numerical = 3,      ///< a library error aborted the run
  exit_io = 4,
};

struct RunOptions {
  int workers = 1;
};

struct RunOutcome {
  int exit_code = exit_ok;
  std::string csv;
  nlohmann::ordered_json summary;
  std::size_t failures = 0;
};

/// Fixed CSV formatting: 12 significant digits, '\n' line endings.
class CsvWriter {
public:
  explicit CsvWriter(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
    text_ += '\n';
  }

  CsvWriter& num(double v) {
    char buf[32];
    if (std::isnan(v))
      std::snprintf(buf, sizeof buf, "nan");
    else
      std::snprintf(buf, sizeof buf, "%.12g", v);
    return cell(buf);
  }
  CsvWriter& integer(long long v) { return cell(std::to_string(v)); }
  CsvWriter& flag(bool v) { return cell(v ? "1" : "0"); }
  CsvWriter& cell(const std::string& s) {
    if (!row_open_) row_open_ = true;
    else text_ += ',';
    text_ += s;
    return *this;
  }
  void end_row() {
    text_ += '\n';
    row_open_ = false;
  }
  const std::string& str() const { return text_; }

private:
  std::string text_;
  bool row_open_ = false;
};

namespace detail {

inline nlohmann::ordered_json scaled_json(const ScaledParams& s) {
  return {{"nc0", s.nc0},
          {"delta0_over_gp", s.delta0_over_gp},
          {"detuning_over_gp", s.detuning_over_gp},
          {"y_sq", s.y_sq},
          {"gamma_over_gp", s.gamma_over_gp},
          {"l_max", s.l_max},
          {"vel_nodes", s.vel_nodes},
          {"newton_tol", s.newton_tol},
          {"max_newton_iters", s.max_newton_iters}};
}

inline nlohmann::ordered_json physical_json(const PhysicalParams& p) {
  return {{"gamma", p.gamma},         {"gamma_p", p.gamma_p},     {"gamma_laser", p.gamma_laser},
          {"kappa", p.kappa},         {"lambda", p.lambda},       {"atom_mass", p.atom_mass},
          {"n_atoms", p.n_atoms},     {"temperature", p.temperature}, {"p_in", p.p_in},
          {"epsilon", p.epsilon},     {"sideband_ratio", p.sideband_ratio},
          {"finesse", p.finesse},     {"nc0", p.nc0}};
}

/// Signal-power convention: the configured one, else `fallback`.
inline SignalPower signal_of(const RunConfig& cfg, SignalPower fallback = SignalPower::transmitted) {
  if (cfg.sweep.signal == "input") return SignalPower::input;
  if (cfg.sweep.signal == "transmitted") return SignalPower::transmitted;
  return fallback;
}

inline const char* to_string(SignalPower s) {
  return s == SignalPower::input ? "input" : "transmitted";
}

inline const PhysicalParams* phys_of(const RunConfig& cfg) {
  return cfg.physical ? &*cfg.physical : nullptr;
}

inline void run_spectrum(const RunConfig& cfg, RunOutcome& out) {
  const auto& w = cfg.sweep;
  const SweepResult r =
      sweep_detuning(cfg.scaled, cfg.scaled.y_sq, w.detuning_lo, w.detuning_hi, w.points);
  CsvWriter csv({"delta_over_gp", "T", "phi", "converged", "newton_iters"});
  nlohmann::ordered_json failures = nlohmann::ordered_json::array();
  for (const auto& p : r.points) {
    csv.num(p.axis_value).num(p.transmission).num(p.phase).flag(p.converged).integer(p.newton_iters);
    csv.end_row();
    if (!p.converged) failures.push_back({{"delta_over_gp", p.axis_value}, {"error", p.error}});
  }
  out.csv = csv.str();
  out.failures = r.failures();
  out.summary["diagnostics"] = {{"points", r.points.size()}, {"failed_points", failures}};
}

inline void run_power_curve(const RunConfig& cfg, RunOutcome& out, int workers) {
  auto [lo, hi] = default_curve_range(cfg.scaled);
  if (cfg.sweep.x_sq_lo > 0.0) lo = cfg.sweep.x_sq_lo;
  if (cfg.sweep.x_sq_hi > 0.0) hi = cfg.sweep.x_sq_hi;
  CurveOptions opt;
  opt.points_per_decade = cfg.sweep.points_per_decade;
  opt.workers = workers;
  const InputOutputCurve curve = input_output_curve(cfg.scaled, lo, hi, opt);
  CsvWriter csv({"x_sq", "y_sq", "turning_point_flag"});
  for (const auto& p : curve.points) {
    csv.num(p.x_sq).num(p.y_sq).flag(p.turning_point);
    csv.end_row();
  }
  out.csv = csv.str();
  nlohmann::ordered_json tps = nlohmann::ordered_json::array();
  for (const auto& tp : curve.report.turning_points) tps.push_back({{"x_sq", tp.x_sq}, {"y_sq", tp.y_sq}});
  out.summary["diagnostics"] = {{"bistable", curve.report.bistable},
                                {"turning_points", tps},
                                {"x_sq_range", {lo, hi}}};
  if (curve.report.bistable)
    out.summary["diagnostics"]["window"] = {curve.report.y_sq_low, curve.report.y_sq_high};
}

inline void run_converge(const RunConfig& cfg, RunOutcome& out, int workers) {
  LinewidthOptions lo;
  lo.signal = signal_of(cfg);
  const SweepResult r = doppleron_convergence(cfg.scaled, cfg.scaled.y_sq, cfg.sweep.l_values,
                                              phys_of(cfg), lo, workers);
  CsvWriter csv({"l_max", "delta_nu", "ratio_to_l0"});
  for (const auto& p : r.points) {
    csv.integer(static_cast<long long>(p.axis_value)).num(*p.delta_nu).num(*p.ratio);
    csv.end_row();
  }
  out.csv = csv.str();
  nlohmann::ordered_json inc = nlohmann::ordered_json::array();
  for (std::size_t i = 1; i < r.points.size(); ++i) inc.push_back(r.points[i].l_increment);
  out.summary["diagnostics"] = {{"delta_nu_units", cfg.physical ? "Hz" : "relative"},
                                {"relative_increments", inc}};
}

inline void add_linewidth_row(CsvWriter& csv, const LinewidthResult& r, bool si) {
  csv.num(r.y_sq).num(r.x_sq).num(r.slope_scaled).num(si ? r.delta_nu : r.relative_linewidth());
  csv.end_row();
}

inline void run_linewidth(const RunConfig& cfg, RunOutcome& out, int workers) {
  std::vector<double> ys = cfg.sweep.y_sq_values;
  if (ys.empty()) ys.push_back(cfg.scaled.y_sq);
  LinewidthOptions lo;
  lo.signal = signal_of(cfg);
  std::vector<LinewidthResult> results(ys.size());
  std::vector<std::string> errors(ys.size());
  parallel_for(ys.size(), workers, [&](std::size_t i) {
    try {
      results[i] = cfg.physical ? linewidth(ys[i], cfg.scaled, *cfg.physical, lo)
                                : scaled_linewidth(ys[i], cfg.scaled, lo);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  CsvWriter csv({"y_sq", "x_sq", "slope_scaled", "delta_nu_hz"});
  nlohmann::ordered_json failed = nlohmann::ordered_json::array();
  nlohmann::ordered_json warnings = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (!errors[i].empty()) {
      csv.num(ys[i]).num(std::nan("")).num(std::nan("")).num(std::nan(""));
      csv.end_row();
      failed.push_back({{"y_sq", ys[i]}, {"error", errors[i]}});
      ++out.failures;
      continue;
    }
    add_linewidth_row(csv, results[i], cfg.physical.has_value());
    if (results[i].richardson_warning) warnings.push_back(ys[i]);
  }
  out.csv = csv.str();
  out.summary["diagnostics"] = {{"delta_nu_units", cfg.physical ? "Hz" : "relative"},
                                {"signal_power", to_string(lo.signal)},
                                {"slope_step_warnings", warnings},
                                {"failed_points", failed}};
}

inline void run_optimal_power(const RunConfig& cfg, RunOutcome& out, int workers) {
  OptimalPowerOptions oo;
  oo.linewidth.signal = signal_of(cfg);
  oo.curve.workers = workers;
  const OptimalPower best =
      optimal_power(cfg.scaled, phys_of(cfg), cfg.sweep.y_sq_lo, cfg.sweep.y_sq_hi, oo);
  CsvWriter csv({"y_sq", "x_sq", "slope_scaled", "delta_nu_hz"});
  add_linewidth_row(csv, best.result, cfg.physical.has_value());
  out.csv = csv.str();
  nlohmann::ordered_json d = {{"y_sq_opt", best.y_sq_opt},
                              {"unimodal", best.unimodal},
                              {"signal_power", to_string(oo.linewidth.signal)},
                              {"delta_nu_units", cfg.physical ? "Hz" : "relative"}};
  if (cfg.physical) d["p_in_opt_w"] = input_power_for(*cfg.physical, best.y_sq_opt);
  out.summary["diagnostics"] = d;
}

inline void run_critical(const RunConfig& cfg, RunOutcome& out, int workers) {
  CurveOptions co;
  co.points_per_decade = cfg.sweep.points_per_decade;
  co.workers = workers;
  const CriticalResult r = critical_temperature(cfg.scaled.nc0, cfg.scaled, cfg.sweep.delta0_lo,
                                                cfg.sweep.delta0_hi, cfg.sweep.rel_tol, co);
  CsvWriter csv({"nc0", "delta0_over_gp", "temperature_k", "delta0_lower", "delta0_upper"});
  csv.num(cfg.scaled.nc0).num(r.delta0_over_gp)
      .num(cfg.physical ? temperature_for(*cfg.physical, r.delta0_over_gp) : std::nan(""))
      .num(r.lower).num(r.upper);
  csv.end_row();
  out.csv = csv.str();
  out.summary["diagnostics"] = {{"bisection_evaluations", r.evaluations}};
}

inline void run_table(const RunConfig& cfg, RunOutcome& out, int workers) {
  std::vector<TableRow> rows;
  for (const auto& row : intercombination_rows()) {
    if (cfg.sweep.rows.empty() ||
        std::find(cfg.sweep.rows.begin(), cfg.sweep.rows.end(), row.label) != cfg.sweep.rows.end())
      rows.push_back(row);
  }
  if (rows.empty()) throw ConfigError("[sweep] rows selects no table rows");
  TableOptions to;
  to.settings = cfg.scaled;
  to.workers = workers;
  to.optimal.check_bistability = false;
  // the tabulated rows are calibrated with signal power = input power
  to.optimal.linewidth.signal = signal_of(cfg, SignalPower::input);
  const auto entries = reproduce_table(rows, to);
  CsvWriter csv({"element", "nc0", "p_in_opt_w", "delta_nu_hz"});
  nlohmann::ordered_json details = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    csv.cell(e.label).num(e.nc0).num(e.error.empty() ? e.p_in_opt : std::nan(""))
        .num(e.error.empty() ? e.delta_nu : std::nan(""));
    csv.end_row();
    nlohmann::ordered_json d = {{"element", e.label},
                                {"delta0_over_gp", e.delta0_over_gp},
                                {"y_sq_opt", e.y_sq_opt},
                                {"unimodal", e.unimodal}};
    if (!e.error.empty()) {
      d["error"] = e.error;
      ++out.failures;
    }
    details.push_back(d);
  }
  out.csv = csv.str();
  out.summary["diagnostics"] = {
      {"signal_power", to_string(to.optimal.linewidth.signal)},
      {"rows", details}};
}

inline void run_oracle_check(const RunConfig& cfg, RunOutcome& out) {
  const auto& o = cfg.oracle;
  CsvWriter csv({"nc0", "delta0_over_gp", "y_sq", "T_floquet", "T_time", "phi_floquet", "phi_time",
                 "rel_dev_T", "dev_phi"});
  double max_t = 0.0, max_phi = 0.0;
  nlohmann::ordered_json cases = nlohmann::ordered_json::array();
  TimeDomainConfig td;
  td.kappa_over_gp = o.kappa_over_gp;
  td.phases = o.phases;
  td.phases_at_rest = o.phases_at_rest;
  td.t_end = o.t_end;
  td.drift_tol = o.drift_tol;
  for (double nc0 : o.nc0_values)
    for (double d0 : o.delta0_values)
      for (double y_sq : o.y_sq_values) {
        ScaledParams s = cfg.scaled;
        s.nc0 = nc0;
        s.delta0_over_gp = d0;
        s.y_sq = y_sq;
        s.detuning_over_gp = o.detuning;
        s.l_max = d0 == 0.0 ? 2 * o.l_max : o.l_max;
        const VelocityGrid grid = comparison_grid(s);
        const complex y{std::sqrt(y_sq), 0.0};
        nlohmann::ordered_json c = {{"nc0", nc0}, {"delta0_over_gp", d0}, {"y_sq", y_sq}};
        try {
          NewtonOptions no;
          no.continuation = true;
          no.report_truncation = false;
          const SteadyState fl = newton_solve(y, o.detuning, s, grid, no);
          const TimeDomainResult tr = time_domain_steady_state(s, y, o.detuning, grid, td, o.step_check);
          const double dev_t = std::abs(tr.steady.transmission / fl.transmission - 1.0);
          const double dev_phi = std::abs(tr.steady.phase - fl.phase);
          max_t = std::max(max_t, dev_t);
          max_phi = std::max(max_phi, dev_phi);
          csv.num(nc0).num(d0).num(y_sq).num(fl.transmission).num(tr.steady.transmission)
              .num(fl.phase).num(tr.steady.phase).num(dev_t).num(dev_phi);
          csv.end_row();
          c["t_final"] = tr.t_final;
          c["dt"] = tr.dt;
          c["atoms"] = tr.atoms;
          c["sigma_z_range"] = {tr.sigma_z_min, tr.sigma_z_max};
          if (o.step_check) c["step_check_deviation"] = tr.step_check_deviation;
        } catch (const Error& e) {
          csv.num(nc0).num(d0).num(y_sq);
          for (int k = 0; k < 6; ++k) csv.num(std::nan(""));
          csv.end_row();
          c["error"] = e.what();
          ++out.failures;
        }
        cases.push_back(c);
      }
  out.csv = csv.str();
  out.summary["diagnostics"] = {{"max_rel_dev_T", max_t},
                                {"max_dev_phi", max_phi},
                                {"detuning_over_gp", o.detuning},
                                {"cases", cases}};
}

} // namespace detail

/// Executes the configured mode. Library errors are mapped to exit codes
/// and reported in the summary rather than thrown.
inline RunOutcome run(const RunConfig& cfg, const RunOptions& opt = {}) {
  RunOutcome out;
  out.summary["tool"] = "satcav";
  out.summary["version"] = version;
  out.summary["mode"] = cfg.mode;
  out.summary["config_hash"] = hex64(cfg.hash);
  out.summary["config"] = {{"canonical", cfg.canonical}, {"scaled", detail::scaled_json(cfg.scaled)}};
  if (cfg.physical) out.summary["config"]["physical"] = detail::physical_json(*cfg.physical);
  const int workers = std::max(1, opt.workers);
  try {
    if (cfg.mode == "spectrum") detail::run_spectrum(cfg, out);
    else if (cfg.mode == "power-curve") detail::run_power_curve(cfg, out, workers);
    else if (cfg.mode == "converge") detail::run_converge(cfg, out, workers);
    else if (cfg.mode == "linewidth") detail::run_linewidth(cfg, out, workers);
    else if (cfg.mode == "optimal-power") detail::run_optimal_power(cfg, out, workers);
    else if (cfg.mode == "critical-temp") detail::run_critical(cfg, out, workers);
    else if (cfg.mode == "table") detail::run_table(cfg, out, workers);
    else if (cfg.mode == "oracle-check") detail::run_oracle_check(cfg, out);
    else throw ConfigError("unknown mode '" + cfg.mode + "'");
  } catch (const ConfigError& e) {
    out.exit_code = exit_usage;
    out.summary["error"] = e.what();
    return out;
  } catch (const Error& e) {
    out.exit_code = exit_numerical;
    out.summary["error"] = e.what();
    return out;
  }
  out.summary["failure_count"] = out.failures;
  out.exit_code = out.failures ? exit_point_failures : exit_ok;
  return out;
}

} // namespace satcav
