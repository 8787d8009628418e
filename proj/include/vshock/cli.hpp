#pragma once

// Implementations of the five CLI commands.  Each takes a parsed scenario
// plus an output directory, writes its reports there (atomically), logs a
// short human-readable summary, and returns 0 on success.  All failures are
// reported by throwing vshock::error subclasses; the binary maps them to
// exit codes and a machine-readable error object on stderr.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vshock/characteristics.hpp"
#include "vshock/direct_solver.hpp"
#include "vshock/elliptic.hpp"
#include "vshock/errors.hpp"
#include "vshock/perturbation.hpp"
#include "vshock/reports.hpp"
#include "vshock/scenario.hpp"

namespace vshock {

struct CommandContext {
  Scenario scenario;
  std::filesystem::path out_dir;
  std::ostream* log = nullptr;  // optional progress stream
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_).count();
  }
 private:
  std::chrono::steady_clock::time_point start_;
};

inline void log_line(const CommandContext& ctx, const std::string& line) {
  if (ctx.log) (*ctx.log) << line << "\n";
}

inline const Grid2D& require_grid(const Scenario& sc) {
  if (!sc.grid)
    throw validation_error("this command needs a grid block in the scenario");
  return *sc.grid;
}

struct ResolvedTime {
  double horizon = 0.0;
  std::vector<double> snapshots;  // ascending, ends at horizon
};

// Turn the scenario's time block into absolute times, checking them against
// the shock time of the initial data.
inline ResolvedTime resolve_time(const Scenario& sc,
                                 const CharacteristicSolution& sol) {
  ResolvedTime out;
  if (sc.time.horizon_fraction) {
    if (!std::isfinite(sol.t_max))
      throw validation_error(
          "horizon_fraction needs initial data with a finite shock time");
    out.horizon = *sc.time.horizon_fraction * sol.t_max;
  } else if (sc.time.horizon) {
    out.horizon = *sc.time.horizon;
  } else {
    throw validation_error("this command needs a time block in the scenario");
  }
  if (std::isfinite(sol.t_max)) {
    double bound = (1.0 - sol.opts.shock_guard) * sol.t_max;
    if (out.horizon > bound)
      throw validation_error(
          "horizon is inside the shock guard window",
          {{"horizon", ctx_num(out.horizon)}, {"t_max", ctx_num(sol.t_max)},
           {"t_allowed", ctx_num(bound)}});
  }
  for (double f : sc.time.snapshot_fractions) {
    if (!std::isfinite(sol.t_max))
      throw validation_error(
          "snapshot_fractions need initial data with a finite shock time");
    out.snapshots.push_back(f * sol.t_max);
  }
  for (double t : sc.time.snapshots) out.snapshots.push_back(t);
  for (double t : out.snapshots)
    if (t > out.horizon * (1.0 + 1e-12))
      throw validation_error("snapshot time beyond the horizon",
                             {{"t", ctx_num(t)},
                              {"horizon", ctx_num(out.horizon)}});
  if (out.snapshots.empty() || out.snapshots.back() < out.horizon)
    out.snapshots.push_back(out.horizon);
  return out;
}

inline nlohmann::json minimizer_to_json(const Minimizer& m) {
  return {{"r", m.r}, {"z", m.z}, {"dzphi0", m.value},
          {"omega0", m.omega0}, {"phi0", m.phi0}};
}

// Relative per-row mass drift: worst row drift over the worst row scale
// max_j dz sum_i |w0_{j,i}|.
inline double mass_drift_rel(const Grid2D& grid,
                             const std::vector<double>& mass_now,
                             const std::vector<double>& mass_ref,
                             const std::vector<double>& omega0_values) {
  double scale = 0.0;
  for (std::size_t j = 0; j < grid.n_r; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.n_z; ++i)
      acc += std::abs(omega0_values[grid.index(j, i)]);
    scale = std::max(scale, grid.dz() * acc);
  }
  if (scale == 0.0) scale = 1.0;
  double drift = 0.0;
  for (std::size_t j = 0; j < grid.n_r; ++j)
    drift = std::max(drift, std::abs(mass_now[j] - mass_ref[j]));
  return drift / scale;
}

}  // namespace detail

// ---- blowup: scan the initial data and report the shock time. ----
inline int cmd_blowup(const CommandContext& ctx) {
  detail::Stopwatch watch;
  const Scenario& sc = ctx.scenario;
  CharacteristicSolution sol = build_solution(sc.initial, sc.solution_opts);

  nlohmann::json doc;
  doc["command"] = "blowup";
  doc["scenario"] = sc.raw;
  doc["preset"] = sc.preset_name;
  doc["inf_dzphi0"] = sol.inf_dzphi;
  doc["t_max"] = std::isfinite(sol.t_max) ? nlohmann::json(sol.t_max)
                                          : nlohmann::json("infinity");
  doc["phi0_sup_bound"] = sol.phi_sup;
  doc["omega0_sup"] = sol.omega0_sup;
  nlohmann::json mins = nlohmann::json::array();
  for (const auto& m : sol.minimizers) mins.push_back(detail::minimizer_to_json(m));
  doc["minimizers"] = mins;
  if (!sol.minimizers.empty())
    doc["bkm_point"] = detail::minimizer_to_json(sol.bkm_point);
  doc["wall_time_s"] = watch.seconds();
  write_json_atomic(ctx.out_dir / "blowup.json", doc);

  detail::log_line(ctx, "blowup: " + sc.name);
  if (std::isfinite(sol.t_max)) {
    detail::log_line(ctx, "  t_max = " + format_sci(sol.t_max) +
                              "  (inf dz phi0 = " + format_sci(sol.inf_dzphi) + ")");
    for (const auto& m : sol.minimizers)
      detail::log_line(ctx, "  minimizer r = " + format_sci(m.r) +
                                ", z = " + format_sci(m.z) +
                                ", omega0 = " + format_sci(m.omega0));
  } else {
    detail::log_line(ctx, "  no shock: inf dz phi0 = " + format_sci(sol.inf_dzphi));
  }
  detail::log_line(ctx, "  wrote " + (ctx.out_dir / "blowup.json").string());
  return 0;
}

// ---- exact: evaluate the characteristic solution on a grid. ----
inline int cmd_exact(const CommandContext& ctx) {
  detail::Stopwatch watch;
  const Scenario& sc = ctx.scenario;
  const Grid2D& grid = detail::require_grid(sc);
  CharacteristicSolution sol = build_solution(sc.initial, sc.solution_opts);
  detail::ResolvedTime time = detail::resolve_time(sc, sol);

  GriddedField omega0 = sample(sc.initial, grid);
  std::vector<double> mass0 = row_mass(grid, omega0.values);

  nlohmann::json files = nlohmann::json::array();
  std::size_t k = 0;
  for (double t : time.snapshots) {
    ExactFields fields = exact_fields(sol, grid, t);
    std::string omega_name = "omega_exact_" + std::to_string(k) + ".csv";
    std::string phi_name = "phi_exact_" + std::to_string(k) + ".csv";
    write_text_atomic(ctx.out_dir / omega_name, gridded_to_csv(fields.omega));
    write_text_atomic(ctx.out_dir / phi_name, gridded_to_csv(fields.phi));
    std::vector<double> mass = row_mass(grid, fields.omega.values);
    files.push_back(
        {{"t", t},
         {"omega_csv", omega_name},
         {"phi_csv", phi_name},
         {"sup_omega", fields.omega.max_abs()},
         {"mass_drift_rel",
          detail::mass_drift_rel(grid, mass, mass0, omega0.values)}});
    ++k;
  }

  nlohmann::json doc;
  doc["command"] = "exact";
  doc["scenario"] = sc.raw;
  doc["grid"] = grid_to_json(grid);
  doc["t_max"] = std::isfinite(sol.t_max) ? nlohmann::json(sol.t_max)
                                          : nlohmann::json("infinity");
  doc["snapshots"] = files;
  doc["wall_time_s"] = watch.seconds();
  write_json_atomic(ctx.out_dir / "manifest.json", doc);

  detail::log_line(ctx, "exact: " + sc.name + ", " +
                            std::to_string(time.snapshots.size()) +
                            " snapshot(s), wrote " +
                            (ctx.out_dir / "manifest.json").string());
  return 0;
}

// ---- compare: direct solver vs characteristics under refinement. ----
inline int cmd_compare(const CommandContext& ctx) {
  detail::Stopwatch watch;
  const Scenario& sc = ctx.scenario;
  const Grid2D& extents = detail::require_grid(sc);
  if (sc.resolutions.empty())
    throw validation_error("compare needs a resolutions array in the scenario");
  CharacteristicSolution sol = build_solution(sc.initial, sc.solution_opts);
  detail::ResolvedTime time = detail::resolve_time(sc, sol);
  if (std::isfinite(sol.t_max) && !(time.horizon < sol.t_max))
    throw validation_error("compare horizon must precede the shock time",
                           {{"horizon", ctx_num(time.horizon)},
                            {"t_max", ctx_num(sol.t_max)}});

  std::vector<std::vector<double>> rows;
  double prev_linf = 0.0;
  for (std::size_t n : sc.resolutions) {
    Grid2D grid(extents.r_max, extents.z_min, extents.z_max, n / 2, n);
    RunResult run_result = run(sc.initial, grid, time.horizon, sc.solver_opts);
    const Snapshot& final_snap = run_result.snapshots.back();
    GriddedField exact = exact_omega(sol, grid, time.horizon);
    double linf = linf_distance(final_snap.omega, exact);
    double l1 = 0.0;
    for (std::size_t idx = 0; idx < exact.values.size(); ++idx)
      l1 += std::abs(final_snap.omega.values[idx] - exact.values[idx]);
    l1 *= grid.dr() * grid.dz();
    double drift = detail::mass_drift_rel(
        grid, final_snap.mass, run_result.snapshots.front().mass,
        run_result.snapshots.front().omega.values);
    double order = rows.empty() ? 0.0 : std::log2(prev_linf / linf);
    rows.push_back({static_cast<double>(n), static_cast<double>(n / 2),
                    static_cast<double>(run_result.steps), linf, l1, order,
                    drift});
    prev_linf = linf;
    detail::log_line(ctx, "compare: n_z = " + std::to_string(n) +
                              ", linf = " + format_sci(linf) +
                              ", order = " + format_sci(order));
  }

  std::vector<std::string> header = {"n_z",       "n_r",   "steps", "linf_error",
                                     "l1_error",  "order", "mass_drift_rel"};
  write_text_atomic(ctx.out_dir / "compare.csv", table_to_csv(header, rows));

  nlohmann::json doc;
  doc["command"] = "compare";
  doc["scenario"] = sc.raw;
  doc["horizon"] = time.horizon;
  doc["t_max"] = sol.t_max;
  nlohmann::json jrows = nlohmann::json::array();
  for (const auto& row : rows)
    jrows.push_back({{"n_z", static_cast<std::size_t>(row[0])},
                     {"n_r", static_cast<std::size_t>(row[1])},
                     {"steps", static_cast<std::size_t>(row[2])},
                     {"linf_error", row[3]},
                     {"l1_error", row[4]},
                     {"order", row[5]},
                     {"mass_drift_rel", row[6]}});
  doc["rows"] = jrows;
  doc["wall_time_s"] = watch.seconds();
  write_json_atomic(ctx.out_dir / "compare.json", doc);
  detail::log_line(ctx, "compare: wrote " + (ctx.out_dir / "compare.csv").string());
  return 0;
}

// ---- eps-sweep: perturbed runs against the limit trajectory. ----
inline int cmd_eps_sweep(const CommandContext& ctx) {
  detail::Stopwatch watch;
  const Scenario& sc = ctx.scenario;
  const Grid2D& grid = detail::require_grid(sc);
  if (sc.epsilons.empty())
    throw validation_error("eps-sweep needs an epsilon array in the scenario");
  CharacteristicSolution sol = build_solution(sc.initial, sc.solution_opts);
  detail::ResolvedTime time = detail::resolve_time(sc, sol);

  GriddedField exact = exact_omega(sol, grid, time.horizon);
  std::vector<std::vector<double>> rows;
  for (double e : sc.epsilons) {
    PerturbedRunResult result = run_perturbed(sc.initial, grid, Epsilon(e),
                                              time.horizon, sc.solver_opts);
    const PerturbedSnapshot& snap = result.snapshots.back();
    double linf = linf_distance(snap.omega, exact);
    double l1 = 0.0;
    for (std::size_t idx = 0; idx < exact.values.size(); ++idx)
      l1 += std::abs(snap.omega.values[idx] - exact.values[idx]);
    l1 *= grid.dr() * grid.dz();
    rows.push_back({e, static_cast<double>(result.steps), linf, l1});
    detail::log_line(ctx, "eps-sweep: eps = " + format_sci(e) +
                              ", linf distance = " + format_sci(linf));
  }

  write_text_atomic(ctx.out_dir / "eps_sweep.csv",
                    table_to_csv({"eps", "steps", "linf_distance", "l1_distance"},
                                 rows));

  // Sort by descending eps for the monotonicity digest.
  std::vector<std::vector<double>> sorted = rows;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a[0] > b[0]; });
  bool monotone = true;
  for (std::size_t k = 0; k + 1 < sorted.size(); ++k)
    if (sorted[k + 1][2] > sorted[k][2]) monotone = false;

  nlohmann::json doc;
  doc["command"] = "eps-sweep";
  doc["regime"] = "exploratory";  // finite-eps runs probe the limit, not prove it
  doc["scenario"] = sc.raw;
  doc["horizon"] = time.horizon;
  nlohmann::json jrows = nlohmann::json::array();
  for (const auto& row : rows)
    jrows.push_back({{"eps", row[0]},
                     {"steps", static_cast<std::size_t>(row[1])},
                     {"linf_distance", row[2]},
                     {"l1_distance", row[3]}});
  doc["rows"] = jrows;
  doc["distance_monotone_in_eps"] = monotone;
  doc["wall_time_s"] = watch.seconds();
  write_json_atomic(ctx.out_dir / "eps_sweep.json", doc);
  detail::log_line(ctx,
                   "eps-sweep: wrote " + (ctx.out_dir / "eps_sweep.csv").string());
  return 0;
}

// ---- bkm: sup |w| against the predicted blow-up rate. ----
inline int cmd_bkm(const CommandContext& ctx) {
  detail::Stopwatch watch;
  const Scenario& sc = ctx.scenario;
  const Grid2D& grid = detail::require_grid(sc);
  CharacteristicSolution sol = build_solution(sc.initial, sc.solution_opts);
  if (!std::isfinite(sol.t_max))
    throw validation_error("bkm needs initial data with a finite shock time");

  std::vector<double> times;
  for (int k = 0; k < sc.bkm.samples; ++k)
    times.push_back(sc.bkm.max_fraction * sol.t_max * k /
                    (sc.bkm.samples - 1));
  BkmDiagnostic diag = bkm_diagnostic(sol, grid, times);

  std::vector<std::vector<double>> rows;
  for (const auto& s : diag.samples)
    rows.push_back({s.t, s.sup_omega, s.bound,
                    s.bound > 0.0 ? s.sup_omega / s.bound : 0.0, s.integral_sup,
                    s.integral_bound});
  write_text_atomic(
      ctx.out_dir / "bkm.csv",
      table_to_csv({"t", "sup_omega", "bound", "sup_over_bound",
                    "integral_sup", "integral_bound"},
                   rows));

  nlohmann::json doc;
  doc["command"] = "bkm";
  doc["scenario"] = sc.raw;
  doc["t_max"] = sol.t_max;
  doc["fitted_c"] = diag.fitted_c;
  doc["reference_amplitude"] = diag.reference_amplitude;
  doc["blowup_point"] = detail::minimizer_to_json(diag.point);
  nlohmann::json jrows = nlohmann::json::array();
  for (const auto& s : diag.samples)
    jrows.push_back({{"t", s.t},
                     {"sup_omega", s.sup_omega},
                     {"bound", s.bound},
                     {"integral_sup", s.integral_sup},
                     {"integral_bound", s.integral_bound}});
  doc["rows"] = jrows;
  doc["wall_time_s"] = watch.seconds();
  write_json_atomic(ctx.out_dir / "bkm.json", doc);

  detail::log_line(ctx, "bkm: fitted growth constant = " + format_sci(diag.fitted_c) +
                            " vs |w0| = " + format_sci(diag.reference_amplitude));
  detail::log_line(ctx, "bkm: wrote " + (ctx.out_dir / "bkm.csv").string());
  return 0;
}

}  // namespace vshock
