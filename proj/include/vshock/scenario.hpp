#pragma once

// Scenario files: one JSON document that names the initial data and the
// numerical parameters of an experiment.  Parsing is strict -- unknown keys
// anywhere in the document are rejected with the offending path -- so typos
// fail loudly instead of silently running defaults.
//
// Top-level keys:
//   name         (string, required)
//   initial_data (object, required): {"preset": "zero" | "gaussian_ring" |
//                "offset_ring" | "custom_sum", ...preset parameters}
//   grid         {r_max, z_min, z_max, n_r, n_z}
//   time         {"horizon": t} or {"horizon_fraction": f in (0,1)}, plus
//                optional "snapshots": [t...] or "snapshot_fractions": [f...]
//   solver       {cfl, quad_tol, root_tol, shock_guard, boundary_tol,
//                 scan_nr, scan_nz, threads}   (all optional)
//   epsilon      [e...] each in (0, 1]          (eps-sweep)
//   resolutions  [n_z...] even, ascending       (compare; n_r = n_z / 2)
//   bkm          {samples, max_fraction}        (bkm)
//   output       {dir}
//
// Which blocks are required depends on the command; each command validates
// its own needs.  Grids are capped by a cell budget so a typo cannot demand
// a terabyte of memory.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vshock/characteristics.hpp"
#include "vshock/direct_solver.hpp"
#include "vshock/errors.hpp"
#include "vshock/field.hpp"
#include "vshock/grid.hpp"
#include "vshock/presets.hpp"

namespace vshock {

inline constexpr std::size_t kMaxGridCells = std::size_t(1) << 23;

struct TimeSpec {
  std::optional<double> horizon;
  std::optional<double> horizon_fraction;
  std::vector<double> snapshots;
  std::vector<double> snapshot_fractions;
};

struct BkmSpec {
  int samples = 10;
  double max_fraction = 0.99;
};

struct Scenario {
  std::string name;
  nlohmann::json raw;  // the original document, embedded into manifests
  std::string preset_name;
  ScalarField initial;
  std::optional<Grid2D> grid;
  TimeSpec time;
  SolutionOptions solution_opts;
  SolverOptions solver_opts;
  std::vector<double> epsilons;
  std::vector<std::size_t> resolutions;
  BkmSpec bkm;
  std::string output_dir = "out";
};

namespace detail {

using nlohmann::json;

inline void expect_object(const json& j, const std::string& path) {
  if (!j.is_object())
    throw validation_error("expected an object", {{"path", path}});
}

inline void expect_keys(const json& obj, const std::string& path,
                        std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok)
      throw validation_error("unknown key in scenario",
                             {{"path", path}, {"key", it.key()}});
  }
}

inline double get_number(const json& obj, const std::string& path,
                         const char* key, std::optional<double> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw validation_error("missing required number",
                           {{"path", path}, {"key", key}});
  }
  const json& v = obj.at(key);
  if (!v.is_number())
    throw validation_error("value must be a number",
                           {{"path", path}, {"key", key}});
  return v.get<double>();
}

inline long long get_integer(const json& obj, const std::string& path,
                             const char* key,
                             std::optional<long long> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw validation_error("missing required integer",
                           {{"path", path}, {"key", key}});
  }
  const json& v = obj.at(key);
  if (!v.is_number_integer())
    throw validation_error("value must be an integer",
                           {{"path", path}, {"key", key}});
  return v.get<long long>();
}

inline ScalarField parse_initial(const json& j, std::string* preset_name) {
  const std::string path = "initial_data";
  expect_object(j, path);
  if (!j.contains("preset"))
    throw validation_error("initial_data needs a preset", {{"path", path}});
  std::string preset = j.at("preset").get<std::string>();
  *preset_name = preset;
  if (preset == "zero") {
    expect_keys(j, path, {"preset"});
    return zero_field();
  }
  if (preset == "gaussian_ring") {
    expect_keys(j, path, {"preset", "amplitude", "width", "center"});
    return gaussian_ring(get_number(j, path, "amplitude", 1.0),
                         get_number(j, path, "width", 1.0),
                         get_number(j, path, "center", 0.0));
  }
  if (preset == "offset_ring") {
    expect_keys(j, path, {"preset"});
    return offset_ring();
  }
  if (preset == "custom_sum") {
    expect_keys(j, path, {"preset", "terms"});
    if (!j.contains("terms") || !j.at("terms").is_array() || j.at("terms").empty())
      throw validation_error("custom_sum needs a nonempty terms array",
                             {{"path", path}});
    std::vector<RingTerm> terms;
    std::size_t idx = 0;
    for (const json& tj : j.at("terms")) {
      std::string tpath = path + ".terms[" + std::to_string(idx++) + "]";
      expect_object(tj, tpath);
      expect_keys(tj, tpath, {"amplitude", "p", "q", "wr", "wz", "cz"});
      RingTerm t;
      t.amplitude = get_number(tj, tpath, "amplitude");
      t.p = static_cast<int>(get_integer(tj, tpath, "p", 1));
      t.q = static_cast<int>(get_integer(tj, tpath, "q", 1));
      t.wr = get_number(tj, tpath, "wr", 1.0);
      t.wz = get_number(tj, tpath, "wz", 1.0);
      t.cz = get_number(tj, tpath, "cz", 0.0);
      terms.push_back(t);
    }
    return custom_sum(terms);
  }
  throw validation_error("unknown preset",
                         {{"path", path}, {"preset", preset}});
}

inline Grid2D parse_grid(const json& j) {
  const std::string path = "grid";
  expect_object(j, path);
  expect_keys(j, path, {"r_max", "z_min", "z_max", "n_r", "n_z"});
  long long n_r = get_integer(j, path, "n_r");
  long long n_z = get_integer(j, path, "n_z");
  if (n_r < 2 || n_z < 2)
    throw validation_error("grid needs n_r >= 2 and n_z >= 2", {{"path", path}});
  if (static_cast<std::size_t>(n_r) * static_cast<std::size_t>(n_z) > kMaxGridCells)
    throw validation_error("grid exceeds the cell budget",
                           {{"path", path},
                            {"cells", std::to_string(n_r * n_z)},
                            {"budget", std::to_string(kMaxGridCells)}});
  return Grid2D(get_number(j, path, "r_max"), get_number(j, path, "z_min"),
                get_number(j, path, "z_max"), static_cast<std::size_t>(n_r),
                static_cast<std::size_t>(n_z));
}

inline TimeSpec parse_time(const json& j) {
  const std::string path = "time";
  expect_object(j, path);
  expect_keys(j, path,
              {"horizon", "horizon_fraction", "snapshots", "snapshot_fractions"});
  TimeSpec t;
  if (j.contains("horizon")) t.horizon = get_number(j, path, "horizon");
  if (j.contains("horizon_fraction"))
    t.horizon_fraction = get_number(j, path, "horizon_fraction");
  if (t.horizon && t.horizon_fraction)
    throw validation_error("time: give either horizon or horizon_fraction, not both",
                           {{"path", path}});
  if (!t.horizon && !t.horizon_fraction)
    throw validation_error("time: needs horizon or horizon_fraction",
                           {{"path", path}});
  if (t.horizon && !(*t.horizon > 0.0))
    throw validation_error("time: horizon must be positive",
                           {{"path", path}, {"horizon", ctx_num(*t.horizon)}});
  if (t.horizon_fraction &&
      !(*t.horizon_fraction > 0.0 && *t.horizon_fraction < 1.0))
    throw validation_error("time: horizon_fraction must lie in (0, 1)",
                           {{"path", path},
                            {"horizon_fraction", ctx_num(*t.horizon_fraction)}});
  if (j.contains("snapshots") && j.contains("snapshot_fractions"))
    throw validation_error("time: give snapshots or snapshot_fractions, not both",
                           {{"path", path}});
  auto read_list = [&](const char* key, std::vector<double>* out, bool frac) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_array())
      throw validation_error("time: expected an array",
                             {{"path", path}, {"key", key}});
    double prev = 0.0;
    for (const json& v : j.at(key)) {
      if (!v.is_number())
        throw validation_error("time: sample times must be numbers",
                               {{"path", path}, {"key", key}});
      double x = v.get<double>();
      if (!(x > prev) || (frac && !(x < 1.0)))
        throw validation_error(
            frac ? "time: snapshot fractions must be ascending in (0, 1)"
                 : "time: snapshots must be ascending and positive",
            {{"path", path}, {"value", ctx_num(x)}});
      out->push_back(x);
      prev = x;
    }
  };
  read_list("snapshots", &t.snapshots, false);
  read_list("snapshot_fractions", &t.snapshot_fractions, true);
  return t;
}

}  // namespace detail

inline Scenario parse_scenario(const nlohmann::json& doc) {
  detail::expect_object(doc, "(root)");
  detail::expect_keys(doc, "(root)",
                      {"name", "initial_data", "grid", "time", "solver",
                       "epsilon", "resolutions", "bkm", "output"});
  Scenario sc;
  sc.raw = doc;
  if (!doc.contains("name") || !doc.at("name").is_string())
    throw validation_error("scenario needs a string name", {{"path", "(root)"}});
  sc.name = doc.at("name").get<std::string>();
  if (!doc.contains("initial_data"))
    throw validation_error("scenario needs initial_data", {{"path", "(root)"}});
  sc.initial = detail::parse_initial(doc.at("initial_data"), &sc.preset_name);

  if (doc.contains("grid")) sc.grid = detail::parse_grid(doc.at("grid"));
  if (doc.contains("time")) sc.time = detail::parse_time(doc.at("time"));

  if (doc.contains("solver")) {
    const nlohmann::json& j = doc.at("solver");
    const std::string path = "solver";
    detail::expect_object(j, path);
    detail::expect_keys(j, path,
                        {"cfl", "quad_tol", "root_tol", "shock_guard",
                         "boundary_tol", "scan_nr", "scan_nz", "threads"});
    sc.solver_opts.cfl = detail::get_number(j, path, "cfl", 0.4);
    if (!(sc.solver_opts.cfl > 0.0 && sc.solver_opts.cfl <= 1.0))
      throw validation_error("solver: cfl must lie in (0, 1]",
                             {{"path", path}, {"cfl", ctx_num(sc.solver_opts.cfl)}});
    sc.solution_opts.quad_tol = detail::get_number(j, path, "quad_tol", 1e-10);
    sc.solution_opts.root_tol = detail::get_number(j, path, "root_tol", 1e-12);
    sc.solution_opts.shock_guard =
        detail::get_number(j, path, "shock_guard", 1e-3);
    if (!(sc.solution_opts.shock_guard >= 0.0 && sc.solution_opts.shock_guard < 1.0))
      throw validation_error("solver: shock_guard must lie in [0, 1)",
                             {{"path", path}});
    sc.solver_opts.boundary_tol =
        detail::get_number(j, path, "boundary_tol", 1e-8);
    sc.solution_opts.scan_nr = static_cast<std::size_t>(
        detail::get_integer(j, path, "scan_nr", 512));
    sc.solution_opts.scan_nz = static_cast<std::size_t>(
        detail::get_integer(j, path, "scan_nz", 1024));
    if (sc.solution_opts.scan_nr < 16 || sc.solution_opts.scan_nz < 16)
      throw validation_error("solver: scan resolution too small to be meaningful",
                             {{"path", path}});
    int threads = static_cast<int>(detail::get_integer(j, path, "threads", 0));
    if (threads < 0)
      throw validation_error("solver: threads must be >= 0", {{"path", path}});
    sc.solution_opts.threads = threads;
    sc.solver_opts.threads = threads;
  }

  if (doc.contains("epsilon")) {
    if (!doc.at("epsilon").is_array() || doc.at("epsilon").empty())
      throw validation_error("epsilon must be a nonempty array",
                             {{"path", "epsilon"}});
    for (const nlohmann::json& v : doc.at("epsilon")) {
      if (!v.is_number())
        throw validation_error("epsilon entries must be numbers",
                               {{"path", "epsilon"}});
      double e = v.get<double>();
      if (!(e > 0.0 && e <= 1.0))
        throw validation_error("epsilon entries must lie in (0, 1]",
                               {{"path", "epsilon"}, {"value", ctx_num(e)}});
      sc.epsilons.push_back(e);
    }
  }

  if (doc.contains("resolutions")) {
    if (!doc.at("resolutions").is_array() || doc.at("resolutions").empty())
      throw validation_error("resolutions must be a nonempty array",
                             {{"path", "resolutions"}});
    long long prev = 0;
    for (const nlohmann::json& v : doc.at("resolutions")) {
      if (!v.is_number_integer())
        throw validation_error("resolutions must be integers",
                               {{"path", "resolutions"}});
      long long n = v.get<long long>();
      if (n < 8 || n % 2 != 0 || n <= prev)
        throw validation_error(
            "resolutions must be even, >= 8, and strictly ascending",
            {{"path", "resolutions"}, {"value", std::to_string(n)}});
      if (static_cast<std::size_t>(n) * static_cast<std::size_t>(n / 2) >
          kMaxGridCells)
        throw validation_error("resolution exceeds the cell budget",
                               {{"path", "resolutions"},
                                {"value", std::to_string(n)}});
      sc.resolutions.push_back(static_cast<std::size_t>(n));
      prev = n;
    }
  }

  if (doc.contains("bkm")) {
    const nlohmann::json& j = doc.at("bkm");
    const std::string path = "bkm";
    detail::expect_object(j, path);
    detail::expect_keys(j, path, {"samples", "max_fraction"});
    sc.bkm.samples = static_cast<int>(detail::get_integer(j, path, "samples", 10));
    if (sc.bkm.samples < 2)
      throw validation_error("bkm: need at least 2 samples", {{"path", path}});
    sc.bkm.max_fraction = detail::get_number(j, path, "max_fraction", 0.99);
    if (!(sc.bkm.max_fraction > 0.0 && sc.bkm.max_fraction < 1.0))
      throw validation_error("bkm: max_fraction must lie in (0, 1)",
                             {{"path", path}});
  }

  if (doc.contains("output")) {
    const nlohmann::json& j = doc.at("output");
    detail::expect_object(j, "output");
    detail::expect_keys(j, "output", {"dir"});
    if (j.contains("dir")) {
      if (!j.at("dir").is_string())
        throw validation_error("output.dir must be a string", {{"path", "output"}});
      sc.output_dir = j.at("dir").get<std::string>();
    }
  }
  return sc;
}

inline Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in)
    throw validation_error("cannot open scenario file",
                           {{"file", file.string()}});
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw validation_error("scenario file is not valid JSON",
                           {{"file", file.string()}, {"detail", e.what()}});
  }
  Scenario sc = parse_scenario(doc);
  return sc;
}

}  // namespace vshock
