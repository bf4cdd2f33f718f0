#pragma once

// The fom -> pod -> rom -> compare pipeline on files. Each stage reads the
// previous stage's archive; the embedded config text rebuilds the space.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nsrom/config.hpp"
#include "nsrom/diagnostics.hpp"
#include "nsrom/fom.hpp"
#include "nsrom/io/archive.hpp"
#include "nsrom/io/csv.hpp"
#include "nsrom/io/vtk.hpp"
#include "nsrom/pod.hpp"
#include "nsrom/rom.hpp"

namespace nsrom {

// Space and unit-viscosity operators for one configuration.
struct Workspace {
  ExperimentConfig config;
  TaylorHoodSpace space;
  LinearOperators unit_ops;  // mass, (grad, grad), divergence

  explicit Workspace(ExperimentConfig c)
      : config(std::move(c)), space(build_mesh(config), build_boundary(config)),
        unit_ops(assemble_linear_operators(space, 1.0)) {}

  std::filesystem::path out(const std::string& suffix) const {
    return std::filesystem::path(config.out_dir) / (config.prefix + suffix);
  }
};

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

struct FomStageResult {
  std::string snapshots_path;
  std::string scalars_path;
  std::size_t snapshot_count = 0;
  std::size_t steps = 0;
};

inline FomStageResult fom_stage(const ExperimentConfig& cfg) {
  const Workspace ws(cfg);
  ensure_dir(cfg.out_dir);
  std::size_t vtk_index = 0;
  const auto on_step = [&](const FomState& s) {
    if (cfg.vtk_stride == 0 || s.step % cfg.vtk_stride != 0) return;
    char name[32];
    std::snprintf(name, sizeof name, "_%05zu.vtk", vtk_index++);
    write_vtk(ws.out(name).string(), ws.space, s.u, s.p, cfg.prefix + " t=" + format_real(s.time));
  };
  const FomRun run =
      run_fom(ws.space, cfg.fom, build_initial_condition(cfg.problem, ws.space, cfg.fom.nu), false, on_step);
  FomStageResult res;
  res.snapshots_path = ws.out("_snapshots.bin").string();
  res.scalars_path = ws.out("_scalars.csv").string();
  res.snapshot_count = run.snapshots.size();
  res.steps = run.final_state.step;
  if (run.snapshots.size() == 0) throw ConfigError("snapshot window holds no time steps");
  write_snapshot_archive(res.snapshots_path, run.snapshots, to_config_text(cfg));
  const FomScalars& s = run.scalars;
  write_csv(res.scalars_path, make_table({"t", "energy", "enstrophy", "div_error", "drag"},
                                         {s.t, s.energy, s.enstrophy, s.div_error, s.drag}));
  return res;
}

struct PodStageResult {
  std::string basis_path;
  std::string spectrum_path;
  std::string projection_path;
  std::size_t rank = 0;
  double max_mismatch = 0.0;  // max_r |lhs - rhs| / rhs of the projection-error equality
  bool spectrum_decreasing = true;
};

// Outputs go next to the snapshot archive unless out_dir is given.
inline PodStageResult pod_stage(const std::string& snapshots_path, std::optional<Centering> centering = {},
                                const std::string& out_dir = {}) {
  const SnapshotArchive arch = read_snapshot_archive(snapshots_path);
  ExperimentConfig cfg = parse_config(arch.config_text);
  if (centering) cfg.pod.centering = *centering;
  cfg.out_dir = out_dir.empty() ? std::filesystem::path(snapshots_path).parent_path().string() : out_dir;
  if (cfg.out_dir.empty()) cfg.out_dir = ".";
  const Workspace ws(cfg);
  if (arch.snapshots.dofs() != ws.space.velocity_dofs())
    throw FormatError("snapshot archive: bad field 'n_dofs': archive has " + std::to_string(arch.snapshots.dofs()) +
                      " DOFs, configured space has " + std::to_string(ws.space.velocity_dofs()));
  ensure_dir(cfg.out_dir);
  const PodBasis basis = build_pod_basis(arch.snapshots, ws.unit_ops.mass, ws.unit_ops.stiffness, cfg.pod);

  PodStageResult res;
  res.rank = basis.rank();
  res.basis_path = ws.out("_basis.bin").string();
  res.spectrum_path = ws.out("_spectrum.csv").string();
  res.projection_path = ws.out("_projection_check.csv").string();
  write_basis_archive(res.basis_path, basis, to_config_text(cfg));

  Vector k, cumulative;
  double total = 0.0;
  for (double l : basis.eigenvalues) total += l;
  double run_sum = 0.0;
  for (std::size_t i = 0; i < basis.rank(); ++i) {
    k.push_back(static_cast<double>(i + 1));
    run_sum += basis.eigenvalues[i];
    cumulative.push_back(run_sum / total);
    if (i > 0 && !(basis.eigenvalues[i] < basis.eigenvalues[i - 1])) res.spectrum_decreasing = false;
  }
  write_csv(res.spectrum_path,
            make_table({"k", "lambda", "grad_norm", "energy_fraction"}, {k, basis.eigenvalues, basis.grad_norms, cumulative}));

  Vector rs, lhs, rhs, rel;
  for (std::size_t r = 0; r <= basis.rank(); ++r) {
    const ProjectionError e = pod_projection_error(ws.space, basis, arch.snapshots, r);
    rs.push_back(static_cast<double>(r));
    lhs.push_back(e.lhs);
    rhs.push_back(e.rhs);
    const double m = e.rhs > 0 ? std::abs(e.lhs - e.rhs) / e.rhs : std::abs(e.lhs - e.rhs);
    rel.push_back(m);
    res.max_mismatch = std::max(res.max_mismatch, m);
  }
  write_csv(res.projection_path, make_table({"r", "lhs", "rhs", "relative_mismatch"}, {rs, lhs, rhs, rel}));
  return res;
}

inline std::string default_snapshots_path(const std::string& basis_path) {
  std::string p = basis_path;
  const std::string suffix = "_basis.bin";
  if (p.size() >= suffix.size() && p.compare(p.size() - suffix.size(), suffix.size(), suffix) == 0)
    return p.substr(0, p.size() - suffix.size()) + "_snapshots.bin";
  throw ConfigError("cannot derive the snapshot archive from '" + basis_path + "'; pass it explicitly");
}

inline std::string default_scalars_path(const std::string& snapshots_path) {
  const std::string suffix = "_snapshots.bin";
  if (snapshots_path.size() >= suffix.size() &&
      snapshots_path.compare(snapshots_path.size() - suffix.size(), suffix.size(), suffix) == 0)
    return snapshots_path.substr(0, snapshots_path.size() - suffix.size()) + "_scalars.csv";
  throw ConfigError("cannot derive the FOM scalar file from '" + snapshots_path + "'");
}

// Loaded basis + snapshots + space, shared by the rom and compare stages.
struct ReducedContext {
  SnapshotArchive snapshots;
  std::unique_ptr<Workspace> ws;
  PodBasis basis;

  ReducedContext(const std::string& basis_path, const std::string& snapshots_path) {
    snapshots = read_snapshot_archive(snapshots_path);
    ExperimentConfig cfg = parse_config(snapshots.config_text);
    cfg.out_dir = std::filesystem::path(basis_path).parent_path().string();
    if (cfg.out_dir.empty()) cfg.out_dir = ".";
    ws = std::make_unique<Workspace>(cfg);
    BasisArchive b = read_basis_archive(basis_path, ws->unit_ops.mass);
    basis = std::move(b.basis);
    ws->config.pod.centering = basis.centering;
  }

  const ExperimentConfig& config() const { return ws->config; }

  // FOM state at the ROM start time.
  const Vector& initial_state() const {
    const double t0 = config().rom_t_start;
    for (std::size_t n = 0; n < snapshots.snapshots.size(); ++n)
      if (std::abs(snapshots.snapshots.times[n] - t0) <= 1e-9 * std::max(1.0, std::abs(t0)))
        return snapshots.snapshots.fields[n];
    throw ConfigError("no snapshot at the ROM start time t = " + format_real(t0));
  }
};

struct RomRunResult {
  RomTrajectory trajectory;
  std::vector<Vector> fields;
  Vector drag;  // from step 1; empty without a drag label
};

inline RomRunResult run_reduced(const ReducedContext& ctx, std::size_t r, NonlinearForm form, TimeScheme scheme,
                                double t_end, RomOperators* ops_out = nullptr) {
  const ExperimentConfig& cfg = ctx.config();
  if (r > ctx.basis.rank())
    throw ConfigError("r = " + std::to_string(r) + " exceeds the basis rank " + std::to_string(ctx.basis.rank()));
  RomOperators ops = assemble_rom_operators(ctx.ws->space, ctx.basis, r, form, cfg.fom.nu);
  RomSettings rs;
  rs.dt = cfg.fom.dt;
  rs.t0 = cfg.rom_t_start;
  rs.t_end = t_end - cfg.rom_t_start;
  rs.scheme = scheme;
  rs.newton = cfg.fom.newton;
  RomRunResult res;
  res.trajectory = run_rom(ops, project_field(ctx.basis, r, ctx.initial_state()), rs);
  res.fields = reconstruct_trajectory(ctx.basis, res.trajectory);
  if (cfg.fom.drag_label)
    res.drag = rom_drag_series(ctx.ws->space, res.fields, rs.dt, scheme, cfg.fom.nu, form, *cfg.fom.drag_label);
  if (ops_out) *ops_out = std::move(ops);
  return res;
}

struct RomStageResult {
  std::string coefficients_path;
  std::string scalars_path;
  std::string operators_path;
  std::size_t steps = 0;
};

inline RomStageResult rom_stage(const std::string& basis_path, std::size_t r, NonlinearForm form,
                                std::optional<TimeScheme> scheme = {}, std::optional<double> t_end = {},
                                std::string snapshots_path = {}) {
  if (snapshots_path.empty()) snapshots_path = default_snapshots_path(basis_path);
  const ReducedContext ctx(basis_path, snapshots_path);
  const ExperimentConfig& cfg = ctx.config();
  RomOperators ops;
  const RomRunResult run = run_reduced(ctx, r, form, scheme.value_or(cfg.rom_scheme), t_end.value_or(cfg.rom_t_end), &ops);

  const std::string stem = "_rom_" + to_string(form) + "_r" + std::to_string(r);
  RomStageResult res;
  res.coefficients_path = ctx.ws->out(stem + "_coefficients.csv").string();
  res.scalars_path = ctx.ws->out(stem + "_scalars.csv").string();
  res.operators_path = ctx.ws->out(stem + "_operators.bin").string();
  res.steps = run.trajectory.size() - 1;
  write_operators_archive(res.operators_path, ops, to_config_text(cfg));

  std::vector<std::string> header{"t"};
  for (std::size_t i = 1; i <= r; ++i) header.push_back("a" + std::to_string(i));
  CsvTable coef{header, {}};
  for (std::size_t n = 0; n < run.trajectory.size(); ++n) {
    std::vector<std::string> row{format_real(run.trajectory.times[n])};
    for (double a : run.trajectory.coefficients[n]) row.push_back(format_real(a));
    coef.add_row(std::move(row));
  }
  write_csv(res.coefficients_path, coef);

  Vector energy, enstrophy, drag;
  for (std::size_t n = 0; n < run.fields.size(); ++n) {
    const EnergyEnstrophy e = energy_enstrophy(ctx.ws->space, run.fields[n]);
    energy.push_back(e.energy);
    enstrophy.push_back(e.enstrophy);
    drag.push_back(n > 0 && !run.drag.empty() ? run.drag[n - 1] : std::numeric_limits<double>::quiet_NaN());
  }
  write_csv(res.scalars_path,
            make_table({"t", "energy", "enstrophy", "drag"}, {run.trajectory.times, energy, enstrophy, drag}));
  return res;
}

struct CompareRow {
  NonlinearForm form;
  std::size_t r;
  bool ok = true;
  std::string failure;
  TrajectoryError error;
  double drag_l2 = std::numeric_limits<double>::quiet_NaN();  // (dt sum (c_rom - c_fom)^2)^(1/2)
  double fom_div_l2 = 0.0;                                    // ||div u_h||_{2,0} over the window
  double rom_div_l2 = 0.0;
  double plateau_ratio = std::numeric_limits<double>::quiet_NaN();  // linf_l2(r) / linf_l2(previous r)
};

namespace detail {

inline bool same_time(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

}  // namespace detail

// Runs every (form, r) of the configuration against the FOM snapshots.
inline std::vector<CompareRow> compare_stage(const std::string& basis_path, std::string snapshots_path = {},
                                             std::string scalars_path = {}, std::string out_csv = {}) {
  if (snapshots_path.empty()) snapshots_path = default_snapshots_path(basis_path);
  const ReducedContext ctx(basis_path, snapshots_path);
  const ExperimentConfig& cfg = ctx.config();
  const TaylorHoodSpace& space = ctx.ws->space;
  const SnapshotSet& snaps = ctx.snapshots.snapshots;

  Vector fom_t, fom_drag;
  if (cfg.fom.drag_label) {
    if (scalars_path.empty()) scalars_path = default_scalars_path(snapshots_path);
    const CsvTable fs = read_csv(scalars_path);
    fom_t = fs.column("t");
    fom_drag = fs.column("drag");
  }

  std::vector<CompareRow> rows;
  for (NonlinearForm form : cfg.rom_forms) {
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t r : cfg.rom_r) {
      CompareRow row;
      row.form = form;
      row.r = r;
      try {
        const RomRunResult run = run_reduced(ctx, r, form, cfg.rom_scheme, cfg.rom_t_end);
        std::vector<Vector> fom_fields, rom_fields;
        Vector times;
        std::size_t s = 0;
        for (std::size_t n = 0; n < run.trajectory.size(); ++n) {
          const double t = run.trajectory.times[n];
          while (s < snaps.size() && snaps.times[s] < t && !detail::same_time(snaps.times[s], t)) ++s;
          if (s < snaps.size() && detail::same_time(snaps.times[s], t)) {
            fom_fields.push_back(snaps.fields[s]);
            rom_fields.push_back(run.fields[n]);
            times.push_back(t);
          }
        }
        if (times.empty()) throw ConfigError("ROM and FOM snapshot time grids do not overlap");
        row.error = trajectory_error(space, fom_fields, times, rom_fields, times, cfg.fom.nu);
        row.fom_div_l2 = discrete_time_norm(row.error.div_series.values, cfg.fom.dt, 2);
        Vector rom_div;
        for (const Vector& w : rom_fields) rom_div.push_back(field_norms(space, w).div_l2);
        row.rom_div_l2 = discrete_time_norm(rom_div, cfg.fom.dt, 2);
        if (!run.drag.empty()) {
          double sum = 0.0;
          std::size_t f = 0;
          for (std::size_t n = 1; n < run.trajectory.size(); ++n) {
            const double t = run.trajectory.times[n];
            while (f < fom_t.size() && fom_t[f] < t && !detail::same_time(fom_t[f], t)) ++f;
            if (f == fom_t.size() || !detail::same_time(fom_t[f], t))
              throw ConfigError("FOM drag series has no entry at t = " + format_real(t));
            sum += cfg.fom.dt * (run.drag[n - 1] - fom_drag[f]) * (run.drag[n - 1] - fom_drag[f]);
          }
          row.drag_l2 = std::sqrt(sum);
        }
        row.plateau_ratio = row.error.linf_l2 / prev;
        prev = row.error.linf_l2;
      } catch (const SolverError& e) {
        row.ok = false;
        row.failure = e.what();
        prev = std::numeric_limits<double>::quiet_NaN();
      }
      rows.push_back(std::move(row));
    }
  }

  if (out_csv.empty()) out_csv = ctx.ws->out("_compare.csv").string();
  CsvTable t{{"form", "r", "status", "linf_l2", "l2_h1", "c_u", "drag_l2", "fom_div_l2", "rom_div_l2", "plateau_ratio"}, {}};
  for (const CompareRow& row : rows)
    t.add_row({to_string(row.form), std::to_string(row.r), row.ok ? "ok" : "diverged", format_real(row.error.linf_l2),
               format_real(row.error.l2_h1), format_real(row.error.c_u), format_real(row.drag_l2),
               format_real(row.fom_div_l2), format_real(row.rom_div_l2), format_real(row.plateau_ratio)});
  write_csv(out_csv, t);
  return rows;
}

}  // namespace nsrom
