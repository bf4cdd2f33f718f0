#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "nsrom/nsrom.hpp"

namespace {

using namespace nsrom;

struct Options {
  std::string config;
  std::string out;
  std::string snapshots;
  std::string basis;
  std::string centering;
  std::string form;
  std::string scheme;
  std::size_t r = 0;
  double t_end = 0.0;
  std::optional<std::uint64_t> seed;
};

ExperimentConfig load(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  ExperimentConfig c = load_config(o.config);
  if (!o.out.empty()) c.out_dir = o.out;
  if (!o.scheme.empty()) c.fom.scheme = c.rom_scheme = parse_scheme(o.scheme);
  if (o.seed) c.seed = *o.seed;
  return c;
}

std::string artifact(const ExperimentConfig& c, const std::string& suffix) {
  return (std::filesystem::path(c.out_dir) / (c.prefix + suffix)).string();
}

// Explicit path, else derived from the config's output location.
std::string snapshots_path(const Options& o) {
  if (!o.snapshots.empty()) return o.snapshots;
  return artifact(load(o), "_snapshots.bin");
}

std::string basis_path(const Options& o) {
  if (!o.basis.empty()) return o.basis;
  return artifact(load(o), "_basis.bin");
}

int cmd_fom(const Options& o) {
  const ExperimentConfig c = load(o);
  const FomStageResult r = fom_stage(c);
  std::cout << "fom: " << r.steps << " steps, " << r.snapshot_count << " snapshots\n"
            << "wrote " << r.snapshots_path << "\nwrote " << r.scalars_path << "\n";
  return 0;
}

int cmd_pod(const Options& o) {
  std::optional<Centering> centering;
  if (!o.centering.empty()) centering = parse_centering(o.centering);
  const PodStageResult r = pod_stage(snapshots_path(o), centering, o.out);
  std::printf("pod: rank %zu, spectrum %s\n", r.rank, r.spectrum_decreasing ? "strictly decreasing" : "NOT strictly decreasing");
  std::printf("projection-error equality: max relative mismatch %.3e\n", r.max_mismatch);
  std::cout << "wrote " << r.basis_path << "\nwrote " << r.spectrum_path << "\nwrote " << r.projection_path << "\n";
  return 0;
}

int cmd_rom(const Options& o) {
  std::size_t r = o.r;
  std::optional<NonlinearForm> form;
  if (!o.form.empty()) form = parse_form(o.form);
  std::optional<TimeScheme> scheme;
  if (!o.scheme.empty()) scheme = parse_scheme(o.scheme);
  std::string bp = o.basis, sp = o.snapshots;
  if (!o.config.empty()) {
    const ExperimentConfig c = load(o);
    if (bp.empty()) bp = artifact(c, "_basis.bin");
    if (sp.empty()) sp = artifact(c, "_snapshots.bin");
    if (r == 0) r = c.rom_r.front();
    if (!form) form = c.rom_forms.front();
  }
  if (bp.empty()) throw ConfigError("rom needs --basis or --config");
  if (r == 0) throw ConfigError("rom needs --r");
  if (!form) throw ConfigError("rom needs --form");
  std::optional<double> t_end;
  if (o.t_end > 0.0) t_end = o.t_end;
  const RomStageResult res = rom_stage(bp, r, *form, scheme, t_end, sp);
  std::cout << "rom: " << to_string(*form) << " r=" << r << ", " << res.steps << " steps\n"
            << "wrote " << res.coefficients_path << "\nwrote " << res.scalars_path << "\nwrote " << res.operators_path
            << "\n";
  return 0;
}

int cmd_compare(const Options& o) {
  const std::vector<CompareRow> rows = compare_stage(basis_path(o), o.snapshots.empty() ? "" : o.snapshots);
  std::printf("%-12s %4s %12s %12s %12s %12s\n", "form", "r", "linf_l2", "l2_h1", "drag_l2", "plateau");
  for (const CompareRow& row : rows) {
    if (!row.ok) {
      std::printf("%-12s %4zu diverged: %s\n", to_string(row.form).c_str(), row.r, row.failure.c_str());
      continue;
    }
    std::printf("%-12s %4zu %12.4e %12.4e %12.4e %12.4e\n", to_string(row.form).c_str(), row.r, row.error.linf_l2,
                row.error.l2_h1, row.drag_l2, row.plateau_ratio);
  }
  return 0;
}

int cmd_verify(const Options& o) {
  const std::uint64_t seed = o.seed.value_or(1);
  return report_verify(run_verify_suite(seed), std::cout) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FEM / POD / ROM lab for incompressible Navier-Stokes"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "experiment config (INI)");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "seed for random test fields");
  };
  auto* fom = app.add_subcommand("fom", "run the full-order model and write snapshots");
  common(fom);
  fom->add_option("--scheme", o.scheme, "backward_euler or bdf2");

  auto* pod = app.add_subcommand("pod", "build the POD basis from a snapshot archive");
  common(pod);
  pod->add_option("--snapshots", o.snapshots, "snapshot archive (default from config)");
  pod->add_option("--centering", o.centering, "none or mean");

  auto* rom = app.add_subcommand("rom", "run one reduced-order model");
  common(rom);
  rom->add_option("--basis", o.basis, "basis archive (default from config)");
  rom->add_option("--snapshots", o.snapshots, "snapshot archive (default next to the basis)");
  rom->add_option("--r", o.r, "number of modes")->check(CLI::PositiveNumber);
  rom->add_option("--form", o.form, "convective, skew, rotational or emac")
      ->check(CLI::IsMember({"convective", "skew", "rotational", "emac"}));
  rom->add_option("--scheme", o.scheme, "backward_euler or bdf2");
  rom->add_option("--t-end", o.t_end, "final time");

  auto* compare = app.add_subcommand("compare", "run every configured ROM and compare with the FOM");
  common(compare);
  compare->add_option("--basis", o.basis, "basis archive (default from config)");
  compare->add_option("--snapshots", o.snapshots, "snapshot archive (default next to the basis)");

  auto* verify = app.add_subcommand("verify", "run the invariant self-checks");
  verify->add_option("--seed", o.seed, "seed for random test fields");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*fom) return cmd_fom(o);
    if (*pod) return cmd_pod(o);
    if (*rom) return cmd_rom(o);
    if (*compare) return cmd_compare(o);
    if (*verify) return cmd_verify(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 4;
  } catch (const MeshError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
