#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nsrom/errors.hpp"
#include "nsrom/fem/forms.hpp"
#include "nsrom/fom.hpp"
#include "nsrom/io/csv.hpp"
#include "nsrom/mesh.hpp"
#include "nsrom/pod.hpp"
#include "nsrom/problems.hpp"

namespace nsrom {

struct ExperimentConfig {
  Problem problem = Problem::kelvin_helmholtz;
  std::size_t mesh_n = 32;  // builtin unit-square meshes
  std::string mesh_file;    // Triangle file stem (absolute once loaded)
  FomConfig fom;
  PodOptions pod;
  std::vector<std::size_t> rom_r{10};
  std::vector<NonlinearForm> rom_forms{NonlinearForm::skew};
  TimeScheme rom_scheme = TimeScheme::bdf2;
  double rom_t_start = 0.0;
  double rom_t_end = 1.0;
  std::string out_dir = "out";
  std::string prefix = "run";
  std::size_t vtk_stride = 0;  // 0 = no VTK output
  std::uint64_t seed = 1;
};

namespace detail {

using boost::property_tree::ptree;

inline const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema{
      {"problem", {"name", "mesh_n", "mesh_file"}},
      {"fom",
       {"nu", "reynolds", "dt", "t_end", "form", "scheme", "snapshot_start", "snapshot_end", "snapshot_stride",
        "newton_tolerance", "newton_max_iterations", "project_initial"}},
      {"pod", {"centering", "rank_cutoff"}},
      {"rom", {"r", "forms", "scheme", "t_start", "t_end"}},
      {"output", {"dir", "prefix", "vtk_stride"}},
      {"run", {"seed"}},
  };
  return schema;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

template <class T>
T get_value(const ptree& pt, const std::string& key, T fallback) {
  const auto v = pt.get_optional<std::string>(key);
  if (!v) return fallback;
  std::istringstream in(*v);
  T out{};
  in >> out;
  if (!in || !(in >> std::ws).eof()) throw ConfigError("config: bad value '" + *v + "' for " + key);
  return out;
}

inline bool get_bool(const ptree& pt, const std::string& key, bool fallback) {
  const auto v = pt.get_optional<std::string>(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError("config: bad boolean '" + *v + "' for " + key);
}

}  // namespace detail

// Problem-dependent defaults: the desk-scale setups.
inline ExperimentConfig default_config(Problem p) {
  ExperimentConfig c;
  c.problem = p;
  switch (p) {
    case Problem::kelvin_helmholtz:
      c.mesh_n = 32;
      c.fom.nu = kh::nu_for_reynolds(100);
      c.fom.dt = 0.02;
      c.fom.t_end = 3.0;
      c.fom.form = NonlinearForm::skew;
      c.rom_r = {10, 20, 30, 40};
      c.rom_forms = {NonlinearForm::skew, NonlinearForm::emac};
      c.rom_t_end = 3.0;
      c.prefix = "kh";
      break;
    case Problem::cylinder_channel:
      c.fom.nu = 0.0005;
      c.fom.dt = 0.002;
      c.fom.t_end = 6.0;
      c.fom.form = NonlinearForm::emac;
      c.fom.snapshot_start = 5.0;
      c.fom.snapshot_end = 6.0;
      c.fom.drag_label = boundary_label::cylinder;
      c.pod.centering = Centering::mean;
      c.rom_r = {13};
      c.rom_forms = {NonlinearForm::emac, NonlinearForm::skew, NonlinearForm::convective};
      c.rom_t_start = 5.0;
      c.rom_t_end = 6.0;
      c.prefix = "cylinder";
      break;
    case Problem::taylor_green:
      c.mesh_n = 16;
      c.fom.nu = 0.01;
      c.fom.dt = 1.0 / 64.0;
      c.fom.t_end = 1.0;
      c.rom_t_end = 1.0;
      c.prefix = "tg";
      break;
    case Problem::custom:
      throw ConfigError("the custom problem cannot be configured from a file");
  }
  c.fom.snapshot_end = std::min(c.fom.snapshot_end, c.fom.t_end);
  return c;
}

// Relative mesh paths are resolved against base_dir.
inline ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {}) {
  using detail::ptree;
  ptree pt;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config: " + e.message() + " at line " + std::to_string(e.line()));
  }
  const auto& schema = detail::config_schema();
  for (const auto& [section, body] : pt) {
    const auto it = schema.find(section);
    if (it == schema.end()) throw ConfigError("config: unknown section [" + section + "]");
    if (body.empty() && !body.data().empty()) throw ConfigError("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body)
      if (!it->second.count(key)) throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
  }

  const auto name = pt.get_optional<std::string>("problem.name");
  if (!name) throw ConfigError("config: [problem] name is required");
  ExperimentConfig c = default_config(parse_problem(*name));
  c.mesh_n = detail::get_value<std::size_t>(pt, "problem.mesh_n", c.mesh_n);
  if (c.mesh_n < 1) throw ConfigError("config: mesh_n must be positive");
  if (const auto f = pt.get_optional<std::string>("problem.mesh_file")) {
    std::filesystem::path p(*f);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    c.mesh_file = p.lexically_normal().string();
  }
  if (c.problem == Problem::cylinder_channel && c.mesh_file.empty())
    throw ConfigError("config: cylinder_channel needs [problem] mesh_file");

  FomConfig& f = c.fom;
  if (pt.get_optional<std::string>("fom.reynolds")) {
    if (c.problem != Problem::kelvin_helmholtz) throw ConfigError("config: reynolds is only defined for kelvin_helmholtz");
    f.nu = kh::nu_for_reynolds(detail::get_value<double>(pt, "fom.reynolds", 0.0));
  }
  f.nu = detail::get_value<double>(pt, "fom.nu", f.nu);
  f.dt = detail::get_value<double>(pt, "fom.dt", f.dt);
  f.t_end = detail::get_value<double>(pt, "fom.t_end", f.t_end);
  if (const auto s = pt.get_optional<std::string>("fom.form")) f.form = parse_form(*s);
  if (const auto s = pt.get_optional<std::string>("fom.scheme")) f.scheme = parse_scheme(*s);
  f.snapshot_start = detail::get_value<double>(pt, "fom.snapshot_start", f.snapshot_start);
  // Without an explicit window the snapshots (and the ROM run) follow t_end,
  // except for the cylinder whose window is one late interval.
  const bool follow_t_end = pt.get_optional<std::string>("fom.t_end") && c.problem != Problem::cylinder_channel;
  f.snapshot_end = detail::get_value<double>(pt, "fom.snapshot_end", follow_t_end ? f.t_end : std::min(f.snapshot_end, f.t_end));
  f.snapshot_stride = detail::get_value<std::size_t>(pt, "fom.snapshot_stride", f.snapshot_stride);
  f.newton.tolerance = detail::get_value<double>(pt, "fom.newton_tolerance", f.newton.tolerance);
  f.newton.max_iterations = detail::get_value<int>(pt, "fom.newton_max_iterations", f.newton.max_iterations);
  f.project_initial = detail::get_bool(pt, "fom.project_initial", f.project_initial);
  f.validate();

  if (const auto s = pt.get_optional<std::string>("pod.centering")) c.pod.centering = parse_centering(*s);
  c.pod.rank_cutoff = detail::get_value<double>(pt, "pod.rank_cutoff", c.pod.rank_cutoff);

  if (const auto s = pt.get_optional<std::string>("rom.r")) {
    c.rom_r.clear();
    for (const auto& item : detail::split_list(*s)) {
      std::size_t pos = 0;
      long v = -1;
      try {
        v = std::stol(item, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != item.size() || v < 1) throw ConfigError("config: bad mode count '" + item + "' in [rom] r");
      c.rom_r.push_back(static_cast<std::size_t>(v));
    }
    if (c.rom_r.empty()) throw ConfigError("config: [rom] r is empty");
  }
  if (const auto s = pt.get_optional<std::string>("rom.forms")) {
    c.rom_forms.clear();
    for (const auto& item : detail::split_list(*s)) c.rom_forms.push_back(parse_form(item));
    if (c.rom_forms.empty()) throw ConfigError("config: [rom] forms is empty");
  }
  c.rom_scheme = f.scheme;
  if (const auto s = pt.get_optional<std::string>("rom.scheme")) c.rom_scheme = parse_scheme(*s);
  c.rom_t_start = detail::get_value<double>(pt, "rom.t_start", c.rom_t_start);
  c.rom_t_end = detail::get_value<double>(pt, "rom.t_end", follow_t_end ? f.t_end : std::min(c.rom_t_end, f.t_end));
  if (!(c.rom_t_end > c.rom_t_start)) throw ConfigError("config: [rom] t_end must exceed t_start");
  step_count(c.rom_t_end - c.rom_t_start, f.dt);

  c.out_dir = pt.get<std::string>("output.dir", c.out_dir);
  c.prefix = pt.get<std::string>("output.prefix", c.prefix);
  if (c.prefix.empty() || c.prefix.find('/') != std::string::npos) throw ConfigError("config: bad output prefix");
  c.vtk_stride = detail::get_value<std::size_t>(pt, "output.vtk_stride", c.vtk_stride);
  c.seed = detail::get_value<std::uint64_t>(pt, "run.seed", c.seed);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::filesystem::absolute(path).parent_path());
}

// Canonical text; parse_config(to_config_text(c)) reproduces c. Archives
// embed this text.
inline std::string to_config_text(const ExperimentConfig& c) {
  std::ostringstream o;
  const auto join = [](const auto& items, auto fmt) {
    std::string s;
    for (const auto& x : items) s += (s.empty() ? "" : ", ") + fmt(x);
    return s;
  };
  o << "[problem]\nname = " << to_string(c.problem) << "\nmesh_n = " << c.mesh_n << "\n";
  if (!c.mesh_file.empty()) o << "mesh_file = " << c.mesh_file << "\n";
  const FomConfig& f = c.fom;
  o << "\n[fom]\nnu = " << format_real(f.nu) << "\ndt = " << format_real(f.dt) << "\nt_end = " << format_real(f.t_end)
    << "\nform = " << to_string(f.form) << "\nscheme = " << to_string(f.scheme)
    << "\nsnapshot_start = " << format_real(f.snapshot_start) << "\nsnapshot_end = " << format_real(f.snapshot_end)
    << "\nsnapshot_stride = " << f.snapshot_stride << "\nnewton_tolerance = " << format_real(f.newton.tolerance)
    << "\nnewton_max_iterations = " << f.newton.max_iterations
    << "\nproject_initial = " << (f.project_initial ? "true" : "false") << "\n";
  o << "\n[pod]\ncentering = " << to_string(c.pod.centering) << "\nrank_cutoff = " << format_real(c.pod.rank_cutoff)
    << "\n";
  o << "\n[rom]\nr = " << join(c.rom_r, [](std::size_t r) { return std::to_string(r); })
    << "\nforms = " << join(c.rom_forms, [](NonlinearForm x) { return to_string(x); })
    << "\nscheme = " << to_string(c.rom_scheme) << "\nt_start = " << format_real(c.rom_t_start)
    << "\nt_end = " << format_real(c.rom_t_end) << "\n";
  o << "\n[output]\ndir = " << c.out_dir << "\nprefix = " << c.prefix << "\nvtk_stride = " << c.vtk_stride << "\n";
  o << "\n[run]\nseed = " << c.seed << "\n";
  return o.str();
}

inline Mesh build_mesh(const ExperimentConfig& c) {
  switch (c.problem) {
    case Problem::kelvin_helmholtz: return kh::mesh(c.mesh_n);
    case Problem::taylor_green: return taylor_green::mesh(c.mesh_n);
    case Problem::cylinder_channel: return read_triangle_mesh_files(c.mesh_file);
    case Problem::custom: break;
  }
  throw ConfigError("no mesh for problem " + to_string(c.problem));
}

inline BoundarySpec build_boundary(const ExperimentConfig& c) {
  switch (c.problem) {
    case Problem::kelvin_helmholtz: return kh::boundary();
    case Problem::taylor_green: return taylor_green::boundary();
    case Problem::cylinder_channel: return cylinder::boundary();
    case Problem::custom: break;
  }
  throw ConfigError("no boundary conditions for problem " + to_string(c.problem));
}

}  // namespace nsrom
