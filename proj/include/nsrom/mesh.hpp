#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nsrom/errors.hpp"

namespace nsrom {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class Axis { x, y };

struct BoundaryEdge {
  std::array<std::size_t, 2> vertices;
  int label;
};

// The slave vertex sits at master + extent along `axis`.
struct PeriodicPair {
  std::size_t master;
  std::size_t slave;
  Axis axis;
};

// Boundary markers shared by the rectangle generator and the bundled
// cylinder mesh.
namespace boundary_label {
inline constexpr int bottom = 1;
inline constexpr int right = 2;
inline constexpr int top = 3;
inline constexpr int left = 4;
inline constexpr int cylinder = 5;
}  // namespace boundary_label

inline std::map<int, std::string> default_label_names() {
  return {{boundary_label::bottom, "bottom"},
          {boundary_label::right, "right"},
          {boundary_label::top, "top"},
          {boundary_label::left, "left"},
          {boundary_label::cylinder, "cylinder"}};
}

struct BoundingBox {
  Point min;
  Point max;
};

// Triangulation with labeled boundary edges. Triangles are counterclockwise.
struct Mesh {
  std::vector<Point> vertices;
  std::vector<std::array<std::size_t, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<PeriodicPair> periodic_pairs;
  std::map<int, std::string> label_names = default_label_names();

  double signed_area(std::size_t t) const {
    const Point& a = vertices[triangles[t][0]];
    const Point& b = vertices[triangles[t][1]];
    const Point& c = vertices[triangles[t][2]];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
  }

  double total_area() const {
    double s = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) s += signed_area(t);
    return s;
  }

  BoundingBox bounding_box() const {
    BoundingBox box{vertices.at(0), vertices.at(0)};
    for (const Point& p : vertices) {
      box.min.x = std::min(box.min.x, p.x);
      box.min.y = std::min(box.min.y, p.y);
      box.max.x = std::max(box.max.x, p.x);
      box.max.y = std::max(box.max.y, p.y);
    }
    return box;
  }

  bool has_label(int label) const {
    return std::any_of(boundary_edges.begin(), boundary_edges.end(),
                       [label](const BoundaryEdge& e) { return e.label == label; });
  }

  // Map from sorted vertex pair to the number of triangles sharing it.
  std::map<std::pair<std::size_t, std::size_t>, int> edge_multiplicity() const {
    std::map<std::pair<std::size_t, std::size_t>, int> count;
    for (const auto& t : triangles)
      for (int k = 0; k < 3; ++k) {
        const std::size_t a = t[k], b = t[(k + 1) % 3];
        ++count[{std::min(a, b), std::max(a, b)}];
      }
    return count;
  }

  std::size_t edge_count() const { return edge_multiplicity().size(); }

  // Checks the structural invariants; throws MeshError on the first violation.
  void validate() const {
    for (std::size_t t = 0; t < triangles.size(); ++t) {
      for (std::size_t v : triangles[t])
        if (v >= vertices.size()) throw MeshError("triangle " + std::to_string(t) + " references missing vertex");
      if (!(signed_area(t) > 0.0)) throw MeshError("triangle " + std::to_string(t) + " has nonpositive area");
    }
    const auto count = edge_multiplicity();
    for (const BoundaryEdge& e : boundary_edges) {
      const auto key = std::make_pair(std::min(e.vertices[0], e.vertices[1]), std::max(e.vertices[0], e.vertices[1]));
      const auto it = count.find(key);
      if (it == count.end() || it->second != 1)
        throw MeshError("boundary edge (" + std::to_string(e.vertices[0]) + ", " + std::to_string(e.vertices[1]) +
                        ") does not belong to exactly one triangle");
    }
    std::size_t exterior = 0;
    for (const auto& [key, n] : count) {
      if (n > 2) throw MeshError("edge shared by more than two triangles");
      if (n == 1) ++exterior;
    }
    if (exterior != boundary_edges.size())
      throw MeshError("boundary labels do not cover the boundary (" + std::to_string(exterior) + " boundary edges, " +
                      std::to_string(boundary_edges.size()) + " labeled)");
    for (const PeriodicPair& p : periodic_pairs) {
      const Point& m = vertices.at(p.master);
      const Point& s = vertices.at(p.slave);
      const double off = p.axis == Axis::x ? std::abs(m.y - s.y) : std::abs(m.x - s.x);
      if (off > 1e-10) throw MeshError("periodic pair not aligned with its axis");
    }
  }
};

enum class Diagonal { alternating, uniform };

// Structured triangulation of [0, lx] x [0, ly] with 2 nx ny triangles.
inline Mesh uniform_rect_mesh(std::size_t nx, std::size_t ny, double lx = 1.0, double ly = 1.0,
                              Diagonal diagonal = Diagonal::alternating) {
  NSROM_REQUIRE(nx >= 1 && ny >= 1, "uniform_rect_mesh: nx, ny must be >= 1");
  NSROM_REQUIRE(lx > 0.0 && ly > 0.0, "uniform_rect_mesh: extents must be positive");
  Mesh mesh;
  const auto id = [nx](std::size_t i, std::size_t j) { return j * (nx + 1) + i; };
  mesh.vertices.reserve((nx + 1) * (ny + 1));
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i <= nx; ++i)
      mesh.vertices.push_back({lx * static_cast<double>(i) / static_cast<double>(nx),
                               ly * static_cast<double>(j) / static_cast<double>(ny)});

  mesh.triangles.reserve(2 * nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      if (diagonal == Diagonal::uniform || (i + j) % 2 == 0) {
        mesh.triangles.push_back({v00, v10, v11});
        mesh.triangles.push_back({v00, v11, v01});
      } else {
        mesh.triangles.push_back({v00, v10, v01});
        mesh.triangles.push_back({v10, v11, v01});
      }
    }

  for (std::size_t i = 0; i < nx; ++i) mesh.boundary_edges.push_back({{id(i, 0), id(i + 1, 0)}, boundary_label::bottom});
  for (std::size_t j = 0; j < ny; ++j) mesh.boundary_edges.push_back({{id(nx, j), id(nx, j + 1)}, boundary_label::right});
  for (std::size_t i = nx; i-- > 0;) mesh.boundary_edges.push_back({{id(i + 1, ny), id(i, ny)}, boundary_label::top});
  for (std::size_t j = ny; j-- > 0;) mesh.boundary_edges.push_back({{id(0, j + 1), id(0, j)}, boundary_label::left});
  return mesh;
}

namespace detail {

// Non-empty, non-comment lines of a Triangle-format file, with their
// 1-based line numbers.
struct NumberedLine {
  std::size_t number;
  std::vector<std::string> tokens;
};

inline std::vector<NumberedLine> tokenize_lines(std::string_view text) {
  std::vector<NumberedLine> out;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string line(text.substr(pos, end - pos));
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream in(line);
    std::vector<std::string> tokens;
    for (std::string tok; in >> tok;) tokens.push_back(tok);
    if (!tokens.empty()) out.push_back({number, std::move(tokens)});
    if (end == text.size()) break;
    pos = end + 1;
  }
  return out;
}

inline long long parse_int(const std::string& tok, std::string_view file, std::size_t line) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size())
    throw FormatError(std::string(file) + " line " + std::to_string(line) + ": expected integer, got '" + tok + "'");
  return v;
}

inline double parse_real(const std::string& tok, std::string_view file, std::size_t line) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size())
    throw FormatError(std::string(file) + " line " + std::to_string(line) + ": expected number, got '" + tok + "'");
  return v;
}

[[noreturn]] inline void parse_fail(std::string_view file, std::size_t line, const std::string& msg) {
  throw FormatError(std::string(file) + " line " + std::to_string(line) + ": " + msg);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("mesh file not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

// Parses the Triangle generator's .node / .ele / .edge text layout (see
// docs/formats.md). Index base (0 or 1) is taken from the first vertex.
// Edges with marker 0 are interior and dropped.
inline Mesh read_triangle_mesh(std::string_view node_text, std::string_view ele_text, std::string_view edge_text) {
  using detail::parse_fail;
  using detail::parse_int;
  using detail::parse_real;
  Mesh mesh;

  const auto nodes = detail::tokenize_lines(node_text);
  if (nodes.empty()) throw FormatError(".node: empty file");
  const auto& nh = nodes[0];
  if (nh.tokens.size() < 4) parse_fail(".node", nh.number, "header needs: count dim attributes markers");
  const long long n_vertices = parse_int(nh.tokens[0], ".node", nh.number);
  const long long dim = parse_int(nh.tokens[1], ".node", nh.number);
  const long long n_attr = parse_int(nh.tokens[2], ".node", nh.number);
  const long long n_mark = parse_int(nh.tokens[3], ".node", nh.number);
  if (n_vertices < 3 || dim != 2 || n_attr < 0 || n_mark < 0 || n_mark > 1)
    parse_fail(".node", nh.number, "invalid header");
  if (static_cast<long long>(nodes.size()) - 1 != n_vertices)
    parse_fail(".node", nodes.back().number,
               "expected " + std::to_string(n_vertices) + " vertex lines, found " + std::to_string(nodes.size() - 1));
  const long long base = parse_int(nodes[1].tokens[0], ".node", nodes[1].number);
  if (base != 0 && base != 1) parse_fail(".node", nodes[1].number, "first vertex index must be 0 or 1");
  mesh.vertices.resize(static_cast<std::size_t>(n_vertices));
  std::vector<bool> seen(mesh.vertices.size(), false);
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    const auto& l = nodes[k];
    if (static_cast<long long>(l.tokens.size()) < 3 + n_attr + n_mark) parse_fail(".node", l.number, "too few fields");
    const long long idx = parse_int(l.tokens[0], ".node", l.number) - base;
    if (idx < 0 || idx >= n_vertices || seen[static_cast<std::size_t>(idx)])
      parse_fail(".node", l.number, "vertex index out of range or repeated");
    seen[static_cast<std::size_t>(idx)] = true;
    mesh.vertices[static_cast<std::size_t>(idx)] = {parse_real(l.tokens[1], ".node", l.number),
                                                    parse_real(l.tokens[2], ".node", l.number)};
  }

  const auto eles = detail::tokenize_lines(ele_text);
  if (eles.empty()) throw FormatError(".ele: empty file");
  const auto& eh = eles[0];
  if (eh.tokens.size() < 2) parse_fail(".ele", eh.number, "header needs: count nodes-per-triangle [attributes]");
  const long long n_tri = parse_int(eh.tokens[0], ".ele", eh.number);
  const long long per = parse_int(eh.tokens[1], ".ele", eh.number);
  if (n_tri < 1 || per != 3) parse_fail(".ele", eh.number, "need a positive count and 3 nodes per triangle");
  if (static_cast<long long>(eles.size()) - 1 != n_tri)
    parse_fail(".ele", eles.back().number,
               "expected " + std::to_string(n_tri) + " triangle lines, found " + std::to_string(eles.size() - 1));
  mesh.triangles.reserve(static_cast<std::size_t>(n_tri));
  for (std::size_t k = 1; k < eles.size(); ++k) {
    const auto& l = eles[k];
    if (l.tokens.size() < 4) parse_fail(".ele", l.number, "too few fields");
    std::array<std::size_t, 3> tri{};
    for (int c = 0; c < 3; ++c) {
      const long long v = parse_int(l.tokens[1 + c], ".ele", l.number) - base;
      if (v < 0 || v >= n_vertices)
        parse_fail(".ele", l.number, "vertex index " + l.tokens[1 + c] + " past the vertex count");
      tri[c] = static_cast<std::size_t>(v);
    }
    mesh.triangles.push_back(tri);
    const std::size_t t = mesh.triangles.size() - 1;
    const double area = mesh.signed_area(t);
    const double scale = [&] {
      double s = 0.0;
      for (int c = 0; c < 3; ++c) {
        const Point& a = mesh.vertices[tri[c]];
        const Point& b = mesh.vertices[tri[(c + 1) % 3]];
        s = std::max(s, std::hypot(b.x - a.x, b.y - a.y));
      }
      return s;
    }();
    if (!(std::abs(area) > 1e-14 * scale * scale)) parse_fail(".ele", l.number, "zero-area triangle");
    if (area < 0) std::swap(mesh.triangles[t][1], mesh.triangles[t][2]);
  }

  const auto edges = detail::tokenize_lines(edge_text);
  if (edges.empty()) throw FormatError(".edge: empty file");
  const auto& gh = edges[0];
  if (gh.tokens.size() < 2) parse_fail(".edge", gh.number, "header needs: count markers");
  const long long n_edges = parse_int(gh.tokens[0], ".edge", gh.number);
  const long long e_mark = parse_int(gh.tokens[1], ".edge", gh.number);
  if (n_edges < 1 || e_mark != 1) parse_fail(".edge", gh.number, "need a positive count and one marker column");
  if (static_cast<long long>(edges.size()) - 1 != n_edges)
    parse_fail(".edge", edges.back().number,
               "expected " + std::to_string(n_edges) + " edge lines, found " + std::to_string(edges.size() - 1));
  for (std::size_t k = 1; k < edges.size(); ++k) {
    const auto& l = edges[k];
    if (l.tokens.size() < 4) parse_fail(".edge", l.number, "too few fields");
    const long long a = parse_int(l.tokens[1], ".edge", l.number) - base;
    const long long b = parse_int(l.tokens[2], ".edge", l.number) - base;
    const long long marker = parse_int(l.tokens[3], ".edge", l.number);
    if (a < 0 || a >= n_vertices || b < 0 || b >= n_vertices || a == b)
      parse_fail(".edge", l.number, "edge vertex index out of range");
    if (marker == 0) continue;
    mesh.boundary_edges.push_back({{static_cast<std::size_t>(a), static_cast<std::size_t>(b)}, static_cast<int>(marker)});
  }
  try {
    mesh.validate();
  } catch (const MeshError& e) {
    throw FormatError(std::string("triangle mesh: ") + e.what());
  }
  return mesh;
}

// Reads <stem>.node, <stem>.ele and <stem>.edge.
inline Mesh read_triangle_mesh_files(const std::string& stem) {
  return read_triangle_mesh(detail::read_text_file(stem + ".node"), detail::read_text_file(stem + ".ele"),
                            detail::read_text_file(stem + ".edge"));
}

// Pairs every vertex on the max-side boundary along `axis` with exactly one
// vertex on the min side.
inline Mesh identify_periodic(Mesh mesh, Axis axis, double tolerance) {
  NSROM_REQUIRE(tolerance > 0.0, "identify_periodic: tolerance must be positive");
  const BoundingBox box = mesh.bounding_box();
  const auto along = [axis](const Point& p) { return axis == Axis::x ? p.x : p.y; };
  const auto across = [axis](const Point& p) { return axis == Axis::x ? p.y : p.x; };
  const double lo = axis == Axis::x ? box.min.x : box.min.y;
  const double hi = axis == Axis::x ? box.max.x : box.max.y;

  std::vector<std::pair<double, std::size_t>> masters;
  std::vector<std::size_t> slaves;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (std::abs(along(mesh.vertices[v]) - lo) <= tolerance) masters.emplace_back(across(mesh.vertices[v]), v);
    if (std::abs(along(mesh.vertices[v]) - hi) <= tolerance) slaves.push_back(v);
  }
  std::sort(masters.begin(), masters.end());
  std::vector<bool> used(masters.size(), false);

  const auto describe = [&](std::size_t v) {
    std::ostringstream s;
    s.precision(17);
    s << "(" << mesh.vertices[v].x << ", " << mesh.vertices[v].y << ")";
    return s.str();
  };
  for (std::size_t s : slaves) {
    const double key = across(mesh.vertices[s]);
    auto it = std::lower_bound(masters.begin(), masters.end(), std::make_pair(key - tolerance, std::size_t{0}));
    std::size_t match = masters.size();
    for (; it != masters.end() && it->first <= key + tolerance; ++it) {
      const auto k = static_cast<std::size_t>(it - masters.begin());
      if (!used[k]) {
        match = k;
        break;
      }
    }
    if (match == masters.size())
      throw MeshError("identify_periodic: unmatched vertex " + std::to_string(s) + " at " + describe(s));
    used[match] = true;
    mesh.periodic_pairs.push_back({masters[match].second, s, axis});
  }
  for (std::size_t k = 0; k < masters.size(); ++k)
    if (!used[k])
      throw MeshError("identify_periodic: unmatched vertex " + std::to_string(masters[k].second) + " at " +
                      describe(masters[k].second));
  return mesh;
}

inline Mesh identify_periodic(Mesh mesh, Axis axis) {
  const BoundingBox box = mesh.bounding_box();
  const double extent = std::max(box.max.x - box.min.x, box.max.y - box.min.y);
  return identify_periodic(std::move(mesh), axis, 1e-8 * extent);
}

}  // namespace nsrom
