#pragma once

#include <algorithm>
#include <cmath>
#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nsrom/errors.hpp"
#include "nsrom/mesh.hpp"
#include "nsrom/numerics/quadrature.hpp"
#include "nsrom/numerics/vector.hpp"

namespace nsrom {

using VectorFunction = std::function<std::array<double, 2>(double x, double y, double t)>;

struct BoundaryCondition {
  enum class Kind { natural, no_slip, velocity, no_penetration, periodic };
  Kind kind = Kind::natural;
  VectorFunction value;  // only for Kind::velocity

  static BoundaryCondition natural() { return {Kind::natural, {}}; }
  static BoundaryCondition no_slip() { return {Kind::no_slip, {}}; }
  static BoundaryCondition no_penetration() { return {Kind::no_penetration, {}}; }
  static BoundaryCondition periodic() { return {Kind::periodic, {}}; }
  static BoundaryCondition velocity(VectorFunction f) { return {Kind::velocity, std::move(f)}; }
};

// Label -> condition. Labels present in the mesh but absent here are natural.
using BoundarySpec = std::map<int, BoundaryCondition>;

// P2 shape functions on one point of a triangle. Local nodes 0..2 are the
// vertices, 3..5 the midpoints of edges (v0,v1), (v1,v2), (v2,v0).
struct P2Point {
  std::array<double, 6> value;
  std::array<std::array<double, 2>, 6> grad;
};

inline P2Point p2_at(const std::array<double, 3>& lam, const std::array<std::array<double, 2>, 3>& glam) {
  P2Point p{};
  for (int i = 0; i < 3; ++i) {
    p.value[i] = lam[i] * (2.0 * lam[i] - 1.0);
    for (int d = 0; d < 2; ++d) p.grad[i][d] = (4.0 * lam[i] - 1.0) * glam[i][d];
  }
  for (int e = 0; e < 3; ++e) {
    const int a = e, b = (e + 1) % 3;
    p.value[3 + e] = 4.0 * lam[a] * lam[b];
    for (int d = 0; d < 2; ++d) p.grad[3 + e][d] = 4.0 * (lam[a] * glam[b][d] + lam[b] * glam[a][d]);
  }
  return p;
}

inline std::array<std::array<double, 2>, 3> barycentric_gradients(const Point& p0, const Point& p1, const Point& p2) {
  const double two_area = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  return {{{(p1.y - p2.y) / two_area, (p2.x - p1.x) / two_area},
           {(p2.y - p0.y) / two_area, (p0.x - p2.x) / two_area},
           {(p0.y - p1.y) / two_area, (p1.x - p0.x) / two_area}}};
}

inline constexpr std::size_t quadrature_points_per_element = 7;

// Basis data of one triangle at the 7 quadrature points.
struct ElementData {
  double area = 0.0;
  std::array<std::array<double, 2>, 3> grad_lambda{};
  std::array<double, quadrature_points_per_element> jxw{};
  std::array<Point, quadrature_points_per_element> x{};
  std::array<P2Point, quadrature_points_per_element> p2{};
  std::array<std::array<double, 3>, quadrature_points_per_element> p1{};
};

// Taylor-Hood P2/P1 space. Velocity DOF of merged node n, component c, is
// 2n + c; pressure DOFs are the merged vertices.
class TaylorHoodSpace {
 public:
  explicit TaylorHoodSpace(Mesh mesh, BoundarySpec boundary = {})
      : mesh_(std::move(mesh)), boundary_(std::move(boundary)) {
    mesh_.validate();
    for (const auto& [label, bc] : boundary_) {
      if (!mesh_.has_label(label))
        throw ConfigError("boundary condition given for label " + std::to_string(label) + " which has no edges");
      if (bc.kind == BoundaryCondition::Kind::velocity && !bc.value)
        throw ConfigError("velocity condition on label " + std::to_string(label) + " has no value function");
    }
    build_edges();
    merge_periodic();
    build_constraints();
    build_elements();
  }

  const Mesh& mesh() const noexcept { return mesh_; }
  const BoundarySpec& boundary() const noexcept { return boundary_; }

  std::size_t vertex_count() const noexcept { return mesh_.vertices.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::size_t element_count() const noexcept { return mesh_.triangles.size(); }
  // Nodes before periodic merging: vertices then edge midpoints.
  std::size_t raw_node_count() const noexcept { return vertex_count() + edge_count(); }
  std::size_t node_count() const noexcept { return node_points_.size(); }
  std::size_t velocity_dofs() const noexcept { return 2 * node_count(); }
  std::size_t pressure_dofs() const noexcept { return pressure_count_; }

  const std::vector<std::array<std::size_t, 2>>& edges() const noexcept { return edges_; }
  const std::array<std::size_t, 3>& triangle_edges(std::size_t t) const { return triangle_edges_[t]; }

  // Edge joining vertices a and b, or npos.
  std::size_t edge_id(std::size_t a, std::size_t b) const {
    const auto it = edge_index_.find({std::min(a, b), std::max(a, b)});
    return it == edge_index_.end() ? npos : it->second;
  }

  // (triangle, local edge) pairs sharing an edge; the second has
  // triangle npos on the boundary.
  const std::array<std::pair<std::size_t, std::size_t>, 2>& edge_elements(std::size_t e) const {
    return edge_elements_[e];
  }

  // Raw node (vertex or V + edge) -> merged node.
  std::size_t merged_node(std::size_t raw) const { return node_map_[raw]; }
  const Point& node_point(std::size_t merged) const { return node_points_[merged]; }
  bool is_vertex_node(std::size_t merged) const { return node_pressure_[merged] != npos; }

  std::array<std::size_t, 6> element_nodes(std::size_t t) const {
    const auto& tri = mesh_.triangles[t];
    const auto& te = triangle_edges_[t];
    return {node_map_[tri[0]], node_map_[tri[1]], node_map_[tri[2]], node_map_[vertex_count() + te[0]],
            node_map_[vertex_count() + te[1]], node_map_[vertex_count() + te[2]]};
  }

  // Local velocity index 2a + c for local node a, component c.
  std::array<std::size_t, 12> element_velocity_dofs(std::size_t t) const {
    const auto nodes = element_nodes(t);
    std::array<std::size_t, 12> d{};
    for (int a = 0; a < 6; ++a) {
      d[2 * a] = 2 * nodes[a];
      d[2 * a + 1] = 2 * nodes[a] + 1;
    }
    return d;
  }

  std::array<std::size_t, 3> element_pressure_dofs(std::size_t t) const {
    const auto& tri = mesh_.triangles[t];
    return {node_pressure_[node_map_[tri[0]]], node_pressure_[node_map_[tri[1]]], node_pressure_[node_map_[tri[2]]]};
  }

  std::size_t pressure_dof_of_vertex(std::size_t v) const { return node_pressure_[node_map_[v]]; }

  const ElementData& element(std::size_t t) const { return elements_[t]; }

  const std::vector<bool>& constrained() const noexcept { return constrained_; }
  bool is_constrained(std::size_t dof) const { return constrained_[dof]; }
  std::size_t constrained_count() const {
    return static_cast<std::size_t>(std::count(constrained_.begin(), constrained_.end(), true));
  }

  // Prescribed values on constrained DOFs, zero elsewhere.
  Vector essential_values(double t) const {
    Vector g(velocity_dofs(), 0.0);
    for (const auto& [dof, label] : constraint_source_) {
      const BoundaryCondition& bc = boundary_.at(label);
      if (bc.kind != BoundaryCondition::Kind::velocity) continue;
      const Point& p = node_points_[dof / 2];
      g[dof] = bc.value(p.x, p.y, t)[dof % 2];
    }
    return g;
  }

  // Overwrites constrained entries of u with their prescribed values.
  void apply_essential_values(Vector& u, double t) const {
    NSROM_REQUIRE(u.size() == velocity_dofs(), "apply_essential_values: size mismatch");
    const Vector g = essential_values(t);
    for (std::size_t i = 0; i < u.size(); ++i)
      if (constrained_[i]) u[i] = g[i];
  }

  // Pressure is only determined up to a constant when no part of the
  // boundary leaves the normal velocity free; then one DOF is pinned.
  bool pressure_pinned() const noexcept { return pressure_pinned_; }
  std::size_t pinned_pressure_dof() const noexcept { return 0; }

  // Nodal interpolation of a vector field at time t.
  Vector interpolate(const VectorFunction& f, double t = 0.0) const {
    Vector u(velocity_dofs());
    for (std::size_t n = 0; n < node_count(); ++n) {
      const auto v = f(node_points_[n].x, node_points_[n].y, t);
      u[2 * n] = v[0];
      u[2 * n + 1] = v[1];
    }
    return u;
  }

  Vector interpolate_pressure(const std::function<double(double, double)>& f) const {
    Vector p(pressure_dofs());
    for (std::size_t n = 0; n < node_count(); ++n)
      if (node_pressure_[n] != npos) p[node_pressure_[n]] = f(node_points_[n].x, node_points_[n].y);
    return p;
  }

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

 private:
  void build_edges() {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
    triangle_edges_.resize(mesh_.triangles.size());
    for (std::size_t t = 0; t < mesh_.triangles.size(); ++t)
      for (int k = 0; k < 3; ++k) {
        const std::size_t a = mesh_.triangles[t][k], b = mesh_.triangles[t][(k + 1) % 3];
        const auto key = std::make_pair(std::min(a, b), std::max(a, b));
        auto [it, inserted] = index.emplace(key, edges_.size());
        if (inserted) {
          edges_.push_back({key.first, key.second});
          edge_elements_.push_back({{{npos, 0}, {npos, 0}}});
        }
        triangle_edges_[t][k] = it->second;
        auto& adj = edge_elements_[it->second];
        adj[adj[0].first == npos ? 0 : 1] = {t, static_cast<std::size_t>(k)};
      }
    edge_index_ = std::move(index);
  }

  std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) const {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }

  void unite(std::vector<std::size_t>& parent, std::size_t a, std::size_t b) const {
    a = find_root(parent, a);
    b = find_root(parent, b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;  // smallest index stays the representative
  }

  void merge_periodic() {
    const std::size_t nv = vertex_count();
    std::vector<std::size_t> parent(raw_node_count());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    for (Axis axis : {Axis::x, Axis::y}) {
      std::map<std::size_t, std::size_t> image;
      for (const PeriodicPair& p : mesh_.periodic_pairs)
        if (p.axis == axis) {
          image[p.slave] = p.master;
          unite(parent, p.master, p.slave);
        }
      // An edge whose endpoints both have images along this axis maps to
      // the edge joining the images, when that edge exists.
      for (std::size_t e = 0; e < edges_.size(); ++e) {
        const auto ia = image.find(edges_[e][0]);
        const auto ib = image.find(edges_[e][1]);
        if (ia == image.end() || ib == image.end()) continue;
        const auto key = std::make_pair(std::min(ia->second, ib->second), std::max(ia->second, ib->second));
        const auto it = edge_index_.find(key);
        if (it != edge_index_.end()) unite(parent, nv + it->second, nv + e);
      }
    }
    node_map_.assign(raw_node_count(), npos);
    std::vector<std::size_t> root_id(raw_node_count(), npos);
    for (std::size_t i = 0; i < raw_node_count(); ++i) {
      const std::size_t r = find_root(parent, i);
      if (root_id[r] == npos) {
        root_id[r] = node_points_.size();
        node_points_.push_back(raw_point(r));
        node_pressure_.push_back(r < nv ? pressure_count_++ : npos);
      }
      node_map_[i] = root_id[r];
    }
  }

  Point raw_point(std::size_t raw) const {
    if (raw < vertex_count()) return mesh_.vertices[raw];
    const auto& e = edges_[raw - vertex_count()];
    const Point& a = mesh_.vertices[e[0]];
    const Point& b = mesh_.vertices[e[1]];
    return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
  }

  void build_constraints() {
    using Kind = BoundaryCondition::Kind;
    constrained_.assign(velocity_dofs(), false);
    // Full velocity conditions win over no-penetration on shared nodes.
    std::map<std::size_t, int> full, normal;
    bool normal_free_somewhere = false;
    for (const BoundaryEdge& be : mesh_.boundary_edges) {
      const auto it = boundary_.find(be.label);
      const Kind kind = it == boundary_.end() ? Kind::natural : it->second.kind;
      if (kind == Kind::natural) normal_free_somewhere = true;
      if (kind == Kind::natural || kind == Kind::periodic) continue;
      const std::size_t a = be.vertices[0], b = be.vertices[1];
      const auto key = std::make_pair(std::min(a, b), std::max(a, b));
      const std::size_t mid = vertex_count() + edge_index_.at(key);
      const std::array<std::size_t, 3> nodes{node_map_[a], node_map_[b], node_map_[mid]};
      if (kind == Kind::no_penetration) {
        const Point& pa = mesh_.vertices[a];
        const Point& pb = mesh_.vertices[b];
        const double dx = std::abs(pb.x - pa.x), dy = std::abs(pb.y - pa.y);
        const double len = std::hypot(dx, dy);
        int comp;
        if (dy <= 1e-12 * len) comp = 1;
        else if (dx <= 1e-12 * len) comp = 0;
        else
          throw ConfigError("no-penetration condition on label " + std::to_string(be.label) +
                            " requires axis-aligned boundary edges");
        for (std::size_t n : nodes) normal.emplace(2 * n + static_cast<std::size_t>(comp), be.label);
      } else {
        for (std::size_t n : nodes)
          for (std::size_t c = 0; c < 2; ++c) full.emplace(2 * n + c, be.label);
      }
    }
    for (const auto& [dof, label] : normal) constraint_source_[dof] = label;
    for (const auto& [dof, label] : full) constraint_source_[dof] = label;
    for (const auto& [dof, label] : constraint_source_) constrained_[dof] = true;
    pressure_pinned_ = !normal_free_somewhere;
  }

  void build_elements() {
    const QuadratureRule rule = triangle_quadrature(5);
    elements_.resize(mesh_.triangles.size());
    for (std::size_t t = 0; t < mesh_.triangles.size(); ++t) {
      const auto& tri = mesh_.triangles[t];
      const Point& p0 = mesh_.vertices[tri[0]];
      const Point& p1 = mesh_.vertices[tri[1]];
      const Point& p2 = mesh_.vertices[tri[2]];
      ElementData& el = elements_[t];
      el.area = mesh_.signed_area(t);
      el.grad_lambda = barycentric_gradients(p0, p1, p2);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const auto& lam = rule.points[q].barycentric;
        el.jxw[q] = rule.points[q].weight * 2.0 * el.area;
        el.x[q] = {lam[0] * p0.x + lam[1] * p1.x + lam[2] * p2.x, lam[0] * p0.y + lam[1] * p1.y + lam[2] * p2.y};
        el.p2[q] = p2_at(lam, el.grad_lambda);
        el.p1[q] = lam;
      }
    }
  }

  Mesh mesh_;
  BoundarySpec boundary_;
  std::vector<std::array<std::size_t, 2>> edges_;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_index_;
  std::vector<std::array<std::size_t, 3>> triangle_edges_;
  std::vector<std::array<std::pair<std::size_t, std::size_t>, 2>> edge_elements_;
  std::vector<std::size_t> node_map_;
  std::vector<Point> node_points_;
  std::vector<std::size_t> node_pressure_;
  std::size_t pressure_count_ = 0;
  std::vector<bool> constrained_;
  std::map<std::size_t, int> constraint_source_;
  bool pressure_pinned_ = true;
  std::vector<ElementData> elements_;
};

// Values and gradients of a velocity field at one point; g[a][b] = d u_a / d x_b.
struct PointValue {
  std::array<double, 2> u{};
  std::array<std::array<double, 2>, 2> g{};

  double div() const { return g[0][0] + g[1][1]; }
  double curl() const { return g[1][0] - g[0][1]; }
};

inline PointValue evaluate(const P2Point& basis, const std::array<std::size_t, 12>& dofs, std::span<const double> u) {
  PointValue v;
  for (int a = 0; a < 6; ++a)
    for (int c = 0; c < 2; ++c) {
      const double coef = u[dofs[2 * a + c]];
      v.u[c] += basis.value[a] * coef;
      v.g[c][0] += basis.grad[a][0] * coef;
      v.g[c][1] += basis.grad[a][1] * coef;
    }
  return v;
}

}  // namespace nsrom
