#pragma once

// Spinning: place the lifted vertices of the universal cover equivariantly on
// the sphere at infinity and read gluing-equation solutions off as
// cross-ratios.
//
// Lifts are tracked with edge-path words. The standard lift of tetrahedron t
// puts corner 0 at the base lift of its vertex class; corner v then sits at
// s(t, v) = word of the edge 0 -> v. A fundamental domain is a union of lifts
// d_t * (standard lift of t) chosen along a spanning tree of the dual graph.

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numbers>
#include <vector>

#include "spinglue/error.hpp"
#include "spinglue/fundamental_group.hpp"
#include "spinglue/geometry.hpp"
#include "spinglue/gluing.hpp"
#include "spinglue/triangulation.hpp"

namespace spinglue {

// SplitMix64 (Steele, Lea, Flood): state += 0x9E3779B97F4A7C15, output mixed
// with multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// A uniformly random point of the unit sphere, stereographically projected.
inline IdealPoint random_sphere_point(SplitMix64& rng) {
  const double height = 2.0 * rng.uniform() - 1.0;
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  const double radius = std::sqrt(std::max(0.0, 1.0 - height * height));
  const Complex planar{radius * std::cos(phi), radius * std::sin(phi)};
  // (x + iy)/(1 - h) = (1 + h)/(x - iy); use the better conditioned form.
  if (height <= 0.0) return {planar, Complex{1.0 - height, 0.0}};
  return {Complex{1.0 + height, 0.0}, std::conj(planar)};
}

// {"a": [re, im], "b": [re, im]}; finite points may be [re, im], infinity "inf".
inline nlohmann::json ideal_point_to_json(const IdealPoint& p) {
  return nlohmann::json{{"a", complex_to_json(p.a)}, {"b", complex_to_json(p.b)}};
}

inline IdealPoint ideal_point_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() != "inf") throw ParseError("ideal point strings must be \"inf\"");
    return IdealPoint::infinity();
  }
  if (j.is_array()) return IdealPoint::finite(complex_from_json(j));
  if (!j.is_object() || !j.contains("a") || !j.contains("b")) throw ParseError("malformed ideal point");
  IdealPoint p{complex_from_json(j["a"]), complex_from_json(j["b"])};
  if (p.norm() == 0.0) throw ParseError("ideal point (0, 0) is not a point");
  return p;
}

// ---------------------------------------------------------------------------
// Fundamental domain

struct FundamentalDomain {
  std::vector<std::size_t> order;       // breadth-first order, root first
  std::vector<std::ptrdiff_t> parent;   // -1 for the root
  std::vector<int> parent_face;         // face of the parent crossed to reach t
  std::vector<std::array<bool, 4>> tree_face;

  std::size_t size() const noexcept { return order.size(); }
};

// Breadth-first spanning tree of the dual graph from tetrahedron 0, faces
// visited in index order.
inline FundamentalDomain choose_fundamental_domain(const Triangulation& tri) {
  const std::size_t n = tri.size();
  FundamentalDomain dom;
  dom.parent.assign(n, -1);
  dom.parent_face.assign(n, -1);
  dom.tree_face.assign(n, {false, false, false, false});
  std::vector<bool> seen(n, false);
  seen[0] = true;
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const std::size_t t = queue.front();
    queue.pop_front();
    dom.order.push_back(t);
    for (int f = 0; f < 4; ++f) {
      const auto& g = tri.gluing(t, f);
      if (seen[g.tet]) continue;
      seen[g.tet] = true;
      dom.parent[g.tet] = static_cast<std::ptrdiff_t>(t);
      dom.parent_face[g.tet] = f;
      dom.tree_face[t][static_cast<std::size_t>(f)] = true;
      dom.tree_face[g.tet][static_cast<std::size_t>(g.perm[f])] = true;
      queue.push_back(g.tet);
    }
  }
  if (dom.order.size() != n) throw TriangulationError("dual graph is disconnected");
  return dom;
}

// ---------------------------------------------------------------------------
// Corner connection graph

// Nodes are corners (tet, vertex), numbered 4 * tet + vertex. Each face gluing
// joins the three corner pairs it identifies. The label h of a gluing from
// face f of t to tet t' satisfies s(t', p(v)) = h * s(t, v) in the group: it
// is the deck transformation carrying the standard lift of t's face onto the
// standard lift of the matching face of t'.
struct CornerGraph {
  struct Edge {
    Corner from;
    Corner to;
    std::size_t face_class = 0;
    Word label;            // from -> to
    bool dual_tree = false;
  };

  std::vector<Edge> edges;
  std::vector<std::vector<std::size_t>> incident;  // per node, edge indices
  std::vector<std::array<Word, 4>> standard_words;  // s(t, v)

  static std::size_t node(Corner c) noexcept { return 4 * c.tet + static_cast<std::size_t>(c.vertex); }
  std::size_t num_nodes() const noexcept { return incident.size(); }
};

// s(t, v): word of the edge from corner 0 to corner v.
inline Word standard_corner_word(const Presentation& pres, std::size_t tet, int vertex) {
  return vertex == 0 ? Word{} : pres.arrow_word(tet, 0, vertex);
}

// Label for crossing face `face` of `tet` into its neighbour.
inline Word face_crossing_label(const Triangulation& tri, const Presentation& pres, std::size_t tet, int face) {
  const auto& g = tri.gluing(tet, face);
  const int v = face == 0 ? 1 : 0;
  return concat(standard_corner_word(pres, g.tet, g.perm[v]), inverse(standard_corner_word(pres, tet, v)));
}

inline CornerGraph corner_connection_graph(const Triangulation& tri, const FundamentalDomain& dom,
                                           const Presentation& pres) {
  const std::size_t n = tri.size();
  CornerGraph graph;
  graph.incident.assign(4 * n, {});
  graph.standard_words.assign(n, {});
  for (std::size_t t = 0; t < n; ++t)
    for (int v = 1; v < 4; ++v) graph.standard_words[t][static_cast<std::size_t>(v)] = standard_corner_word(pres, t, v);

  std::size_t face_class = 0;
  for (std::size_t t = 0; t < n; ++t)
    for (int f = 0; f < 4; ++f) {
      const auto& g = tri.gluing(t, f);
      if (!(std::pair(t, f) < std::pair(g.tet, g.perm[f]))) continue;
      const Word label = face_crossing_label(tri, pres, t, f);
      for (int v = 0; v < 4; ++v) {
        if (v == f) continue;
        const Corner from{t, v};
        const Corner to{g.tet, g.perm[v]};
        graph.edges.push_back({from, to, face_class, label, dom.tree_face[t][static_cast<std::size_t>(f)]});
        graph.incident[CornerGraph::node(from)].push_back(graph.edges.size() - 1);
        graph.incident[CornerGraph::node(to)].push_back(graph.edges.size() - 1);
      }
      ++face_class;
    }
  return graph;
}

// Per-tetrahedron words d_t locating each domain lift relative to its
// standard lift: crossing a tree face from parent t gives d_child = d_t h^-1.
inline std::vector<Word> domain_lift_words(const Triangulation& tri, const FundamentalDomain& dom,
                                           const Presentation& pres) {
  std::vector<Word> lift(tri.size());
  for (std::size_t t : dom.order) {
    if (dom.parent[t] < 0) continue;
    const auto p = static_cast<std::size_t>(dom.parent[t]);
    lift[t] = concat(lift[p], inverse(face_crossing_label(tri, pres, p, dom.parent_face[t])));
  }
  return lift;
}

// ---------------------------------------------------------------------------
// Vertex placement

inline constexpr double kPlacementDegeneracy = 1e-8;
inline constexpr int kPlacementAttempts = 64;

struct VertexPlacement {
  std::vector<IdealPoint> base_points;                   // one per vertex class
  std::vector<std::array<IdealPoint, 4>> corner_points;  // per tetrahedron corner
  std::vector<std::array<Word, 4>> connecting_words;     // corner = rho(word) * base
  std::vector<std::array<std::size_t, 4>> corner_class;  // vertex class of each corner
  std::uint64_t seed = 0;
  int attempts = 0;  // draws used, including the accepted one
};

inline bool placement_is_nondegenerate(const VertexPlacement& pl, double threshold = kPlacementDegeneracy) {
  for (const auto& pts : pl.corner_points)
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i + 1; j < 4; ++j)
        if (normalized_bracket(pts[i], pts[j]) < threshold) return false;
  return true;
}

// Corner points from explicit base points; no degeneracy check.
inline VertexPlacement place_vertices(const Triangulation& tri, const FundamentalDomain& dom, const Presentation& pres,
                                      const Representation& rep, std::vector<IdealPoint> base_points) {
  const Skeleton skel(tri);
  if (base_points.size() != skel.vertices().size())
    throw PlacementError("need one base point per vertex class");
  const std::vector<Word> lift = domain_lift_words(tri, dom, pres);
  VertexPlacement pl;
  pl.base_points = std::move(base_points);
  pl.corner_points.resize(tri.size());
  pl.connecting_words.resize(tri.size());
  pl.corner_class.resize(tri.size());
  for (std::size_t t = 0; t < tri.size(); ++t)
    for (int v = 0; v < 4; ++v) {
      const auto sv = static_cast<std::size_t>(v);
      Word w = concat(lift[t], standard_corner_word(pres, t, v));
      const std::size_t cls = skel.vertex_of(t, v);
      pl.corner_points[t][sv] = mobius_apply(evaluate_word(rep, w), pl.base_points[cls]);
      pl.connecting_words[t][sv] = std::move(w);
      pl.corner_class[t][sv] = cls;
    }
  return pl;
}

// Draws base points uniformly on the sphere from a SplitMix64 stream seeded
// with `seed`, redrawing while some tetrahedron has coincident corners.
inline VertexPlacement sample_placement(const Triangulation& tri, const FundamentalDomain& dom,
                                        const Presentation& pres, const Representation& rep, std::uint64_t seed) {
  const std::size_t num_vertices = Skeleton(tri).vertices().size();
  SplitMix64 rng(seed);
  for (int attempt = 1; attempt <= kPlacementAttempts; ++attempt) {
    std::vector<IdealPoint> base;
    for (std::size_t v = 0; v < num_vertices; ++v) base.push_back(random_sphere_point(rng));
    VertexPlacement pl = place_vertices(tri, dom, pres, rep, std::move(base));
    pl.seed = seed;
    pl.attempts = attempt;
    if (placement_is_nondegenerate(pl)) return pl;
  }
  throw PlacementError("no nondegenerate placement in " + std::to_string(kPlacementAttempts) +
                       " draws; some loop edge likely has trivial image");
}

// Shapes of the ideal tetrahedra spanned by each tetrahedron's corner points.
inline ShapeAssignment spin(const Triangulation& tri, const FundamentalDomain& dom, const VertexPlacement& placement) {
  if (placement.corner_points.size() != tri.size() || dom.size() != tri.size())
    throw PlacementError("placement does not match the triangulation");
  std::vector<Complex> quads;
  quads.reserve(3 * tri.size());
  for (const auto& pts : placement.corner_points) {
    const ShapeTriple s = tetrahedron_shapes(pts);
    quads.insert(quads.end(), {s.z0, s.z1, s.z2});
  }
  return ShapeAssignment::from_quads(std::move(quads), 1e-6);
}

}  // namespace spinglue
