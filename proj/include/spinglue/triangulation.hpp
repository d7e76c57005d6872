#pragma once

// Combinatorics of closed oriented semi-simplicial triangulations.
//
// Face f of a tetrahedron is the face opposite vertex f. A gluing record
// (tet, perm) for face f of tetrahedron t glues that face to face perm[f] of
// tetrahedron tet, sending vertex v of t to vertex perm[v] of tet. Edges of a
// tetrahedron are numbered 0:01 1:02 2:03 3:12 4:13 5:23, so edges e and 5-e
// are opposite. Normal quadrilateral slot k faces the opposite pair {k, 5-k}.

#include <algorithm>
#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "spinglue/detail/union_find.hpp"
#include "spinglue/error.hpp"

namespace spinglue {

inline constexpr std::array<std::array<int, 2>, 6> kEdgeVertices{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

constexpr int edge_index(int i, int j) noexcept {
  if (i > j) std::swap(i, j);
  // 01->0 02->1 03->2 12->3 13->4 23->5
  return i == 0 ? j - 1 : i + j;
}

constexpr int quad_slot_of_edge(int edge) noexcept { return edge < 3 ? edge : 5 - edge; }

// Permutation of {0,1,2,3} stored by images.
class Perm4 {
 public:
  constexpr Perm4() noexcept : image_{0, 1, 2, 3} {}
  constexpr Perm4(int a, int b, int c, int d) noexcept : image_{a, b, c, d} {}
  explicit constexpr Perm4(const std::array<int, 4>& image) noexcept : image_(image) {}

  constexpr int operator[](int i) const noexcept { return image_[static_cast<std::size_t>(i)]; }
  constexpr const std::array<int, 4>& images() const noexcept { return image_; }

  static constexpr bool is_permutation(const std::array<int, 4>& image) noexcept {
    std::array<bool, 4> seen{};
    for (int v : image) {
      if (v < 0 || v > 3 || seen[static_cast<std::size_t>(v)]) return false;
      seen[static_cast<std::size_t>(v)] = true;
    }
    return true;
  }

  constexpr Perm4 inverse() const noexcept {
    Perm4 out;
    for (int i = 0; i < 4; ++i) out.image_[static_cast<std::size_t>(image_[i])] = i;
    return out;
  }

  // (this * other)[i] = this[other[i]]
  constexpr Perm4 operator*(const Perm4& other) const noexcept {
    Perm4 out;
    for (int i = 0; i < 4; ++i) out.image_[static_cast<std::size_t>(i)] = image_[other.image_[i]];
    return out;
  }

  constexpr int sign() const noexcept {
    int inversions = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (image_[i] > image_[j]) ++inversions;
    return inversions % 2 == 0 ? 1 : -1;
  }

  constexpr bool operator==(const Perm4&) const noexcept = default;

 private:
  std::array<int, 4> image_;
};

struct FaceGluing {
  std::size_t tet = 0;
  Perm4 perm;
  bool operator==(const FaceGluing&) const = default;
};

// A validated closed, oriented triangulation. Immutable after construction.
class Triangulation {
 public:
  using GluingTable = std::vector<std::array<FaceGluing, 4>>;

  // Throws TriangulationError unless every face is glued to exactly one other
  // face, gluings are involutive and every gluing permutation is odd.
  static Triangulation from_gluings(GluingTable gluings) {
    const std::size_t n = gluings.size();
    if (n == 0) throw TriangulationError("triangulation has no tetrahedra");
    for (std::size_t t = 0; t < n; ++t) {
      for (int f = 0; f < 4; ++f) {
        const FaceGluing& g = gluings[t][static_cast<std::size_t>(f)];
        const std::string where = "tetrahedron " + std::to_string(t) + " face " + std::to_string(f);
        if (g.tet >= n) throw TriangulationError(where + ": glued to missing tetrahedron " + std::to_string(g.tet));
        if (!Perm4::is_permutation(g.perm.images()))
          throw TriangulationError(where + ": perm is not a permutation of 0..3");
        const int target_face = g.perm[f];
        if (g.tet == t && target_face == f) throw TriangulationError(where + ": face glued to itself");
        const FaceGluing& back = gluings[g.tet][static_cast<std::size_t>(target_face)];
        if (back.tet != t || !(back.perm == g.perm.inverse()))
          throw TriangulationError(where + ": gluing not involutive");
        if (g.perm.sign() != -1)
          throw TriangulationError(where + ": orientation-violating (even) permutation");
      }
    }
    Triangulation tri;
    tri.gluings_ = std::move(gluings);
    return tri;
  }

  std::size_t size() const noexcept { return gluings_.size(); }
  const FaceGluing& gluing(std::size_t tet, int face) const { return gluings_[tet][static_cast<std::size_t>(face)]; }
  const GluingTable& gluings() const noexcept { return gluings_; }

  bool operator==(const Triangulation&) const = default;

 private:
  Triangulation() = default;
  GluingTable gluings_;
};

// ---------------------------------------------------------------------------
// JSON I/O

inline Triangulation triangulation_from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) throw ParseError("triangulation must be a JSON object");
    const auto n = doc.at("num_tetrahedra").get<long long>();
    if (n <= 0) throw ParseError("num_tetrahedra must be positive");
    const auto& rows = doc.at("gluings");
    if (!rows.is_array() || rows.size() != static_cast<std::size_t>(n))
      throw ParseError("gluings must list one row per tetrahedron");
    Triangulation::GluingTable table(static_cast<std::size_t>(n));
    for (std::size_t t = 0; t < table.size(); ++t) {
      const auto& row = rows[t];
      if (!row.is_array() || row.size() != 4)
        throw ParseError("tetrahedron " + std::to_string(t) + ": expected 4 face gluings");
      for (std::size_t f = 0; f < 4; ++f) {
        const auto& rec = row[f];
        if (rec.is_null())
          throw TriangulationError("tetrahedron " + std::to_string(t) + " face " + std::to_string(f) + ": face unglued");
        const auto tet = rec.at("tet").get<long long>();
        const auto perm = rec.at("perm").get<std::vector<int>>();
        if (tet < 0) throw ParseError("negative tetrahedron index");
        if (perm.size() != 4) throw ParseError("perm must have 4 entries");
        table[t][f] = FaceGluing{static_cast<std::size_t>(tet), Perm4(std::array<int, 4>{perm[0], perm[1], perm[2], perm[3]})};
      }
    }
    return Triangulation::from_gluings(std::move(table));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("triangulation JSON: ") + e.what());
  }
}

inline Triangulation parse_triangulation(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  return triangulation_from_json(doc);
}

inline nlohmann::ordered_json to_json(const Triangulation& tri) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& faces : tri.gluings()) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (const auto& g : faces) {
      nlohmann::ordered_json rec;
      rec["tet"] = g.tet;
      rec["perm"] = g.perm.images();
      row.push_back(std::move(rec));
    }
    rows.push_back(std::move(row));
  }
  nlohmann::ordered_json doc;
  doc["num_tetrahedra"] = tri.size();
  doc["gluings"] = std::move(rows);
  return doc;
}

// Canonical text: compact, fields in schema order.
inline std::string serialize(const Triangulation& tri) { return to_json(tri).dump(); }

// ---------------------------------------------------------------------------
// Skeleton

struct Corner {
  std::size_t tet = 0;
  int vertex = 0;
  bool operator==(const Corner&) const = default;
  auto operator<=>(const Corner&) const = default;
};

// One step of the walk around an edge. `vertices` = (a, b, c, d) is an even
// permutation; the edge runs from a to b and the walk leaves through the face
// opposite d.
struct Arrow {
  std::size_t tet = 0;
  Perm4 vertices;

  int edge() const noexcept { return edge_index(vertices[0], vertices[1]); }
  // True when the traversal direction agrees with increasing vertex labels.
  bool forward() const noexcept { return vertices[0] < vertices[1]; }
  bool operator==(const Arrow&) const = default;
};

struct EdgeClass {
  std::vector<Arrow> arrows;  // cyclic order around the edge
  std::size_t tail = 0;       // vertex class of the start point
  std::size_t head = 0;
  std::size_t degree() const noexcept { return arrows.size(); }
  bool is_loop() const noexcept { return tail == head; }
};

struct VertexClass {
  std::vector<Corner> corners;  // sorted
};

struct NormalQuad {
  std::size_t tet = 0;
  int slot = 0;  // 0: {01|23}, 1: {02|13}, 2: {03|12}
  std::size_t index() const noexcept { return 3 * tet + static_cast<std::size_t>(slot); }
};

// A pair of glued faces, recorded from the lexicographically smaller side.
struct FaceClass {
  std::size_t tet = 0;
  int face = 0;
  std::size_t partner_tet = 0;
  int partner_face = 0;
};

// Edge, vertex and face classes of a triangulation plus per-tetrahedron
// lookup tables. Classes are sorted by their smallest member.
class Skeleton {
 public:
  explicit Skeleton(Triangulation tri) : tri_(std::move(tri)) {
    build_vertices();
    build_edges();
    build_faces();
  }

  const Triangulation& triangulation() const noexcept { return tri_; }
  const std::vector<EdgeClass>& edges() const noexcept { return edges_; }
  const std::vector<VertexClass>& vertices() const noexcept { return vertices_; }
  const std::vector<FaceClass>& faces() const noexcept { return faces_; }

  std::size_t edge_of(std::size_t tet, int edge) const { return edge_of_[tet][static_cast<std::size_t>(edge)]; }
  // +1 if the tetrahedron edge, read from its lower to its higher vertex,
  // runs from the class tail to the class head; -1 otherwise.
  int edge_orientation(std::size_t tet, int edge) const { return edge_sign_[tet][static_cast<std::size_t>(edge)]; }
  std::size_t vertex_of(std::size_t tet, int vertex) const { return vertex_of_[tet][static_cast<std::size_t>(vertex)]; }

  // Euler characteristic of the link of a vertex class (2 for a sphere).
  int link_euler_characteristic(std::size_t vertex_class) const {
    const int triangles = static_cast<int>(vertices_[vertex_class].corners.size());
    int ends = 0;
    for (const auto& e : edges_) ends += (e.tail == vertex_class ? 1 : 0) + (e.head == vertex_class ? 1 : 0);
    return ends - 3 * triangles / 2 + triangles;
  }

  bool all_links_spherical() const {
    for (std::size_t v = 0; v < vertices_.size(); ++v)
      if (link_euler_characteristic(v) != 2) return false;
    return true;
  }

 private:
  void build_vertices() {
    const auto& tri = tri_;
    const std::size_t n = tri.size();
    detail::UnionFind uf(4 * n);
    for (std::size_t t = 0; t < n; ++t)
      for (int f = 0; f < 4; ++f) {
        const auto& g = tri.gluing(t, f);
        for (int v = 0; v < 4; ++v)
          if (v != f) uf.unite(4 * t + static_cast<std::size_t>(v), 4 * g.tet + static_cast<std::size_t>(g.perm[v]));
      }
    vertex_of_.assign(n, {});
    std::vector<std::size_t> class_of_root(4 * n, npos);
    for (std::size_t c = 0; c < 4 * n; ++c) {
      const std::size_t root = uf.find(c);
      if (class_of_root[root] == npos) {
        class_of_root[root] = vertices_.size();
        vertices_.emplace_back();
      }
      const std::size_t cls = class_of_root[root];
      vertices_[cls].corners.push_back(Corner{c / 4, static_cast<int>(c % 4)});
      vertex_of_[c / 4][c % 4] = cls;
    }
  }

  void build_edges() {
    const auto& tri = tri_;
    const std::size_t n = tri.size();
    detail::UnionFind uf(6 * n);
    for (std::size_t t = 0; t < n; ++t)
      for (int f = 0; f < 4; ++f) {
        const auto& g = tri.gluing(t, f);
        for (int e = 0; e < 6; ++e) {
          const auto [a, b] = kEdgeVertices[static_cast<std::size_t>(e)];
          if (a == f || b == f) continue;
          uf.unite(6 * t + static_cast<std::size_t>(e),
                   6 * g.tet + static_cast<std::size_t>(edge_index(g.perm[a], g.perm[b])));
        }
      }
    edge_of_.assign(n, {});
    edge_sign_.assign(n, {});
    std::vector<bool> visited(6 * n, false);
    for (std::size_t start = 0; start < 6 * n; ++start) {
      if (visited[start]) continue;
      const std::size_t cls = edges_.size();
      const std::size_t t0 = start / 6;
      const auto [a, b] = kEdgeVertices[start % 6];
      int c = -1, d = -1;
      for (int v = 0; v < 4; ++v)
        if (v != a && v != b) (c < 0 ? c : d) = v;
      Perm4 frame(a, b, c, d);
      if (frame.sign() < 0) frame = Perm4(a, b, d, c);

      EdgeClass edge;
      edge.tail = vertex_of_[t0][static_cast<std::size_t>(a)];
      edge.head = vertex_of_[t0][static_cast<std::size_t>(b)];
      Arrow arrow{t0, frame};
      const Arrow first = arrow;
      for (std::size_t steps = 0;; ++steps) {
        if (steps >= 6 * n) throw TriangulationError("edge traversal failed to close");
        const std::size_t slot = 6 * arrow.tet + static_cast<std::size_t>(arrow.edge());
        if (visited[slot]) throw TriangulationError("edge traversal revisits a tetrahedron edge");
        if (uf.find(slot) != uf.find(start)) throw TriangulationError("edge traversal left its identification class");
        visited[slot] = true;
        edge_of_[arrow.tet][slot % 6] = cls;
        edge_sign_[arrow.tet][slot % 6] = arrow.forward() ? 1 : -1;
        edge.arrows.push_back(arrow);

        const Perm4& v = arrow.vertices;
        const auto& g = tri.gluing(arrow.tet, v[3]);
        arrow = Arrow{g.tet, Perm4(g.perm[v[0]], g.perm[v[1]], g.perm[v[3]], g.perm[v[2]])};
        if (arrow.tet == first.tet && arrow.edge() == first.edge()) {
          if (!(arrow == first)) throw TriangulationError("edge identified with itself in reverse");
          break;
        }
      }
      edges_.push_back(std::move(edge));
    }
    for (std::size_t s = 0; s < 6 * n; ++s)
      if (!visited[s]) throw TriangulationError("edge traversal failed to close");
    // Every member of a union-find class must land in one traversal.
    std::vector<std::size_t> class_of_root(6 * n, npos);
    for (std::size_t s = 0; s < 6 * n; ++s) {
      auto& cls = class_of_root[uf.find(s)];
      if (cls == npos) cls = edge_of_[s / 6][s % 6];
      if (cls != edge_of_[s / 6][s % 6]) throw TriangulationError("edge traversal failed to close");
    }
  }

  void build_faces() {
    const auto& tri = tri_;
    for (std::size_t t = 0; t < tri.size(); ++t)
      for (int f = 0; f < 4; ++f) {
        const auto& g = tri.gluing(t, f);
        const int pf = g.perm[f];
        if (std::pair(t, f) < std::pair(g.tet, pf)) faces_.push_back(FaceClass{t, f, g.tet, pf});
      }
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  Triangulation tri_;
  std::vector<EdgeClass> edges_;
  std::vector<VertexClass> vertices_;
  std::vector<FaceClass> faces_;
  std::vector<std::array<std::size_t, 6>> edge_of_;
  std::vector<std::array<int, 6>> edge_sign_;
  std::vector<std::array<std::size_t, 4>> vertex_of_;
};

inline std::vector<EdgeClass> edge_classes(const Triangulation& tri) { return Skeleton(tri).edges(); }
inline std::vector<VertexClass> vertex_classes(const Triangulation& tri) { return Skeleton(tri).vertices(); }

// i(q, e): how many of the two tetrahedron edges facing q lie in edge class e.
inline int quad_incidence(const Skeleton& skel, NormalQuad q, std::size_t edge_class) {
  const int first = q.slot;
  const int second = 5 - q.slot;
  return (skel.edge_of(q.tet, first) == edge_class ? 1 : 0) + (skel.edge_of(q.tet, second) == edge_class ? 1 : 0);
}

}  // namespace spinglue
