#pragma once

// Associated representation of a gluing-equation solution: develop the
// tetrahedra as ideal tetrahedra and read off the holonomy of each generator.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spinglue/error.hpp"
#include "spinglue/fundamental_group.hpp"
#include "spinglue/geometry.hpp"
#include "spinglue/gluing.hpp"
#include "spinglue/spinning.hpp"
#include "spinglue/triangulation.hpp"

namespace spinglue {

struct DevelopedComplex {
  std::vector<std::array<IdealPoint, 4>> points;  // per tetrahedron, domain lift
};

namespace detail {

// Fourth corner of tetrahedron `tet` given three placed corners.
inline IdealPoint complete_tetrahedron(const ShapeAssignment& z, std::size_t tet,
                                       const std::array<std::optional<IdealPoint>, 4>& known, int missing) {
  const Complex shape = z.tetrahedron_shape(tet);
  if (is_degenerate_shape(shape, 1e-8)) throw DegenerateError("shape within 1e-8 of 0 or 1");
  const auto model = tetrahedron_points(shape);
  std::array<IdealPoint, 3> src, dst;
  std::size_t k = 0;
  for (int v = 0; v < 4; ++v) {
    if (v == missing) continue;
    src[k] = model[static_cast<std::size_t>(v)];
    dst[k] = *known[static_cast<std::size_t>(v)];
    ++k;
  }
  const Mobius m = mobius_from_correspondence(src, dst);
  return mobius_apply(m, model[static_cast<std::size_t>(missing)]);
}

// Points of the neighbour across `face`, given the points of `tet`.
inline std::array<IdealPoint, 4> develop_across(const Triangulation& tri, const ShapeAssignment& z, std::size_t tet,
                                                const std::array<IdealPoint, 4>& pts, int face) {
  const auto& g = tri.gluing(tet, face);
  std::array<std::optional<IdealPoint>, 4> known;
  for (int v = 0; v < 4; ++v)
    if (v != face) known[static_cast<std::size_t>(g.perm[v])] = pts[static_cast<std::size_t>(v)];
  const int missing = g.perm[face];
  known[static_cast<std::size_t>(missing)] = complete_tetrahedron(z, g.tet, known, missing);
  return {*known[0], *known[1], *known[2], *known[3]};
}

}  // namespace detail

// Root tetrahedron at (0, 1, inf, 1/(1-z)); the rest placed breadth-first
// across the dual spanning tree.
inline DevelopedComplex develop(const Triangulation& tri, const FundamentalDomain& dom, const ShapeAssignment& z) {
  if (z.num_tetrahedra() != tri.size() || dom.size() != tri.size())
    throw Error("solution does not match the triangulation");
  DevelopedComplex dev;
  dev.points.resize(tri.size());
  const Complex root = z.tetrahedron_shape(0);
  if (is_degenerate_shape(root, 1e-8)) throw DegenerateError("shape within 1e-8 of 0 or 1");
  dev.points[dom.order.front()] = tetrahedron_points(root);
  for (std::size_t t : dom.order) {
    if (dom.parent[t] < 0) continue;
    const auto p = static_cast<std::size_t>(dom.parent[t]);
    dev.points[t] = detail::develop_across(tri, z, p, dev.points[p], dom.parent_face[t]);
  }
  return dev;
}

namespace detail {

// Walks the developed universal cover one lifted vertex at a time. Moving
// around the current vertex crosses faces that contain it; moving along an
// edge changes the current corner inside the current tetrahedron.
class CoverWalker {
 public:
  CoverWalker(const Triangulation& tri, const Skeleton& skel, const ShapeAssignment& z, std::size_t tet,
              std::array<IdealPoint, 4> pts, int corner)
      : tri_(tri), skel_(skel), z_(z), tet_(tet), pts_(pts), corner_(corner) {}

  std::size_t tet() const noexcept { return tet_; }
  int corner() const noexcept { return corner_; }
  const std::array<IdealPoint, 4>& points() const noexcept { return pts_; }

  // Follow an oriented edge class out of the current vertex.
  void follow(OrientedEdge step) {
    int target = -1;
    rotate_to([&](std::size_t t, int c) {
      for (int j = 0; j < 4; ++j) {
        if (j == c) continue;
        const int k = edge_index(c, j);
        if (skel_.edge_of(t, k) != step.edge) continue;
        const int dir = skel_.edge_orientation(t, k) * (c < j ? 1 : -1);
        if (dir == step.direction) {
          target = j;
          return true;
        }
      }
      return false;
    });
    corner_ = target;
  }

  // Move around the current vertex to the corner (tet, corner).
  void rotate_to_corner(std::size_t tet, int corner) {
    rotate_to([&](std::size_t t, int c) { return t == tet && c == corner; });
  }

 private:
  template <typename Pred>
  void rotate_to(Pred&& accept) {
    const std::size_t start = 4 * tet_ + static_cast<std::size_t>(corner_);
    std::vector<std::ptrdiff_t> parent(4 * tri_.size(), -2);
    std::vector<int> via(4 * tri_.size(), -1);
    parent[start] = -1;
    std::deque<std::size_t> queue{start};
    std::optional<std::size_t> found;
    while (!queue.empty()) {
      const std::size_t node = queue.front();
      queue.pop_front();
      const std::size_t t = node / 4;
      const int c = static_cast<int>(node % 4);
      if (accept(t, c)) {
        found = node;
        break;
      }
      for (int f = 0; f < 4; ++f) {
        if (f == c) continue;
        const auto& g = tri_.gluing(t, f);
        const std::size_t next = 4 * g.tet + static_cast<std::size_t>(g.perm[c]);
        if (parent[next] != -2) continue;
        parent[next] = static_cast<std::ptrdiff_t>(node);
        via[next] = f;
        queue.push_back(next);
      }
    }
    if (!found) throw HolonomyError("walk around a vertex found no matching corner");
    std::vector<int> faces;
    for (std::size_t node = *found; parent[node] >= 0; node = static_cast<std::size_t>(parent[node]))
      faces.push_back(via[node]);
    std::reverse(faces.begin(), faces.end());
    for (int f : faces) {
      const auto& g = tri_.gluing(tet_, f);
      pts_ = develop_across(tri_, z_, tet_, pts_, f);
      corner_ = g.perm[corner_];
      tet_ = g.tet;
    }
  }

  const Triangulation& tri_;
  const Skeleton& skel_;
  const ShapeAssignment& z_;
  std::size_t tet_;
  std::array<IdealPoint, 4> pts_;
  int corner_;
};

}  // namespace detail

inline constexpr double kHolonomyRelatorTolerance = 1e-6;

// Holonomy of the developing map on each edge-path generator, found by
// following the based loop T(a) e T(b)^-1 through the developed cover and
// comparing the final copy of tetrahedron 0 with the first. Needs every
// vertex link to be a sphere so that walks around a vertex are
// path-independent. Throws HolonomyError if the result violates a relator.
inline Representation holonomy_representation(const Triangulation& tri, const FundamentalDomain& dom,
                                              const Presentation& pres, const ShapeAssignment& z) {
  const Skeleton skel(tri);
  if (!skel.all_links_spherical())
    throw HolonomyError("holonomy needs spherical vertex links; this triangulation has ideal vertices");
  const DevelopedComplex dev = develop(tri, dom, z);
  const std::size_t root = dom.order.front();
  const auto& start = dev.points[root];

  Representation rep;
  for (std::size_t g = 0; g < pres.num_generators(); ++g) {
    const std::size_t e = pres.generator_edge[g];
    std::vector<OrientedEdge> path = pres.tree_path[pres.edge_tail[e]];
    path.push_back({e, 1});
    const auto& back = pres.tree_path[pres.edge_head[e]];
    for (auto it = back.rbegin(); it != back.rend(); ++it) path.push_back({it->edge, -it->direction});

    // Corner 0 of the root lies in vertex class 0, the base vertex.
    detail::CoverWalker walker(tri, skel, z, root, start, 0);
    for (const OrientedEdge& step : path) walker.follow(step);
    walker.rotate_to_corner(root, 0);
    const auto& end = walker.points();
    rep.images.push_back(mobius_from_correspondence({start[1], start[2], start[3]}, {end[1], end[2], end[3]}));
  }

  const RepresentationReport report = check_representation(pres, rep, kHolonomyRelatorTolerance);
  if (!report.relators_ok)
    throw HolonomyError("holonomy fails relator check: " + report.failures.front());
  return rep;
}

// ---------------------------------------------------------------------------
// Conjugacy via traces

enum class ConjugacyVerdict { conjugate, distinct, reducible };

inline const char* to_string(ConjugacyVerdict v) {
  switch (v) {
    case ConjugacyVerdict::conjugate: return "conjugate";
    case ConjugacyVerdict::distinct: return "distinct";
    case ConjugacyVerdict::reducible: return "reducible-flag";
  }
  return "distinct";
}

struct ConjugacyReport {
  ConjugacyVerdict verdict = ConjugacyVerdict::distinct;
  double max_trace_deviation = 0.0;
  std::vector<int> sign_lift;  // per generator, applied to the second representation
  std::size_t words_checked = 0;

  bool passed() const noexcept { return verdict != ConjugacyVerdict::distinct; }
};

// Every generator, every product g_i g_j^(+-1) with i < j, and 16 random
// words of length 1..8 drawn from SplitMix64(seed).
inline std::vector<Word> trace_word_battery(std::size_t num_generators, std::uint64_t seed = 0x5EEDULL) {
  std::vector<Word> words;
  for (std::size_t g = 0; g < num_generators; ++g) words.push_back({{g, 1}});
  for (std::size_t i = 0; i < num_generators; ++i)
    for (std::size_t j = i + 1; j < num_generators; ++j) {
      words.push_back({{i, 1}, {j, 1}});
      words.push_back({{i, 1}, {j, -1}});
    }
  if (num_generators == 0) return words;
  SplitMix64 rng(seed);
  for (int k = 0; k < 16; ++k) {
    const auto length = 1 + static_cast<std::size_t>(rng.next() % 8);
    Word w;
    for (std::size_t i = 0; i < length; ++i)
      w.push_back({static_cast<std::size_t>(rng.next() % num_generators), rng.next() % 2 == 0 ? 1 : -1});
    words.push_back(free_reduce(w));
  }
  return words;
}

// Compares traces of the word battery. SL(2,C) lifts are fixed only up to a
// sign per generator; the sign vector minimizing the worst deviation is used.
inline ConjugacyReport conjugacy_check(const Representation& rep1, const Representation& rep2,
                                       const Presentation& pres, double tol, std::uint64_t seed = 0x5EEDULL) {
  const std::size_t ng = pres.num_generators();
  if (rep1.images.size() != ng || rep2.images.size() != ng)
    throw RepresentationError("representations do not match the presentation");
  const std::vector<Word> battery = trace_word_battery(ng, seed);
  std::vector<Complex> tr1, tr2;
  std::vector<std::vector<int>> parity(battery.size(), std::vector<int>(ng, 0));
  for (std::size_t w = 0; w < battery.size(); ++w) {
    tr1.push_back(evaluate_word(rep1, battery[w]).trace());
    tr2.push_back(evaluate_word(rep2, battery[w]).trace());
    for (const Letter& l : battery[w]) parity[w][l.generator] ^= 1;
  }

  // Signs forced by generator traces; ambiguous ones (trace near 0) are searched.
  std::vector<int> sign(ng, 1);
  std::vector<std::size_t> free_signs;
  for (std::size_t g = 0; g < ng; ++g) {
    if (std::abs(tr1[g]) < 1e-3 && std::abs(tr2[g]) < 1e-3)
      free_signs.push_back(g);
    else
      sign[g] = std::abs(tr1[g] - tr2[g]) <= std::abs(tr1[g] + tr2[g]) ? 1 : -1;
  }
  const std::size_t searched = std::min<std::size_t>(free_signs.size(), 12);

  auto worst_deviation = [&](const std::vector<int>& s) {
    double worst = 0.0;
    for (std::size_t w = 0; w < battery.size(); ++w) {
      int eps = 1;
      for (std::size_t g = 0; g < ng; ++g)
        if (parity[w][g]) eps *= s[g];
      const double dev = std::abs(tr1[w] - static_cast<double>(eps) * tr2[w]) / std::max(1.0, std::abs(tr1[w]));
      worst = std::max(worst, dev);
    }
    return worst;
  };

  ConjugacyReport report;
  report.max_trace_deviation = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << searched); ++mask) {
    std::vector<int> s = sign;
    for (std::size_t i = 0; i < searched; ++i) s[free_signs[i]] = (mask >> i) & 1U ? -1 : 1;
    const double dev = worst_deviation(s);
    if (dev < report.max_trace_deviation) {
      report.max_trace_deviation = dev;
      report.sign_lift = s;
    }
  }
  report.words_checked = battery.size();

  bool all_parabolic_or_trivial = true;
  for (Complex t : tr1)
    if (std::abs(std::abs(t) - 2.0) > tol || std::abs(t.imag()) > tol) all_parabolic_or_trivial = false;

  if (!(report.max_trace_deviation < tol))
    report.verdict = ConjugacyVerdict::distinct;
  else if (all_parabolic_or_trivial)
    report.verdict = ConjugacyVerdict::reducible;
  else
    report.verdict = ConjugacyVerdict::conjugate;
  return report;
}

}  // namespace spinglue
