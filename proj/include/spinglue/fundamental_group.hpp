#pragma once

// Edge-path presentation of the fundamental group.
//
// The 1-skeleton has one node per vertex class and one edge per edge class.
// A breadth-first spanning tree is collapsed; every other edge class is a
// generator, and every face class contributes its boundary word as a relator.
// Generator g for the edge e from vertex a to vertex b stands for the based
// loop T(a) e T(b)^-1, where T(v) is the tree path from vertex class 0.

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "spinglue/error.hpp"
#include "spinglue/geometry.hpp"
#include "spinglue/gluing.hpp"
#include "spinglue/triangulation.hpp"

namespace spinglue {

struct Letter {
  std::size_t generator = 0;
  int power = 1;  // +1 or -1
  bool operator==(const Letter&) const = default;
};

using Word = std::vector<Letter>;

inline Word free_reduce(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (const Letter& l : w) {
    if (!out.empty() && out.back().generator == l.generator && out.back().power == -l.power)
      out.pop_back();
    else
      out.push_back(l);
  }
  return out;
}

inline Word inverse(const Word& w) {
  Word out(w.rbegin(), w.rend());
  for (Letter& l : out) l.power = -l.power;
  return out;
}

inline Word concat(const Word& a, const Word& b) {
  Word out = a;
  out.insert(out.end(), b.begin(), b.end());
  return free_reduce(out);
}

// An edge class traversed forwards (+1, tail to head) or backwards (-1).
struct OrientedEdge {
  std::size_t edge = 0;
  int direction = 1;
};

struct Presentation {
  std::vector<std::string> generators;        // "g0", "g1", ...
  std::vector<std::size_t> generator_edge;    // edge class labelled by each generator
  std::vector<Word> relators;                 // one per face class, freely reduced
  std::vector<Word> edge_word;                // per edge class; empty for tree edges
  std::vector<bool> tree_edge;
  std::vector<std::size_t> edge_tail, edge_head;
  std::vector<std::vector<OrientedEdge>> tree_path;  // per vertex class, from vertex class 0
  // Word of each tetrahedron edge read from its lower to its higher vertex.
  std::vector<std::array<Word, 6>> tet_edge_word;

  std::size_t num_generators() const noexcept { return generators.size(); }

  // Word of the tetrahedron edge from corner i to corner j.
  Word arrow_word(std::size_t tet, int i, int j) const {
    const Word& w = tet_edge_word[tet][static_cast<std::size_t>(edge_index(i, j))];
    return i < j ? w : inverse(w);
  }

  std::optional<std::size_t> generator_index(const std::string& label) const {
    auto it = std::find(generators.begin(), generators.end(), label);
    if (it == generators.end()) return std::nullopt;
    return static_cast<std::size_t>(it - generators.begin());
  }
};

inline Presentation presentation(const Skeleton& skel) {
  const auto& edges = skel.edges();
  const std::size_t nv = skel.vertices().size();
  Presentation pres;
  pres.tree_edge.assign(edges.size(), false);
  for (const auto& e : edges) {
    pres.edge_tail.push_back(e.tail);
    pres.edge_head.push_back(e.head);
  }

  // Breadth-first spanning tree from vertex class 0, edges in canonical order.
  pres.tree_path.assign(nv, {});
  std::vector<bool> reached(nv, false);
  reached[0] = true;
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto& ec = edges[e];
      if (ec.is_loop()) continue;
      std::size_t other;
      int direction;
      if (ec.tail == u) {
        other = ec.head;
        direction = 1;
      } else if (ec.head == u) {
        other = ec.tail;
        direction = -1;
      } else {
        continue;
      }
      if (reached[other]) continue;
      reached[other] = true;
      pres.tree_edge[e] = true;
      pres.tree_path[other] = pres.tree_path[u];
      pres.tree_path[other].push_back(OrientedEdge{e, direction});
      queue.push_back(other);
    }
  }
  if (std::find(reached.begin(), reached.end(), false) != reached.end())
    throw TriangulationError("1-skeleton is disconnected");

  pres.edge_word.assign(edges.size(), {});
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (pres.tree_edge[e]) continue;
    const std::size_t g = pres.generators.size();
    pres.generators.push_back("g" + std::to_string(g));
    pres.generator_edge.push_back(e);
    pres.edge_word[e] = Word{Letter{g, 1}};
  }

  const std::size_t n = skel.triangulation().size();
  pres.tet_edge_word.assign(n, {});
  for (std::size_t t = 0; t < n; ++t)
    for (int k = 0; k < 6; ++k) {
      const Word& w = pres.edge_word[skel.edge_of(t, k)];
      pres.tet_edge_word[t][static_cast<std::size_t>(k)] = skel.edge_orientation(t, k) > 0 ? w : inverse(w);
    }

  for (const FaceClass& f : skel.faces()) {
    std::array<int, 3> v{};
    std::size_t k = 0;
    for (int x = 0; x < 4; ++x)
      if (x != f.face) v[k++] = x;
    Word boundary = pres.arrow_word(f.tet, v[0], v[1]);
    boundary = concat(boundary, pres.arrow_word(f.tet, v[1], v[2]));
    boundary = concat(boundary, pres.arrow_word(f.tet, v[2], v[0]));
    pres.relators.push_back(std::move(boundary));
  }
  return pres;
}

inline Presentation presentation(const Triangulation& tri) { return presentation(Skeleton(tri)); }

// The based word of a loop edge; none when the endpoints are distinct vertices.
inline std::optional<Word> edge_loop_word(const Presentation& pres, std::size_t edge_class) {
  if (pres.edge_tail[edge_class] != pres.edge_head[edge_class]) return std::nullopt;
  return pres.edge_word[edge_class];
}

inline std::string word_to_string(const Presentation& pres, const Word& w) {
  if (w.empty()) return "1";
  std::string out;
  for (const Letter& l : w) {
    if (!out.empty()) out += ' ';
    out += pres.generators[l.generator];
    if (l.power < 0) out += "^-1";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Representations

// Images of the generators, in presentation order.
struct Representation {
  std::vector<Mobius> images;
};

inline Mobius evaluate_word(const Representation& rep, const Word& w) {
  Mobius out = Mobius::identity();
  for (const Letter& l : w) {
    if (l.generator >= rep.images.size())
      throw RepresentationError("word uses generator " + std::to_string(l.generator) + " with no image");
    const Mobius& g = rep.images[l.generator];
    out = out * (l.power > 0 ? g : g.inverse());
  }
  return out.normalized();
}

inline Representation trivial_representation(const Presentation& pres) {
  return Representation{std::vector<Mobius>(pres.num_generators(), Mobius::identity())};
}

inline Representation conjugate(const Representation& rep, const Mobius& m) {
  const Mobius mn = m.normalized();
  Representation out;
  for (const Mobius& g : rep.images) out.images.push_back((mn * g * mn.inverse()).normalized());
  return out;
}

inline constexpr double kRelatorTolerance = 1e-8;
inline constexpr double kLoopNontrivialThreshold = 1e-6;

struct RepresentationReport {
  struct LoopEdge {
    std::size_t edge = 0;
    double distance = 0.0;  // distance of rho([e]) from +-identity
  };
  std::vector<double> relator_deviation;
  std::vector<LoopEdge> loop_edges;
  bool relators_ok = true;
  bool edges_nontrivial = true;
  std::vector<std::string> failures;

  bool passed() const noexcept { return relators_ok && edges_nontrivial; }
};

// Checks that every relator maps to +-identity within `tol` and that every
// loop edge has an image at distance >= 1e-6 from +-identity.
inline RepresentationReport check_representation(const Presentation& pres, const Representation& rep,
                                                 double tol = kRelatorTolerance) {
  if (rep.images.size() != pres.num_generators())
    throw RepresentationError("representation has " + std::to_string(rep.images.size()) + " images for " +
                              std::to_string(pres.num_generators()) + " generators");
  RepresentationReport report;
  for (std::size_t r = 0; r < pres.relators.size(); ++r) {
    const double dev = distance_to_identity(evaluate_word(rep, pres.relators[r]));
    report.relator_deviation.push_back(dev);
    if (!(dev < tol)) {
      report.relators_ok = false;
      report.failures.push_back("relator " + std::to_string(r) + " (" + word_to_string(pres, pres.relators[r]) +
                                ") deviates from identity by " + detail::short_number(dev));
    }
  }
  for (std::size_t e = 0; e < pres.edge_word.size(); ++e) {
    const auto word = edge_loop_word(pres, e);
    if (!word) continue;
    const double dist = distance_to_identity(evaluate_word(rep, *word));
    report.loop_edges.push_back({e, dist});
    if (!(dist >= kLoopNontrivialThreshold)) {
      report.edges_nontrivial = false;
      report.failures.push_back("loop edge " + std::to_string(e) + " has trivial image (distance " +
                                detail::short_number(dist) + ")");
    }
  }
  return report;
}

inline RepresentationReport check_representation(const Triangulation& tri, const Presentation& pres,
                                                 const Representation& rep, double tol = kRelatorTolerance) {
  if (pres.tet_edge_word.size() != tri.size()) throw RepresentationError("presentation belongs to another triangulation");
  return check_representation(pres, rep, tol);
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json mobius_to_json(const Mobius& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Complex c : m.entries()) out.push_back(complex_to_json(c));
  return out;
}

inline Mobius mobius_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw ParseError("Mobius matrices are 4 row-major [re, im] pairs");
  return Mobius{complex_from_json(j[0]), complex_from_json(j[1]), complex_from_json(j[2]), complex_from_json(j[3])}
      .normalized();
}

// {"generators": {"g0": [[re, im] x 4], ...}}; every generator must appear.
inline Representation representation_from_json(const nlohmann::json& doc, const Presentation& pres) {
  try {
    const auto& gens = doc.at("generators");
    if (!gens.is_object()) throw ParseError("generators must be an object");
    Representation rep;
    rep.images.assign(pres.num_generators(), Mobius::identity());
    std::vector<bool> seen(pres.num_generators(), false);
    for (const auto& [label, value] : gens.items()) {
      const auto idx = pres.generator_index(label);
      if (!idx) throw RepresentationError("unknown generator label " + label);
      rep.images[*idx] = mobius_from_json(value);
      seen[*idx] = true;
    }
    for (std::size_t g = 0; g < seen.size(); ++g)
      if (!seen[g]) throw RepresentationError("no image for generator " + pres.generators[g]);
    return rep;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("representation JSON: ") + e.what());
  }
}

inline nlohmann::ordered_json to_json(const Representation& rep, const Presentation& pres) {
  nlohmann::ordered_json gens = nlohmann::ordered_json::object();
  for (std::size_t g = 0; g < rep.images.size(); ++g) gens[pres.generators[g]] = mobius_to_json(rep.images[g]);
  nlohmann::ordered_json doc;
  doc["generators"] = std::move(gens);
  return doc;
}

}  // namespace spinglue
