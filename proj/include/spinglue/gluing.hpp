#pragma once

// Hyperbolic gluing equations: one equation per edge class,
//   prod_q z_q^{i(q,e)} = 1,
// together with the per-tetrahedron relation z_{slot+1} = 1/(1 - z_slot).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "json.hpp"
#include "spinglue/error.hpp"
#include "spinglue/geometry.hpp"
#include "spinglue/triangulation.hpp"

namespace spinglue {

// Integer exponent matrix: rows are edge classes, columns are normal quads in
// the order (tet 0 slot 0, tet 0 slot 1, tet 0 slot 2, tet 1 slot 0, ...).
class GluingSystem {
 public:
  GluingSystem(std::size_t num_tetrahedra, std::vector<std::vector<int>> rows)
      : num_tetrahedra_(num_tetrahedra), rows_(std::move(rows)) {
    for (const auto& row : rows_)
      if (row.size() != 3 * num_tetrahedra_) throw Error("gluing system row has the wrong number of quads");
  }

  std::size_t num_tetrahedra() const noexcept { return num_tetrahedra_; }
  std::size_t num_quads() const noexcept { return 3 * num_tetrahedra_; }
  std::size_t num_edges() const noexcept { return rows_.size(); }
  int exponent(std::size_t edge, std::size_t quad) const { return rows_[edge][quad]; }
  const std::vector<int>& row(std::size_t edge) const { return rows_[edge]; }

 private:
  std::size_t num_tetrahedra_;
  std::vector<std::vector<int>> rows_;
};

inline GluingSystem build_system(const Skeleton& skel) {
  const std::size_t n = skel.triangulation().size();
  std::vector<std::vector<int>> rows(skel.edges().size(), std::vector<int>(3 * n, 0));
  for (std::size_t t = 0; t < n; ++t)
    for (int slot = 0; slot < 3; ++slot) {
      const NormalQuad q{t, slot};
      ++rows[skel.edge_of(t, slot)][q.index()];
      ++rows[skel.edge_of(t, 5 - slot)][q.index()];
    }
  return GluingSystem(n, std::move(rows));
}

inline GluingSystem build_system(const Triangulation& tri) { return build_system(Skeleton(tri)); }

// One complex shape per normal quad.
class ShapeAssignment {
 public:
  ShapeAssignment() = default;

  // Slot-0 shapes, one per tetrahedron; slots 1 and 2 are derived.
  static ShapeAssignment from_tetrahedron_shapes(const std::vector<Complex>& shapes) {
    ShapeAssignment out;
    out.quads_.reserve(3 * shapes.size());
    for (Complex z : shapes) {
      const ShapeTriple s = shape_triple(z);
      out.quads_.insert(out.quads_.end(), {s.z0, s.z1, s.z2});
    }
    return out;
  }

  // All three slots per tetrahedron; the cyclic relation is checked.
  static ShapeAssignment from_quads(std::vector<Complex> quads, double tol = 1e-9) {
    if (quads.size() % 3 != 0) throw Error("quad shape count must be a multiple of 3");
    ShapeAssignment out;
    out.quads_ = std::move(quads);
    for (std::size_t t = 0; t < out.num_tetrahedra(); ++t) {
      for (int slot = 0; slot < 3; ++slot)
        if (is_degenerate_shape(out.shape(t, slot))) throw DegenerateError("degenerate shape parameter");
      if (out.cyclic_residual(t) > tol)
        throw Error("tetrahedron " + std::to_string(t) + ": shapes violate z' = 1/(1-z)");
    }
    return out;
  }

  std::size_t num_tetrahedra() const noexcept { return quads_.size() / 3; }
  Complex shape(std::size_t tet, int slot) const { return quads_[3 * tet + static_cast<std::size_t>(slot)]; }
  Complex tetrahedron_shape(std::size_t tet) const { return shape(tet, 0); }
  const std::vector<Complex>& quads() const noexcept { return quads_; }

  ShapeTriple triple(std::size_t tet) const { return {shape(tet, 0), shape(tet, 1), shape(tet, 2)}; }

  double cyclic_residual(std::size_t tet) const {
    double worst = 0.0;
    for (int slot = 0; slot < 3; ++slot) {
      const Complex z = shape(tet, slot);
      worst = std::max(worst, std::abs(shape(tet, (slot + 1) % 3) - 1.0 / (1.0 - z)));
    }
    return worst;
  }

 private:
  std::vector<Complex> quads_;
};

struct ResidualReport {
  std::vector<Complex> edges;   // prod z^E - 1, per edge class
  std::vector<double> cyclic;   // per tetrahedron

  double max_edge() const {
    double m = 0.0;
    for (Complex r : edges) m = std::max(m, std::abs(r));
    return m;
  }
  double max_cyclic() const { return cyclic.empty() ? 0.0 : *std::max_element(cyclic.begin(), cyclic.end()); }
};

namespace detail {

inline void check_dimensions(const GluingSystem& sys, const ShapeAssignment& z) {
  if (z.num_tetrahedra() != sys.num_tetrahedra())
    throw Error("shape assignment has " + std::to_string(z.num_tetrahedra()) + " tetrahedra, system has " +
                std::to_string(sys.num_tetrahedra()));
}

// Sum of E[e][q] log z_q; exp of it is the edge product.
inline Complex log_edge_product(const GluingSystem& sys, std::size_t edge, const std::vector<Complex>& quads) {
  Complex sum{0.0, 0.0};
  const auto& row = sys.row(edge);
  for (std::size_t q = 0; q < row.size(); ++q)
    if (row[q] != 0) sum += static_cast<double>(row[q]) * std::log(quads[q]);
  return sum;
}

}  // namespace detail

inline ResidualReport residuals(const GluingSystem& sys, const ShapeAssignment& z) {
  detail::check_dimensions(sys, z);
  for (Complex q : z.quads())
    if (is_degenerate_shape(q)) throw DegenerateError("degenerate shape parameter");
  ResidualReport report;
  report.edges.reserve(sys.num_edges());
  for (std::size_t e = 0; e < sys.num_edges(); ++e)
    report.edges.push_back(std::exp(detail::log_edge_product(sys, e, z.quads())) - 1.0);
  for (std::size_t t = 0; t < z.num_tetrahedra(); ++t) report.cyclic.push_back(z.cyclic_residual(t));
  return report;
}

// Ordered product, around the edge, of the shapes of the quads facing it.
inline Complex around_edge_product(const Skeleton& skel, const ShapeAssignment& z, std::size_t edge_class) {
  Complex product{1.0, 0.0};
  for (const Arrow& a : skel.edges()[edge_class].arrows) product *= z.shape(a.tet, quad_slot_of_edge(a.edge()));
  return product;
}

// ---------------------------------------------------------------------------
// Newton refinement

struct NewtonOptions {
  double tol = 1e-9;
  int max_iters = 50;
  int max_halvings = 30;
  double guard = 1e-8;  // minimum distance of any shape from 0 and 1
};

struct NewtonResult {
  ShapeAssignment shapes;  // the converged point, or the best iterate
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;            // max |prod - 1| at `shapes`
  std::vector<double> history;      // max residual before each iteration and at the end
};

namespace detail {

inline std::vector<Complex> quads_from_logs(const Eigen::VectorXcd& w) {
  std::vector<Complex> quads;
  quads.reserve(3 * static_cast<std::size_t>(w.size()));
  for (Eigen::Index t = 0; t < w.size(); ++t) {
    const Complex z = std::exp(w[t]);
    quads.insert(quads.end(), {z, 1.0 / (1.0 - z), 1.0 - 1.0 / z});
  }
  return quads;
}

inline Eigen::VectorXcd edge_residual_vector(const GluingSystem& sys, const std::vector<Complex>& quads) {
  Eigen::VectorXcd r(static_cast<Eigen::Index>(sys.num_edges()));
  for (std::size_t e = 0; e < sys.num_edges(); ++e)
    r[static_cast<Eigen::Index>(e)] = std::exp(log_edge_product(sys, e, quads)) - 1.0;
  return r;
}

inline bool within_guard(const std::vector<Complex>& quads, double guard) {
  for (std::size_t i = 0; i < quads.size(); i += 3)
    if (is_degenerate_shape(quads[i], guard)) return false;
  return true;
}

}  // namespace detail

// Damped Gauss-Newton on f_e(w) = exp(sum_q E[e][q] log z_q) - 1 with one
// unknown w_t = log z_t per tetrahedron (slots 1 and 2 follow from slot 0).
// Steps are minimum-norm least-squares solutions, so redundant or
// underdetermined edge systems are handled; a step is halved until the
// residual norm decreases.
inline NewtonResult newton_refine(const GluingSystem& sys, const ShapeAssignment& z0, const NewtonOptions& opts = {}) {
  detail::check_dimensions(sys, z0);
  const auto n = static_cast<Eigen::Index>(sys.num_tetrahedra());
  const auto m = static_cast<Eigen::Index>(sys.num_edges());

  Eigen::VectorXcd w(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Complex z = z0.tetrahedron_shape(static_cast<std::size_t>(t));
    if (is_degenerate_shape(z, opts.guard)) throw DegenerateError("initial shape too close to 0 or 1");
    w[t] = std::log(z);
  }

  NewtonResult result;
  std::vector<Complex> quads = detail::quads_from_logs(w);
  Eigen::VectorXcd r = detail::edge_residual_vector(sys, quads);

  for (int iter = 0;; ++iter) {
    const double current = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
    result.history.push_back(current);
    result.iterations = iter;
    if (current <= opts.tol) {
      result.converged = true;
      break;
    }
    if (iter >= opts.max_iters) break;

    Eigen::MatrixXcd jac = Eigen::MatrixXcd::Zero(m, n);
    for (Eigen::Index e = 0; e < m; ++e) {
      const Complex product = r[e] + 1.0;
      const auto& row = sys.row(static_cast<std::size_t>(e));
      for (Eigen::Index t = 0; t < n; ++t) {
        const auto base = static_cast<std::size_t>(3 * t);
        const Complex z = quads[base];
        // d log z_slot / d w for slots 0, 1, 2
        const Complex d = static_cast<double>(row[base]) + static_cast<double>(row[base + 1]) * z / (1.0 - z) +
                          static_cast<double>(row[base + 2]) / (z - 1.0);
        jac(e, t) = product * d;
      }
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(jac);
    cod.setThreshold(1e-12);
    const Eigen::Index rank = cod.rank();
    if (rank == 0)
      throw SingularJacobianError("singular Jacobian at iteration " + std::to_string(iter) + ": rank 0 of " +
                                  std::to_string(std::min(m, n)) + ", residual " + detail::short_number(current));
    const Eigen::VectorXcd step = cod.solve(-r);

    const double norm = r.norm();
    double lambda = 1.0;
    bool accepted = false;
    bool guard_hit = false;
    for (int h = 0; h <= opts.max_halvings; ++h, lambda *= 0.5) {
      const Eigen::VectorXcd trial = w + lambda * step;
      std::vector<Complex> trial_quads = detail::quads_from_logs(trial);
      if (!detail::within_guard(trial_quads, opts.guard)) {
        guard_hit = true;
        continue;
      }
      Eigen::VectorXcd trial_r = detail::edge_residual_vector(sys, trial_quads);
      if (trial_r.norm() < norm) {
        w = trial;
        quads = std::move(trial_quads);
        r = std::move(trial_r);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (guard_hit) throw DegenerateError("Newton iterate approaches a degenerate shape (0 or 1)");
      if (rank < std::min(m, n))
        throw SingularJacobianError("no descent along the Newton step: Jacobian rank " + std::to_string(rank) +
                                    " of " + std::to_string(std::min(m, n)) + ", residual " + detail::short_number(current));
      break;
    }
  }
  std::vector<Complex> slot0;
  for (std::size_t i = 0; i < quads.size(); i += 3) slot0.push_back(quads[i]);
  result.shapes = ShapeAssignment::from_tetrahedron_shapes(slot0);
  result.residual = result.history.back();
  return result;
}

// ---------------------------------------------------------------------------
// Volume

// Sum over tetrahedra of the Lobachevsky-Milnor volume of the slot-0 shape.
inline double solution_volume(const Triangulation& tri, const ShapeAssignment& z) {
  if (z.num_tetrahedra() != tri.size()) throw Error("shape assignment does not match the triangulation");
  double vol = 0.0;
  for (std::size_t t = 0; t < z.num_tetrahedra(); ++t) vol += ideal_volume(z.tetrahedron_shape(t));
  return vol;
}

// True when every shape is real (all tetrahedra flat).
inline bool is_all_flat(const ShapeAssignment& z, double tol = 1e-9) {
  for (Complex q : z.quads())
    if (std::abs(q.imag()) > tol * std::max(1.0, std::abs(q))) return false;
  return true;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json complex_to_json(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ParseError("complex numbers are [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

// {"shapes": [[re, im], ...]} with one slot-0 shape per tetrahedron, or the
// expanded form [[[re, im] x 3], ...] with every slot.
inline ShapeAssignment solution_from_json(const nlohmann::json& doc) {
  try {
    const auto& shapes = doc.at("shapes");
    if (!shapes.is_array() || shapes.empty()) throw ParseError("shapes must be a non-empty array");
    const bool expanded = shapes[0].is_array() && shapes[0].size() == 3 && shapes[0][0].is_array();
    if (expanded) {
      std::vector<Complex> quads;
      for (const auto& tet : shapes) {
        if (!tet.is_array() || tet.size() != 3) throw ParseError("expanded shapes need 3 slots per tetrahedron");
        for (const auto& q : tet) quads.push_back(complex_from_json(q));
      }
      return ShapeAssignment::from_quads(std::move(quads));
    }
    std::vector<Complex> tets;
    for (const auto& s : shapes) tets.push_back(complex_from_json(s));
    return ShapeAssignment::from_tetrahedron_shapes(tets);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("solution JSON: ") + e.what());
  }
}

inline nlohmann::json to_json(const ShapeAssignment& z) {
  nlohmann::json shapes = nlohmann::json::array();
  for (std::size_t t = 0; t < z.num_tetrahedra(); ++t) shapes.push_back(complex_to_json(z.tetrahedron_shape(t)));
  return nlohmann::json{{"shapes", std::move(shapes)}};
}

}  // namespace spinglue
