#include <gtest/gtest.h>

#include <numbers>

#include "support.hpp"

using namespace spinglue;
using namespace spinglue::testing;

namespace {

const Complex kRegular = std::polar(1.0, std::numbers::pi / 3);

ShapeAssignment uniform_shapes(std::size_t n, Complex z) {
  return ShapeAssignment::from_tetrahedron_shapes(std::vector<Complex>(n, z));
}

ShapeAssignment weeks_solution() {
  return solution_from_json(nlohmann::json::parse(read_text(fixture_path("weeks_solution.json"))));
}

ShapeAssignment random_shapes(SplitMix64& rng, std::size_t n) {
  std::vector<Complex> s;
  for (std::size_t t = 0; t < n; ++t) s.push_back(random_complex(rng) + Complex(0.3, 0.1));
  return ShapeAssignment::from_tetrahedron_shapes(s);
}

}  // namespace

TEST(BuildSystem, FigureEightMatrix) {
  const GluingSystem sys = build_system(load_fixture("figure_eight"));
  ASSERT_EQ(sys.num_edges(), 2u);
  ASSERT_EQ(sys.num_quads(), 6u);
  for (std::size_t e = 0; e < 2; ++e) {
    int sum = 0;
    for (std::size_t q = 0; q < 6; ++q) sum += sys.exponent(e, q);
    EXPECT_EQ(sum, 6);
  }
  for (std::size_t q = 0; q < 6; ++q) EXPECT_EQ(sys.exponent(0, q) + sys.exponent(1, q), 2);
}

TEST(BuildSystem, RowAndColumnSums) {
  for (const char* name : {"figure_eight", "lens_5_1", "weeks", "s2xs1_sum"}) {
    const Skeleton skel(load_fixture(name));
    const GluingSystem sys = build_system(skel);
    EXPECT_EQ(sys.num_edges(), skel.edges().size());
    for (std::size_t q = 0; q < sys.num_quads(); ++q) {
      int sum = 0;
      for (std::size_t e = 0; e < sys.num_edges(); ++e) {
        const int x = sys.exponent(e, q);
        EXPECT_GE(x, 0);
        EXPECT_LE(x, 2);
        EXPECT_EQ(x, quad_incidence(skel, {q / 3, static_cast<int>(q % 3)}, e));
        sum += x;
      }
      EXPECT_EQ(sum, 2) << name;
    }
    for (std::size_t e = 0; e < sys.num_edges(); ++e) {
      std::size_t sum = 0;
      for (std::size_t q = 0; q < sys.num_quads(); ++q) sum += static_cast<std::size_t>(sys.exponent(e, q));
      EXPECT_EQ(sum, skel.edges()[e].degree()) << name;
    }
  }
}

TEST(Residuals, RegularFigureEight) {
  const Triangulation tri = load_fixture("figure_eight");
  const ResidualReport r = residuals(build_system(tri), uniform_shapes(2, kRegular));
  ASSERT_EQ(r.edges.size(), 2u);
  EXPECT_LT(r.max_edge(), 1e-12);
  EXPECT_LT(r.max_cyclic(), 1e-15);
}

TEST(Residuals, ZeroRowIsEmptyProduct) {
  const GluingSystem sys(1, {{0, 0, 0}});
  const ResidualReport r = residuals(sys, uniform_shapes(1, Complex(0.3, 2.0)));
  EXPECT_EQ(std::abs(r.edges[0]), 0.0);
}

TEST(Residuals, PerturbationIsDetected) {
  const Triangulation tri = load_fixture("weeks");
  const GluingSystem sys = build_system(tri);
  const ShapeAssignment z = weeks_solution();
  EXPECT_LT(residuals(sys, z).max_edge(), 1e-12);
  for (std::size_t t = 0; t < tri.size(); ++t) {
    std::vector<Complex> s;
    for (std::size_t u = 0; u < tri.size(); ++u) s.push_back(z.tetrahedron_shape(u));
    s[t] += 1e-3;
    EXPECT_GT(residuals(sys, ShapeAssignment::from_tetrahedron_shapes(s)).max_edge(), 1e-4) << t;
  }
}

TEST(Residuals, MatchAroundEdgeProducts) {
  SplitMix64 rng(11);
  for (const char* name : {"figure_eight", "lens_5_1", "weeks", "s2xs1_sum"}) {
    const Skeleton skel(load_fixture(name));
    const GluingSystem sys = build_system(skel);
    for (int k = 0; k < 20; ++k) {
      const ShapeAssignment z = random_shapes(rng, skel.triangulation().size());
      const ResidualReport r = residuals(sys, z);
      for (std::size_t e = 0; e < sys.num_edges(); ++e) {
        const Complex direct = around_edge_product(skel, z, e);
        EXPECT_LT(std::abs(direct - (r.edges[e] + 1.0)) / std::max(1.0, std::abs(direct)), 1e-10) << name;
      }
    }
  }
}

TEST(Residuals, Errors) {
  const GluingSystem sys = build_system(load_fixture("figure_eight"));
  EXPECT_THROW(residuals(sys, uniform_shapes(3, kRegular)), Error);
  EXPECT_THROW(GluingSystem(2, {{1, 2}}), Error);
  EXPECT_THROW(ShapeAssignment::from_quads({kRegular, kRegular, 2.0}), Error);
  EXPECT_THROW(ShapeAssignment::from_quads({kRegular, kRegular}), Error);
  EXPECT_THROW(ShapeAssignment::from_quads({0.0, 1.0, 2.0}), DegenerateError);
}

TEST(Newton, FigureEightFromStandardStart) {
  const GluingSystem sys = build_system(load_fixture("figure_eight"));
  NewtonOptions opts;
  opts.tol = 1e-12;
  const NewtonResult r = newton_refine(sys, uniform_shapes(2, Complex(0.5, 0.8)), opts);
  ASSERT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 15);
  for (std::size_t t = 0; t < 2; ++t) EXPECT_LT(std::abs(r.shapes.tetrahedron_shape(t) - kRegular), 1e-10);
  EXPECT_LT(residuals(sys, r.shapes).max_edge(), 1e-12);
  EXPECT_EQ(r.history.size(), static_cast<std::size_t>(r.iterations) + 1);
}

TEST(Newton, ExactSolutionIsFixed) {
  const GluingSystem sys = build_system(load_fixture("figure_eight"));
  const NewtonResult r = newton_refine(sys, uniform_shapes(2, kRegular));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.shapes.tetrahedron_shape(0), kRegular);
}

TEST(Newton, QuadraticConvergenceNearWeeksSolution) {
  const GluingSystem sys = build_system(load_fixture("weeks"));
  const ShapeAssignment exact = weeks_solution();
  SplitMix64 rng(12);
  std::vector<Complex> s;
  for (std::size_t t = 0; t < exact.num_tetrahedra(); ++t)
    s.push_back(exact.tetrahedron_shape(t) + 0.005 * random_complex(rng, 1.0));
  NewtonOptions opts;
  opts.tol = 1e-13;
  const NewtonResult r = newton_refine(sys, ShapeAssignment::from_tetrahedron_shapes(s), opts);
  ASSERT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 6);
  // Residual ratio test: each step roughly squares the residual.
  for (std::size_t k = 1; k < r.history.size(); ++k)
    if (r.history[k - 1] < 1e-2 && r.history[k] > 1e-14) {
      EXPECT_LT(r.history[k], 50.0 * r.history[k - 1] * r.history[k - 1]) << k;
    }
  // The solution set is positive-dimensional here (the spun family through the
  // geometric point), so Newton lands on a nearby solution of equal volume.
  const Triangulation tri = load_fixture("weeks");
  EXPECT_NEAR(solution_volume(tri, r.shapes), solution_volume(tri, exact), 1e-9);
}

TEST(Newton, SingularJacobian) {
  // z z' z'' = -1 identically, so the Jacobian vanishes.
  const GluingSystem sys(1, {{1, 1, 1}});
  try {
    newton_refine(sys, uniform_shapes(1, Complex(0.3, 0.4)));
    FAIL() << "expected SingularJacobianError";
  } catch (const SingularJacobianError& e) {
    EXPECT_NE(std::string(e.what()).find("rank 0"), std::string::npos) << e.what();
  }
}

TEST(Newton, ReportsNonConvergence) {
  const GluingSystem sys = build_system(load_fixture("weeks"));
  NewtonOptions opts;
  opts.max_iters = 1;
  opts.tol = 1e-15;
  const NewtonResult r = newton_refine(sys, uniform_shapes(9, Complex(0.4, 0.7)), opts);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_GT(r.residual, opts.tol);
}

TEST(Newton, RejectsDegenerateStart) {
  const GluingSystem sys = build_system(load_fixture("figure_eight"));
  EXPECT_THROW(newton_refine(sys, uniform_shapes(2, Complex(1.0 + 1e-10, 0.0))), DegenerateError);
}

TEST(Volume, FigureEightAndFlat) {
  const Triangulation tri = load_fixture("figure_eight");
  EXPECT_NEAR(solution_volume(tri, uniform_shapes(2, kRegular)), 6 * lobachevsky(std::numbers::pi / 3), 1e-12);
  EXPECT_NEAR(solution_volume(tri, uniform_shapes(2, kRegular)), 2.0298832128, 1e-9);
  EXPECT_EQ(solution_volume(tri, uniform_shapes(2, 3.5)), 0.0);
  EXPECT_TRUE(is_all_flat(uniform_shapes(2, -2.0)));
  EXPECT_FALSE(is_all_flat(uniform_shapes(2, kRegular)));
}

TEST(Volume, ConjugationNegatesAndRelabelingPreserves) {
  const Triangulation tri = load_fixture("weeks");
  const ShapeAssignment z = weeks_solution();
  const double v = solution_volume(tri, z);
  EXPECT_NEAR(v, 0.9427073627769, 1e-12);
  std::vector<Complex> conj;
  for (std::size_t t = 0; t < tri.size(); ++t) conj.push_back(std::conj(z.tetrahedron_shape(t)));
  EXPECT_NEAR(solution_volume(tri, ShapeAssignment::from_tetrahedron_shapes(conj)), -v, 1e-12);

  SplitMix64 rng(13);
  const auto sigma = random_permutation(rng, tri.size());
  const Triangulation moved = Triangulation::from_gluings(relabel_tetrahedra(tri, sigma));
  std::vector<Complex> shuffled(tri.size());
  for (std::size_t t = 0; t < tri.size(); ++t) shuffled[sigma[t]] = z.tetrahedron_shape(t);
  const ShapeAssignment zm = ShapeAssignment::from_tetrahedron_shapes(shuffled);
  EXPECT_NEAR(solution_volume(moved, zm), v, 1e-12);
  EXPECT_LT(residuals(build_system(moved), zm).max_edge(), 1e-12);
}

TEST(SolutionJson, CompactAndExpandedForms) {
  const auto compact = nlohmann::json::parse(R"({"shapes": [[0.5, 0.8660254037844386], [0.5, 0.8660254037844386]]})");
  const ShapeAssignment a = solution_from_json(compact);
  EXPECT_LT(std::abs(a.tetrahedron_shape(1) - kRegular), 1e-15);

  nlohmann::json expanded;
  expanded["shapes"] = nlohmann::json::array();
  const ShapeTriple s = shape_triple(Complex(0.2, 1.3));
  expanded["shapes"].push_back({complex_to_json(s.z0), complex_to_json(s.z1), complex_to_json(s.z2)});
  const ShapeAssignment b = solution_from_json(expanded);
  EXPECT_LT(std::abs(b.shape(0, 2) - s.z2), 1e-15);

  expanded["shapes"][0][1] = complex_to_json(s.z1 + 0.1);
  EXPECT_THROW(solution_from_json(expanded), Error);
  EXPECT_THROW(solution_from_json(nlohmann::json::parse(R"({"shapes": []})")), ParseError);
  EXPECT_THROW(solution_from_json(nlohmann::json::parse(R"({"shape": [[1, 2]]})")), ParseError);
  EXPECT_THROW(solution_from_json(nlohmann::json::parse(R"({"shapes": [[1, 2, 3]]})")), ParseError);

  const ShapeAssignment back = solution_from_json(to_json(a));
  EXPECT_EQ(back.quads(), a.quads());
}
