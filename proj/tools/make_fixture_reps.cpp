// Regenerates weeks_rep.json, weeks_solution.json and lens_5_1_rep.json in the
// given fixture directory.

#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "spinglue/spinglue.hpp"

using namespace spinglue;

namespace {

Triangulation load(const std::string& path) {
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  return parse_triangulation(text.str());
}

// First Newton run from a SplitMix64(1) start that lands on the positive-volume solution.
ShapeAssignment geometric_solution(const Triangulation& tri) {
  const GluingSystem sys = build_system(tri);
  SplitMix64 rng(1);
  NewtonOptions opts;
  opts.tol = 1e-14;
  opts.max_iters = 100;
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Complex> start;
    for (std::size_t t = 0; t < tri.size(); ++t) start.push_back({rng.uniform() * 1.4 - 0.2, rng.uniform() * 1.5 + 0.05});
    try {
      const NewtonResult r = newton_refine(sys, ShapeAssignment::from_tetrahedron_shapes(start), opts);
      if (r.converged && solution_volume(tri, r.shapes) > 0.9) return r.shapes;
    } catch (const Error&) {
    }
  }
  throw Error("no geometric solution found");
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "fixtures";

  const Triangulation weeks = load(dir + "/weeks.json");
  const ShapeAssignment geo = geometric_solution(weeks);
  const Presentation pres = presentation(weeks);
  const Representation rho = holonomy_representation(weeks, choose_fundamental_domain(weeks), pres, geo);
  std::ofstream(dir + "/weeks_rep.json") << to_json(rho, pres).dump(2) << "\n";
  nlohmann::json sol;
  sol["shapes"] = nlohmann::json::array();
  for (std::size_t t = 0; t < weeks.size(); ++t) sol["shapes"].push_back(complex_to_json(geo.tetrahedron_shape(t)));
  std::ofstream(dir + "/weeks_solution.json") << sol.dump(2) << "\n";
  std::cout << "weeks volume " << solution_volume(weeks, geo) << "\n";

  const Triangulation lens = load(dir + "/lens_5_1.json");
  const Complex w = std::polar(1.0, std::numbers::pi / 5);
  const Mobius r{w, 0.0, 0.0, 1.0 / w};
  const Representation order5{{r, r * r, r * r}};
  std::ofstream(dir + "/lens_5_1_rep.json") << to_json(order5, presentation(lens)).dump(2) << "\n";
  return 0;
}
