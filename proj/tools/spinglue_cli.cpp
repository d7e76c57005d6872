// spinglue: command-line front end.
//
// Exit codes: 0 pass, 2 mathematical failure, 1 input or I/O error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spinglue/spinglue.hpp"

namespace {

using namespace spinglue;
using Json = nlohmann::ordered_json;

constexpr int kExitPass = 0;
constexpr int kExitInput = 1;
constexpr int kExitMath = 2;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Triangulation load_triangulation(const std::string& path) {
  try {
    return parse_triangulation(read_file(path));
  } catch (const Error& e) {
    throw InputError(path + ": " + e.what());
  }
}

// A JSON document, or JSON lines when the file holds several documents.
std::vector<nlohmann::json> load_documents(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return {nlohmann::json::parse(text)};
  } catch (const nlohmann::json::parse_error&) {
  }
  std::vector<nlohmann::json> docs;
  std::istringstream lines(text);
  std::string line;
  int number = 0;
  while (std::getline(lines, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      docs.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(path + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  if (docs.empty()) throw InputError(path + ": no JSON documents");
  return docs;
}

Representation load_representation(const std::string& path, const Presentation& pres) {
  const auto docs = load_documents(path);
  if (docs.size() != 1) throw InputError(path + ": expected one representation document");
  try {
    return representation_from_json(docs.front(), pres);
  } catch (const Error& e) {
    throw InputError(path + ": " + e.what());
  }
}

struct LabelledSolution {
  std::string label;
  ShapeAssignment shapes;
};

std::vector<LabelledSolution> load_solutions(const std::vector<std::string>& paths, std::size_t num_tetrahedra) {
  std::vector<LabelledSolution> out;
  for (const auto& path : paths) {
    const auto docs = load_documents(path);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      const std::string label = docs.size() == 1 ? path : path + ":" + std::to_string(i + 1);
      ShapeAssignment z;
      try {
        z = solution_from_json(docs[i]);
      } catch (const ParseError& e) {
        throw InputError(label + ": " + e.what());
      }
      if (z.num_tetrahedra() != num_tetrahedra)
        throw InputError(label + ": " + std::to_string(z.num_tetrahedra()) + " shapes for " +
                         std::to_string(num_tetrahedra) + " tetrahedra");
      out.push_back({label, std::move(z)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output

double round15(double x) {
  if (!std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return std::strtod(buf, nullptr);
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

std::string fmt(Complex z) {
  return fmt(z.real()) + (std::signbit(z.imag()) ? " - " : " + ") + fmt(std::abs(z.imag())) + "i";
}

template <class J>
J rounded(J j) {
  if (j.is_number_float()) return J(round15(j.template get<double>()));
  if (j.is_array() || j.is_object())
    for (auto& v : j) v = rounded(std::move(v));
  return j;
}

Json ordered(const nlohmann::json& j) { return Json::parse(j.dump()); }

void emit(const Json& doc) { std::cout << rounded(doc).dump() << '\n'; }

struct Common {
  std::string format = "text";
  bool json() const { return format == "json"; }
};

// ---------------------------------------------------------------------------
// Commands

int cmd_info(const Common& c, const std::string& tri_path) {
  const Triangulation tri = load_triangulation(tri_path);
  const Skeleton skel(tri);
  std::vector<int> chi;
  for (std::size_t v = 0; v < skel.vertices().size(); ++v) chi.push_back(skel.link_euler_characteristic(v));
  const bool spherical = skel.all_links_spherical();

  if (c.json()) {
    Json doc;
    doc["num_tetrahedra"] = tri.size();
    doc["num_edges"] = skel.edges().size();
    Json degrees = Json::array();
    for (const auto& e : skel.edges()) degrees.push_back(e.degree());
    doc["edge_degrees"] = degrees;
    doc["num_vertices"] = skel.vertices().size();
    doc["link_euler_characteristics"] = chi;
    doc["closed"] = true;
    doc["orientable"] = true;
    doc["links_spherical"] = spherical;
    emit(doc);
    return kExitPass;
  }
  std::string degrees;
  for (const auto& e : skel.edges()) degrees += (degrees.empty() ? "" : ",") + std::to_string(e.degree());
  const std::size_t nv = skel.vertices().size();
  std::cout << tri.size() << (tri.size() == 1 ? " tetrahedron, " : " tetrahedra, ") << skel.edges().size()
            << (skel.edges().size() == 1 ? " edge" : " edges") << " (deg " << degrees << "), " << nv
            << (nv == 1 ? " vertex" : " vertices") << ", closed: no boundary faces unglued\n";
  std::cout << "orientable: yes (every gluing reverses orientation)\n";
  std::cout << "vertex links:";
  for (std::size_t v = 0; v < nv; ++v) std::cout << (v ? ", " : " ") << "v" << v << " chi " << chi[v];
  std::cout << (spherical ? " (all spheres)\n" : " (some links are not spheres)\n");
  return kExitPass;
}

int cmd_presentation(const Common& c, const std::string& tri_path) {
  const Triangulation tri = load_triangulation(tri_path);
  const Skeleton skel(tri);
  const Presentation pres = presentation(skel);

  auto arrows_of = [&](std::size_t e) {
    std::vector<std::string> out;
    for (const Arrow& a : skel.edges()[e].arrows)
      out.push_back(std::to_string(a.tet) + ":" + std::to_string(a.vertices[0]) + "->" + std::to_string(a.vertices[1]));
    return out;
  };

  if (c.json()) {
    Json gens = Json::array();
    for (std::size_t g = 0; g < pres.num_generators(); ++g) {
      const std::size_t e = pres.generator_edge[g];
      gens.push_back(Json{{"label", pres.generators[g]}, {"edge", e}, {"arrows", arrows_of(e)}});
    }
    Json rels = Json::array();
    for (const Word& r : pres.relators) rels.push_back(word_to_string(pres, r));
    Json edges = Json::array();
    for (std::size_t e = 0; e < pres.edge_word.size(); ++e)
      edges.push_back(Json{{"edge", e}, {"tree", static_cast<bool>(pres.tree_edge[e])},
                           {"word", word_to_string(pres, pres.edge_word[e])}});
    Json doc;
    doc["generators"] = gens;
    doc["relators"] = rels;
    doc["edges"] = edges;
    emit(doc);
    return kExitPass;
  }
  std::cout << "generators: " << pres.num_generators() << '\n';
  for (std::size_t g = 0; g < pres.num_generators(); ++g) {
    const std::size_t e = pres.generator_edge[g];
    std::cout << "  " << pres.generators[g] << "  edge " << e << "  arrows";
    for (const auto& a : arrows_of(e)) std::cout << ' ' << a;
    std::cout << '\n';
  }
  std::cout << "relators: " << pres.relators.size() << '\n';
  for (std::size_t r = 0; r < pres.relators.size(); ++r)
    std::cout << "  r" << r << "  " << word_to_string(pres, pres.relators[r]) << '\n';
  return kExitPass;
}

int cmd_check_rep(const Common& c, const std::string& tri_path, const std::string& rep_path, double tol) {
  const Triangulation tri = load_triangulation(tri_path);
  const Presentation pres = presentation(tri);
  const Representation rep = load_representation(rep_path, pres);
  const RepresentationReport report = check_representation(tri, pres, rep, tol);

  double worst = 0.0;
  for (double d : report.relator_deviation) worst = std::max(worst, d);
  if (c.json()) {
    Json doc;
    doc["passed"] = report.passed();
    doc["max_relator_deviation"] = worst;
    Json loops = Json::array();
    for (const auto& l : report.loop_edges) loops.push_back(Json{{"edge", l.edge}, {"distance", l.distance}});
    doc["loop_edges"] = loops;
    doc["failures"] = report.failures;
    emit(doc);
  } else {
    std::cout << "relators: " << report.relator_deviation.size() << ", max deviation " << fmt(worst) << '\n';
    std::cout << "loop edges: " << report.loop_edges.size() << '\n';
    for (const auto& f : report.failures) std::cout << "FAIL " << f << '\n';
    std::cout << (report.passed() ? "representation passes\n" : "representation rejected\n");
  }
  return report.passed() ? kExitPass : kExitMath;
}

int cmd_spin(const Common& c, const std::string& tri_path, const std::string& rep_path, std::uint64_t seed,
             int count, const std::string& out_dir) {
  const Triangulation tri = load_triangulation(tri_path);
  const Presentation pres = presentation(tri);
  const Representation rep = load_representation(rep_path, pres);
  const RepresentationReport report = check_representation(tri, pres, rep);
  if (!report.passed()) {
    for (const auto& f : report.failures) std::cerr << "spinglue: " << f << '\n';
    return kExitMath;
  }
  const FundamentalDomain dom = choose_fundamental_domain(tri);

  for (int k = 0; k < count; ++k) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(k);
    const VertexPlacement pl = sample_placement(tri, dom, pres, rep, s);
    const ShapeAssignment z = spin(tri, dom, pl);
    const double volume = solution_volume(tri, z);

    Json solution = ordered(to_json(z));
    Json sidecar;
    sidecar["seed"] = s;
    Json base = Json::array();
    for (const IdealPoint& p : pl.base_points) base.push_back(ordered(ideal_point_to_json(p)));
    sidecar["base_points"] = base;
    sidecar["volume"] = volume;

    if (!out_dir.empty()) {
      const std::string stem = out_dir + "/solution_" + std::to_string(s);
      std::ofstream sol(stem + ".json");
      std::ofstream meta(stem + ".meta.json");
      if (!sol || !meta) throw InputError("cannot write to " + out_dir);
      sol << rounded(solution).dump() << '\n';
      meta << rounded(sidecar).dump() << '\n';
    }
    if (c.json() || out_dir.empty()) {
      Json line = solution;
      for (const auto& [key, value] : sidecar.items()) line[key] = value;
      emit(line);
    } else {
      std::cout << "seed " << s << ": volume " << fmt(volume) << ", draws " << pl.attempts << '\n';
    }
  }
  return kExitPass;
}

int cmd_verify(const Common& c, const std::string& tri_path, const std::vector<std::string>& paths, double tol) {
  const Triangulation tri = load_triangulation(tri_path);
  const GluingSystem sys = build_system(tri);
  const auto solutions = load_solutions(paths, tri.size());
  bool all = true;
  Json results = Json::array();
  for (const auto& [label, z] : solutions) {
    double edge = 0.0, cyclic = 0.0;
    bool ok = true;
    std::string note;
    try {
      const ResidualReport r = residuals(sys, z);
      edge = r.max_edge();
      cyclic = r.max_cyclic();
      ok = edge < tol && cyclic < tol;
    } catch (const DegenerateError& e) {
      ok = false;
      note = e.what();
    }
    all = all && ok;
    if (c.json()) {
      Json item{{"solution", label}, {"max_edge_residual", edge}, {"max_cyclic_residual", cyclic}, {"passed", ok}};
      if (!note.empty()) item["error"] = note;
      results.push_back(item);
    } else {
      std::cout << label << ": " << (ok ? "pass" : "FAIL");
      if (note.empty())
        std::cout << ", max edge residual " << fmt(edge) << ", max cyclic residual " << fmt(cyclic) << '\n';
      else
        std::cout << ", " << note << '\n';
    }
  }
  if (c.json()) emit(Json{{"tolerance", tol}, {"passed", all}, {"results", results}});
  return all ? kExitPass : kExitMath;
}

int cmd_volume(const Common& c, const std::string& tri_path, const std::vector<std::string>& paths) {
  const Triangulation tri = load_triangulation(tri_path);
  const auto solutions = load_solutions(paths, tri.size());
  std::vector<double> volumes;
  for (const auto& s : solutions) volumes.push_back(solution_volume(tri, s.shapes));
  double mean = 0.0;
  for (double v : volumes) mean += v;
  mean /= static_cast<double>(volumes.size());
  double var = 0.0;
  for (double v : volumes) var += (v - mean) * (v - mean);
  const double stdev = volumes.size() > 1 ? std::sqrt(var / static_cast<double>(volumes.size() - 1)) : 0.0;

  if (c.json()) {
    Json items = Json::array();
    for (std::size_t i = 0; i < volumes.size(); ++i)
      items.push_back(Json{{"solution", solutions[i].label}, {"volume", volumes[i]}});
    emit(Json{{"volumes", items}, {"mean", mean}, {"stdev", stdev}});
  } else {
    for (std::size_t i = 0; i < volumes.size(); ++i) std::cout << solutions[i].label << ": " << fmt(volumes[i]) << '\n';
    std::cout << "mean " << fmt(mean) << '\n';
    std::cout << "stdev " << fmt(stdev) << '\n';
  }
  return kExitPass;
}

int cmd_holonomy(const std::string& tri_path, const std::string& sol_path) {
  const Triangulation tri = load_triangulation(tri_path);
  const auto solutions = load_solutions({sol_path}, tri.size());
  if (solutions.size() != 1) throw InputError(sol_path + ": expected one solution");
  const Presentation pres = presentation(tri);
  const FundamentalDomain dom = choose_fundamental_domain(tri);
  const Representation rep = holonomy_representation(tri, dom, pres, solutions.front().shapes);
  emit(to_json(rep, pres));
  return kExitPass;
}

int cmd_compare(const Common& c, const std::string& tri_path, const std::string& rep1_path,
                const std::string& rep2_path, double tol, std::uint64_t seed) {
  const Triangulation tri = load_triangulation(tri_path);
  const Presentation pres = presentation(tri);
  const Representation a = load_representation(rep1_path, pres);
  const Representation b = load_representation(rep2_path, pres);
  const ConjugacyReport report = conjugacy_check(a, b, pres, tol, seed);
  if (c.json())
    emit(Json{{"verdict", to_string(report.verdict)}, {"max_trace_deviation", report.max_trace_deviation}});
  else
    std::cout << "verdict " << to_string(report.verdict) << ", max trace deviation "
              << fmt(report.max_trace_deviation) << " over " << report.words_checked << " words\n";
  return report.passed() ? kExitPass : kExitMath;
}

int cmd_solve(const Common& c, const std::string& tri_path, const std::string& start_path,
              const std::vector<double>& z0, double tol, int max_iters) {
  const Triangulation tri = load_triangulation(tri_path);
  ShapeAssignment start;
  if (!start_path.empty()) {
    const auto s = load_solutions({start_path}, tri.size());
    if (s.size() != 1) throw InputError(start_path + ": expected one solution");
    start = s.front().shapes;
  } else {
    start = ShapeAssignment::from_tetrahedron_shapes(std::vector<Complex>(tri.size(), Complex{z0[0], z0[1]}));
  }
  NewtonOptions opts;
  opts.tol = tol;
  opts.max_iters = max_iters;
  const NewtonResult r = newton_refine(build_system(tri), start, opts);
  const double volume = solution_volume(tri, r.shapes);
  if (c.json()) {
    Json doc = ordered(to_json(r.shapes));
    doc["converged"] = r.converged;
    doc["iterations"] = r.iterations;
    doc["residual"] = r.residual;
    doc["volume"] = volume;
    emit(doc);
  } else {
    std::cout << (r.converged ? "converged" : "did not converge") << " after " << r.iterations
              << " iterations, residual " << fmt(r.residual) << ", volume " << fmt(volume) << '\n';
    for (std::size_t t = 0; t < r.shapes.num_tetrahedra(); ++t)
      std::cout << "  z" << t << " = " << fmt(r.shapes.tetrahedron_shape(t)) << '\n';
  }
  return r.converged ? kExitPass : kExitMath;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gluing equations, spinning and holonomy for triangulated 3-manifolds"};
  app.require_subcommand(1);
  Common common;
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"text", "json"}));
  };

  std::string tri_path, rep_path, rep2_path, sol_path, out_dir, start_path;
  std::vector<std::string> sol_paths;
  std::uint64_t seed = 0;
  std::uint64_t battery_seed = 0x5EED;
  int count = 1;
  int max_iters = 50;
  double tol = 0.0;
  std::vector<double> z0{0.5, 0.8};

  auto* info = app.add_subcommand("info", "Summarize a triangulation");
  info->add_option("triangulation", tri_path)->required();
  add_format(info);

  auto* pres = app.add_subcommand("presentation", "Print the edge-path presentation of the fundamental group");
  pres->add_option("triangulation", tri_path)->required();
  add_format(pres);

  auto* check = app.add_subcommand("check-rep", "Check relators and loop-edge nontriviality of a representation");
  check->add_option("triangulation", tri_path)->required();
  check->add_option("representation", rep_path)->required();
  check->add_option("--tol", tol, "Relator tolerance")->default_val(kRelatorTolerance);
  add_format(check);

  auto* spin_cmd = app.add_subcommand("spin", "Spin gluing-equation solutions from a representation");
  spin_cmd->add_option("triangulation", tri_path)->required();
  spin_cmd->add_option("representation", rep_path)->required();
  spin_cmd->add_option("--seed", seed, "First seed")->default_val(0);
  spin_cmd->add_option("--count", count, "Number of consecutive seeds")->default_val(1)->check(CLI::PositiveNumber);
  spin_cmd->add_option("--out", out_dir, "Directory for solution_<seed>.json and .meta.json files");
  add_format(spin_cmd);

  auto* verify = app.add_subcommand("verify", "Check gluing-equation residuals of solutions");
  verify->add_option("triangulation", tri_path)->required();
  verify->add_option("solutions", sol_paths)->required();
  verify->add_option("--tol", tol, "Residual tolerance")->default_val(1e-9);
  add_format(verify);

  auto* volume = app.add_subcommand("volume", "Volumes of solutions with mean and standard deviation");
  volume->add_option("triangulation", tri_path)->required();
  volume->add_option("solutions", sol_paths)->required();
  add_format(volume);

  auto* hol = app.add_subcommand("holonomy", "Holonomy representation of a solution");
  hol->add_option("triangulation", tri_path)->required();
  hol->add_option("solution", sol_path)->required();
  add_format(hol);

  auto* compare = app.add_subcommand("compare", "Trace comparison of two representations");
  compare->add_option("triangulation", tri_path)->required();
  compare->add_option("first", rep_path)->required();
  compare->add_option("second", rep2_path)->required();
  compare->add_option("--tol", tol, "Trace tolerance")->default_val(1e-6);
  compare->add_option("--seed", battery_seed, "Seed of the random trace words");
  add_format(compare);

  auto* solve = app.add_subcommand("solve", "Newton refinement of a solution");
  solve->add_option("triangulation", tri_path)->required();
  auto* start_opt = solve->add_option("--start", start_path, "Starting solution file");
  solve->add_option("--z0", z0, "Starting shape for every tetrahedron (re im)")
      ->expected(2)
      ->excludes(start_opt);
  solve->add_option("--tol", tol, "Residual tolerance")->default_val(1e-9);
  solve->add_option("--max-iters", max_iters, "Iteration cap")->default_val(50);
  add_format(solve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitInput;
  }

  std::cout.setf(std::ios::unitbuf);
  try {
    if (*info) return cmd_info(common, tri_path);
    if (*pres) return cmd_presentation(common, tri_path);
    if (*check) return cmd_check_rep(common, tri_path, rep_path, tol);
    if (*spin_cmd) return cmd_spin(common, tri_path, rep_path, seed, count, out_dir);
    if (*verify) return cmd_verify(common, tri_path, sol_paths, tol);
    if (*volume) return cmd_volume(common, tri_path, sol_paths);
    if (*hol) return cmd_holonomy(tri_path, sol_path);
    if (*compare) return cmd_compare(common, tri_path, rep_path, rep2_path, tol, battery_seed);
    if (*solve) return cmd_solve(common, tri_path, start_path, z0, tol, max_iters);
  } catch (const InputError& e) {
    std::cerr << "spinglue: " << e.what() << '\n';
    return kExitInput;
  } catch (const ParseError& e) {
    std::cerr << "spinglue: " << e.what() << '\n';
    return kExitInput;
  } catch (const RepresentationError& e) {
    std::cerr << "spinglue: " << e.what() << '\n';
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << "spinglue: " << e.what() << '\n';
    return kExitMath;
  }
  return kExitInput;
}
