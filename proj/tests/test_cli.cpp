#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "support.hpp"

using namespace spinglue;
using namespace spinglue::testing;

namespace fs = std::filesystem;

namespace {

std::string fx(const std::string& name) { return fixture_path(name); }

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(line);
  return out;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("spinglue_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cli, InfoText) {
  const CommandResult r = run_cli("info " + fx("figure_eight.json"));
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("2 tetrahedra, 2 edges (deg 6,6), 1 vertex"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("chi 0"), std::string::npos);
}

TEST(Cli, InfoJson) {
  const CommandResult r = run_cli("info " + fx("weeks.json") + " --format json");
  ASSERT_EQ(r.exit_code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["num_tetrahedra"], 9);
  EXPECT_EQ(j["num_edges"], 10);
  EXPECT_EQ(j["num_vertices"], 1);
  EXPECT_EQ(j["closed"], true);
  EXPECT_EQ(j["links_spherical"], true);
  int total = 0;
  for (int d : j["edge_degrees"]) total += d;
  EXPECT_EQ(total, 6 * 9);
}

TEST(Cli, InputErrorsExitOne) {
  const fs::path dir = scratch_dir("bad");
  {
    std::ofstream(dir / "broken.json") << "{\"tetrahedra\": [[0, 1]";
    std::ofstream(dir / "empty.json") << "";
  }
  for (const std::string& file : {(dir / "broken.json").string(), (dir / "empty.json").string(),
                                   (dir / "missing.json").string()}) {
    const CommandResult r = run_cli("info " + file, true);
    EXPECT_EQ(r.exit_code, 1) << file;
    EXPECT_FALSE(r.out.empty());
  }
  EXPECT_EQ(run_cli("info").exit_code, 1);
  EXPECT_EQ(run_cli("frobnicate").exit_code, 1);
  EXPECT_EQ(run_cli("--help").exit_code, 0);
  EXPECT_EQ(run_cli("check-rep " + fx("weeks.json") + " " + fx("lens_5_1_rep.json")).exit_code, 1);
}

TEST(Cli, Presentation) {
  const CommandResult text = run_cli("presentation " + fx("lens_5_1.json"));
  EXPECT_EQ(text.exit_code, 0);
  EXPECT_NE(text.out.find("generators: 3"), std::string::npos);
  const CommandResult r = run_cli("presentation " + fx("lens_5_1.json") + " --format json");
  ASSERT_EQ(r.exit_code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["generators"].size(), 3u);
  EXPECT_EQ(j["relators"].size(), 4u);
  EXPECT_EQ(run_cli("presentation " + fx("lens_5_1.json")).out, text.out);
}

TEST(Cli, CheckRep) {
  EXPECT_EQ(run_cli("check-rep " + fx("lens_5_1.json") + " " + fx("lens_5_1_rep.json")).exit_code, 0);
  EXPECT_EQ(run_cli("check-rep " + fx("weeks.json") + " " + fx("weeks_rep.json")).exit_code, 0);

  const fs::path dir = scratch_dir("trivial");
  nlohmann::json trivial;
  for (int g = 0; g < 3; ++g) trivial["generators"]["g" + std::to_string(g)] = {{1, 0}, {0, 0}, {0, 0}, {1, 0}};
  std::ofstream(dir / "trivial.json") << trivial.dump();
  const CommandResult r = run_cli("check-rep " + fx("lens_5_1.json") + " " + (dir / "trivial.json").string());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.out.find("FAIL loop edge"), std::string::npos) << r.out;
}

TEST(Cli, SpinThenVerifyAndVolume) {
  for (auto [tri, rep] : {std::pair{"lens_5_1.json", "lens_5_1_rep.json"}, std::pair{"weeks.json", "weeks_rep.json"}}) {
    const fs::path dir = scratch_dir(std::string("spin_") + tri);
    const CommandResult spun =
        run_cli("spin " + fx(tri) + " " + fx(rep) + " --seed 100 --count 20 --out " + dir.string());
    ASSERT_EQ(spun.exit_code, 0) << spun.out;
    std::string files;
    int count = 0;
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
      const fs::path sol = dir / ("solution_" + std::to_string(seed) + ".json");
      ASSERT_TRUE(fs::exists(sol)) << sol;
      const auto meta = nlohmann::json::parse(read_text((dir / ("solution_" + std::to_string(seed) + ".meta.json")).string()));
      EXPECT_EQ(meta["seed"], seed);
      files += " " + sol.string();
      ++count;
    }
    const CommandResult verified = run_cli("verify " + fx(tri) + files);
    EXPECT_EQ(verified.exit_code, 0) << verified.out;
    int passes = 0;
    for (const auto& line : lines(verified.out)) passes += line.find(": pass") != std::string::npos;
    EXPECT_EQ(passes, count);

    const CommandResult vol = run_cli("volume " + fx(tri) + files + " --format json");
    ASSERT_EQ(vol.exit_code, 0);
    const auto j = nlohmann::json::parse(vol.out);
    EXPECT_LT(j["stdev"].get<double>(), 1e-7);
  }
}

TEST(Cli, SpinIsDeterministicPerSeed) {
  const std::string base = "spin " + fx("weeks.json") + " " + fx("weeks_rep.json");
  const CommandResult a = run_cli(base + " --seed 7"), b = run_cli(base + " --seed 7"), c = run_cli(base + " --seed 8");
  ASSERT_EQ(a.exit_code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
  const auto ja = nlohmann::json::parse(a.out);
  EXPECT_EQ(ja["seed"], 7);
  EXPECT_NEAR(ja["volume"].get<double>(), 0.942707362777, 1e-9);
  // A run over several seeds reproduces the single-seed output line for line.
  const auto many = lines(run_cli(base + " --seed 6 --count 3").out);
  ASSERT_EQ(many.size(), 3u);
  EXPECT_EQ(many[1] + "\n", a.out);
}

TEST(Cli, SpinRejectsTrivialRepresentation) {
  const fs::path dir = scratch_dir("spin_trivial");
  nlohmann::json trivial;
  for (int g = 0; g < 3; ++g) trivial["generators"]["g" + std::to_string(g)] = {{1, 0}, {0, 0}, {0, 0}, {1, 0}};
  std::ofstream(dir / "trivial.json") << trivial.dump();
  EXPECT_EQ(run_cli("spin " + fx("lens_5_1.json") + " " + (dir / "trivial.json").string()).exit_code, 2);
}

TEST(Cli, HolonomyAndCompare) {
  const fs::path dir = scratch_dir("holonomy");
  const CommandResult spun = run_cli("spin " + fx("weeks.json") + " " + fx("weeks_rep.json") + " --seed 3");
  ASSERT_EQ(spun.exit_code, 0);
  std::ofstream(dir / "sol.json") << spun.out;
  const CommandResult hol = run_cli("holonomy " + fx("weeks.json") + " " + (dir / "sol.json").string());
  ASSERT_EQ(hol.exit_code, 0) << hol.out;
  std::ofstream(dir / "hol.json") << hol.out;

  const CommandResult cmp = run_cli("compare " + fx("weeks.json") + " " + fx("weeks_rep.json") + " " +
                                    (dir / "hol.json").string() + " --format json");
  EXPECT_EQ(cmp.exit_code, 0) << cmp.out;
  const auto j = nlohmann::json::parse(cmp.out);
  EXPECT_EQ(j["verdict"], "conjugate");
  EXPECT_LT(j["max_trace_deviation"].get<double>(), 1e-6);

  EXPECT_EQ(run_cli("holonomy " + fx("figure_eight.json") + " " + (dir / "sol.json").string()).exit_code, 1);
}

TEST(Cli, CompareDistinct) {
  const fs::path dir = scratch_dir("compare");
  auto rep = nlohmann::json::parse(read_text(fx("lens_5_1_rep.json")));
  auto& g0 = rep["generators"]["g0"];
  g0 = {{0.5, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {2.0, 0.0}};
  std::ofstream(dir / "other.json") << rep.dump();
  const CommandResult r = run_cli("compare " + fx("lens_5_1.json") + " " + fx("lens_5_1_rep.json") + " " +
                                  (dir / "other.json").string() + " --format json");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(nlohmann::json::parse(r.out)["verdict"], "distinct");
}

TEST(Cli, Solve) {
  const CommandResult r = run_cli("solve " + fx("figure_eight.json") + " --format json");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["volume"].get<double>(), 2.029883212819, 1e-8);
  for (const auto& z : j["shapes"]) {
    EXPECT_NEAR(z[0].get<double>(), 0.5, 1e-8);
    EXPECT_NEAR(z[1].get<double>(), std::sqrt(3.0) / 2, 1e-8);
  }
  EXPECT_EQ(run_cli("solve " + fx("figure_eight.json") + " --max-iters 0").exit_code, 2);
  const CommandResult started = run_cli("solve " + fx("weeks.json") + " --start " + fx("weeks_solution.json"));
  EXPECT_EQ(started.exit_code, 0);
  EXPECT_NE(started.out.find("0 iterations"), std::string::npos) << started.out;
}
