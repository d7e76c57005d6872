#pragma once

#include <array>
#include <cstdio>
#include <sys/wait.h>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "spinglue/spinglue.hpp"

namespace spinglue::testing {

inline std::string fixture_path(const std::string& name) { return std::string(SPINGLUE_FIXTURE_DIR) + "/" + name; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Triangulation load_fixture(const std::string& name) {
  return parse_triangulation(read_text(fixture_path(name + ".json")));
}

inline Representation load_rep(const std::string& name, const Presentation& pres) {
  return representation_from_json(nlohmann::json::parse(read_text(fixture_path(name))), pres);
}

// Uniform integer in [0, n).
inline std::size_t below(SplitMix64& rng, std::size_t n) { return static_cast<std::size_t>(rng.next() % n); }

inline Complex random_complex(SplitMix64& rng, double scale = 2.0) {
  return {scale * (2.0 * rng.uniform() - 1.0), scale * (2.0 * rng.uniform() - 1.0)};
}

inline Mobius random_mobius(SplitMix64& rng) {
  for (;;) {
    Mobius m{random_complex(rng), random_complex(rng), random_complex(rng), random_complex(rng)};
    if (std::abs(m.det()) > 0.1) return m.normalized();
  }
}

// Random odd permutation with p[from] = to.
inline Perm4 random_odd_perm(SplitMix64& rng, int from, int to) {
  std::array<int, 3> rest{};
  std::size_t k = 0;
  for (int v = 0; v < 4; ++v)
    if (v != to) rest[k++] = v;
  for (std::size_t i = 2; i > 0; --i) std::swap(rest[i], rest[below(rng, i + 1)]);
  std::array<int, 4> image{};
  image[static_cast<std::size_t>(from)] = to;
  k = 0;
  for (int v = 0; v < 4; ++v)
    if (v != from) image[static_cast<std::size_t>(v)] = rest[k++];
  Perm4 p(image);
  if (p.sign() > 0) {
    int a = -1, b = -1;
    for (int v = 0; v < 4; ++v)
      if (v != from) (a < 0 ? a : b) = v;
    std::swap(image[static_cast<std::size_t>(a)], image[static_cast<std::size_t>(b)]);
    p = Perm4(image);
  }
  return p;
}

// A random closed oriented gluing table: faces paired uniformly at random.
inline Triangulation::GluingTable random_gluing_table(SplitMix64& rng, std::size_t n) {
  std::vector<std::size_t> slots(4 * n);
  std::iota(slots.begin(), slots.end(), 0);
  for (std::size_t i = slots.size() - 1; i > 0; --i) std::swap(slots[i], slots[below(rng, i + 1)]);
  Triangulation::GluingTable table(n);
  for (std::size_t i = 0; i < slots.size(); i += 2) {
    const std::size_t a = slots[i], b = slots[i + 1];
    const std::size_t ta = a / 4, tb = b / 4;
    const int fa = static_cast<int>(a % 4), fb = static_cast<int>(b % 4);
    const Perm4 p = random_odd_perm(rng, fa, fb);
    table[ta][static_cast<std::size_t>(fa)] = FaceGluing{tb, p};
    table[tb][static_cast<std::size_t>(fb)] = FaceGluing{ta, p.inverse()};
  }
  return table;
}

// Same triangulation with tetrahedron t renamed to sigma[t].
inline Triangulation::GluingTable relabel_tetrahedra(const Triangulation& tri, const std::vector<std::size_t>& sigma) {
  Triangulation::GluingTable table(tri.size());
  for (std::size_t t = 0; t < tri.size(); ++t)
    for (int f = 0; f < 4; ++f) {
      const FaceGluing g = tri.gluing(t, f);
      table[sigma[t]][static_cast<std::size_t>(f)] = FaceGluing{sigma[g.tet], g.perm};
    }
  return table;
}

inline std::vector<std::size_t> random_permutation(SplitMix64& rng, std::size_t n) {
  std::vector<std::size_t> sigma(n);
  std::iota(sigma.begin(), sigma.end(), 0);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(sigma[i], sigma[below(rng, i + 1)]);
  return sigma;
}

struct CommandResult {
  int exit_code = -1;
  std::string out;
};

// Runs the CLI with the given argument string; stderr is discarded unless merged.
inline CommandResult run_cli(const std::string& args, bool merge_stderr = false) {
  const std::string cmd = std::string(SPINGLUE_CLI) + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
  CommandResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace spinglue::testing
