#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

#include "lrp/clusters.hpp"
#include "lrp/parallel.hpp"

using namespace lrp;

namespace {

// independent BFS component oracle
std::vector<std::uint32_t> bfs_components(const Configuration& c) {
  const std::uint32_t n = c.box.site_count();
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (const Bond& b : c.bonds) {
    adj[b.u].push_back(b.v);
    adj[b.v].push_back(b.u);
  }
  std::vector<std::uint32_t> comp(n, UINT32_MAX);
  for (std::uint32_t s = 0; s < n; ++s) {
    if (comp[s] != UINT32_MAX) continue;
    comp[s] = s;
    std::queue<std::uint32_t> q;
    q.push(s);
    while (!q.empty()) {
      const std::uint32_t x = q.front();
      q.pop();
      for (std::uint32_t y : adj[x])
        if (comp[y] == UINT32_MAX) {
          comp[y] = s;
          q.push(y);
        }
    }
  }
  return comp;
}

}  // namespace

TEST_CASE("label_clusters trivial cases") {
  SUBCASE("empty configuration: all singletons") {
    const Configuration c = Configuration::from_bonds(Box(1, 6), {});
    const ClusterLabeling lab = label_clusters(c);
    CHECK(lab.cluster_count == 6);
    for (std::uint32_t i = 0; i < 6; ++i) {
      CHECK(lab.root[i] == i);
      CHECK(lab.size_of(i) == 1);
    }
  }
  SUBCASE("path bonds make one 4-cluster plus singletons") {
    const Configuration c =
        Configuration::from_bonds(Box(1, 6), {{0, 1}, {1, 2}, {2, 3}});
    const ClusterLabeling lab = label_clusters(c);
    CHECK(lab.cluster_count == 3);
    for (std::uint32_t i = 0; i < 4; ++i) CHECK(lab.root[i] == 0);
    CHECK(lab.size_of(0) == 4);
    CHECK(lab.size_of(4) == 1);
  }
}

TEST_CASE("label_clusters equals the BFS oracle on random instances") {
  for (std::uint64_t trial = 0; trial < 40; ++trial) {
    Rng rng(derive_key(808, trial));
    const Box box(2, 16);
    std::vector<Bond> bonds;
    for (int i = 0; i < 50; ++i) {
      const std::uint32_t u = static_cast<std::uint32_t>(rng.below(256));
      const std::uint32_t v = static_cast<std::uint32_t>(rng.below(256));
      if (u != v) bonds.push_back({std::min(u, v), std::max(u, v)});
    }
    const Configuration c = Configuration::from_bonds(box, bonds);
    const ClusterLabeling lab = label_clusters(c);
    const std::vector<std::uint32_t> oracle = bfs_components(c);
    for (std::uint32_t i = 0; i < 256; ++i) CHECK(lab.root[i] == oracle[i]);
    std::uint64_t sum = 0;
    for (std::uint32_t r : lab.root_size) sum += r;
    CHECK(sum == 256);
  }
}

TEST_CASE("largest_cluster_in_cube") {
  const Box box(1, 8);
  SUBCASE("empty configuration: size 1") {
    const Configuration c = Configuration::from_bonds(box, {});
    const ClusterLabeling lab = label_clusters(c);
    CubeRegion cube{1, {2, 0, 0, 0}, {4, 1, 1, 1}};
    CHECK(largest_cluster_in_cube(lab, box, cube).size == 1);
  }
  SUBCASE("full cluster covers the cube") {
    std::vector<Bond> bonds;
    for (std::uint32_t i = 0; i + 1 < 8; ++i) bonds.push_back({i, i + 1});
    const ClusterLabeling lab = label_clusters(Configuration::from_bonds(box, bonds));
    CubeRegion cube{1, {2, 0, 0, 0}, {4, 1, 1, 1}};
    const auto stat = largest_cluster_in_cube(lab, box, cube);
    CHECK(stat.size == 4);
    CHECK(stat.sites == std::vector<std::uint32_t>{2, 3, 4, 5});
  }
  SUBCASE("matches exhaustive per-cluster count on random instances") {
    for (std::uint64_t trial = 0; trial < 25; ++trial) {
      Rng rng(derive_key(909, trial));
      std::vector<Bond> bonds;
      for (int i = 0; i < 20; ++i) {
        const std::uint32_t u = static_cast<std::uint32_t>(rng.below(8));
        const std::uint32_t v = static_cast<std::uint32_t>(rng.below(8));
        if (u != v) bonds.push_back({std::min(u, v), std::max(u, v)});
      }
      const Configuration c = Configuration::from_bonds(box, bonds);
      const ClusterLabeling lab = label_clusters(c);
      CubeRegion cube{1, {2, 0, 0, 0}, {4, 1, 1, 1}};
      const auto stat = largest_cluster_in_cube(lab, box, cube);
      std::map<std::uint32_t, std::uint32_t> counts;
      for (std::uint32_t s = 2; s < 6; ++s) ++counts[lab.root[s]];
      std::uint32_t best = 0;
      for (const auto& [r, cnt] : counts) best = std::max(best, cnt);
      CHECK(stat.size == best);
    }
  }
}

TEST_CASE("cube_aliveness") {
  SUBCASE("K = 0 reduces to the in-cube largest cluster") {
    const Box box(1, 16);
    std::vector<Bond> bonds = {{0, 1}, {1, 2}, {4, 5}, {8, 9}, {9, 10}, {10, 11}};
    const Configuration c = Configuration::from_bonds(box, bonds);
    const auto reports = cube_aliveness(c, 4, 0, 3);
    REQUIRE(reports.size() == 4);
    CHECK(reports[0].alive);
    CHECK(reports[0].semi_size == 3);
    CHECK_FALSE(reports[1].alive);
    CHECK(reports[2].alive);
    CHECK(reports[2].semi_size == 4);
    CHECK_FALSE(reports[3].alive);
  }
  SUBCASE("fully open nearest-neighbor skeleton: every cube alive at M^d") {
    const Box box(2, 8);
    std::vector<Bond> bonds;
    for (std::int64_t x = 0; x < 8; ++x)
      for (std::int64_t y = 0; y < 8; ++y) {
        if (x + 1 < 8)
          bonds.push_back({box.index_of({x, y, 0, 0}), box.index_of({x + 1, y, 0, 0})});
        if (y + 1 < 8)
          bonds.push_back({box.index_of({x, y, 0, 0}), box.index_of({x, y + 1, 0, 0})});
      }
    const Configuration c = Configuration::from_bonds(box, bonds);
    for (const auto& rep : cube_aliveness(c, 4, 0, 16)) CHECK(rep.alive);
  }
  SUBCASE("planted shell connection needs K at least the shell width") {
    // middle cube [8,15] split into halves joined only through sites 16,17
    const Box box(1, 24);
    std::vector<Bond> bonds = {{8, 9}, {9, 10}, {10, 11}, {12, 13}, {13, 14}, {14, 15}};
    bonds.push_back({11, 17});
    bonds.push_back({17, 16});
    bonds.push_back({16, 12});
    const Configuration c = Configuration::from_bonds(box, bonds);
    CHECK_FALSE(cube_aliveness(c, 8, 0, 8)[1].alive);
    CHECK(cube_aliveness(c, 8, 0, 8)[1].semi_size == 4);
    CHECK_FALSE(cube_aliveness(c, 8, 1, 8)[1].alive);  // reaches 16, not 17
    CHECK(cube_aliveness(c, 8, 2, 8)[1].alive);
    CHECK(cube_aliveness(c, 8, 2, 8)[1].semi_size == 8);
  }
  SUBCASE("aliveness is monotone in K and antitone in threshold") {
    Rng rng(515);
    const Box box(1, 32);
    std::vector<Bond> bonds;
    for (int i = 0; i < 40; ++i) {
      const std::uint32_t u = static_cast<std::uint32_t>(rng.below(32));
      const std::uint32_t v = static_cast<std::uint32_t>(rng.below(32));
      if (u != v) bonds.push_back({std::min(u, v), std::max(u, v)});
    }
    const Configuration c = Configuration::from_bonds(box, bonds);
    for (std::uint32_t thr = 1; thr <= 4; ++thr) {
      std::uint32_t prev_alive = 0;
      for (std::int64_t k = 0; k <= 4; ++k) {
        const auto reports = cube_aliveness(c, 8, k, thr);
        std::uint32_t alive = 0;
        for (const auto& r : reports) alive += r.alive ? 1 : 0;
        if (k > 0) CHECK(alive >= prev_alive);
        prev_alive = alive;
      }
    }
    for (std::int64_t k = 0; k <= 2; ++k) {
      std::uint32_t prev_alive = UINT32_MAX;
      for (std::uint32_t thr = 1; thr <= 6; ++thr) {
        const auto reports = cube_aliveness(c, 8, k, thr);
        std::uint32_t alive = 0;
        for (const auto& r : reports) alive += r.alive ? 1 : 0;
        CHECK(alive <= prev_alive);
        prev_alive = alive;
      }
    }
  }
  SUBCASE("cube side must divide the box side") {
    const Configuration c = Configuration::from_bonds(Box(1, 10), {});
    CHECK_THROWS(cube_aliveness(c, 4, 0, 1));
  }
}

TEST_CASE("cubes_attached") {
  const Box box(1, 8);
  const Configuration none = Configuration::from_bonds(box, {{0, 1}, {4, 5}});
  const auto r0 = cube_aliveness(none, 4, 0, 2);
  REQUIRE(r0[0].alive);
  REQUIRE(r0[1].alive);
  CHECK_FALSE(cubes_attached(none, r0[0], r0[1]));

  const Configuration one = Configuration::from_bonds(box, {{0, 1}, {4, 5}, {1, 4}});
  const auto r1 = cube_aliveness(one, 4, 0, 2);
  CHECK(cubes_attached(one, r1[0], r1[1]));
  const auto pairs = attachment_pairs(one, CubeGrid(box, 4), r1);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0] == std::pair<std::uint32_t, std::uint32_t>{0, 1});
}

TEST_CASE("planted-cluster attachment frequency beats the analytic bound") {
  // feasible-rho instance of the connection-probability experiment
  const double s = 1.5, beta = 2.0;
  const std::int64_t n = 256;
  const double rho = 4.0;  // rho N^(s/2) = 4 * 64^... = 256^(0.75)*4 = 256 sites
  const Kernel kernel = Kernel::make_eta(1, s, beta);
  const DerivedConstants consts = derive_constants(kernel);
  const std::int64_t l = 2;
  const double bound = connect_bound(consts, rho, l, s, 1);
  const std::uint64_t planted =
      static_cast<std::uint64_t>(std::ceil(rho * std::pow(double(n), s / 2.0)));
  REQUIRE(planted == static_cast<std::uint64_t>(n));  // full cube

  const std::uint64_t replicas = 2000;
  std::vector<std::uint8_t> hit(replicas, 0);
  parallel_for(replicas, [&](std::uint64_t rep) {
    Rng rng(derive_key(31415, rep));
    for (std::int64_t u = 0; u < n && !hit[rep]; ++u)
      for (std::int64_t v = 0; v < n; ++v) {
        const std::int64_t dist = l * n + v - u;
        if (rng.bernoulli(eta(beta, static_cast<double>(dist), s))) {
          hit[rep] = 1;
          break;
        }
      }
  });
  std::uint64_t good = 0;
  for (auto h : hit) good += h;
  const double freq = static_cast<double>(good) / replicas;
  const double sigma = std::sqrt(bound * (1 - bound) / replicas);
  CHECK(freq >= bound - 3 * sigma);
}
