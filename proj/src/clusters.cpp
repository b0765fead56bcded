#include "lrp/clusters.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace lrp {

ClusterLabeling label_clusters(const Configuration& config) {
  const std::uint32_t n = config.box.site_count();
  UnionFind uf(n);
  for (const Bond& b : config.bonds) uf.unite(b.u, b.v);

  ClusterLabeling out;
  out.root.assign(n, 0);
  out.root_size.assign(n, 0);
  // canonicalize roots to the smallest member index
  std::vector<std::uint32_t> canon(n, UINT32_MAX);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t r = uf.find(i);
    if (canon[r] == UINT32_MAX) canon[r] = i;  // first visit = smallest index
  }
  out.cluster_count = 0;
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t c = canon[uf.find(i)];
    out.root[i] = c;
    if (out.root_size[c]++ == 0) ++out.cluster_count;
  }
  return out;
}

CubeClusterStat largest_cluster_in_cube(const ClusterLabeling& labeling, const Box& box,
                                        const CubeRegion& cube) {
  std::unordered_map<std::uint32_t, std::uint32_t> count;
  const std::vector<std::uint32_t> sites = cube.sites(box);
  for (std::uint32_t s : sites) ++count[labeling.root[s]];
  CubeClusterStat best;
  best.root = UINT32_MAX;
  for (const auto& [root, c] : count) {
    if (c > best.size || (c == best.size && root < best.root)) {
      best.size = c;
      best.root = root;
    }
  }
  best.sites.reserve(best.size);
  for (std::uint32_t s : sites)
    if (labeling.root[s] == best.root) best.sites.push_back(s);
  std::sort(best.sites.begin(), best.sites.end());
  return best;
}

std::vector<CubeReport> cube_aliveness(const Configuration& config, std::int64_t m,
                                       std::int64_t k_enlarge, std::uint32_t threshold) {
  if (k_enlarge < 0) throw std::invalid_argument("cube_aliveness: K must be >= 0");
  const CubeGrid grid(config.box, m);
  const auto adj = config.adjacency();

  std::vector<CubeReport> reports(grid.cube_count());
  // Scratch arrays sized for the whole box; component ids are stamped per
  // cube with an epoch counter so no per-cube reset is needed.
  const std::uint32_t nsites = config.box.site_count();
  std::vector<std::uint32_t> comp(nsites, 0);
  std::vector<std::uint32_t> epoch(nsites, UINT32_MAX);
  std::vector<std::uint32_t> stack;

  for (std::uint32_t cube = 0; cube < grid.cube_count(); ++cube) {
    CubeReport& rep = reports[cube];
    rep.cube = cube;
    rep.grid_coord = grid.cube_coord(cube);

    const CubeRegion enlarged = grid.cube_region(cube, k_enlarge);
    const CubeRegion inner = grid.cube_region(cube, 0);
    const std::vector<std::uint32_t> region_sites = enlarged.sites(config.box);

    // connected components of the induced subgraph on the enlarged region
    std::uint32_t next_comp = 0;
    for (std::uint32_t s : region_sites) {
      if (epoch[s] == cube) continue;
      const std::uint32_t id = next_comp++;
      epoch[s] = cube;
      comp[s] = id;
      stack.assign(1, s);
      while (!stack.empty()) {
        const std::uint32_t x = stack.back();
        stack.pop_back();
        for (std::uint32_t i = adj.offsets[x]; i < adj.offsets[x + 1]; ++i) {
          const std::uint32_t y = adj.neighbors[i];
          if (epoch[y] == cube) continue;
          if (!enlarged.contains(config.box.coord_of(y))) continue;
          epoch[y] = cube;
          comp[y] = id;
          stack.push_back(y);
        }
      }
    }

    // Largest per-component intersection with the inner cube. Component ids
    // are assigned in ascending order of the component's smallest site, so
    // tie-breaking by id is tie-breaking by smallest canonical root.
    std::unordered_map<std::uint32_t, std::uint32_t> count;
    for (std::uint32_t s : inner.sites(config.box)) ++count[comp[s]];
    std::uint32_t best_comp = UINT32_MAX, best_size = 0;
    for (const auto& [id, c] : count) {
      if (c > best_size || (c == best_size && id < best_comp)) {
        best_comp = id;
        best_size = c;
      }
    }
    rep.semi_size = best_size;
    if (best_comp != UINT32_MAX) {
      for (std::uint32_t s : inner.sites(config.box))
        if (comp[s] == best_comp) rep.semi_sites.push_back(s);
      std::sort(rep.semi_sites.begin(), rep.semi_sites.end());
    }
    rep.alive = rep.semi_size >= threshold;
  }
  return reports;
}

bool cubes_attached(const Configuration& config, const CubeReport& a, const CubeReport& b) {
  std::unordered_set<std::uint32_t> in_a(a.semi_sites.begin(), a.semi_sites.end());
  std::unordered_set<std::uint32_t> in_b(b.semi_sites.begin(), b.semi_sites.end());
  for (const Bond& bond : config.bonds) {
    if (in_a.count(bond.u) && in_b.count(bond.v)) return true;
    if (in_a.count(bond.v) && in_b.count(bond.u)) return true;
  }
  return false;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> attachment_pairs(
    const Configuration& config, const CubeGrid& grid, const std::vector<CubeReport>& reports) {
  // membership mask: site -> is it in its cube's chosen semi-cluster?
  std::vector<char> in_semi(config.box.site_count(), 0);
  for (const CubeReport& r : reports)
    for (std::uint32_t s : r.semi_sites) in_semi[s] = 1;

  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (const Bond& b : config.bonds) {
    if (!in_semi[b.u] || !in_semi[b.v]) continue;
    std::uint32_t cu = grid.cube_of_site(b.u);
    std::uint32_t cv = grid.cube_of_site(b.v);
    if (cu == cv) continue;
    if (cu > cv) std::swap(cu, cv);
    pairs.emplace_back(cu, cv);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

double alpha_proxy(const Configuration& config) {
  const ClusterLabeling lab = label_clusters(config);
  std::uint32_t largest = 0;
  for (std::uint32_t s : lab.root_size) largest = std::max(largest, s);
  return static_cast<double>(largest) / static_cast<double>(config.box.site_count());
}

}  // namespace lrp
