#pragma once

#include <cstdint>
#include <vector>

#include "lrp/box.hpp"
#include "lrp/config.hpp"

namespace lrp {

// Union-find with path compression and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::uint32_t n) : parent_(n), size_(n, 1) {
    for (std::uint32_t i = 0; i < n; ++i) parent_[i] = i;
  }

  std::uint32_t find(std::uint32_t x) {
    std::uint32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const std::uint32_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

  std::uint32_t size_of(std::uint32_t x) { return size_[find(x)]; }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

// Exact partition of box sites into open-bond components. Roots are
// canonical: the smallest site index of the cluster.
struct ClusterLabeling {
  std::vector<std::uint32_t> root;       // per site, canonical root
  std::vector<std::uint32_t> root_size;  // cluster size at root index, 0 elsewhere
  std::uint32_t cluster_count = 0;

  std::uint32_t size_of(std::uint32_t site) const { return root_size[root[site]]; }
};

ClusterLabeling label_clusters(const Configuration& config);

// Largest intersection of a single cluster with the given region; ties break
// toward the smallest canonical root.
struct CubeClusterStat {
  std::uint32_t size = 0;
  std::uint32_t root = 0;
  std::vector<std::uint32_t> sites;
};
CubeClusterStat largest_cluster_in_cube(const ClusterLabeling& labeling, const Box& box,
                                        const CubeRegion& cube);

// Per-cube report for the renormalization experiments: the chosen
// semi-cluster is the largest set of in-cube sites lying in one component of
// the K-enlarged cube's induced subgraph (ties by smallest root); the cube is
// alive when that set reaches `threshold`.
struct CubeReport {
  std::uint32_t cube = 0;          // ordinal in the M-cube grid
  Coord grid_coord = {0, 0, 0, 0};
  bool alive = false;
  std::uint32_t semi_size = 0;
  std::vector<std::uint32_t> semi_sites;  // sorted site indices
};

std::vector<CubeReport> cube_aliveness(const Configuration& config, std::int64_t m,
                                       std::int64_t k_enlarge, std::uint32_t threshold);

// True iff some open bond joins A's semi-cluster to B's.
bool cubes_attached(const Configuration& config, const CubeReport& a, const CubeReport& b);

// All attached cube pairs at once: one pass over the bond list, keeping
// bonds whose endpoints lie in the semi-clusters of two distinct cubes.
std::vector<std::pair<std::uint32_t, std::uint32_t>> attachment_pairs(
    const Configuration& config, const CubeGrid& grid, const std::vector<CubeReport>& reports);

// Pilot estimate of the infinite-cluster density proxy: largest cluster size
// over box volume.
double alpha_proxy(const Configuration& config);

}  // namespace lrp
