#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrp/rational.hpp"
#include "lrp/renorm.hpp"

namespace lrp {

// Hierarchical graph for a schedule C_1..C_L. Vertices carry level-tuple
// addresses (j_L, ..., j_1), 1 <= j_n <= C_n, encoded as mixed-radix ids with
// coordinate 1 fastest; a level-m group (fixed j_L..j_{m+1}) is then the
// contiguous id range [base, base + C_1...C_m). The lexicographically
// smallest vertex of a group is its base id.
//
// Canonical structure per level:
//   1: every level-1 group is the complete graph on its C_1 vertices;
//   2: every vertex of a level-1 copy has an edge to the base vertex of each
//      sibling copy (port scheme);
//   m>=3: for every pair of distinct (m-1)-copies and every pair of their
//      (m-2)-groups, one edge joining the two group bases.
// Level m>=3 realizes exactly the defining requirement that any two
// (m-2)-stage subgraphs in distinct (m-1)-stage subgraphs are joined.
struct RenormalizedGraph {
  std::vector<std::int64_t> schedule;  // C_1..C_L
  int depth = 0;
  bool sampled = false;
  std::uint32_t vertex_count = 0;
  std::vector<std::int64_t> group_size;  // group_size[m] = C_1...C_m, [0] = 1
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // sorted, u < v

  // sampled mode: designated port vertices per required group pair, keyed by
  // (level, baseA, baseB) with baseA < baseB; value = (port in A, port in B)
  std::map<std::tuple<int, std::uint32_t, std::uint32_t>,
           std::pair<std::uint32_t, std::uint32_t>>
      ports;
  // sampled mode: graph vertex id -> unit ordinal of the source hierarchy
  std::vector<std::uint32_t> unit_of_vertex;

  std::string address_of(std::uint32_t id) const;
  std::uint32_t id_of_address(const std::vector<int>& j) const;  // j[0] = j_L

  bool has_edge(std::uint32_t u, std::uint32_t v) const;
};

// Thrown by the sampled builder when a required group pair has no witnessing
// open bond.
struct MissingEdgeError : std::runtime_error {
  int level;
  std::string group_a;
  std::string group_b;
  MissingEdgeError(int lvl, std::string a, std::string b)
      : std::runtime_error("renormalized graph: no open bond between level-" +
                           std::to_string(lvl) + " required groups " + a + " and " + b),
        level(lvl), group_a(std::move(a)), group_b(std::move(b)) {}
};

RenormalizedGraph build_renorm_graph(const std::vector<std::int64_t>& schedule, int depth);

// Extract a renormalized graph from a percolation hierarchy (subgraph
// schedule): the chosen active tree supplies the addresses; open bonds
// between active parts supply the port edges. Level-1 adjacency is
// connectivity-witnessed (the actives of a living stage-1 vertex lie in one
// open component), so level-1 groups are taken complete.
RenormalizedGraph build_renorm_graph_sampled(const HierarchyInput& input, int depth);

// Brute-force check of the defining property (plus the level-1/level-2
// conventions) over all index tuples. Throws MissingEdgeError on failure.
void verify_defining_property(const RenormalizedGraph& graph);

struct FlowEdge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  Rat value;  // flow from u to v; negative means v to u
};

// Unit flow from the all-ones source vertex to the level-L sinks (vertices
// with every coordinate >= 2), each sink absorbing 1/prod(C_n - 1).
struct Flow {
  std::uint32_t source = 0;
  std::vector<std::uint32_t> sinks;
  Rat sink_share;
  std::vector<FlowEdge> edges;  // nonzero flows only, sorted by (u, v)

  // max |net flow| over non-source, non-sink vertices (exact); also checks
  // the source emits 1 and each sink absorbs sink_share
  Rat max_conservation_residual() const;
};

// Recursive unit flow: spread within the source's level-1 group, then stage
// by stage gather each (n-1)-group's share to its port, cross to the sibling
// copy and flood it by the reverse scheme. Mass splits equally; coincident
// ports accumulate (double portions). Exact rational arithmetic.
Flow build_flow(const RenormalizedGraph& graph);

// sum over undirected edges of |f(e)|^q, q > 1
double q_energy(const Flow& flow, double q);

// sum over vertices of f(v)^2 with f(v) = half the total incident |flow|;
// source and sinks included under the same formula
double vertex_energy(const Flow& flow);

// Iterated bound E_n = (1 + 1/C_{n-1}) E_{n-1} + 1/(C_n C_{n-1}) with
// E_1 = 1/(C_1 - 1), the stage-1 flow energy; returns E_L.
double energy_recursion_bound(const std::vector<std::int64_t>& schedule, int depth);

}  // namespace lrp
