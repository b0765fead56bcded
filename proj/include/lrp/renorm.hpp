#pragma once

#include <cstdint>
#include <vector>

#include "lrp/box.hpp"
#include "lrp/clusters.hpp"

namespace lrp {

// Multi-stage renormalization schedule.
//   Polynomial: stage-n vertices are cubes of side C_n = n^a of (n-1)-stage
//     vertices, alive when at least D_n C_n^d = n^(da-b) of those are alive
//     and every two of them are attached. Valid when a > b > 1 and
//     2b < a(2d-s).
//   Subgraph: sides W_n = 2(n+1)^2, alive thresholds theta_n = 1 - n^-1.5/2,
//     target alive fractions lambda_n = 1 - (n+1)^-1.5/4, active counts
//     C_n = (n+1)^2d. Parameter-free given d.
enum class ScheduleVariant { Polynomial, Subgraph };

struct StageSchedule {
  ScheduleVariant variant = ScheduleVariant::Polynomial;
  int a = 4;        // polynomial exponent for C_n = n^a (integer so grids stay integral)
  double b = 1.5;   // polynomial exponent for D_n = n^-b
  int depth = 2;    // L

  std::int64_t side(int n, int d) const;        // stage-n side in (n-1)-stage units
  double alive_threshold(int n, int d) const;   // required living sub-vertex count
  std::int64_t active_count(int n, int d) const;  // subgraph variant: C_n actives
};

// Throws with the violated inequality named; returns the schedule otherwise.
StageSchedule validate_schedule(const StageSchedule& sched, int d, double s);

struct StageOutcome {
  int stage = 0;
  std::uint32_t vertex_count = 0;
  std::uint32_t alive_count = 0;
  std::uint32_t a_failures = 0;  // not enough living sub-vertices
  std::uint32_t b_failures = 0;  // enough alive, but some required pair unattached
  double alive_fraction() const {
    return vertex_count ? static_cast<double>(alive_count) / vertex_count : 0.0;
  }
};

// Stage-1 unit reports plus the cube-level attachment relation; everything
// the hierarchy needs is derivable from these (bonds between higher-stage
// clusters are exactly bonds between constituent semi-clusters).
struct HierarchyInput {
  int d = 1;
  std::int64_t units_per_axis = 1;  // stage-1 grid extent
  std::vector<char> unit_alive;     // per unit ordinal (row-major)
  std::vector<std::pair<std::uint32_t, std::uint32_t>> attachments;  // unit pairs, u < v
  std::uint32_t origin_unit = 0;    // unit containing the lattice origin
};

HierarchyInput hierarchy_input_from_config(const Configuration& config, std::int64_t m,
                                           std::int64_t k_enlarge, std::uint32_t threshold);

// Site-bond input for the subgraph variant: units are the lattice sites
// themselves, alive independently with probability lambda, attached exactly
// when an open bond joins them.
HierarchyInput hierarchy_input_site_bond(const Configuration& config, double lambda,
                                         const SeedRecord& seed);

// Bottom-up aliveness per the schedule's definition. For the subgraph
// variant, per-vertex active parts are selected (smallest ordinal first, the
// origin's unit preferred when it qualifies) and condition (B) is checked
// between active parts of (n-2)-stage vertices lying in distinct (n-1)-stage
// vertices.
struct HierarchyResult {
  std::vector<StageOutcome> stages;
  // subgraph variant: active unit ordinals per living top-stage vertex
  std::vector<std::vector<std::uint32_t>> active_units;
  // subgraph variant: per grouping stage (index 0 = stage 1), the ordered
  // list of chosen active sub-vertices per living vertex; order defines the
  // renormalized-graph coordinate (first entry = index 1).
  std::vector<std::vector<std::vector<std::uint32_t>>> chosen_children;
};

HierarchyResult run_hierarchy(const HierarchyInput& input, const StageSchedule& sched);

// Closed-form bound on the probability that some pair of living sub-vertices
// of a polynomial-schedule stage-n vertex is unattached:
//   psi_n <= C_n^2d exp(-beta U_n^-s V_n^2),
//   V_n = ((n-1)!)^(da-b), U_n = d (n!)^a,
// evaluated in log space.
double psi_bound(int n, double beta, const StageSchedule& sched, int d, double s);

// Subgraph-variant bounds: condition-(B) failure probability
//   4^d (n+1)^8d exp(-beta 2^-ns ((n+1)!)^(4d-2s))
// and the large-deviation bound exp(-n^(2d-1.5)/32).
struct SubgraphBounds {
  double condition_b = 0;
  double large_deviation = 0;
};
SubgraphBounds subgraph_bounds(int n, int d, double beta, double s);

}  // namespace lrp
