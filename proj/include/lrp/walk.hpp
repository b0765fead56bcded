#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lrp/electro.hpp"
#include "lrp/rng.hpp"

namespace lrp {

// Conductance-weighted random walk: from a vertex, each incident edge is
// taken with probability proportional to its conductance.
enum class WalkOutcome { Returned, Escaped, BudgetExhausted };

struct WalkSummary {
  WalkOutcome outcome = WalkOutcome::BudgetExhausted;
  std::uint64_t steps = 0;
  std::uint32_t final_vertex = 0;
};

// Single trajectory from `start`; stops on first return to start, first hit
// of the boundary set, or budget exhaustion. Deterministic given the seed.
WalkSummary random_walk(const ElectricalNetwork& net, std::uint32_t start,
                        std::span<const std::uint32_t> boundary, std::uint64_t budget,
                        const SeedRecord& seed);

struct EscapeEstimate {
  double probability = 0;  // of hitting the boundary before returning to start
  double stderr_ = 0;
  std::uint64_t returned = 0;
  std::uint64_t escaped = 0;
  std::uint64_t exhausted = 0;  // reported separately, never folded in
  std::uint64_t replicas = 0;
};

// Monte Carlo escape probability over independent replicas with derived
// seeds. The estimate uses decided walks only; exhausted ones are counted
// separately.
EscapeEstimate escape_probability(const ElectricalNetwork& net, std::uint32_t start,
                                  std::span<const std::uint32_t> boundary,
                                  std::uint64_t replicas, std::uint64_t budget,
                                  const SeedRecord& seed);

// The solver-side identity for validating walk estimates:
// P(escape) = C_eff(start <-> boundary) / C(start).
double escape_probability_identity(const ElectricalNetwork& net, std::uint32_t start,
                                   std::span<const std::uint32_t> boundary,
                                   double tol = 1e-10);

struct ProfilePoint {
  std::int64_t radius = 0;
  double resistance = 0;
  bool infinite = false;
  double escape = 0;
  double escape_stderr = 0;
  std::uint64_t replicas = 0;
};

// Resistance and escape estimates from a start vertex to the boundary shells
// of an embedded network, one point per radius. The transient signature is a
// resistance plateau, the recurrent one unbounded growth.
std::vector<ProfilePoint> recurrence_profile(const ElectricalNetwork& net,
                                             std::uint32_t start,
                                             std::span<const std::int64_t> radii,
                                             std::uint64_t walk_replicas,
                                             std::uint64_t walk_budget,
                                             const SeedRecord& seed, double tol = 1e-8);

// vertices at embedding radius >= r (boundary shell for the profile)
std::vector<std::uint32_t> shell_vertices(const ElectricalNetwork& net, std::int64_t r);

}  // namespace lrp
