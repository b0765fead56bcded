#include "lrp/walk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lrp {

namespace {

struct WalkTables {
  ElectricalNetwork::Adjacency adj;
  std::vector<double> total;  // total conductance per vertex

  explicit WalkTables(const ElectricalNetwork& net) : adj(net.adjacency()) {
    total.assign(net.n, 0.0);
    for (std::uint32_t v = 0; v < net.n; ++v)
      for (std::uint32_t i = adj.offsets[v]; i < adj.offsets[v + 1]; ++i)
        total[v] += adj.cond[i];
  }

  std::uint32_t step(std::uint32_t v, Rng& rng) const {
    const double pick = rng.next_unit() * total[v];
    double acc = 0;
    std::uint32_t last = v;
    for (std::uint32_t i = adj.offsets[v]; i < adj.offsets[v + 1]; ++i) {
      acc += adj.cond[i];
      last = adj.to[i];
      if (pick < acc) return last;
    }
    return last;  // numerically at the top end
  }
};

WalkSummary run_walk(const WalkTables& tables, std::uint32_t start,
                     const std::vector<char>& is_boundary, std::uint64_t budget, Rng& rng) {
  WalkSummary out;
  std::uint32_t v = start;
  for (std::uint64_t s = 0; s < budget; ++s) {
    v = tables.step(v, rng);
    out.steps = s + 1;
    if (is_boundary[v]) {
      out.outcome = WalkOutcome::Escaped;
      out.final_vertex = v;
      return out;
    }
    if (v == start) {
      out.outcome = WalkOutcome::Returned;
      out.final_vertex = v;
      return out;
    }
  }
  out.outcome = WalkOutcome::BudgetExhausted;
  out.final_vertex = v;
  return out;
}

}  // namespace

WalkSummary random_walk(const ElectricalNetwork& net, std::uint32_t start,
                        std::span<const std::uint32_t> boundary, std::uint64_t budget,
                        const SeedRecord& seed) {
  seed.require_supported();
  WalkTables tables(net);
  if (tables.total.at(start) <= 0)
    throw std::invalid_argument("random_walk: start vertex has no positive conductance");
  std::vector<char> is_boundary(net.n, 0);
  for (std::uint32_t b : boundary) is_boundary.at(b) = 1;
  Rng rng(derive_key(seed.seed, "walk"));
  return run_walk(tables, start, is_boundary, budget, rng);
}

EscapeEstimate escape_probability(const ElectricalNetwork& net, std::uint32_t start,
                                  std::span<const std::uint32_t> boundary,
                                  std::uint64_t replicas, std::uint64_t budget,
                                  const SeedRecord& seed) {
  seed.require_supported();
  WalkTables tables(net);
  if (tables.total.at(start) <= 0)
    throw std::invalid_argument("escape_probability: start vertex has no positive conductance");
  std::vector<char> is_boundary(net.n, 0);
  for (std::uint32_t b : boundary) is_boundary.at(b) = 1;

  EscapeEstimate est;
  est.replicas = replicas;
  const std::uint64_t base = derive_key(seed.seed, "escape");
  for (std::uint64_t rep = 0; rep < replicas; ++rep) {
    Rng rng(derive_key(base, rep));
    const WalkSummary w = run_walk(tables, start, is_boundary, budget, rng);
    switch (w.outcome) {
      case WalkOutcome::Returned: ++est.returned; break;
      case WalkOutcome::Escaped: ++est.escaped; break;
      case WalkOutcome::BudgetExhausted: ++est.exhausted; break;
    }
  }
  const double decided = static_cast<double>(est.returned + est.escaped);
  if (decided > 0) {
    est.probability = static_cast<double>(est.escaped) / decided;
    est.stderr_ = std::sqrt(est.probability * (1.0 - est.probability) / decided);
  }
  return est;
}

double escape_probability_identity(const ElectricalNetwork& net, std::uint32_t start,
                                   std::span<const std::uint32_t> boundary, double tol) {
  double c_start = 0;
  for (const NetEdge& e : net.edges)
    if (e.c > 0 && (e.u == start || e.v == start)) c_start += e.c;
  if (c_start <= 0)
    throw std::invalid_argument("escape_probability_identity: isolated start vertex");
  const std::uint32_t src[1] = {start};
  const ResistanceResult rr =
      effective_resistance(net, std::span<const std::uint32_t>(src, 1), boundary, tol);
  if (rr.infinite) return 0.0;
  return rr.conductance / c_start;
}

std::vector<std::uint32_t> shell_vertices(const ElectricalNetwork& net, std::int64_t r) {
  if (net.embed_dim == 0)
    throw std::invalid_argument("shell_vertices: network has no lattice embedding");
  std::vector<std::uint32_t> out;
  for (std::uint32_t v = 0; v < net.n; ++v) {
    std::int64_t rad = std::abs(net.coords[v][0]);
    if (net.embed_dim == 2) rad = std::max(rad, std::abs(net.coords[v][1]));
    if (rad >= r) out.push_back(v);
  }
  return out;
}

std::vector<ProfilePoint> recurrence_profile(const ElectricalNetwork& net,
                                             std::uint32_t start,
                                             std::span<const std::int64_t> radii,
                                             std::uint64_t walk_replicas,
                                             std::uint64_t walk_budget,
                                             const SeedRecord& seed, double tol) {
  std::vector<ProfilePoint> out;
  const std::uint32_t src[1] = {start};
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const std::int64_t r = radii[i];
    ProfilePoint pt;
    pt.radius = r;
    const std::vector<std::uint32_t> shell = shell_vertices(net, r);
    if (shell.empty()) throw std::invalid_argument("recurrence_profile: empty boundary shell");
    const ResistanceResult rr =
        effective_resistance(net, std::span<const std::uint32_t>(src, 1), shell, tol);
    pt.infinite = rr.infinite;
    pt.resistance = rr.infinite ? 0.0 : rr.resistance;
    if (walk_replicas > 0) {
      SeedRecord s2 = seed;
      s2.seed = derive_key(seed.seed, static_cast<std::uint64_t>(r));
      const EscapeEstimate est =
          escape_probability(net, start, shell, walk_replicas, walk_budget, s2);
      pt.escape = est.probability;
      pt.escape_stderr = est.stderr_;
      pt.replicas = est.replicas;
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace lrp
