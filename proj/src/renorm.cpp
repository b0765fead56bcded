#include "lrp/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace lrp {

namespace {

std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

// Row-major ordinal arithmetic on a d-dimensional grid.
struct GridIndexer {
  int d = 1;
  std::int64_t extent = 1;

  Coord coord(std::uint32_t ordinal) const {
    Coord c = {0, 0, 0, 0};
    std::uint64_t rem = ordinal;
    for (int i = d - 1; i >= 0; --i) {
      c[i] = static_cast<std::int64_t>(rem % static_cast<std::uint64_t>(extent));
      rem /= static_cast<std::uint64_t>(extent);
    }
    return c;
  }

  std::uint32_t ordinal(const Coord& c) const {
    std::uint64_t idx = 0;
    for (int i = 0; i < d; ++i)
      idx = idx * static_cast<std::uint64_t>(extent) + static_cast<std::uint64_t>(c[i]);
    return static_cast<std::uint32_t>(idx);
  }

  std::uint32_t count() const {
    std::uint64_t v = 1;
    for (int i = 0; i < d; ++i) v *= static_cast<std::uint64_t>(extent);
    return static_cast<std::uint32_t>(v);
  }

  // ordinal on the grid coarsened by `ratio` per axis
  std::uint32_t coarsen(std::uint32_t ordinal_, std::int64_t ratio,
                        const GridIndexer& coarse) const {
    const Coord c = coord(ordinal_);
    Coord g = {0, 0, 0, 0};
    for (int i = 0; i < d; ++i) g[i] = c[i] / ratio;
    return coarse.ordinal(g);
  }
};

}  // namespace

std::int64_t StageSchedule::side(int n, int d) const {
  (void)d;
  if (variant == ScheduleVariant::Polynomial) return ipow(n, a);  // C_n = n^a
  return 2 * static_cast<std::int64_t>(n + 1) * (n + 1);          // W_n = 2(n+1)^2
}

double StageSchedule::alive_threshold(int n, int d) const {
  if (variant == ScheduleVariant::Polynomial) {
    // D_n C_n^d = n^(da - b)
    return std::pow(static_cast<double>(n), static_cast<double>(d) * a - b);
  }
  const double theta = 1.0 - std::pow(static_cast<double>(n), -1.5) / 2.0;
  return theta * std::pow(static_cast<double>(side(n, d)), d);
}

std::int64_t StageSchedule::active_count(int n, int d) const {
  if (variant != ScheduleVariant::Subgraph)
    throw std::logic_error("active_count applies to the subgraph variant only");
  return ipow(n + 1, 2 * d);
}

StageSchedule validate_schedule(const StageSchedule& sched, int d, double s) {
  if (sched.depth < 1) throw std::invalid_argument("schedule: depth L must be >= 1");
  if (sched.variant == ScheduleVariant::Subgraph) return sched;  // parameter-free
  const double a = sched.a, b = sched.b;
  if (!(a > b))
    throw std::invalid_argument("schedule: a > b violated (a=" + std::to_string(a) +
                                ", b=" + std::to_string(b) + ")");
  if (!(b > 1))
    throw std::invalid_argument("schedule: b > 1 violated (b=" + std::to_string(b) + ")");
  const double rhs = a * (2.0 * d - s);
  if (!(2.0 * b < rhs))
    throw std::invalid_argument("schedule: 2b < a(2d-s) violated (2b=" + std::to_string(2 * b) +
                                ", a(2d-s)=" + std::to_string(rhs) + ")");
  return sched;
}

HierarchyInput hierarchy_input_from_config(const Configuration& config, std::int64_t m,
                                           std::int64_t k_enlarge, std::uint32_t threshold) {
  const CubeGrid grid(config.box, m);
  const auto reports = cube_aliveness(config, m, k_enlarge, threshold);
  HierarchyInput in;
  in.d = config.box.d;
  in.units_per_axis = grid.per_axis;
  in.unit_alive.resize(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) in.unit_alive[i] = reports[i].alive ? 1 : 0;
  in.attachments = attachment_pairs(config, grid, reports);
  Coord org = {0, 0, 0, 0};
  in.origin_unit = config.box.contains(org) ? grid.cube_of_site(config.box.index_of(org)) : 0;
  return in;
}

HierarchyInput hierarchy_input_site_bond(const Configuration& config, double lambda,
                                         const SeedRecord& seed) {
  if (lambda < 0 || lambda > 1)
    throw std::invalid_argument("hierarchy_input_site_bond: lambda outside [0,1]");
  seed.require_supported();
  HierarchyInput in;
  in.d = config.box.d;
  in.units_per_axis = config.box.n;
  const std::uint32_t n = config.box.site_count();
  in.unit_alive.resize(n);
  Rng rng(derive_key(seed.seed, "site-alive"));
  for (std::uint32_t i = 0; i < n; ++i) in.unit_alive[i] = rng.bernoulli(lambda) ? 1 : 0;
  in.attachments.reserve(config.bonds.size());
  for (const Bond& b : config.bonds) in.attachments.emplace_back(b.u, b.v);
  Coord org = {0, 0, 0, 0};
  in.origin_unit = config.box.contains(org) ? config.box.index_of(org) : 0;
  return in;
}

HierarchyResult run_hierarchy(const HierarchyInput& input, const StageSchedule& sched) {
  const int d = input.d;
  const int L = sched.depth;
  const bool subgraph = sched.variant == ScheduleVariant::Subgraph;
  // stage that first groups raw units: stage 1 groups zero-stage units in the
  // subgraph variant, stage 2 groups the stage-1 cube reports otherwise
  const int first_grouping = subgraph ? 1 : 2;

  std::int64_t cum = 1;
  for (int n = first_grouping; n <= L; ++n) cum *= sched.side(n, d);
  if (input.units_per_axis % cum != 0)
    throw std::invalid_argument("run_hierarchy: unit grid extent " +
                                std::to_string(input.units_per_axis) +
                                " not divisible by cumulative schedule side " +
                                std::to_string(cum));

  const GridIndexer units{d, input.units_per_axis};
  const std::uint32_t unit_count = units.count();
  if (input.unit_alive.size() != unit_count)
    throw std::invalid_argument("run_hierarchy: unit_alive size mismatch");

  std::unordered_set<std::uint64_t> attach_set;
  std::vector<std::vector<std::uint32_t>> attach_adj(unit_count);
  for (const auto& [a, b] : input.attachments) {
    attach_set.insert(pair_key(a, b));
    attach_adj[a].push_back(b);
    attach_adj[b].push_back(a);
  }

  HierarchyResult result;
  {
    StageOutcome base;
    base.stage = subgraph ? 0 : 1;
    base.vertex_count = unit_count;
    base.alive_count = 0;
    for (char c : input.unit_alive) base.alive_count += c ? 1 : 0;
    base.a_failures = base.vertex_count - base.alive_count;  // exogenous deaths
    result.stages.push_back(base);
  }

  // state for stage n-1 ("prev") and n-2 ("prev2"), over their own grids
  GridIndexer prev_grid = units;
  std::vector<char> alive_prev(input.unit_alive.begin(), input.unit_alive.end());
  GridIndexer prev2_grid = units;
  std::vector<char> alive_prev2;                       // unused until two stages exist
  std::vector<std::vector<std::uint32_t>> act_prev;    // active units per (n-1)-vertex
  std::vector<std::vector<std::uint32_t>> act_prev2;   // active units per (n-2)-vertex
  std::vector<std::uint32_t> prev2_parent;             // (n-2)-vertex -> (n-1)-vertex
  if (subgraph) {
    act_prev.resize(unit_count);
    for (std::uint32_t u = 0; u < unit_count; ++u)
      if (alive_prev[u]) act_prev[u] = {u};
  }

  // lineage: unit passes every aliveness test up to the last processed stage
  std::vector<char> lineage(alive_prev);
  std::vector<std::uint32_t> prev_of_unit(unit_count);
  for (std::uint32_t u = 0; u < unit_count; ++u) prev_of_unit[u] = u;
  std::int64_t unit_cum = 1;  // units per axis inside an (n-1)-stage vertex

  for (int stage = first_grouping; stage <= L; ++stage) {
    const std::int64_t ratio = sched.side(stage, d);
    const GridIndexer grid{d, prev_grid.extent / ratio};
    const std::uint32_t vcount = grid.count();
    const double threshold = sched.alive_threshold(stage, d);
    const std::int64_t new_unit_cum = unit_cum * ratio;
    const GridIndexer unit_ancestor_grid{d, input.units_per_axis / new_unit_cum};

    std::vector<std::vector<std::uint32_t>> children(vcount);
    for (std::uint32_t pv = 0; pv < prev_grid.count(); ++pv)
      children[prev_grid.coarsen(pv, ratio, grid)].push_back(pv);

    // attachment between (n-1)-stage vertices of a common stage-n vertex,
    // from lineage-qualified unit pairs (polynomial variant)
    std::unordered_set<std::uint64_t> sub_attached;
    if (!subgraph) {
      for (const auto& [ua, ub] : input.attachments) {
        if (!lineage[ua] || !lineage[ub]) continue;
        if (units.coarsen(ua, new_unit_cum, unit_ancestor_grid) !=
            units.coarsen(ub, new_unit_cum, unit_ancestor_grid))
          continue;
        const std::uint32_t pa = prev_of_unit[ua], pb = prev_of_unit[ub];
        if (pa != pb) sub_attached.insert(pair_key(pa, pb));
      }
    }

    StageOutcome outcome;
    outcome.stage = stage;
    outcome.vertex_count = vcount;

    std::vector<char> alive_now(vcount, 0);
    std::vector<std::vector<std::uint32_t>> act_now;
    std::vector<std::vector<std::uint32_t>> chosen_now;
    if (subgraph) {
      act_now.resize(vcount);
      chosen_now.resize(vcount);
    }

    // living (n-2)-subs per (n-1)-vertex (subgraph condition B, stage >= 2)
    std::vector<std::vector<std::uint32_t>> gkids;
    if (subgraph && stage >= 2) {
      gkids.resize(prev_grid.count());
      for (std::uint32_t g = 0; g < prev2_grid.count(); ++g)
        if (alive_prev2[g]) gkids[prev2_parent[g]].push_back(g);
    }

    auto parts_bonded = [&](const std::vector<std::uint32_t>& pa,
                            const std::vector<std::uint32_t>& pb) {
      for (std::uint32_t x : pa)
        for (std::uint32_t y : pb)
          if (attach_set.count(pair_key(x, y))) return true;
      return false;
    };

    for (std::uint32_t v = 0; v < vcount; ++v) {
      std::vector<std::uint32_t> living;
      for (std::uint32_t pv : children[v])
        if (alive_prev[pv]) living.push_back(pv);

      if (static_cast<double>(living.size()) < threshold) {
        ++outcome.a_failures;
        continue;
      }

      bool connected_ok = true;
      if (!subgraph) {
        for (std::size_t i = 0; i < living.size() && connected_ok; ++i)
          for (std::size_t j = i + 1; j < living.size(); ++j)
            if (!sub_attached.count(pair_key(living[i], living[j]))) {
              connected_ok = false;
              break;
            }
      } else if (stage == 1) {
        // all living units of the vertex lie in one attachment component
        if (living.size() > 1) {
          std::unordered_set<std::uint32_t> member(living.begin(), living.end());
          std::unordered_set<std::uint32_t> seen{living[0]};
          std::vector<std::uint32_t> stack{living[0]};
          while (!stack.empty()) {
            const std::uint32_t x = stack.back();
            stack.pop_back();
            for (std::uint32_t y : attach_adj[x])
              if (member.count(y) && seen.insert(y).second) stack.push_back(y);
          }
          connected_ok = seen.size() == living.size();
        }
      } else {
        // open bond between active parts of living (n-2)-subs in distinct
        // living (n-1)-subs of v
        for (std::size_t i = 0; i < living.size() && connected_ok; ++i) {
          for (std::size_t j = i + 1; j < living.size() && connected_ok; ++j) {
            for (std::uint32_t g1 : gkids[living[i]]) {
              for (std::uint32_t g2 : gkids[living[j]]) {
                if (!parts_bonded(act_prev2[g1], act_prev2[g2])) {
                  connected_ok = false;
                  break;
                }
              }
              if (!connected_ok) break;
            }
          }
        }
      }

      if (!connected_ok) {
        ++outcome.b_failures;
        continue;
      }
      alive_now[v] = 1;
      ++outcome.alive_count;

      if (subgraph) {
        // choose C_n living sub-vertices as active: the one containing the
        // origin first when it qualifies, then smallest ordinals
        const std::int64_t want = sched.active_count(stage, d);
        std::vector<std::uint32_t> chosen;
        const std::uint32_t origin_pv =
            units.coarsen(input.origin_unit, unit_cum, prev_grid);
        std::vector<std::uint32_t> order(living);
        std::sort(order.begin(), order.end());
        auto it = std::find(order.begin(), order.end(), origin_pv);
        if (it != order.end()) std::rotate(order.begin(), it, it + 1);
        for (std::uint32_t pv : order) {
          if (static_cast<std::int64_t>(chosen.size()) >= want) break;
          chosen.push_back(pv);
        }
        if (static_cast<std::int64_t>(chosen.size()) < want)
          throw std::logic_error("run_hierarchy: living vertex has fewer living subs than C_n");
        std::vector<std::uint32_t> units_of_v;
        for (std::uint32_t pv : chosen)
          for (std::uint32_t u : act_prev[pv]) units_of_v.push_back(u);
        std::sort(units_of_v.begin(), units_of_v.end());
        act_now[v] = std::move(units_of_v);
        chosen_now[v] = std::move(chosen);
      }
    }

    for (std::uint32_t u = 0; u < unit_count; ++u) {
      if (!lineage[u]) continue;
      if (!alive_now[units.coarsen(u, new_unit_cum, unit_ancestor_grid)]) lineage[u] = 0;
    }
    for (std::uint32_t u = 0; u < unit_count; ++u)
      prev_of_unit[u] = units.coarsen(u, new_unit_cum, unit_ancestor_grid);

    if (subgraph) {
      alive_prev2 = alive_prev;
      act_prev2 = std::move(act_prev);
      prev2_grid = prev_grid;
      prev2_parent.resize(prev2_grid.count());
      for (std::uint32_t pv = 0; pv < prev2_grid.count(); ++pv)
        prev2_parent[pv] = prev2_grid.coarsen(pv, ratio, grid);
      act_prev = std::move(act_now);
      result.chosen_children.push_back(std::move(chosen_now));
    }
    alive_prev = std::move(alive_now);
    prev_grid = grid;
    unit_cum = new_unit_cum;
    result.stages.push_back(outcome);
  }

  if (subgraph) result.active_units = std::move(act_prev);
  return result;
}

double psi_bound(int n, double beta, const StageSchedule& sched, int d, double s) {
  if (sched.variant != ScheduleVariant::Polynomial)
    throw std::invalid_argument("psi_bound applies to the polynomial schedule");
  if (n < 1) throw std::invalid_argument("psi_bound: n >= 1 required");
  if (!(beta > 0)) return std::numeric_limits<double>::infinity();
  const double a = sched.a, b = sched.b;
  // log V_n = (da - b) lgamma(n), log U_n = log d + a lgamma(n+1)
  const double logV = (d * a - b) * std::lgamma(static_cast<double>(n));
  const double logU = std::log(static_cast<double>(d)) + a * std::lgamma(n + 1.0);
  const double decay_log = std::log(beta) - s * logU + 2.0 * logV;  // log(beta U^-s V^2)
  const double decay =
      decay_log > 700 ? std::numeric_limits<double>::infinity() : std::exp(decay_log);
  const double log_bound = 2.0 * d * a * std::log(static_cast<double>(n)) - decay;
  return log_bound < -700 ? 0.0 : std::exp(std::min(log_bound, 700.0));
}

SubgraphBounds subgraph_bounds(int n, int d, double beta, double s) {
  if (n < 1) throw std::invalid_argument("subgraph_bounds: n >= 1 required");
  if (!(beta > 0)) throw std::invalid_argument("subgraph_bounds: beta > 0 required");
  SubgraphBounds out;
  const double log_pairs = d * std::log(4.0) + 8.0 * d * std::log(n + 1.0);
  const double decay_log = std::log(beta) - n * s * std::log(2.0) +
                           (4.0 * d - 2.0 * s) * std::lgamma(n + 2.0);
  const double decay =
      decay_log > 700 ? std::numeric_limits<double>::infinity() : std::exp(decay_log);
  const double log_b = log_pairs - decay;
  out.condition_b = log_b < -700 ? 0.0 : std::exp(std::min(log_b, 700.0));
  out.large_deviation = std::exp(-std::pow(static_cast<double>(n), 2.0 * d - 1.5) / 32.0);
  return out;
}

}  // namespace lrp
