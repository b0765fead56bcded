#include "lrp/renorm_graph.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace lrp {

namespace {

std::uint64_t edge_key(std::uint32_t u, std::uint32_t v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

void check_schedule(const std::vector<std::int64_t>& schedule, int depth) {
  if (depth < 1 || static_cast<int>(schedule.size()) < depth)
    throw std::invalid_argument("renormalized graph: schedule shorter than depth");
  double total = 1;
  for (int n = 0; n < depth; ++n) {
    if (schedule[n] < 2)
      throw std::invalid_argument("renormalized graph: schedule entries must be >= 2");
    total *= static_cast<double>(schedule[n]);
  }
  if (total > 4.0e9)
    throw std::invalid_argument("renormalized graph: vertex count exceeds address space");
}

}  // namespace

std::string RenormalizedGraph::address_of(std::uint32_t id) const {
  std::string out;
  std::uint64_t rem = id;
  std::vector<int> j(depth);
  for (int n = 0; n < depth; ++n) {  // coordinate 1 fastest
    j[n] = static_cast<int>(rem % static_cast<std::uint64_t>(schedule[n])) + 1;
    rem /= static_cast<std::uint64_t>(schedule[n]);
  }
  for (int n = depth - 1; n >= 0; --n) {
    out += std::to_string(j[n]);
    if (n > 0) out += '.';
  }
  return out;
}

std::uint32_t RenormalizedGraph::id_of_address(const std::vector<int>& j) const {
  if (static_cast<int>(j.size()) != depth)
    throw std::invalid_argument("address length != depth");
  std::uint64_t id = 0;
  for (int n = 0; n < depth; ++n) {  // j[0] = j_L (slowest)
    const int coord = j[n];
    if (coord < 1 || coord > schedule[depth - 1 - n])
      throw std::invalid_argument("address coordinate out of range");
    id = id * static_cast<std::uint64_t>(schedule[depth - 1 - n]) +
         static_cast<std::uint64_t>(coord - 1);
  }
  return static_cast<std::uint32_t>(id);
}

bool RenormalizedGraph::has_edge(std::uint32_t u, std::uint32_t v) const {
  if (u > v) std::swap(u, v);
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(u, v));
}

RenormalizedGraph build_renorm_graph(const std::vector<std::int64_t>& schedule, int depth) {
  check_schedule(schedule, depth);
  RenormalizedGraph g;
  g.schedule.assign(schedule.begin(), schedule.begin() + depth);
  g.depth = depth;
  g.group_size.assign(depth + 1, 1);
  for (int m = 1; m <= depth; ++m) g.group_size[m] = g.group_size[m - 1] * schedule[m - 1];
  g.vertex_count = static_cast<std::uint32_t>(g.group_size[depth]);

  auto& edges = g.edges;

  // level-1: complete groups
  {
    const std::int64_t c1 = schedule[0];
    for (std::int64_t base = 0; base < g.group_size[depth]; base += c1)
      for (std::int64_t i = 0; i < c1; ++i)
        for (std::int64_t j = i + 1; j < c1; ++j)
          edges.emplace_back(static_cast<std::uint32_t>(base + i),
                             static_cast<std::uint32_t>(base + j));
  }

  // level-2: each vertex of a copy joins the base of every sibling copy
  if (depth >= 2) {
    const std::int64_t sz1 = g.group_size[1], c2 = schedule[1];
    for (std::int64_t ctx = 0; ctx < g.group_size[depth]; ctx += g.group_size[2]) {
      for (std::int64_t t = 0; t < c2; ++t) {
        for (std::int64_t j = t + 1; j < c2; ++j) {
          const std::int64_t tbase = ctx + t * sz1, jbase = ctx + j * sz1;
          for (std::int64_t x = 0; x < sz1; ++x)
            edges.emplace_back(static_cast<std::uint32_t>(tbase + x),
                               static_cast<std::uint32_t>(jbase));
          for (std::int64_t y = 1; y < sz1; ++y)
            edges.emplace_back(static_cast<std::uint32_t>(tbase),
                               static_cast<std::uint32_t>(jbase + y));
        }
      }
    }
  }

  // level m >= 3: one edge per pair of (m-2)-group bases across copies
  for (int m = 3; m <= depth; ++m) {
    const std::int64_t szm = g.group_size[m], szm1 = g.group_size[m - 1],
                       szm2 = g.group_size[m - 2];
    const std::int64_t cm = schedule[m - 1], cm1 = schedule[m - 2];
    for (std::int64_t ctx = 0; ctx < g.group_size[depth]; ctx += szm) {
      for (std::int64_t t = 0; t < cm; ++t) {
        for (std::int64_t j = t + 1; j < cm; ++j) {
          const std::int64_t tbase = ctx + t * szm1, jbase = ctx + j * szm1;
          for (std::int64_t a = 0; a < cm1; ++a)
            for (std::int64_t b = 0; b < cm1; ++b)
              edges.emplace_back(static_cast<std::uint32_t>(tbase + a * szm2),
                                 static_cast<std::uint32_t>(jbase + b * szm2));
        }
      }
    }
  }

  for (auto& e : edges)
    if (e.first > e.second) std::swap(e.first, e.second);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return g;
}

RenormalizedGraph build_renorm_graph_sampled(const HierarchyInput& input, int depth) {
  StageSchedule sched;
  sched.variant = ScheduleVariant::Subgraph;
  sched.depth = depth;
  const HierarchyResult hr = run_hierarchy(input, sched);
  if (static_cast<int>(hr.chosen_children.size()) != depth)
    throw std::logic_error("sampled graph: hierarchy depth mismatch");

  RenormalizedGraph g;
  g.sampled = true;
  g.depth = depth;
  for (int n = 1; n <= depth; ++n) g.schedule.push_back(sched.active_count(n, input.d));
  g.group_size.assign(depth + 1, 1);
  for (int m = 1; m <= depth; ++m) g.group_size[m] = g.group_size[m - 1] * g.schedule[m - 1];
  g.vertex_count = static_cast<std::uint32_t>(g.group_size[depth]);

  // top-stage vertex: prefer the one containing the origin unit, else the
  // smallest living ordinal
  const auto& top_chosen = hr.chosen_children.back();
  std::uint32_t top = UINT32_MAX;
  {
    // origin's top vertex ordinal
    std::int64_t cum = 1;
    for (int n = 1; n <= depth; ++n) cum *= sched.side(n, input.d);
    // reconstruct ordinal arithmetic
    std::int64_t extent = input.units_per_axis / cum;
    if (extent < 1) extent = 1;
    // origin unit coord -> top coord
    std::uint64_t rem = input.origin_unit;
    Coord uc = {0, 0, 0, 0};
    for (int i = input.d - 1; i >= 0; --i) {
      uc[i] = static_cast<std::int64_t>(rem % static_cast<std::uint64_t>(input.units_per_axis));
      rem /= static_cast<std::uint64_t>(input.units_per_axis);
    }
    std::uint64_t tid = 0;
    for (int i = 0; i < input.d; ++i)
      tid = tid * static_cast<std::uint64_t>(extent) +
            static_cast<std::uint64_t>(uc[i] / cum);
    if (tid < top_chosen.size() && !top_chosen[tid].empty()) top = static_cast<std::uint32_t>(tid);
    if (top == UINT32_MAX) {
      for (std::uint32_t v = 0; v < top_chosen.size(); ++v)
        if (!top_chosen[v].empty()) { top = v; break; }
    }
    if (top == UINT32_MAX)
      throw MissingEdgeError(depth, "(no living top-stage vertex)", "");
  }

  // address tree: vertex id -> unit ordinal, walking the chosen lists; the
  // top-down expansion enumerates addresses with j_1 fastest, matching ids
  g.unit_of_vertex.assign(g.vertex_count, 0);
  {
    std::vector<std::uint32_t> current{top};
    for (int m = depth; m >= 1; --m) {
      const auto& chosen = hr.chosen_children[m - 1];
      std::vector<std::uint32_t> next;
      next.reserve(current.size() * g.schedule[m - 1]);
      for (std::uint32_t v : current) {
        if (chosen[v].empty())
          throw std::logic_error("sampled graph: chosen list missing for living vertex");
        for (std::uint32_t child : chosen[v]) next.push_back(child);
      }
      current = std::move(next);
    }
    if (current.size() != g.vertex_count)
      throw std::logic_error("sampled graph: address tree size mismatch");
    for (std::uint32_t id = 0; id < g.vertex_count; ++id) g.unit_of_vertex[id] = current[id];
  }

  std::unordered_set<std::uint64_t> attach;
  for (const auto& [a, b] : input.attachments)
    attach.insert(edge_key(a, b));
  auto units_bonded = [&](std::uint32_t ua, std::uint32_t ub) {
    return attach.count(edge_key(ua, ub)) > 0;
  };

  auto& edges = g.edges;

  // level-1 groups: complete (connectivity-witnessed)
  for (std::int64_t base = 0; base < g.group_size[depth]; base += g.schedule[0])
    for (std::int64_t i = 0; i < g.schedule[0]; ++i)
      for (std::int64_t j = i + 1; j < g.schedule[0]; ++j)
        edges.emplace_back(static_cast<std::uint32_t>(base + i),
                           static_cast<std::uint32_t>(base + j));

  // find the first open bond between two id ranges; record port + edge
  auto bond_between = [&](std::int64_t abase, std::int64_t asize, std::int64_t bbase,
                          std::int64_t bsize) -> std::pair<std::int64_t, std::int64_t> {
    for (std::int64_t x = 0; x < asize; ++x)
      for (std::int64_t y = 0; y < bsize; ++y)
        if (units_bonded(g.unit_of_vertex[abase + x], g.unit_of_vertex[bbase + y]))
          return {abase + x, bbase + y};
    return {-1, -1};
  };

  // level-2 ports: every vertex to every sibling copy
  if (depth >= 2) {
    const std::int64_t sz1 = g.group_size[1], c2 = g.schedule[1];
    for (std::int64_t ctx = 0; ctx < g.group_size[depth]; ctx += g.group_size[2]) {
      for (std::int64_t t = 0; t < c2; ++t) {
        for (std::int64_t j = 0; j < c2; ++j) {
          if (t == j) continue;
          const std::int64_t tbase = ctx + t * sz1, jbase = ctx + j * sz1;
          for (std::int64_t x = 0; x < sz1; ++x) {
            const auto [p, q] = bond_between(tbase + x, 1, jbase, sz1);
            if (p < 0)
              throw MissingEdgeError(2, g.address_of(static_cast<std::uint32_t>(tbase + x)),
                                     g.address_of(static_cast<std::uint32_t>(jbase)) + " (copy)");
            edges.emplace_back(static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(q));
            std::uint32_t a = static_cast<std::uint32_t>(tbase + x),
                          b = static_cast<std::uint32_t>(jbase);
            std::pair<std::uint32_t, std::uint32_t> pq{static_cast<std::uint32_t>(p),
                                                       static_cast<std::uint32_t>(q)};
            if (a > b) std::swap(pq.first, pq.second);
            g.ports[{2, std::min(a, b), std::max(a, b)}] = pq;
          }
        }
      }
    }
  }

  // level m >= 3 ports: one bond per (m-2)-group pair across copies
  for (int m = 3; m <= depth; ++m) {
    const std::int64_t szm = g.group_size[m], szm1 = g.group_size[m - 1],
                       szm2 = g.group_size[m - 2];
    const std::int64_t cm = g.schedule[m - 1], cm1 = g.schedule[m - 2];
    for (std::int64_t ctx = 0; ctx < g.group_size[depth]; ctx += szm) {
      for (std::int64_t t = 0; t < cm; ++t) {
        for (std::int64_t j = t + 1; j < cm; ++j) {
          for (std::int64_t a = 0; a < cm1; ++a) {
            for (std::int64_t b = 0; b < cm1; ++b) {
              const std::int64_t abase = ctx + t * szm1 + a * szm2;
              const std::int64_t bbase = ctx + j * szm1 + b * szm2;
              const auto [p, q] = bond_between(abase, szm2, bbase, szm2);
              if (p < 0)
                throw MissingEdgeError(m, g.address_of(static_cast<std::uint32_t>(abase)),
                                       g.address_of(static_cast<std::uint32_t>(bbase)));
              edges.emplace_back(static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(q));
              g.ports[{m, static_cast<std::uint32_t>(abase), static_cast<std::uint32_t>(bbase)}] =
                  {static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(q)};
            }
          }
        }
      }
    }
  }

  for (auto& e : edges)
    if (e.first > e.second) std::swap(e.first, e.second);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return g;
}

void verify_defining_property(const RenormalizedGraph& g) {
  std::unordered_set<std::uint64_t> eset;
  for (const auto& [u, v] : g.edges) eset.insert(edge_key(u, v));
  auto joined = [&](std::int64_t abase, std::int64_t asize, std::int64_t bbase,
                    std::int64_t bsize) {
    for (std::int64_t x = 0; x < asize; ++x)
      for (std::int64_t y = 0; y < bsize; ++y)
        if (eset.count(edge_key(static_cast<std::uint32_t>(abase + x),
                                static_cast<std::uint32_t>(bbase + y))))
          return true;
    return false;
  };

  // level-1 completeness
  for (std::int64_t base = 0; base < g.group_size[g.depth]; base += g.schedule[0])
    for (std::int64_t i = 0; i < g.schedule[0]; ++i)
      for (std::int64_t j = i + 1; j < g.schedule[0]; ++j)
        if (!eset.count(edge_key(static_cast<std::uint32_t>(base + i),
                                 static_cast<std::uint32_t>(base + j))))
          throw MissingEdgeError(1, g.address_of(static_cast<std::uint32_t>(base + i)),
                                 g.address_of(static_cast<std::uint32_t>(base + j)));

  // level-2 port coverage: every vertex joined to every sibling copy
  if (g.depth >= 2) {
    const std::int64_t sz1 = g.group_size[1], c2 = g.schedule[1];
    for (std::int64_t ctx = 0; ctx < g.group_size[g.depth]; ctx += g.group_size[2])
      for (std::int64_t t = 0; t < c2; ++t)
        for (std::int64_t j = 0; j < c2; ++j) {
          if (t == j) continue;
          for (std::int64_t x = 0; x < sz1; ++x)
            if (!joined(ctx + t * sz1 + x, 1, ctx + j * sz1, sz1))
              throw MissingEdgeError(
                  2, g.address_of(static_cast<std::uint32_t>(ctx + t * sz1 + x)),
                  g.address_of(static_cast<std::uint32_t>(ctx + j * sz1)) + " (copy)");
        }
  }

  // defining property: levels l with 3 <= l <= depth, all contexts, pairs of
  // (l-2)-groups in distinct (l-1)-copies
  for (int m = 3; m <= g.depth; ++m) {
    const std::int64_t szm = g.group_size[m], szm1 = g.group_size[m - 1],
                       szm2 = g.group_size[m - 2];
    const std::int64_t cm = g.schedule[m - 1], cm1 = g.schedule[m - 2];
    for (std::int64_t ctx = 0; ctx < g.group_size[g.depth]; ctx += szm)
      for (std::int64_t t = 0; t < cm; ++t)
        for (std::int64_t j = t + 1; j < cm; ++j)
          for (std::int64_t a = 0; a < cm1; ++a)
            for (std::int64_t b = 0; b < cm1; ++b) {
              const std::int64_t abase = ctx + t * szm1 + a * szm2;
              const std::int64_t bbase = ctx + j * szm1 + b * szm2;
              if (!joined(abase, szm2, bbase, szm2))
                throw MissingEdgeError(m, g.address_of(static_cast<std::uint32_t>(abase)),
                                       g.address_of(static_cast<std::uint32_t>(bbase)));
            }
  }
}

namespace {

// Flow accumulator with antisymmetric storage on ordered keys.
struct FlowAccum {
  std::unordered_map<std::uint64_t, Rat> values;

  void add(std::uint32_t from, std::uint32_t to, const Rat& x) {
    if (from == to) throw std::logic_error("flow: self edge");
    if (from < to)
      values[edge_key(from, to)] += x;
    else
      values[edge_key(from, to)] -= x;
  }
};

class FlowBuilder {
 public:
  FlowBuilder(const RenormalizedGraph& g) : g_(g) {}

  Flow run() {
    const int L = g_.depth;
    Rat total(1);
    flood(L, 0, 0, total, +1);

    Flow f;
    f.source = 0;  // all-ones address
    Rat share(1);
    for (int n = 0; n < L; ++n) share /= Rat(g_.schedule[n] - 1);
    f.sink_share = share;
    // sinks: every coordinate >= 2
    collect_sinks(L, 0, f.sinks);
    std::sort(f.sinks.begin(), f.sinks.end());
    f.edges.reserve(acc_.values.size());
    for (const auto& [key, val] : acc_.values) {
      if (val.is_zero()) continue;
      f.edges.push_back({static_cast<std::uint32_t>(key >> 32),
                         static_cast<std::uint32_t>(key & 0xffffffffu), val});
    }
    std::sort(f.edges.begin(), f.edges.end(),
              [](const FlowEdge& a, const FlowEdge& b) {
                return a.u != b.u ? a.u < b.u : a.v < b.v;
              });
    return f;
  }

 private:
  const RenormalizedGraph& g_;
  FlowAccum acc_;

  std::int64_t size(int m) const { return g_.group_size[m]; }
  std::int64_t C(int n) const { return g_.schedule[n - 1]; }

  void collect_sinks(int n, std::int64_t base, std::vector<std::uint32_t>& out) const {
    if (n == 0) {
      out.push_back(static_cast<std::uint32_t>(base));
      return;
    }
    for (std::int64_t j = 1; j < C(n); ++j)  // coordinate n in 2..C_n
      collect_sinks(n - 1, base + j * size(n - 1), out);
  }

  // Port pair for moving between an (n-2)-group at abase and the sibling
  // (n-1)-copy at jbase (level-n crossing). Canonical graphs use group bases;
  // sampled graphs look up recorded bonds, scanning the copy's (n-2)-groups.
  std::pair<std::uint32_t, std::uint32_t> port_for(int n, std::int64_t abase,
                                                   std::int64_t jbase) const {
    if (!g_.sampled)
      return {static_cast<std::uint32_t>(abase), static_cast<std::uint32_t>(jbase)};
    if (n == 2) {
      const std::uint32_t a = static_cast<std::uint32_t>(abase);
      const std::uint32_t b = static_cast<std::uint32_t>(jbase);
      auto it = g_.ports.find({2, std::min(a, b), std::max(a, b)});
      if (it == g_.ports.end())
        throw std::logic_error("sampled flow: missing level-2 port record");
      auto pq = it->second;
      if (a > b) std::swap(pq.first, pq.second);
      return pq;
    }
    for (std::int64_t b = 0; b < C(n - 1); ++b) {
      const std::int64_t bbase = jbase + b * size(n - 2);
      const std::uint32_t lo = static_cast<std::uint32_t>(std::min(abase, bbase));
      const std::uint32_t hi = static_cast<std::uint32_t>(std::max(abase, bbase));
      auto it = g_.ports.find({n, lo, hi});
      if (it == g_.ports.end()) continue;
      auto pq = it->second;
      if (abase > bbase) std::swap(pq.first, pq.second);
      return pq;
    }
    throw std::logic_error("sampled flow: no port into sibling copy");
  }

  // Distribute `mass` sitting at vertex q over the targets of the level-n
  // group at `base` (all coordinates 1..n >= 2), or gather when sign = -1.
  void flood(int n, std::int64_t base, std::int64_t q, Rat mass, int sign) {
    if (n == 0) return;
    if (n == 1) {
      const Rat share = mass / Rat(C(1) - 1);
      for (std::int64_t w = base + 1; w < base + C(1); ++w) {
        if (w == q) continue;
        if (sign > 0)
          acc_.add(static_cast<std::uint32_t>(q), static_cast<std::uint32_t>(w), share);
        else
          acc_.add(static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(q), share);
      }
      return;
    }
    const std::int64_t t = (q - base) / size(n - 1);  // 0-based copy of q
    const std::int64_t tbase = base + t * size(n - 1);
    flood(n - 1, tbase, q, mass, sign);
    const Rat share = mass / Rat(C(n) - 1);
    for (std::int64_t j = 1; j < C(n); ++j) {  // sibling copies with coord >= 2
      if (j == t) continue;
      move(n, tbase, base + j * size(n - 1), share, sign);
    }
  }

  // Move x from copy at tbase (holding it spread over its targets) to the
  // copy at jbase, ending spread over jbase's targets.
  void move(int n, std::int64_t tbase, std::int64_t jbase, Rat x, int sign) {
    const Rat portion = x / Rat(C(n - 1) - 1);
    // receipts coalesce coincident ports (double portions)
    std::vector<std::pair<std::int64_t, Rat>> receipts;
    for (std::int64_t i = 1; i < C(n - 1); ++i) {  // source (n-2)-groups, coord >= 2
      const std::int64_t abase = tbase + i * size(n - 2);
      const auto [p, qport] = port_for(n, abase, jbase);
      // gather the portion from the group's targets into p
      flood(n - 2, abase, p, portion, -sign);
      if (sign > 0)
        acc_.add(p, qport, portion);
      else
        acc_.add(qport, p, portion);
      bool found = false;
      for (auto& [vq, m] : receipts)
        if (vq == qport) {
          m += portion;
          found = true;
          break;
        }
      if (!found) receipts.emplace_back(qport, portion);
    }
    for (const auto& [qport, m] : receipts) flood(n - 1, jbase, qport, m, sign);
  }
};

}  // namespace

Flow build_flow(const RenormalizedGraph& graph) {
  return FlowBuilder(graph).run();
}

Rat Flow::max_conservation_residual() const {
  std::unordered_map<std::uint32_t, Rat> net;
  for (const FlowEdge& e : edges) {
    net[e.u] -= e.value;
    net[e.v] += e.value;
  }
  std::unordered_set<std::uint32_t> sink_set(sinks.begin(), sinks.end());
  Rat worst(0);
  auto update = [&](const Rat& r) {
    const Rat a = r.abs();
    if (worst < a) worst = a;
  };
  // every vertex with any flow, plus source/sinks explicitly
  update(net[source] + Rat(1));
  for (std::uint32_t s : sinks) update(net[s] - sink_share);
  for (const auto& [v, r] : net) {
    if (v == source || sink_set.count(v)) continue;
    update(r);
  }
  return worst;
}

double q_energy(const Flow& flow, double q) {
  double sum = 0;
  for (const FlowEdge& e : flow.edges)
    sum += std::pow(std::abs(e.value.to_double()), q);
  return sum;
}

double vertex_energy(const Flow& flow) {
  std::unordered_map<std::uint32_t, Rat> tot;
  for (const FlowEdge& e : flow.edges) {
    const Rat a = e.value.abs();
    tot[e.u] += a;
    tot[e.v] += a;
  }
  double sum = 0;
  for (const auto& [v, r] : tot) {
    const double f = r.to_double() / 2.0;
    sum += f * f;
  }
  return sum;
}

double energy_recursion_bound(const std::vector<std::int64_t>& schedule, int depth) {
  check_schedule(schedule, depth);
  double e = 1.0 / static_cast<double>(schedule[0] - 1);
  for (int n = 2; n <= depth; ++n) {
    const double cn = static_cast<double>(schedule[n - 1]);
    const double cn1 = static_cast<double>(schedule[n - 2]);
    e = (1.0 + 1.0 / cn1) * e + 1.0 / (cn * cn1);
  }
  return e;
}

}  // namespace lrp
