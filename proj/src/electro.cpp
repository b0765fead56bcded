#include "lrp/electro.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "lrp/clusters.hpp"

namespace lrp {

ElectricalNetwork::Adjacency ElectricalNetwork::adjacency(bool skip_zero) const {
  Adjacency adj;
  adj.offsets.assign(n + 1, 0);
  for (const NetEdge& e : edges) {
    if (skip_zero && e.c <= 0) continue;
    ++adj.offsets[e.u + 1];
    ++adj.offsets[e.v + 1];
  }
  for (std::uint32_t i = 0; i < n; ++i) adj.offsets[i + 1] += adj.offsets[i];
  adj.to.resize(adj.offsets[n]);
  adj.cond.resize(adj.offsets[n]);
  adj.edge_id.resize(adj.offsets[n]);
  std::vector<std::uint32_t> cur(adj.offsets.begin(), adj.offsets.end() - 1);
  for (std::uint32_t id = 0; id < edges.size(); ++id) {
    const NetEdge& e = edges[id];
    if (skip_zero && e.c <= 0) continue;
    adj.to[cur[e.u]] = e.v;
    adj.cond[cur[e.u]] = e.c;
    adj.edge_id[cur[e.u]++] = id;
    adj.to[cur[e.v]] = e.u;
    adj.cond[cur[e.v]] = e.c;
    adj.edge_id[cur[e.v]++] = id;
  }
  return adj;
}

ElectricalNetwork ElectricalNetwork::from_configuration(const Configuration& config) {
  ElectricalNetwork net;
  net.n = config.box.site_count();
  net.edges.reserve(config.bonds.size());
  for (const Bond& b : config.bonds) net.edges.push_back({b.u, b.v, 1.0});
  if (config.box.d <= 2) {
    net.embed_dim = config.box.d;
    net.coords.resize(net.n);
    for (std::uint32_t i = 0; i < net.n; ++i) {
      const Coord c = config.box.coord_of(i);
      net.coords[i] = {c[0], config.box.d == 2 ? c[1] : 0};
    }
  }
  return net;
}

namespace {

// restrict to the component of the sources (BFS over positive conductances)
std::vector<char> reachable_from(const ElectricalNetwork::Adjacency& adj, std::uint32_t n,
                                 std::span<const std::uint32_t> start) {
  std::vector<char> seen(n, 0);
  std::vector<std::uint32_t> stack(start.begin(), start.end());
  for (std::uint32_t s : start) seen[s] = 1;
  while (!stack.empty()) {
    const std::uint32_t x = stack.back();
    stack.pop_back();
    for (std::uint32_t i = adj.offsets[x]; i < adj.offsets[x + 1]; ++i) {
      const std::uint32_t y = adj.to[i];
      if (!seen[y]) {
        seen[y] = 1;
        stack.push_back(y);
      }
    }
  }
  return seen;
}

}  // namespace

ResistanceResult effective_resistance(const ElectricalNetwork& net,
                                      std::span<const std::uint32_t> sources,
                                      std::span<const std::uint32_t> sinks, double tol,
                                      int max_iter) {
  if (sources.empty() || sinks.empty())
    throw std::invalid_argument("effective_resistance: empty terminal set");
  std::vector<char> role(net.n, 0);  // 1 = source, 2 = sink
  for (std::uint32_t s : sources) role.at(s) = 1;
  for (std::uint32_t t : sinks) {
    if (role.at(t) == 1)
      throw std::invalid_argument("effective_resistance: source and sink sets intersect");
    role[t] = 2;
  }

  const auto adj = net.adjacency();
  const std::vector<char> live = reachable_from(adj, net.n, sources);
  bool sink_reached = false;
  for (std::uint32_t t : sinks) sink_reached |= live[t] != 0;
  ResistanceResult res;
  if (!sink_reached) {
    res.infinite = true;
    return res;
  }

  // interior = live vertices that are neither source nor sink
  std::vector<std::uint32_t> interior;
  std::vector<std::uint32_t> slot(net.n, UINT32_MAX);
  for (std::uint32_t v = 0; v < net.n; ++v)
    if (live[v] && role[v] == 0) {
      slot[v] = static_cast<std::uint32_t>(interior.size());
      interior.push_back(v);
    }

  const std::size_t m = interior.size();
  std::vector<double> diag(m, 0), b(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::uint32_t v = interior[i];
    for (std::uint32_t k = adj.offsets[v]; k < adj.offsets[v + 1]; ++k) {
      diag[i] += adj.cond[k];
      if (role[adj.to[k]] == 1) b[i] += adj.cond[k];
    }
  }

  // CG on L_II x = b with Jacobi preconditioning
  std::vector<double> x(m, 0), r(b), z(m), p(m), ap(m);
  double bnorm = 0;
  for (double v : b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);
  const double target = tol * (bnorm > 0 ? bnorm : 1.0);
  if (max_iter <= 0) max_iter = static_cast<int>(20 * std::sqrt(static_cast<double>(m))) + 2000;

  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    for (std::size_t i = 0; i < m; ++i) {
      const std::uint32_t v = interior[i];
      double acc = diag[i] * in[i];
      for (std::uint32_t k = adj.offsets[v]; k < adj.offsets[v + 1]; ++k) {
        const std::uint32_t w = adj.to[k];
        if (slot[w] != UINT32_MAX) acc -= adj.cond[k] * in[slot[w]];
      }
      out[i] = acc;
    }
  };

  int it = 0;
  double rnorm = bnorm;
  if (m > 0 && bnorm > 0) {
    for (std::size_t i = 0; i < m; ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = 0;
    for (std::size_t i = 0; i < m; ++i) rz += r[i] * z[i];
    for (it = 1; it <= max_iter; ++it) {
      apply(p, ap);
      double pap = 0;
      for (std::size_t i = 0; i < m; ++i) pap += p[i] * ap[i];
      if (pap <= 0) break;  // numerically exhausted
      const double alpha = rz / pap;
      double rr = 0;
      for (std::size_t i = 0; i < m; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
        rr += r[i] * r[i];
      }
      rnorm = std::sqrt(rr);
      if (rnorm <= target) break;
      double rz_new = 0;
      for (std::size_t i = 0; i < m; ++i) {
        z[i] = r[i] / diag[i];
        rz_new += r[i] * z[i];
      }
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < m; ++i) p[i] = z[i] + beta * p[i];
    }
    if (rnorm > target)
      throw ConvergenceError("effective_resistance: CG did not reach tolerance " +
                             std::to_string(tol) + " in " + std::to_string(max_iter) +
                             " iterations (residual " + std::to_string(rnorm / bnorm) + ")");
  }

  // Dirichlet energy of the harmonic potential = effective conductance
  auto phi = [&](std::uint32_t v) {
    if (role[v] == 1) return 1.0;
    if (role[v] == 2) return 0.0;
    return slot[v] != UINT32_MAX ? x[slot[v]] : 0.0;
  };
  double energy = 0;
  for (const NetEdge& e : net.edges) {
    if (e.c <= 0 || !live[e.u] || !live[e.v]) continue;
    const double d = phi(e.u) - phi(e.v);
    energy += e.c * d * d;
  }
  res.conductance = energy;
  res.resistance = energy > 0 ? 1.0 / energy : 0.0;
  res.infinite = energy <= 0;
  res.iterations = it;
  res.residual = bnorm > 0 ? rnorm / bnorm : 0.0;
  return res;
}

std::optional<Rat> series_parallel_oracle(
    std::uint32_t n, const std::vector<std::tuple<std::uint32_t, std::uint32_t, Rat>>& edges,
    std::uint32_t a, std::uint32_t b) {
  if (a == b) throw std::invalid_argument("series_parallel_oracle: identical terminals");
  // adjacency as multimaps of (neighbor -> conductance), merging parallels
  std::vector<std::map<std::uint32_t, Rat>> adj(n);
  auto add_edge = [&](std::uint32_t u, std::uint32_t v, const Rat& c) {
    if (u == v || c.is_zero()) return;
    adj[u][v] += c;
    adj[v][u] += c;
  };
  for (const auto& [u, v, c] : edges) add_edge(u, v, c);

  // repeat: drop dangling non-terminals, contract degree-2 non-terminals
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::uint32_t v = 0; v < n; ++v) {
      if (v == a || v == b) continue;
      if (adj[v].empty()) continue;
      if (adj[v].size() == 1) {  // dangling: carries no current
        const std::uint32_t w = adj[v].begin()->first;
        adj[w].erase(v);
        adj[v].clear();
        changed = true;
      } else if (adj[v].size() == 2) {  // series contraction
        auto it = adj[v].begin();
        const auto [w1, c1] = *it++;
        const auto [w2, c2] = *it;
        adj[w1].erase(v);
        adj[w2].erase(v);
        adj[v].clear();
        // resistances add: c = 1/(1/c1 + 1/c2)
        const Rat c = (c1 * c2) / (c1 + c2);
        add_edge(w1, w2, c);
        changed = true;
      }
    }
  }

  auto it = adj[a].find(b);
  if (it == adj[a].end()) return std::nullopt;  // not reduced to one edge (or disconnected)
  // reducible only if nothing else remains attached to the terminals
  if (adj[a].size() != 1 || adj[b].size() != 1) return std::nullopt;
  for (std::uint32_t v = 0; v < n; ++v)
    if (v != a && v != b && !adj[v].empty()) return std::nullopt;
  return Rat(1) / it->second;
}

CutsetSeries boundary_cutsets(const ElectricalNetwork& net, int n_max) {
  if (net.embed_dim == 0)
    throw std::invalid_argument("boundary_cutsets: network has no lattice embedding");
  CutsetSeries cuts;
  cuts.cut_edges.resize(n_max);
  cuts.cut_conductance.assign(n_max, 0.0);
  auto radius = [&](std::uint32_t v) {
    std::int64_t r = std::abs(net.coords[v][0]);
    if (net.embed_dim == 2) r = std::max(r, std::abs(net.coords[v][1]));
    return r;
  };
  for (std::uint32_t id = 0; id < net.edges.size(); ++id) {
    const NetEdge& e = net.edges[id];
    if (e.c <= 0) continue;
    const std::int64_t ru = radius(e.u), rv = radius(e.v);
    const std::int64_t lo = std::min(ru, rv), hi = std::max(ru, rv);
    if (hi == lo) continue;
    // disjointness of the cut family needs nearest-neighbor edges; project
    // long bonds before building boundary cutsets
    if (hi - lo > 1)
      throw std::invalid_argument("boundary_cutsets: non-nearest-neighbor edge present");
    const std::int64_t cut = lo;  // edge crosses out of [-lo,lo]^d, so it lies in Pi_lo
    if (cut >= 1 && cut <= n_max) {
      cuts.cut_edges[cut - 1].push_back(id);
      cuts.cut_conductance[cut - 1] += e.c;
    }
  }
  return cuts;
}

PartialSums nash_williams_partial_sums(const ElectricalNetwork& net, const CutsetSeries& cuts) {
  // validate disjointness
  std::vector<char> seen(net.edges.size(), 0);
  for (const auto& cut : cuts.cut_edges)
    for (std::uint32_t id : cut) {
      if (seen.at(id))
        throw std::invalid_argument("nash_williams_partial_sums: cutsets are not disjoint");
      seen[id] = 1;
    }
  PartialSums out;
  out.sums.reserve(cuts.cut_conductance.size());
  double acc = 0;
  for (std::size_t i = 0; i < cuts.cut_conductance.size(); ++i) {
    const double c = cuts.cut_conductance[i];
    if (c <= 0) {
      if (!out.infinite) {
        out.infinite = true;
        out.infinite_at = i;
      }
    }
    if (!out.infinite) acc += 1.0 / c;
    out.sums.push_back(acc);
  }
  return out;
}

ElectricalNetwork project_long_bonds(const Configuration& config) {
  if (config.box.d != 2)
    throw std::invalid_argument("project_long_bonds: requires a d=2 configuration");
  const Box& box = config.box;
  const std::int64_t n = box.n;
  ElectricalNetwork net;
  net.n = box.site_count();
  net.embed_dim = 2;
  net.coords.resize(net.n);
  for (std::uint32_t i = 0; i < net.n; ++i) {
    const Coord c = box.coord_of(i);
    net.coords[i] = {c[0], c[1]};
  }

  // dense nearest-neighbor edge table: axis-0 edges then axis-1 edges
  const std::uint64_t h_edges = static_cast<std::uint64_t>(n - 1) * n;
  std::vector<double> cond(2 * h_edges, 0.0);
  auto edge_slot = [&](const Coord& a, int axis) {
    // edge from a to a+e_axis; slot by the lower corner
    const std::int64_t x = a[0] - box.origin[0], y = a[1] - box.origin[1];
    if (axis == 0) return static_cast<std::uint64_t>(x) * n + y;
    return h_edges + static_cast<std::uint64_t>(x) * (n - 1) + y;
  };

  for (const Bond& b : config.bonds) {
    Coord p1 = box.coord_of(b.u), p2 = box.coord_of(b.v);  // u < v: p1 is lex smaller
    const std::int64_t len = Box::l1(p1, p2, 2);
    if (len == 1) {  // open nearest-neighbor bond keeps conductance 1
      const int axis = p1[0] != p2[0] ? 0 : 1;
      Coord lo = p1;
      if (p2[axis] < p1[axis]) lo = p2;
      cond[edge_slot(lo, axis)] += 1.0;
      continue;
    }
    // vertical leg at x1 from y1 to y2, then horizontal at y2 from x1 to x2
    const double add = static_cast<double>(len);
    const std::int64_t x1 = p1[0], y1 = p1[1], x2 = p2[0], y2 = p2[1];
    const std::int64_t ylo = std::min(y1, y2), yhi = std::max(y1, y2);
    for (std::int64_t y = ylo; y < yhi; ++y) cond[edge_slot({x1, y, 0, 0}, 1)] += add;
    const std::int64_t xlo = std::min(x1, x2), xhi = std::max(x1, x2);
    for (std::int64_t x = xlo; x < xhi; ++x) cond[edge_slot({x, y2, 0, 0}, 0)] += add;
  }

  net.edges.reserve(2 * h_edges);
  for (std::int64_t x = 0; x < n - 1; ++x)
    for (std::int64_t y = 0; y < n; ++y) {
      const Coord a = {box.origin[0] + x, box.origin[1] + y, 0, 0};
      const Coord bq = {a[0] + 1, a[1], 0, 0};
      net.edges.push_back({box.index_of(a), box.index_of(bq), cond[edge_slot(a, 0)]});
    }
  for (std::int64_t x = 0; x < n; ++x)
    for (std::int64_t y = 0; y < n - 1; ++y) {
      const Coord a = {box.origin[0] + x, box.origin[1] + y, 0, 0};
      const Coord bq = {a[0], a[1] + 1, 0, 0};
      net.edges.push_back({box.index_of(a), box.index_of(bq), cond[edge_slot(a, 1)]});
    }
  return net;
}

ElectricalNetwork regularize_bad_clusters(const ElectricalNetwork& net, double m) {
  if (!(m > 0)) throw std::invalid_argument("regularize_bad_clusters: M must be positive");
  const std::size_t ne = net.edges.size();
  // bad-edge components via union-find over shared endpoints
  UnionFind uf(net.n);
  std::vector<char> bad(ne, 0);
  for (std::size_t i = 0; i < ne; ++i) {
    if (net.edges[i].c > m) {
      bad[i] = 1;
      uf.unite(net.edges[i].u, net.edges[i].v);
    }
  }
  // component id = union-find root of a bad edge's endpoint, but only bad
  // vertices carry component identity
  std::vector<char> vertex_bad(net.n, 0);
  for (std::size_t i = 0; i < ne; ++i)
    if (bad[i]) {
      vertex_bad[net.edges[i].u] = 1;
      vertex_bad[net.edges[i].v] = 1;
    }

  // per component: bad edge count and boundary edge ids
  std::unordered_map<std::uint32_t, std::uint32_t> comp_edges;  // root -> #bad edges
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> comp_boundary;
  for (std::size_t i = 0; i < ne; ++i) {
    const NetEdge& e = net.edges[i];
    if (bad[i]) {
      ++comp_edges[uf.find(e.u)];
    } else {
      if (vertex_bad[e.u]) comp_boundary[uf.find(e.u)].push_back(static_cast<std::uint32_t>(i));
      if (vertex_bad[e.v]) {
        const std::uint32_t r = uf.find(e.v);
        auto& list = comp_boundary[r];
        if (!vertex_bad[e.u] || uf.find(e.u) != r) list.push_back(static_cast<std::uint32_t>(i));
      }
    }
  }

  ElectricalNetwork out = net;
  for (std::size_t i = 0; i < ne; ++i) {
    const NetEdge& e = net.edges[i];
    std::vector<std::uint32_t> roots;
    if (bad[i]) {
      roots.push_back(uf.find(e.u));
    } else {
      if (vertex_bad[e.u]) roots.push_back(uf.find(e.u));
      if (vertex_bad[e.v]) {
        const std::uint32_t r = uf.find(e.v);
        if (roots.empty() || roots[0] != r) roots.push_back(r);
      }
      if (roots.empty()) continue;  // good non-boundary edge: unchanged
    }
    // U(e) = union of the adjacent bad components; edge counts
    std::uint64_t u_edges = 0;
    std::vector<std::uint32_t> boundary_ids;
    for (std::uint32_t r : roots) {
      u_edges += comp_edges[r];
      const auto it = comp_boundary.find(r);
      if (it != comp_boundary.end())
        boundary_ids.insert(boundary_ids.end(), it->second.begin(), it->second.end());
    }
    std::sort(boundary_ids.begin(), boundary_ids.end());
    boundary_ids.erase(std::unique(boundary_ids.begin(), boundary_ids.end()),
                       boundary_ids.end());
    const double total = static_cast<double>(u_edges + boundary_ids.size());
    out.edges[i].c = 2.0 * m * total * total;
  }
  return out;
}

CauchyTailReport cauchy_tail_diagnostics(std::span<const double> samples, double chi,
                                         int n_max) {
  if (chi <= 0) throw std::invalid_argument("cauchy_tail_diagnostics: chi must be positive");
  for (double s : samples)
    if (s < 0) throw std::invalid_argument("cauchy_tail_diagnostics: negative sample");
  CauchyTailReport rep;
  const double count = static_cast<double>(samples.size());
  rep.exceedance.resize(n_max);
  rep.envelope.resize(n_max);
  rep.sigma.resize(n_max);
  for (int n = 1; n <= n_max; ++n) {
    std::size_t exceed = 0;
    const double level = n * chi;
    for (double s : samples) exceed += s > level ? 1 : 0;
    const double p = count > 0 ? static_cast<double>(exceed) / count : 0.0;
    const double env = 1.0 / n;
    rep.exceedance[n - 1] = p;
    rep.envelope[n - 1] = env;
    rep.sigma[n - 1] = count > 0 ? std::sqrt(env * (1.0 - env) / count) : 0.0;
    if (p > env + 3.0 * rep.sigma[n - 1]) rep.within_3sigma = false;
  }
  rep.mean_over_logn.resize(samples.size());
  double acc = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    acc += samples[k];
    const double logn = std::log(static_cast<double>(k + 1));
    rep.mean_over_logn[k] = k >= 1 ? (acc / static_cast<double>(k + 1)) / logn : 0.0;
  }
  return rep;
}

}  // namespace lrp
