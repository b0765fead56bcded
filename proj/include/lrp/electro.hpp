#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lrp/box.hpp"
#include "lrp/config.hpp"
#include "lrp/rational.hpp"

namespace lrp {

// Weighted undirected graph with per-edge conductances. Parallel edges are
// allowed (conductances add); zero conductance means the edge is absent for
// walks and solves. The optional lattice embedding supplies the geometry for
// cutset construction and projection.
struct NetEdge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  double c = 1.0;
};

struct ElectricalNetwork {
  std::uint32_t n = 0;
  std::vector<NetEdge> edges;
  int embed_dim = 0;                            // 0 = no embedding
  std::vector<std::array<std::int64_t, 2>> coords;  // per vertex when embedded

  struct Adjacency {
    std::vector<std::uint32_t> offsets;
    std::vector<std::uint32_t> to;
    std::vector<double> cond;
    std::vector<std::uint32_t> edge_id;
  };
  Adjacency adjacency(bool skip_zero = true) const;

  static ElectricalNetwork from_configuration(const Configuration& config);
};

struct ResistanceResult {
  double resistance = 0;
  double conductance = 0;  // Dirichlet energy of the harmonic potential
  bool infinite = false;   // distinguished marker, never a float sentinel
  int iterations = 0;
  double residual = 0;
};

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Effective resistance between vertex sets by solving the discrete Dirichlet
// problem (potential 1 on sources, 0 on sinks) with Jacobi-preconditioned
// conjugate gradients on the graph Laplacian, matrix-free. Disconnected
// terminals yield the infinite marker; exceeding the iteration budget throws
// ConvergenceError.
ResistanceResult effective_resistance(const ElectricalNetwork& net,
                                      std::span<const std::uint32_t> sources,
                                      std::span<const std::uint32_t> sinks,
                                      double tol = 1e-10, int max_iter = 0);

// Exact series/parallel reduction between two terminals. Returns the
// rational resistance, or nullopt when the network is not SP-reducible.
// Conductances are taken as exact rationals via the supplied values.
std::optional<Rat> series_parallel_oracle(std::uint32_t n,
                                          const std::vector<std::tuple<std::uint32_t, std::uint32_t, Rat>>& edges,
                                          std::uint32_t a, std::uint32_t b);

// Ordered disjoint cutsets with per-cut conductance sums.
struct CutsetSeries {
  std::vector<std::vector<std::uint32_t>> cut_edges;  // edge ids into net.edges
  std::vector<double> cut_conductance;
};

// Cutsets Pi_n = edges with exactly one endpoint in [-n,n]^dim around the
// embedding origin, n = 1..n_max. Requires an embedded network.
CutsetSeries boundary_cutsets(const ElectricalNetwork& net, int n_max);

struct PartialSums {
  std::vector<double> sums;  // sum_{k<=m} 1/C_{Pi_k}
  bool infinite = false;     // some cut had zero conductance
  std::size_t infinite_at = 0;
};

// Nash-Williams partial sums sum 1/C_{Pi_n}; monotone nondecreasing. A
// zero-conductance cut makes the sum infinite from that index on (the walk
// cannot cross it).
PartialSums nash_williams_partial_sums(const ElectricalNetwork& net, const CutsetSeries& cuts);

// Projection of a d=2 configuration onto nearest-neighbor bonds: every long
// open bond ((x1,y1),(x2,y2)) is erased and each nearest-neighbor edge on the
// path [(x1,y1),(x1,y2)] then [(x1,y2),(x2,y2)] gains |x1-x2|+|y1-y2|
// conductance ((x1,y1) is the endpoint with the smaller site index). Open
// nearest-neighbor bonds keep conductance 1; the result lives on the box's
// full nearest-neighbor edge set with zeros where nothing was assigned.
ElectricalNetwork project_long_bonds(const Configuration& config);

// Conductance regularization: edges with c > m are bad; U(e) is the connected
// component of bad edges containing e (bad case) or the union of all bad
// components adjacent to e (boundary case: a good edge with a bad endpoint).
// Every bad and boundary edge gets conductance 2m (#U + #dU)^2, edge counts;
// good non-boundary edges are unchanged.
ElectricalNetwork regularize_bad_clusters(const ElectricalNetwork& net, double m);

struct CauchyTailReport {
  std::vector<double> exceedance;  // P(sample > n*chi) for n = 1..n_max
  std::vector<double> envelope;    // 1/n
  std::vector<double> sigma;       // binomial std errors
  std::vector<double> mean_over_logn;  // prefix mean of first k samples / log k
  bool within_3sigma = true;       // exceedance <= 1/n + 3 sigma for all n
};

// Tail diagnostics against the Cauchy-tail envelope P(C > n chi) <= 1/n,
// plus the prefix-mean growth statistic behind the K log n bound.
CauchyTailReport cauchy_tail_diagnostics(std::span<const double> samples, double chi,
                                         int n_max = 100);

}  // namespace lrp
