#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lrp/box.hpp"
#include "lrp/kernel.hpp"
#include "lrp/rng.hpp"

namespace lrp {

struct Bond {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  friend bool operator==(const Bond&, const Bond&) = default;
  friend bool operator<(const Bond& a, const Bond& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  }
};

// A sampled set of open bonds on a finite box. Bonds are stored as ordered
// (u < v) site-index pairs, sorted, without duplicates; identical
// (kernel, box, seed) inputs reproduce the collection bit for bit.
struct Configuration {
  Box box;
  std::uint64_t kernel_hash = 0;
  SeedRecord seed;
  std::vector<Bond> bonds;

  static Configuration from_bonds(const Box& box, std::vector<Bond> bonds);

  // adjacency as CSR over site indices
  struct Adjacency {
    std::vector<std::uint32_t> offsets;
    std::vector<std::uint32_t> neighbors;
  };
  Adjacency adjacency() const;
};

// Open-bond sampling, one class of lattice offsets at a time: within each
// class the open pairs are chosen by geometric skip sampling, which realizes
// exactly the independent per-pair Bernoulli(P_k) law (the open count is
// Binomial(class size, P_k) and positions are uniform without replacement).
// Cost is O(#classes + #bonds) instead of O(N^2d).
Configuration sample_config(const Kernel& kernel, const Box& box, const SeedRecord& seed,
                            double max_expected_bonds = 1e9);

// Reference sampler: one uniform per unordered pair, keyed by the pair's
// ordinal and the seed only. Quadratic; used for golden fixtures and for
// monotone coupling across kernel amplitudes (same seed => same uniforms).
Configuration sample_config_perpair(const Kernel& kernel, const Box& box,
                                    const SeedRecord& seed);

// Keep each bond independently with probability 1-eps (thinning coupling with
// the kernel (1-eps) P_k). Output bonds are a subset of the input bonds.
Configuration thin_config(const Configuration& config, double eps, const SeedRecord& seed);

// Remove exactly the bonds with |u-v|_1 >= max_len. Deterministic.
Configuration truncate_config(const Configuration& config, std::int64_t max_len);

// Serialization: header lines (d, n, origin, kernel hash, seed), then one
// "u,v" line per bond. Byte-stable for golden tests.
void write_config_csv(std::ostream& os, const Configuration& config);
Configuration read_config_csv(std::istream& is);

}  // namespace lrp
