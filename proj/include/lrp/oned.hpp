#pragma once

#include <cstdint>
#include <vector>

#include "lrp/config.hpp"
#include "lrp/kernel.hpp"
#include "lrp/rng.hpp"

namespace lrp {

// Exact integral of beta (x-y)^-2 over [a,b] x [c,d] with a < b <= c < d:
// beta log((c-a)(d-b) / ((c-b)(d-a))). Touching intervals (b = c) integrate
// to +infinity; overlapping ones are a domain error.
double rect_intensity(double beta, double a, double b, double c, double d);

// Planar inhomogeneous Poisson sample with density beta (x-y)^-2 over the
// part of [x_lo,x_hi] x [y_lo,y_hi] lying on unit cells [i,i+1] x [j,j+1]
// with j >= i+2 (cells touching the diagonal are left to the discrete
// model). Counts are cell-exact Poisson, positions inverted in closed form.
struct ContinuumSample {
  double beta = 0;
  double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
  SeedRecord seed;
  std::vector<std::pair<double, double>> points;  // (x, y) with y >= x + 1
};

ContinuumSample sample_continuum(double beta, double x_lo, double x_hi, double y_lo,
                                 double y_hi, const SeedRecord& seed);

// Smallest beta whose continuum rectangle integrals dominate the kernel's
// P_k for 1 <= k <= k_max: max_k P_k / I_1(k) with I_1(k) the unit integral
// over [0,1] x [k,k+1].
double continuum_beta_lower_bound(const Kernel& kernel, std::int64_t k_max);

struct IntervalTrace {
  std::vector<std::pair<double, double>> intervals;  // I_0..I_T inclusive
  std::vector<double> growth_ratio;                  // D_n = |I_{n+1}| / |I_n|
  std::vector<std::uint64_t> exiting_bonds;          // |Pi_n| per step (discrete source)
  bool truncated = false;                            // growth hit the window edge
};

// Discrete interval growth: I_{n+1} is the hull of I_n together with every
// vertex directly bonded to I_n; records growth ratios and exiting-bond
// counts per step.
IntervalTrace interval_growth(const Configuration& config, std::int64_t i0_lo,
                              std::int64_t i0_hi, int steps);

// Continuum variant: I_{n+1} is the smallest J with xi(I_n x (R - J)) = 0
// within the sampled window.
IntervalTrace interval_growth_continuum(const ContinuumSample& sample, double i0_lo,
                                        double i0_hi, int steps);

struct ExitingBondStats {
  std::uint64_t count = 0;          // open bonds with exactly one endpoint inside
  std::int64_t max_reach = 0;       // farthest bonded vertex's distance beyond the interval
  std::vector<std::int64_t> exit_distances;  // per exiting bond
};

ExitingBondStats exiting_bond_stats(const Configuration& config, std::int64_t lo,
                                    std::int64_t hi);

}  // namespace lrp
