#include "lrp/oned.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lrp {

double rect_intensity(double beta, double a, double b, double c, double d) {
  if (beta < 0) throw std::domain_error("rect_intensity: beta must be nonnegative");
  if (!(a <= b) || !(c <= d)) throw std::domain_error("rect_intensity: malformed intervals");
  if (b > c) throw std::domain_error("rect_intensity: intervals overlap (nonintegrable)");
  if (a == b || c == d || beta == 0) return 0.0;
  if (b == c) return std::numeric_limits<double>::infinity();
  return beta * std::log(((c - a) * (d - b)) / ((c - b) * (d - a)));
}

ContinuumSample sample_continuum(double beta, double x_lo, double x_hi, double y_lo,
                                 double y_hi, const SeedRecord& seed) {
  if (beta < 0) throw std::domain_error("sample_continuum: beta must be nonnegative");
  if (!(x_lo < x_hi) || !(y_lo < y_hi))
    throw std::invalid_argument("sample_continuum: empty window");
  seed.require_supported();
  ContinuumSample out;
  out.beta = beta;
  out.x_lo = x_lo;
  out.x_hi = x_hi;
  out.y_lo = y_lo;
  out.y_hi = y_hi;
  out.seed = seed;
  if (beta == 0) return out;

  Rng rng(derive_key(seed.seed, "continuum"));
  const std::int64_t i_lo = static_cast<std::int64_t>(std::floor(x_lo));
  const std::int64_t i_hi = static_cast<std::int64_t>(std::ceil(x_hi));
  const std::int64_t j_hi = static_cast<std::int64_t>(std::ceil(y_hi));
  for (std::int64_t i = i_lo; i < i_hi; ++i) {
    const std::int64_t j_start = std::max(i + 2, static_cast<std::int64_t>(std::floor(y_lo)));
    for (std::int64_t j = j_start; j < j_hi; ++j) {
      const double a = static_cast<double>(i), b = a + 1;
      const double c = static_cast<double>(j), d = c + 1;
      const double mean = rect_intensity(beta, a, b, c, d);
      const std::uint64_t count = rng.poisson(mean);
      for (std::uint64_t k = 0; k < count; ++k) {
        // x marginal on [a,b]: density 1/(c-x) - 1/(d-x), inverted via
        // r = (d-x)/(c-x) = exp(G(a) + u (G(b)-G(a)))
        const double ga = std::log((d - a) / (c - a));
        const double gb = std::log((d - b) / (c - b));
        const double u = rng.next_unit();
        const double r = std::exp(ga + u * (gb - ga));
        const double x = (r * c - d) / (r - 1.0);
        // y | x on [c,d]: density prop to (y-x)^-2
        const double v = rng.next_unit();
        const double inv = 1.0 / (c - x) - v * (1.0 / (c - x) - 1.0 / (d - x));
        const double y = x + 1.0 / inv;
        out.points.emplace_back(x, y);
      }
    }
  }
  std::sort(out.points.begin(), out.points.end());
  return out;
}

double continuum_beta_lower_bound(const Kernel& kernel, std::int64_t k_max) {
  if (kernel.dim() != 1)
    throw std::invalid_argument("continuum_beta_lower_bound: one-dimensional kernels only");
  double best = 0;
  for (std::int64_t k = 1; k <= k_max; ++k) {
    const double p = kernel.prob({k, 0, 0, 0});
    if (p == 0) continue;
    const double unit = rect_intensity(1.0, 0, 1, static_cast<double>(k),
                                       static_cast<double>(k) + 1);
    if (std::isinf(unit)) continue;  // k = 1 touches the diagonal band
    best = std::max(best, p / unit);
  }
  return best;
}

IntervalTrace interval_growth(const Configuration& config, std::int64_t i0_lo,
                              std::int64_t i0_hi, int steps) {
  if (config.box.d != 1) throw std::invalid_argument("interval_growth: d=1 configurations only");
  const Box& box = config.box;
  if (i0_lo > i0_hi || i0_lo < box.origin[0] || i0_hi >= box.origin[0] + box.n)
    throw std::invalid_argument("interval_growth: I_0 outside the sampled window");

  IntervalTrace trace;
  trace.intervals.emplace_back(static_cast<double>(i0_lo), static_cast<double>(i0_hi));

  std::int64_t lo = i0_lo, hi = i0_hi;
  for (int step = 0; step < steps; ++step) {
    std::int64_t new_lo = lo, new_hi = hi;
    std::uint64_t exiting = 0;
    for (const Bond& b : config.bonds) {
      const std::int64_t xu = box.coord_of(b.u)[0];
      const std::int64_t xv = box.coord_of(b.v)[0];
      const bool in_u = xu >= lo && xu <= hi;
      const bool in_v = xv >= lo && xv <= hi;
      if (in_u == in_v) continue;
      ++exiting;
      const std::int64_t outside = in_u ? xv : xu;
      new_lo = std::min(new_lo, outside);
      new_hi = std::max(new_hi, outside);
    }
    trace.exiting_bonds.push_back(exiting);
    const double len_old = static_cast<double>(hi - lo + 1);
    const double len_new = static_cast<double>(new_hi - new_lo + 1);
    trace.growth_ratio.push_back(len_new / len_old);
    trace.intervals.emplace_back(static_cast<double>(new_lo), static_cast<double>(new_hi));
    lo = new_lo;
    hi = new_hi;
    if (lo <= box.origin[0] || hi >= box.origin[0] + box.n - 1) {
      // cannot observe further growth beyond the sampled window
      if (step + 1 < steps) trace.truncated = true;
      break;
    }
  }
  return trace;
}

IntervalTrace interval_growth_continuum(const ContinuumSample& sample, double i0_lo,
                                        double i0_hi, int steps) {
  if (!(i0_lo < i0_hi))
    throw std::invalid_argument("interval_growth_continuum: empty I_0");
  IntervalTrace trace;
  trace.intervals.emplace_back(i0_lo, i0_hi);
  double lo = i0_lo, hi = i0_hi;
  const double w_lo = std::min(sample.x_lo, sample.y_lo);
  const double w_hi = std::max(sample.x_hi, sample.y_hi);
  for (int step = 0; step < steps; ++step) {
    double new_lo = lo, new_hi = hi;
    std::uint64_t crossing = 0;
    for (const auto& [x, y] : sample.points) {
      // the process is the symmetric closure of {x < y} points
      const bool in_x = x >= lo && x <= hi;
      const bool in_y = y >= lo && y <= hi;
      if (in_x == in_y) continue;
      ++crossing;
      const double outside = in_x ? y : x;
      new_lo = std::min(new_lo, outside);
      new_hi = std::max(new_hi, outside);
    }
    trace.exiting_bonds.push_back(crossing);
    trace.growth_ratio.push_back((new_hi - new_lo) / (hi - lo));
    trace.intervals.emplace_back(new_lo, new_hi);
    lo = new_lo;
    hi = new_hi;
    if (lo <= w_lo || hi >= w_hi) {
      if (step + 1 < steps) trace.truncated = true;
      break;
    }
  }
  return trace;
}

ExitingBondStats exiting_bond_stats(const Configuration& config, std::int64_t lo,
                                    std::int64_t hi) {
  if (config.box.d != 1)
    throw std::invalid_argument("exiting_bond_stats: d=1 configurations only");
  ExitingBondStats out;
  for (const Bond& b : config.bonds) {
    const std::int64_t xu = config.box.coord_of(b.u)[0];
    const std::int64_t xv = config.box.coord_of(b.v)[0];
    const bool in_u = xu >= lo && xu <= hi;
    const bool in_v = xv >= lo && xv <= hi;
    if (in_u == in_v) continue;
    ++out.count;
    const std::int64_t outside = in_u ? xv : xu;
    const std::int64_t dist = outside < lo ? lo - outside : outside - hi;
    out.exit_distances.push_back(dist);
    out.max_reach = std::max(out.max_reach, dist);
  }
  return out;
}

}  // namespace lrp
