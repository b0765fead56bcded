#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "lrp/clusters.hpp"
#include "lrp/config.hpp"
#include "lrp/parallel.hpp"

using namespace lrp;

namespace {

// Wilson-Hilferty approximation of the chi^2 upper quantile
double chi2_quantile(double k, double z) {
  const double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
  return k * t * t * t;
}

}  // namespace

TEST_CASE("all-zero kernel yields no bonds") {
  const Kernel k = Kernel::make_eta(1, 1.5, 0.0);
  SeedRecord seed{42};
  const Configuration c = sample_config(k, Box(1, 32), seed);
  CHECK(c.bonds.empty());
}

TEST_CASE("near-certain nearest-neighbor kernel on three sites") {
  // P = 1 - 1e-15 at |k|_1 = 1 only
  const Kernel k = Kernel::make_table(1, 1.5, 0.0, 3,
                                      {{{1, 0, 0, 0}, 1.0 - 1e-15}});
  SeedRecord seed{7};
  const Configuration c = sample_config(k, Box(1, 3), seed);
  REQUIRE(c.bonds.size() == 2);
  CHECK(c.bonds[0] == Bond{0, 1});
  CHECK(c.bonds[1] == Bond{1, 2});

  // golden fixture produced by the per-pair reference sampler
  const Configuration ref = sample_config_perpair(k, Box(1, 3), seed);
  REQUIRE(ref.bonds.size() == 2);
  CHECK(ref.bonds[0] == Bond{0, 1});
  CHECK(ref.bonds[1] == Bond{1, 2});

  // serialized form is byte-stable
  std::ostringstream os;
  write_config_csv(os, c);
  const std::string expect =
      "# lrp-config v1\n"
      "d,1\nn,3\norigin,0\nkernel_hash," + std::to_string(k.hash()) +
      "\nseed,sm64ctr/v1,7\nbonds,2\n0,1\n1,2\n";
  CHECK(os.str() == expect);
  std::istringstream is(os.str());
  const Configuration back = read_config_csv(is);
  CHECK(back.bonds == c.bonds);
  CHECK(back.box.n == 3);
}

TEST_CASE("determinism: identical inputs give identical bond sets") {
  const Kernel k = Kernel::make_eta(2, 2.5, 1.0);
  SeedRecord seed{123456};
  const Configuration a = sample_config(k, Box(2, 24), seed);
  const Configuration b = sample_config(k, Box(2, 24), seed);
  CHECK(a.bonds == b.bonds);
  CHECK_FALSE(a.bonds.empty());
  SeedRecord other{123457};
  CHECK(sample_config(k, Box(2, 24), other).bonds != a.bonds);
}

TEST_CASE("distance-3 open frequency matches the closed form") {
  // d=1, N=64, beta=1, s=1.5: frequency of distance-3 pairs over replicas
  const Kernel k = Kernel::make_eta(1, 1.5, 1.0);
  const Box box(1, 64);
  const double p = eta(1.0, 3.0, 1.5);
  const std::uint64_t replicas = 10000;
  const std::uint64_t class_size = 61;
  std::vector<std::uint32_t> open(replicas, 0);
  parallel_for(replicas, [&](std::uint64_t rep) {
    SeedRecord seed{derive_key(99, rep)};
    const Configuration c = sample_config(k, box, seed);
    std::uint32_t cnt = 0;
    for (const Bond& b : c.bonds)
      if (b.v - b.u == 3) ++cnt;
    open[rep] = cnt;
  });
  std::uint64_t total = 0;
  for (auto v : open) total += v;
  const double trials = static_cast<double>(replicas * class_size);
  const double freq = static_cast<double>(total) / trials;
  const double sigma = std::sqrt(p * (1 - p) / trials);
  CHECK(std::abs(freq - p) <= 3 * sigma);
}

TEST_CASE("per-class chi-square goodness of fit on a small box") {
  const Kernel k = Kernel::make_eta(1, 1.5, 0.8);
  const Box box(1, 12);
  const std::uint64_t replicas = 4000;
  std::vector<std::vector<std::uint32_t>> counts(replicas);
  parallel_for(replicas, [&](std::uint64_t rep) {
    SeedRecord seed{derive_key(2024, rep)};
    const Configuration c = sample_config(k, box, seed);
    std::vector<std::uint32_t> per_dist(12, 0);
    for (const Bond& b : c.bonds) ++per_dist[b.v - b.u];
    counts[rep] = per_dist;
  });
  double stat = 0;
  int dof = 0;
  for (std::int64_t dist = 1; dist <= 11; ++dist) {
    const double p = eta(0.8, static_cast<double>(dist), 1.5);
    const double trials = static_cast<double>(replicas * (12 - dist));
    double observed = 0;
    for (const auto& c : counts) observed += c[dist];
    const double mean = trials * p, var = trials * p * (1 - p);
    stat += (observed - mean) * (observed - mean) / var;
    ++dof;
  }
  // significance 1e-3: z = 3.0902
  CHECK(stat < chi2_quantile(dof, 3.0902));
}

TEST_CASE("class sampler agrees with per-pair reference in distribution") {
  const Kernel k = Kernel::make_eta(1, 1.8, 1.2);
  const Box box(1, 24);
  const std::uint64_t replicas = 3000;
  std::vector<double> cm(replicas), pm(replicas);
  parallel_for(replicas, [&](std::uint64_t rep) {
    SeedRecord seed{derive_key(5150, rep)};
    cm[rep] = static_cast<double>(sample_config(k, box, seed).bonds.size());
    pm[rep] = static_cast<double>(sample_config_perpair(k, box, seed).bonds.size());
  });
  double class_mean = 0, pair_mean = 0;
  for (std::uint64_t i = 0; i < replicas; ++i) {
    class_mean += cm[i];
    pair_mean += pm[i];
  }
  class_mean /= replicas;
  pair_mean /= replicas;
  double expect = 0, var = 0;
  for (std::int64_t dist = 1; dist <= 23; ++dist) {
    const double p = eta(1.2, static_cast<double>(dist), 1.8);
    expect += (24 - dist) * p;
    var += (24 - dist) * p * (1 - p);
  }
  const double sigma = std::sqrt(var / replicas);
  CHECK(std::abs(class_mean - expect) <= 3.5 * sigma);
  CHECK(std::abs(pair_mean - expect) <= 3.5 * sigma);
}

TEST_CASE("thinning") {
  const Kernel k = Kernel::make_eta(1, 1.2, 3.0);
  SeedRecord seed{31337};
  const Configuration c = sample_config(k, Box(1, 512), seed);
  REQUIRE(c.bonds.size() > 1000);

  SUBCASE("eps = 0 is the identity") {
    CHECK(thin_config(c, 0.0, SeedRecord{1}).bonds == c.bonds);
  }
  SUBCASE("eps = 1 empties the configuration") {
    CHECK(thin_config(c, 1.0, SeedRecord{1}).bonds.empty());
  }
  SUBCASE("eps bounds are checked") {
    CHECK_THROWS(thin_config(c, -0.1, SeedRecord{1}));
    CHECK_THROWS(thin_config(c, 1.1, SeedRecord{1}));
  }
  SUBCASE("retention is binomial and output is a subset") {
    const double eps = 0.3;
    const Configuration t = thin_config(c, eps, SeedRecord{77});
    const std::set<Bond> base(c.bonds.begin(), c.bonds.end());
    for (const Bond& b : t.bonds) CHECK(base.count(b) == 1);
    const double n = static_cast<double>(c.bonds.size());
    const double mean = 0.7 * n, sigma = std::sqrt(n * 0.3 * 0.7);
    CHECK(std::abs(static_cast<double>(t.bonds.size()) - mean) <= 3 * sigma);
  }
  SUBCASE("composition matches single-step thinning in distribution") {
    // thin(thin(c, e1), e2) ~ thin(c, 1-(1-e1)(1-e2)): compare mean counts
    const double e1 = 0.2, e2 = 0.25;
    const double combined = 1.0 - (1.0 - e1) * (1.0 - e2);
    const std::uint64_t reps = 2000;
    std::vector<double> two(reps), one(reps);
    parallel_for(reps, [&](std::uint64_t rep) {
      SeedRecord s1{derive_key(1, rep)}, s2{derive_key(2, rep)}, s3{derive_key(3, rep)};
      two[rep] = static_cast<double>(
          thin_config(thin_config(c, e1, s1), e2, s2).bonds.size());
      one[rep] = static_cast<double>(thin_config(c, combined, s3).bonds.size());
    });
    double m2 = 0, m1 = 0;
    for (std::uint64_t i = 0; i < reps; ++i) {
      m2 += two[i];
      m1 += one[i];
    }
    m2 /= reps;
    m1 /= reps;
    const double n = static_cast<double>(c.bonds.size());
    const double sigma =
        std::sqrt(2.0 * n * combined * (1 - combined) / static_cast<double>(reps));
    CHECK(std::abs(m2 - m1) <= 3.5 * sigma);
  }
}

TEST_CASE("truncation") {
  const Kernel k = Kernel::make_eta(1, 1.5, 1.5);
  SeedRecord seed{4242};
  const Configuration c = sample_config(k, Box(1, 64), seed);

  SUBCASE("L beyond the diameter is the identity") {
    CHECK(truncate_config(c, 64).bonds == c.bonds);
  }
  SUBCASE("L = 1 removes everything") {
    CHECK(truncate_config(c, 1).bonds.empty());
  }
  SUBCASE("matches the bond-by-bond filter oracle") {
    const std::int64_t L = 5;
    const Configuration t = truncate_config(c, L);
    std::vector<Bond> expect;
    for (const Bond& b : c.bonds)
      if (static_cast<std::int64_t>(b.v - b.u) < L) expect.push_back(b);
    CHECK(t.bonds == expect);
  }
}

TEST_CASE("oversized sampling request is refused with a size diagnostic") {
  const Kernel k = Kernel::make_eta(1, 1.5, 1.0);
  CHECK_THROWS_WITH_AS(sample_config(k, Box(1, 4096), SeedRecord{1}, 100.0),
                       doctest::Contains("expected bond count"), std::invalid_argument);
}
