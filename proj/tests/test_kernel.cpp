#include <doctest.h>

#include <cmath>
#include <limits>

#include "lrp/kernel.hpp"
#include "lrp/rng.hpp"

using namespace lrp;

TEST_CASE("eta closed form") {
  CHECK(eta(0, 5, 2) == 0.0);
  CHECK(eta(std::log(2.0), 1, 2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(eta(1, 2, 2) == doctest::Approx(1.0 - std::exp(-0.25)).epsilon(1e-15));
  CHECK_THROWS_AS(eta(1, 0, 2), std::domain_error);
  CHECK_THROWS_AS(eta(1, -3, 2), std::domain_error);
  CHECK_THROWS_AS(eta(-1, 1, 2), std::domain_error);
}

TEST_CASE("eta monotone in beta and k") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double b1 = 5 * rng.next_unit(), b2 = b1 + 1e-3 + rng.next_unit();
    const double k1 = 0.5 + 10 * rng.next_unit(), k2 = k1 + 1e-3 + rng.next_unit();
    const double s = 1.1 + 2 * rng.next_unit();
    CHECK(eta(b2, k1, s) > eta(b1, k1, s));
    if (b1 > 0) CHECK(eta(b1, k2, s) < eta(b1, k1, s));
  }
}

TEST_CASE("kernel validation") {
  CHECK_THROWS(Kernel::make_eta(1, 0.9, 1.0));  // s <= d
  CHECK_THROWS(Kernel::make_table(1, 1.5, 1.0, 2, {{{1, 0, 0, 0}, 1.0}}));  // entry >= 1
  // asymmetric pair: entries for k and -k with different values
  CHECK_THROWS(Kernel::make_table(1, 1.5, 1.0, 2,
                                  {{{1, 0, 0, 0}, 0.3}, {{-1, 0, 0, 0}, 0.4}}));
  // symmetric duplicates are fine
  const Kernel k = Kernel::make_table(1, 1.5, 1.0, 2,
                                      {{{1, 0, 0, 0}, 0.3}, {{-1, 0, 0, 0}, 0.3}});
  CHECK(k.prob({1, 0, 0, 0}) == 0.3);
  CHECK(k.prob({-1, 0, 0, 0}) == 0.3);
  CHECK_THROWS_AS(k.prob({0, 0, 0, 0}), std::domain_error);
}

TEST_CASE("derive_constants eta form") {
  const Kernel k = Kernel::make_eta(1, 1.5, 2.0);
  const DerivedConstants c = derive_constants(k);
  CHECK(c.k0 == 0);
  CHECK(c.gamma == 2.0);  // exactly beta for the eta form
  CHECK(c.zeta == doctest::Approx(std::pow(2.0, -2.5)).epsilon(1e-15));
  CHECK(c.liminf_ok);
}

TEST_CASE("derive_constants zero amplitude flags liminf failure") {
  const Kernel k = Kernel::make_eta(1, 1.5, 0.0);
  const DerivedConstants c = derive_constants(k);
  CHECK(c.gamma == 0.0);
  CHECK_FALSE(c.liminf_ok);
}

TEST_CASE("derive_constants k0 from a zeroed shell") {
  // P at |k|_1 = 1 set to 0, eta tail elsewhere
  const Kernel k = Kernel::make_table(1, 1.5, 2.0, 1, {{{1, 0, 0, 0}, 0.0}});
  const DerivedConstants c = derive_constants(k);
  CHECK(c.k0 == 1);
  CHECK(c.gamma == doctest::Approx(2.0));
}

TEST_CASE("derive_constants tabulated gamma matches brute-force scan") {
  // d=2 table on |k|_1 <= 8 with values below the eta curve, eta tail beyond
  const double s = 2.5, tail_beta = 3.0;
  std::vector<std::pair<Coord, double>> entries;
  for (std::int64_t x = -8; x <= 8; ++x)
    for (std::int64_t y = -8; y <= 8; ++y) {
      if (!(x > 0 || (x == 0 && y > 0))) continue;  // canonical representatives
      const std::int64_t l1 = std::abs(x) + std::abs(y);
      if (l1 > 8) continue;
      // deterministic dented variant of the eta value
      const double base = eta(tail_beta, static_cast<double>(l1), s);
      const double p = base * (0.6 + 0.4 / (1.0 + static_cast<double>((x * 31 + y * 17) & 7)));
      entries.push_back({{x, y, 0, 0}, p});
    }
  const Kernel k = Kernel::make_table(2, s, tail_beta, 8, entries);
  const DerivedConstants c = derive_constants(k);

  // independent oracle: direct minimization over the full support
  double gamma = tail_beta;  // tail contributes exactly tail_beta
  for (std::int64_t x = -8; x <= 8; ++x)
    for (std::int64_t y = -8; y <= 8; ++y) {
      const std::int64_t l1 = std::abs(x) + std::abs(y);
      if (l1 == 0 || l1 > 8) continue;
      const double p = k.prob({x, y, 0, 0});
      const double ratio = -std::log1p(-p) / std::pow(static_cast<double>(l1), -s);
      gamma = std::min(gamma, ratio);
    }
  CHECK(c.gamma == doctest::Approx(gamma).epsilon(1e-12));
}

TEST_CASE("connect_bound closed forms") {
  const Kernel k1 = Kernel::make_eta(1, 1.5, 2.0);
  const DerivedConstants c1 = derive_constants(k1);
  // zeta gamma rho^2 = 2^-2.5 * 2 * 16
  const double amp = std::pow(2.0, -2.5) * 2.0 * 16.0;
  CHECK(connect_bound(c1, 4.0, 1, 1.5, 1) ==
        doctest::Approx(1.0 - std::exp(-amp)).epsilon(1e-12));
  CHECK(connect_bound(c1, 4.0, 1, 1.5, 1) == doctest::Approx(0.996508).epsilon(1e-4));

  // zero amplitude -> 0
  const DerivedConstants c0 = derive_constants(Kernel::make_eta(1, 1.5, 0.0));
  CHECK(connect_bound(c0, 4.0, 2, 1.5, 1) == 0.0);

  // d=2, s=3, gamma=1, rho=10, l=2: 1 - exp(-(1/128) * 100 * 2^-3)
  const DerivedConstants c2 = derive_constants(Kernel::make_eta(2, 3.0, 1.0));
  CHECK(c2.zeta == doctest::Approx(1.0 / 128.0).epsilon(1e-15));
  CHECK(connect_bound(c2, 10.0, 2, 3.0, 2) ==
        doctest::Approx(1.0 - std::exp(-100.0 / 1024.0)).epsilon(1e-12));

  // rho below the lemma hypothesis threshold names it
  const Kernel kt = Kernel::make_table(1, 1.5, 2.0, 1, {{{1, 0, 0, 0}, 0.0}});
  const DerivedConstants ct = derive_constants(kt);  // k0 = 1
  CHECK_THROWS_WITH_AS(connect_bound(ct, 3.9, 1, 1.5, 1),
                       doctest::Contains("2(2 k0)^d"), std::invalid_argument);
}

TEST_CASE("zeta stays in (0, 1/4]") {
  for (int d = 1; d <= 3; ++d)
    for (double s = d + 0.01; s < 2.0 * d; s += 0.17) {
      const DerivedConstants c = derive_constants(Kernel::make_eta(d, s, 1.0));
      CHECK(c.zeta > 0.0);
      CHECK(c.zeta <= 0.25);
    }
}
