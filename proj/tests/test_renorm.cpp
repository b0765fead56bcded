#include <doctest.h>

#include <cmath>
#include <limits>

#include "lrp/renorm.hpp"

using namespace lrp;

namespace {

StageSchedule poly(int a, double b, int depth) {
  StageSchedule s;
  s.variant = ScheduleVariant::Polynomial;
  s.a = a;
  s.b = b;
  s.depth = depth;
  return s;
}

}  // namespace

TEST_CASE("validate_schedule names the violated inequality") {
  // d=1, s=1.5: 2b < a(2d-s) = a/2
  CHECK_THROWS_WITH_AS(validate_schedule(poly(4, 1.5, 2), 1, 1.5),
                       doctest::Contains("2b < a(2d-s)"), std::invalid_argument);
  CHECK_NOTHROW(validate_schedule(poly(8, 1.5, 2), 1, 1.5));
  CHECK_NOTHROW(validate_schedule(poly(4, 1.2, 2), 2, 3.0));
  CHECK_THROWS_WITH_AS(validate_schedule(poly(2, 2.5, 2), 1, 1.5),
                       doctest::Contains("a > b"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(validate_schedule(poly(4, 0.5, 2), 2, 3.0),
                       doctest::Contains("b > 1"), std::invalid_argument);
}

TEST_CASE("run_hierarchy trivial envelopes") {
  HierarchyInput in;
  in.d = 1;
  in.units_per_axis = 8;
  in.unit_alive.assign(8, 1);
  for (std::uint32_t i = 0; i < 8; ++i)
    for (std::uint32_t j = i + 1; j < 8; ++j) in.attachments.emplace_back(i, j);

  SUBCASE("all alive and all attached: every stage fully alive") {
    StageSchedule s2 = poly(1, 1.0, 2);  // stage-2 side 2
    const HierarchyResult hr = run_hierarchy(in, s2);
    REQUIRE(hr.stages.size() == 2);
    CHECK(hr.stages[0].alive_fraction() == 1.0);
    CHECK(hr.stages[1].alive_fraction() == 1.0);
    CHECK(hr.stages[1].vertex_count == 4);
  }
  SUBCASE("no unit alive: every stage dead") {
    HierarchyInput dead = in;
    dead.unit_alive.assign(8, 0);
    StageSchedule s2 = poly(1, 1.0, 2);
    const HierarchyResult hr = run_hierarchy(dead, s2);
    CHECK(hr.stages[0].alive_count == 0);
    CHECK(hr.stages[1].alive_count == 0);
    CHECK(hr.stages[1].a_failures == 4);
  }
}

TEST_CASE("two-stage fixture: missing attachment kills via condition B") {
  // 4 units in one stage-2 vertex (side 4); units 0,1,2 alive, 3 dead;
  // attachments (0,1) and (0,2) but not (1,2)
  HierarchyInput in;
  in.d = 1;
  in.units_per_axis = 4;
  in.unit_alive = {1, 1, 1, 0};
  in.attachments = {{0, 1}, {0, 2}};
  StageSchedule sched = poly(2, 1.5, 2);  // stage-2 side 4, threshold 2^0.5

  const HierarchyResult hr = run_hierarchy(in, sched);
  REQUIRE(hr.stages.size() == 2);
  CHECK(hr.stages[1].vertex_count == 1);
  CHECK(hr.stages[1].alive_count == 0);
  CHECK(hr.stages[1].a_failures == 0);
  CHECK(hr.stages[1].b_failures == 1);

  // adding the missing pair brings the vertex alive
  in.attachments.push_back({1, 2});
  const HierarchyResult hr2 = run_hierarchy(in, sched);
  CHECK(hr2.stages[1].alive_count == 1);
}

TEST_CASE("three-stage fixture: attachment must come from living lineage") {
  // units 0..5; stage-2 vertices {0,1},{2,3},{4,5}; one stage-3 vertex.
  // unit 3 dead, so the cluster of mid vertex 1 is {2} only: a bond through
  // dead unit 3 must not count for condition B at stage 3.
  HierarchyInput in;
  in.d = 1;
  in.units_per_axis = 6;
  in.unit_alive = {1, 1, 1, 0, 1, 1};
  in.attachments = {{0, 1}, {1, 2}, {3, 4}, {4, 5}, {0, 4}};
  StageSchedule sched = poly(1, 1.0, 3);  // sides C_2 = 2, C_3 = 3; thresholds 1

  const HierarchyResult hr = run_hierarchy(in, sched);
  REQUIRE(hr.stages.size() == 3);
  CHECK(hr.stages[1].alive_count == 3);
  CHECK(hr.stages[2].alive_count == 0);
  CHECK(hr.stages[2].b_failures == 1);

  in.attachments.push_back({2, 4});  // live-lineage link between mid vertices 1 and 2
  const HierarchyResult hr2 = run_hierarchy(in, sched);
  CHECK(hr2.stages[2].alive_count == 1);
}

TEST_CASE("run_hierarchy divisibility error") {
  HierarchyInput in;
  in.d = 1;
  in.units_per_axis = 6;
  in.unit_alive.assign(6, 1);
  CHECK_THROWS_WITH_AS(run_hierarchy(in, poly(2, 1.5, 2)),
                       doctest::Contains("not divisible"), std::invalid_argument);
}

TEST_CASE("psi_bound closed form and decay") {
  const StageSchedule sched = poly(8, 1.5, 2);
  SUBCASE("n = 1 value: C_1 = 1, V_1 = 1, U_1 = d") {
    CHECK(psi_bound(1, 10.0, sched, 1, 1.5) ==
          doctest::Approx(std::exp(-10.0)).epsilon(1e-12));
    CHECK(psi_bound(1, 2.0, sched, 2, 3.0) ==
          doctest::Approx(std::exp(-2.0 * std::pow(2.0, -3.0))).epsilon(1e-12));
  }
  SUBCASE("monotone to zero in beta") {
    double prev = std::numeric_limits<double>::infinity();
    for (double beta = 1; beta <= 1e6; beta *= 10) {
      const double v = psi_bound(3, beta, sched, 1, 1.5);
      CHECK(v <= prev);
      prev = v;
    }
    CHECK(psi_bound(3, 1e280, sched, 1, 1.5) == 0.0);
  }
  SUBCASE("direct evaluation scan finds the super-exponential collapse") {
    // the bound rises polynomially before the factorial term wins, so scan
    // for the last n at which it still exceeds e^-n
    int n0 = 1;
    for (int n = 60; n >= 1; --n) {
      if (psi_bound(n, 10.0, sched, 1, 1.5) >= std::exp(-n)) {
        n0 = n + 1;
        break;
      }
    }
    REQUIRE(n0 > 1);
    REQUIRE(n0 <= 60);
    for (int n = n0; n <= 60; ++n)
      CHECK(psi_bound(n, 10.0, sched, 1, 1.5) < std::exp(-n));
    // independent log-space evaluation at n0
    const int n = n0;
    const double logV = (8.0 - 1.5) * std::lgamma(static_cast<double>(n));
    const double logU = 8.0 * std::lgamma(n + 1.0);
    const double expected =
        std::exp(16.0 * std::log(n) - 10.0 * std::exp(-1.5 * logU + 2 * logV));
    CHECK(psi_bound(n, 10.0, sched, 1, 1.5) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("subgraph_bounds") {
  SUBCASE("large-deviation plug-in at d=1, n=4: exp(-1/16)") {
    CHECK(subgraph_bounds(4, 1, 50.0, 1.5).large_deviation ==
          doctest::Approx(std::exp(-1.0 / 16.0)).epsilon(1e-12));
  }
  SUBCASE("condition-B bound vanishes as beta grows") {
    double prev = std::numeric_limits<double>::infinity();
    for (double beta = 2; beta <= 1e9; beta *= 100) {
      const double v = subgraph_bounds(3, 1, beta, 1.5).condition_b;
      CHECK(v <= prev);
      prev = v;
    }
    CHECK(subgraph_bounds(3, 1, 1e270, 1.5).condition_b == 0.0);
  }
  SUBCASE("plug-in check of the printed form at small n") {
    const int n = 2, d = 1;
    const double beta = 50, s = 1.5;
    const double expected = 4.0 * std::pow(3.0, 8.0) *
                            std::exp(-beta * std::pow(2.0, -n * s) *
                                     std::pow(6.0, 4.0 * d - 2.0 * s));
    CHECK(subgraph_bounds(n, d, beta, s).condition_b ==
          doctest::Approx(expected).epsilon(1e-9));
  }
  SUBCASE("scan finds where the bound dips below e^-n") {
    int n0 = -1;
    for (int n = 1; n <= 40; ++n) {
      if (subgraph_bounds(n, 1, 50.0, 1.5).condition_b < std::exp(-n)) {
        n0 = n;
        break;
      }
    }
    CHECK(n0 > 0);
  }
}

TEST_CASE("subgraph variant on a fully planted grid") {
  // d=1, depth 1: W_1 = 8 units per stage-1 vertex, theta_1 W_1 = 4 alive
  // required, C_1 = 4 actives
  HierarchyInput in;
  in.d = 1;
  in.units_per_axis = 8;
  in.unit_alive.assign(8, 1);
  for (std::uint32_t i = 0; i < 8; ++i)
    for (std::uint32_t j = i + 1; j < 8; ++j) in.attachments.emplace_back(i, j);
  StageSchedule sched;
  sched.variant = ScheduleVariant::Subgraph;
  sched.depth = 1;
  const HierarchyResult hr = run_hierarchy(in, sched);
  REQUIRE(hr.stages.size() == 2);
  CHECK(hr.stages[1].alive_count == 1);
  REQUIRE(hr.active_units.size() == 1);
  CHECK(hr.active_units[0] == std::vector<std::uint32_t>{0, 1, 2, 3});
  REQUIRE(hr.chosen_children.size() == 1);
  CHECK(hr.chosen_children[0][0].size() == 4);

  SUBCASE("connectivity failure kills a stage-1 vertex") {
    HierarchyInput split = in;
    split.attachments.clear();
    for (std::uint32_t i = 0; i < 4; ++i)
      for (std::uint32_t j = i + 1; j < 4; ++j) split.attachments.emplace_back(i, j);
    for (std::uint32_t i = 4; i < 8; ++i)
      for (std::uint32_t j = i + 1; j < 8; ++j) split.attachments.emplace_back(i, j);
    const HierarchyResult hr2 = run_hierarchy(split, sched);
    CHECK(hr2.stages[1].alive_count == 0);
    CHECK(hr2.stages[1].b_failures == 1);
  }
  SUBCASE("origin preference puts the origin's unit first") {
    HierarchyInput org = in;
    org.origin_unit = 5;
    const HierarchyResult hr3 = run_hierarchy(org, sched);
    REQUIRE(hr3.chosen_children[0][0].size() == 4);
    CHECK(hr3.chosen_children[0][0][0] == 5);
  }
}

TEST_CASE("hierarchy from a sampled configuration is monotone under thinning") {
  const Kernel k = Kernel::make_eta(1, 1.5, 2.0);
  const Box box(1, 128);  // M = 4, stage-2 side 32 (a = 5)
  const StageSchedule sched = poly(5, 1.1, 2);
  int stage1_violations = 0, stage2_violations = 0;
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    SeedRecord seed{derive_key(606, rep)};
    const Configuration c = sample_config(k, box, seed);
    const Configuration t = thin_config(c, 0.35, SeedRecord{derive_key(707, rep)});
    const auto hr_full = run_hierarchy(hierarchy_input_from_config(c, 4, 4, 3), sched);
    const auto hr_thin = run_hierarchy(hierarchy_input_from_config(t, 4, 4, 3), sched);
    if (hr_thin.stages[0].alive_count > hr_full.stages[0].alive_count) ++stage1_violations;
    if (hr_thin.stages[1].alive_count > hr_full.stages[1].alive_count) ++stage2_violations;
  }
  // stage-1 aliveness is pathwise monotone; higher stages could flip only
  // through semi-cluster tie switches, absent on these instances
  CHECK(stage1_violations == 0);
  CHECK(stage2_violations == 0);
}

TEST_CASE("failure decomposition accounts for every dead vertex") {
  const Kernel k = Kernel::make_eta(1, 1.5, 1.0);
  for (std::uint64_t rep = 0; rep < 8; ++rep) {
    SeedRecord seed{derive_key(11, rep)};
    const Configuration c = sample_config(k, Box(1, 128), seed);
    const auto hr = run_hierarchy(hierarchy_input_from_config(c, 4, 2, 3), poly(5, 1.1, 2));
    for (const auto& st : hr.stages) {
      CHECK(st.alive_count + st.a_failures + st.b_failures == st.vertex_count);
      CHECK(st.alive_fraction() >= 0.0);
      CHECK(st.alive_fraction() <= 1.0);
    }
  }
}
