#include "lrp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "lrp/clusters.hpp"
#include "lrp/config.hpp"
#include "lrp/electro.hpp"
#include "lrp/oned.hpp"
#include "lrp/parallel.hpp"
#include "lrp/renorm.hpp"
#include "lrp/renorm_graph.hpp"
#include "lrp/walk.hpp"

namespace lrp {

namespace {

constexpr const char* kVersion = "lrp 1.0";

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct Csv {
  std::ofstream os;
  explicit Csv(const std::filesystem::path& p) : os(p, std::ios::binary) {
    if (!os) throw std::runtime_error("cannot open output file " + p.string());
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      os << cells[i];
      if (i + 1 < cells.size()) os << ',';
    }
    os << '\n';
  }
};

Box centered_box(int d, std::int64_t radius) {
  Coord org = {0, 0, 0, 0};
  for (int i = 0; i < d; ++i) org[i] = -radius;
  return Box(d, 2 * radius + 1, org);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0;
  const double m = mean_of(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (static_cast<double>(v.size()) * (v.size() - 1.0)));
}

std::uint64_t replica_seed(const ExperimentSpec& spec, std::string_view purpose,
                           std::uint64_t replica) {
  return derive_key(derive_key(derive_key(spec.seed_root, spec.experiment), purpose), replica);
}

}  // namespace

// ---------------------------------------------------------------------------
// spec serialization

std::string ExperimentSpec::to_json() const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["seed_root"] = seed_root;
  j["out_dir"] = out_dir;
  j["kernel_form"] = kernel_form;
  j["d"] = d;
  j["s"] = s;
  j["beta"] = beta;
  j["beta_mode"] = beta_mode;
  j["replicas"] = replicas;
  j["workers"] = workers;
  j["rho"] = rho;
  j["box_sides"] = box_sides;
  j["distances"] = distances;
  j["cube_side"] = cube_side;
  j["k_enlarge"] = k_enlarge;
  j["epsilons"] = epsilons;
  j["sched_a"] = sched_a;
  j["sched_b"] = sched_b;
  j["depth"] = depth;
  j["base_cube"] = base_cube;
  j["site_lambda"] = site_lambda;
  j["chi"] = chi;
  j["reg_m"] = reg_m;
  j["walk_replicas"] = walk_replicas;
  j["walk_budget"] = walk_budget;
  j["radii_d1"] = radii_d1;
  j["radii_d2"] = radii_d2;
  j["beta_d1"] = beta_d1;
  j["beta_d2"] = beta_d2;
  j["s_cauchy"] = s_cauchy;
  j["pilot_replicas"] = pilot_replicas;
  return j.dump(2) + "\n";
}

ExperimentSpec ExperimentSpec::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ExperimentSpec s;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("experiment", s.experiment);
  get("seed_root", s.seed_root);
  get("out_dir", s.out_dir);
  get("kernel_form", s.kernel_form);
  get("d", s.d);
  get("s", s.s);
  get("beta", s.beta);
  get("beta_mode", s.beta_mode);
  get("replicas", s.replicas);
  get("workers", s.workers);
  get("rho", s.rho);
  get("box_sides", s.box_sides);
  get("distances", s.distances);
  get("cube_side", s.cube_side);
  get("k_enlarge", s.k_enlarge);
  get("epsilons", s.epsilons);
  get("sched_a", s.sched_a);
  get("sched_b", s.sched_b);
  get("depth", s.depth);
  get("base_cube", s.base_cube);
  get("site_lambda", s.site_lambda);
  get("chi", s.chi);
  get("reg_m", s.reg_m);
  get("walk_replicas", s.walk_replicas);
  get("walk_budget", s.walk_budget);
  get("radii_d1", s.radii_d1);
  get("radii_d2", s.radii_d2);
  get("beta_d1", s.beta_d1);
  get("beta_d2", s.beta_d2);
  get("s_cauchy", s.s_cauchy);
  get("pilot_replicas", s.pilot_replicas);
  return s;
}

std::uint64_t ExperimentSpec::hash() const { return derive_key(0x73706563ULL, to_json()); }

// ---------------------------------------------------------------------------
// threshold estimation

ThresholdEstimate estimate_threshold(int d, double s, const std::vector<double>& beta_grid,
                                     std::int64_t box_small, std::int64_t box_big,
                                     std::uint64_t replicas, const SeedRecord& seed,
                                     unsigned workers) {
  if (beta_grid.size() < 2)
    throw std::invalid_argument("estimate_threshold: need at least two grid points");
  ThresholdEstimate est;
  est.grid = beta_grid;
  const Box small(d, box_small);
  const Box big(d, box_big);
  // shared-uniform coupling is affordable on small boxes only
  const bool coupled = big.site_count() <= 4096;

  auto theta = [&](const Box& box, std::string_view tag) {
    std::vector<std::vector<double>> per_beta(beta_grid.size(),
                                              std::vector<double>(replicas, 0.0));
    parallel_for(
        replicas,
        [&](std::uint64_t rep) {
          SeedRecord rec;
          rec.seed = derive_key(derive_key(seed.seed, tag), rep);
          for (std::size_t bi = 0; bi < beta_grid.size(); ++bi) {
            const Kernel k = Kernel::make_eta(d, s, beta_grid[bi]);
            Configuration c;
            if (coupled) {
              c = sample_config_perpair(k, box, rec);  // same uniforms across beta
            } else {
              SeedRecord r2 = rec;
              r2.seed = derive_key(rec.seed, bi);
              c = sample_config(k, box, r2);
            }
            per_beta[bi][rep] = alpha_proxy(c);
          }
        },
        workers);
    std::vector<double> out(beta_grid.size());
    for (std::size_t bi = 0; bi < beta_grid.size(); ++bi) out[bi] = mean_of(per_beta[bi]);
    return out;
  };

  est.theta_small = theta(small, "small");
  est.theta_big = theta(big, "big");

  std::vector<double> diff(beta_grid.size());
  for (std::size_t i = 0; i < beta_grid.size(); ++i)
    diff[i] = est.theta_big[i] - est.theta_small[i];
  if (diff[0] >= 0) {
    est.found = true;
    est.saturated = true;
    est.beta_hat = beta_grid.front();
    est.band_lo = est.band_hi = beta_grid.front();
    return est;
  }
  for (std::size_t i = 0; i + 1 < beta_grid.size(); ++i) {
    if (diff[i] < 0 && diff[i + 1] >= 0) {
      const double t = diff[i + 1] - diff[i];
      const double frac = t > 0 ? -diff[i] / t : 0.5;
      est.found = true;
      est.beta_hat = beta_grid[i] + frac * (beta_grid[i + 1] - beta_grid[i]);
      est.band_lo = beta_grid[i];
      est.band_hi = beta_grid[i + 1];
      return est;
    }
  }
  return est;  // found = false: curves never crossed in range
}

double resolve_beta(const ExperimentSpec& spec, std::string* note) {
  if (spec.beta_mode == "fixed") {
    if (note) *note = "beta fixed at " + fmt(spec.beta);
    return spec.beta;
  }
  std::vector<double> grid;
  std::int64_t bs, bb;
  std::uint64_t reps = spec.pilot_replicas;
  if (spec.d == 1) {
    for (double b = 0.05; b <= 2.0001; b += 0.05) grid.push_back(b);
    bs = 48;
    bb = 96;
  } else {
    for (double b = 0.05; b <= 1.2001; b += 0.05) grid.push_back(b);
    bs = 24;
    bb = 48;
  }
  SeedRecord seed;
  seed.seed = derive_key(spec.seed_root, "threshold-pilot");
  const ThresholdEstimate est =
      estimate_threshold(spec.d, spec.s, grid, bs, bb, reps, seed, spec.workers);
  double base = est.found ? est.beta_hat : grid.back();
  double out;
  if (spec.beta_mode == "auto-supercritical")
    out = std::max(1.5 * base, base + 0.25);
  else if (spec.beta_mode == "auto-near-critical")
    out = 1.1 * base;
  else
    throw std::invalid_argument("unknown beta_mode: " + spec.beta_mode);
  if (note) {
    *note = "beta_hat=" + fmt(base) + (est.found ? "" : " (no crossing; grid max)") +
            (est.saturated ? " (saturated)" : "") + " resolved=" + fmt(out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// recipes

namespace {

using RunFn = void (*)(const ExperimentSpec&, const std::filesystem::path&, ExperimentResult&,
                       nlohmann::json&);

void run_normal1(const ExperimentSpec& spec, const std::filesystem::path& dir,
                 ExperimentResult& result, nlohmann::json& notes) {
  std::string note;
  const double beta = resolve_beta(spec, &note);
  notes["beta"] = note;
  std::vector<std::int64_t> sides = spec.box_sides;
  if (sides.empty()) sides = {32, 64, 128, 256};
  std::sort(sides.begin(), sides.end());
  const std::int64_t big = sides.back();
  for (std::int64_t n : sides)
    if (big % n != 0)
      throw std::invalid_argument("exp-normal1: box sides must divide the largest");

  const Kernel kernel = Kernel::make_eta(spec.d, spec.s, beta);
  const Box box(spec.d, big);

  // hits[size index] accumulated over replicas and sub-cubes
  std::vector<std::vector<std::uint64_t>> hits(spec.replicas,
                                               std::vector<std::uint64_t>(sides.size(), 0));
  std::vector<std::vector<std::uint64_t>> totals(spec.replicas,
                                                 std::vector<std::uint64_t>(sides.size(), 0));
  parallel_for(
      spec.replicas,
      [&](std::uint64_t rep) {
        SeedRecord rec;
        rec.seed = replica_seed(spec, "sample", rep);
        const Configuration c = sample_config(kernel, box, rec);
        for (std::size_t si = 0; si < sides.size(); ++si) {
          const std::int64_t n = sides[si];
          const CubeGrid grid(box, n);
          // union-find over bonds internal to a common sub-cube
          UnionFind uf(box.site_count());
          for (const Bond& b : c.bonds)
            if (grid.cube_of_site(b.u) == grid.cube_of_site(b.v)) uf.unite(b.u, b.v);
          const double threshold =
              spec.rho * std::pow(static_cast<double>(n), spec.s / 2.0);
          // largest component size per cube
          std::vector<std::uint32_t> best(grid.cube_count(), 0);
          std::vector<std::uint32_t> count(box.site_count(), 0);
          for (std::uint32_t v = 0; v < box.site_count(); ++v) {
            const std::uint32_t r = uf.find(v);
            const std::uint32_t cnt = ++count[r];
            const std::uint32_t cube = grid.cube_of_site(v);
            if (cnt > best[cube]) best[cube] = cnt;
          }
          for (std::uint32_t cube = 0; cube < grid.cube_count(); ++cube) {
            ++totals[rep][si];
            if (static_cast<double>(best[cube]) >= threshold) ++hits[rep][si];
          }
        }
      },
      spec.workers);

  Csv csv(dir / "normal1.csv");
  csv.row({"n", "threshold", "samples", "hits", "fraction"});
  for (std::size_t si = 0; si < sides.size(); ++si) {
    std::uint64_t h = 0, t = 0;
    for (std::uint64_t rep = 0; rep < spec.replicas; ++rep) {
      h += hits[rep][si];
      t += totals[rep][si];
    }
    const double threshold =
        spec.rho * std::pow(static_cast<double>(sides[si]), spec.s / 2.0);
    const double frac = t ? static_cast<double>(h) / t : 0.0;
    csv.row({std::to_string(sides[si]), fmt(threshold), std::to_string(t), std::to_string(h),
             fmt(frac)});
    result.stats["fraction_n" + std::to_string(sides[si])] = frac;
  }
  result.files.push_back("normal1.csv");
}

// planted-cluster attachment experiment behind the connection-probability
// bound; cluster size is ceil(rho N^(s/2)), capped at the cube volume when
// the stated size does not fit (the bound keeps the uncapped rho, so passing
// with fewer planted sites is the harder test)
void run_connectprob(const ExperimentSpec& spec, const std::filesystem::path& dir,
                     ExperimentResult& result, nlohmann::json& notes) {
  const Kernel kernel = Kernel::make_eta(spec.d, spec.s, spec.beta);
  const DerivedConstants consts = derive_constants(kernel);
  const std::int64_t n = spec.cube_side > 0 ? spec.cube_side : 64;
  std::vector<std::int64_t> ls = spec.distances;
  if (ls.empty()) ls = {1, 2, 4};

  double volume = 1;
  for (int i = 0; i < spec.d; ++i) volume *= static_cast<double>(n);
  const std::uint64_t stated =
      static_cast<std::uint64_t>(std::ceil(spec.rho * std::pow(static_cast<double>(n), spec.s / 2.0)));
  const std::uint64_t planted = std::min<std::uint64_t>(stated, static_cast<std::uint64_t>(volume));
  if (planted < stated)
    notes["connectprob"] = "cluster size capped to cube volume (" + std::to_string(stated) +
                           " -> " + std::to_string(planted) + ")";

  Csv csv(dir / "connectprob.csv");
  csv.row({"l", "stated_size", "planted_size", "bound", "frequency", "sigma", "pass"});
  const Box cube(spec.d, n);
  const std::uint32_t cube_sites = cube.site_count();

  for (std::int64_t l : ls) {
    const double bound = connect_bound(consts, spec.rho, l, spec.s, spec.d);
    std::vector<std::uint8_t> attached(spec.replicas, 0);
    parallel_for(
        spec.replicas,
        [&](std::uint64_t rep) {
          Rng rng(replica_seed(spec, "connect-l" + std::to_string(l), rep));
          // plant uniform subsets of the two cubes (cube 2 shifted l*n along axis 0)
          auto plant = [&](std::vector<std::uint32_t>& out) {
            std::vector<std::uint32_t> pool(cube_sites);
            std::iota(pool.begin(), pool.end(), 0u);
            for (std::uint64_t i = 0; i < planted; ++i) {
              const std::uint64_t j = i + rng.below(cube_sites - i);
              std::swap(pool[i], pool[j]);
            }
            out.assign(pool.begin(), pool.begin() + planted);
          };
          std::vector<std::uint32_t> u1, u2;
          plant(u1);
          plant(u2);
          const std::int64_t shift = l * n;
          for (std::uint32_t a : u1) {
            const Coord ca = cube.coord_of(a);
            for (std::uint32_t b : u2) {
              Coord cb = cube.coord_of(b);
              cb[0] += shift;
              Coord k = {0, 0, 0, 0};
              for (int i = 0; i < spec.d; ++i) k[i] = cb[i] - ca[i];
              if (rng.bernoulli(kernel.prob(k))) {
                attached[rep] = 1;
                return;
              }
            }
          }
        },
        spec.workers);
    std::uint64_t good = 0;
    for (auto a : attached) good += a;
    const double freq = static_cast<double>(good) / static_cast<double>(spec.replicas);
    const double sigma = std::sqrt(bound * (1 - bound) / static_cast<double>(spec.replicas));
    const bool pass = freq >= bound - 3 * sigma;
    csv.row({std::to_string(l), std::to_string(stated), std::to_string(planted), fmt(bound),
             fmt(freq), fmt(sigma), pass ? "1" : "0"});
    result.stats["frequency_l" + std::to_string(l)] = freq;
    result.stats["bound_l" + std::to_string(l)] = bound;
    if (!pass) result.complete = false;
  }
  result.files.push_back("connectprob.csv");
}

void run_criti(const ExperimentSpec& spec, const std::filesystem::path& dir,
               ExperimentResult& result, nlohmann::json& notes) {
  std::string note;
  const double beta = resolve_beta(spec, &note);
  notes["beta"] = note;
  const Kernel kernel = Kernel::make_eta(spec.d, spec.s, beta);
  const std::int64_t n = spec.box_sides.empty() ? 128 : spec.box_sides[0];
  const Box box(spec.d, n);
  std::vector<double> eps = spec.epsilons;
  if (eps.empty()) eps = {0.0, 0.02, 0.05, 0.1, 0.2};

  std::vector<std::vector<double>> density(eps.size(), std::vector<double>(spec.replicas, 0));
  parallel_for(
      spec.replicas,
      [&](std::uint64_t rep) {
        SeedRecord rec;
        rec.seed = replica_seed(spec, "sample", rep);
        const Configuration base = sample_config(kernel, box, rec);
        for (std::size_t ei = 0; ei < eps.size(); ++ei) {
          SeedRecord trec;
          trec.seed = derive_key(rec.seed, "thin");
          const Configuration thinned =
              eps[ei] == 0 ? base : thin_config(base, eps[ei], trec);
          density[ei][rep] = alpha_proxy(thinned);
        }
      },
      spec.workers);

  Csv csv(dir / "criti.csv");
  csv.row({"epsilon", "density_mean", "density_stderr", "replicas"});
  for (std::size_t ei = 0; ei < eps.size(); ++ei) {
    csv.row({fmt(eps[ei]), fmt(mean_of(density[ei])), fmt(stderr_of(density[ei])),
             std::to_string(spec.replicas)});
    result.stats["density_eps" + fmt(eps[ei])] = mean_of(density[ei]);
  }
  result.files.push_back("criti.csv");
}

void run_jeff(const ExperimentSpec& spec, const std::filesystem::path& dir,
              ExperimentResult& result, nlohmann::json& notes) {
  std::string note;
  const double beta = resolve_beta(spec, &note);
  notes["beta"] = note;
  const Kernel kernel = Kernel::make_eta(spec.d, spec.s, beta);
  const std::int64_t n = spec.box_sides.empty() ? 256 : spec.box_sides[0];
  const std::int64_t n_cube = spec.cube_side > 0 ? spec.cube_side : 8;
  const std::int64_t trunc_len = 4 * n_cube * spec.d;
  const Box box(spec.d, n);

  std::vector<double> raw(spec.replicas, 0), trunc(spec.replicas, 0);
  parallel_for(
      spec.replicas,
      [&](std::uint64_t rep) {
        SeedRecord rec;
        rec.seed = replica_seed(spec, "sample", rep);
        const Configuration c = sample_config(kernel, box, rec);
        raw[rep] = alpha_proxy(c);
        trunc[rep] = alpha_proxy(truncate_config(c, trunc_len));
      },
      spec.workers);

  const double raw_mean = mean_of(raw), trunc_mean = mean_of(trunc);
  Csv csv(dir / "jeff.csv");
  csv.row({"variant", "truncation_length", "density_mean", "density_stderr", "replicas"});
  csv.row({"raw", "", fmt(raw_mean), fmt(stderr_of(raw)), std::to_string(spec.replicas)});
  csv.row({"truncated", std::to_string(trunc_len), fmt(trunc_mean), fmt(stderr_of(trunc)),
           std::to_string(spec.replicas)});
  result.stats["density_raw"] = raw_mean;
  result.stats["density_truncated"] = trunc_mean;
  result.stats["retention"] = raw_mean > 0 ? trunc_mean / raw_mean : 0.0;
  result.files.push_back("jeff.csv");
}

void run_hierarchy_exp(const ExperimentSpec& spec, const std::filesystem::path& dir,
                       ExperimentResult& result, nlohmann::json& notes) {
  const Kernel kernel = Kernel::make_eta(spec.d, spec.s, spec.beta);
  StageSchedule poly;
  poly.variant = ScheduleVariant::Polynomial;
  poly.a = spec.sched_a;
  poly.b = spec.sched_b;
  poly.depth = spec.depth;
  validate_schedule(poly, spec.d, spec.s);

  std::int64_t cubes_per_axis = 1;
  for (int nn = 2; nn <= poly.depth; ++nn) cubes_per_axis *= poly.side(nn, spec.d);
  const std::int64_t m = spec.base_cube;
  const Box box(spec.d, m * cubes_per_axis);

  // aliveness threshold from the pilot density proxy, (alpha/2) M^d
  double alpha_hat = 0;
  {
    const Box pilot(spec.d, std::min<std::int64_t>(box.n, 512));
    SeedRecord rec;
    rec.seed = replica_seed(spec, "pilot", 0);
    alpha_hat = alpha_proxy(sample_config(kernel, pilot, rec));
  }
  double md = 1;
  for (int i = 0; i < spec.d; ++i) md *= static_cast<double>(m);
  const std::uint32_t threshold =
      std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::ceil(0.5 * alpha_hat * md)));
  notes["hierarchy"] = "alpha_hat=" + fmt(alpha_hat) + " cube_threshold=" +
                       std::to_string(threshold);

  const int stages = poly.depth + 1;
  std::vector<std::vector<double>> frac(stages, std::vector<double>(spec.replicas, 0));
  std::vector<std::vector<double>> afail(stages, std::vector<double>(spec.replicas, 0));
  std::vector<std::vector<double>> bfail(stages, std::vector<double>(spec.replicas, 0));
  parallel_for(
      spec.replicas,
      [&](std::uint64_t rep) {
        SeedRecord rec;
        rec.seed = replica_seed(spec, "sample", rep);
        const Configuration c = sample_config(kernel, box, rec);
        const HierarchyInput in =
            hierarchy_input_from_config(c, m, spec.k_enlarge, threshold);
        const HierarchyResult hr = run_hierarchy(in, poly);
        for (std::size_t si = 0; si < hr.stages.size(); ++si) {
          frac[si][rep] = hr.stages[si].alive_fraction();
          afail[si][rep] = hr.stages[si].a_failures;
          bfail[si][rep] = hr.stages[si].b_failures;
        }
      },
      spec.workers);

  Csv csv(dir / "hierarchy_poly.csv");
  csv.row({"stage", "alive_fraction", "a_failures_mean", "b_failures_mean", "psi_bound",
           "phi_bound"});
  for (int si = 0; si < stages; ++si) {
    const int stage = si + 1;  // stage of row si (units are stage 1)
    std::string psi = "";
    std::string phi = "";
    if (stage >= 2) {
      psi = fmt(psi_bound(stage, spec.beta, poly, spec.d, spec.s));
      const double dn = std::pow(static_cast<double>(stage), -poly.b);
      phi = fmt((1.0 - mean_of(frac[si - 1])) / (1.0 - dn));
    }
    csv.row({std::to_string(stage), fmt(mean_of(frac[si])), fmt(mean_of(afail[si])),
             fmt(mean_of(bfail[si])), psi, phi});
    result.stats["alive_stage" + std::to_string(stage)] = mean_of(frac[si]);
  }
  result.files.push_back("hierarchy_poly.csv");

  // subgraph variant on a site-bond layer (depth 2 keeps the grid desk-sized)
  StageSchedule sub;
  sub.variant = ScheduleVariant::Subgraph;
  sub.depth = std::min(spec.depth, 2);
  std::int64_t side = 1;
  for (int nn = 1; nn <= sub.depth; ++nn) side *= sub.side(nn, spec.d);
  const Box sbox(spec.d, side);
  const int sstages = sub.depth + 1;
  std::vector<std::vector<double>> sfrac(sstages, std::vector<double>(spec.replicas, 0));
  parallel_for(
      spec.replicas,
      [&](std::uint64_t rep) {
        SeedRecord rec;
        rec.seed = replica_seed(spec, "subgraph", rep);
        const Configuration c = sample_config(kernel, sbox, rec);
        SeedRecord site = rec;
        site.seed = derive_key(rec.seed, "sites");
        const HierarchyInput in = hierarchy_input_site_bond(c, spec.site_lambda, site);
        const HierarchyResult hr = run_hierarchy(in, sub);
        for (std::size_t si = 0; si < hr.stages.size(); ++si)
          sfrac[si][rep] = hr.stages[si].alive_fraction();
      },
      spec.workers);
  Csv scsv(dir / "hierarchy_subgraph.csv");
  scsv.row({"stage", "alive_fraction", "condition_b_bound", "large_deviation_bound"});
  for (int si = 0; si < sstages; ++si) {
    const int stage = si;  // units are stage 0 here
    std::string cb = "", ld = "";
    if (stage >= 1) {
      const SubgraphBounds sb = subgraph_bounds(stage, spec.d, spec.beta, spec.s);
      cb = fmt(sb.condition_b);
      ld = fmt(sb.large_deviation);
    }
    scsv.row({std::to_string(stage), fmt(mean_of(sfrac[si])), cb, ld});
  }
  result.files.push_back("hierarchy_subgraph.csv");
}

void run_flow_energy(const ExperimentSpec& spec, const std::filesystem::path& dir,
                     ExperimentResult& result, nlohmann::json&) {
  Csv csv(dir / "flow_energy.csv");
  csv.row({"schedule", "depth", "conservation_zero", "q", "energy", "recursion_bound",
           "vertex_energy"});
  struct Sched {
    std::string name;
    std::vector<std::int64_t> c;
  };
  std::vector<Sched> scheds;
  {
    Sched a{"(n+1)^2", {}};
    for (int n = 1; n <= std::max(2, spec.depth); ++n)
      a.c.push_back(static_cast<std::int64_t>(n + 1) * (n + 1));
    scheds.push_back(a);
    Sched b{"2^n", {}};
    for (int n = 1; n <= std::max(2, spec.depth); ++n) b.c.push_back(std::int64_t(1) << n);
    scheds.push_back(b);
  }
  const std::vector<double> qs = {1.1, 1.5, 2.0};
  for (const Sched& sc : scheds) {
    for (int depth = 2; depth <= static_cast<int>(sc.c.size()); ++depth) {
      const RenormalizedGraph g = build_renorm_graph(sc.c, depth);
      const Flow f = build_flow(g);
      const Rat residual = f.max_conservation_residual();
      const double bound = energy_recursion_bound(sc.c, depth);
      const double ve = vertex_energy(f);
      for (double q : qs) {
        const double e = q_energy(f, q);
        csv.row({sc.name, std::to_string(depth), residual.is_zero() ? "1" : "0", fmt(q),
                 fmt(e), fmt(bound), fmt(ve)});
        if (q == 2.0)
          result.stats["energy2_" + sc.name + "_L" + std::to_string(depth)] = e;
      }
      if (!residual.is_zero()) result.complete = false;
    }
  }
  result.files.push_back("flow_energy.csv");
}

void run_recurrence_1d(const ExperimentSpec& spec, const std::filesystem::path& dir,
                       ExperimentResult& result, nlohmann::json& notes) {
  const Kernel kernel = Kernel::make_eta(1, spec.s, spec.beta);
  const std::int64_t radius = spec.box_sides.empty() ? 4096 : spec.box_sides[0];
  const Box box = centered_box(1, radius);
  const int steps = spec.depth > 0 ? spec.depth * 8 : 24;

  struct Rep {
    std::vector<double> log_d;
    std::vector<double> pis;
    std::vector<double> partial;  // Nash-Williams partial sums over Pi_n
    bool truncated = false;
  };
  std::vector<Rep> reps(spec.replicas);
  parallel_for(
      spec.replicas,
      [&](std::uint64_t rep) {
        SeedRecord rec;
        rec.seed = replica_seed(spec, "growth", rep);
        const Configuration c = sample_config(kernel, box, rec);
        const IntervalTrace tr = interval_growth(c, -2, 2, steps);
        Rep& r = reps[rep];
        r.truncated = tr.truncated;
        double acc = 0;
        for (std::size_t i = 0; i < tr.growth_ratio.size(); ++i) {
          r.log_d.push_back(std::log(tr.growth_ratio[i]));
          r.pis.push_back(static_cast<double>(tr.exiting_bonds[i]));
          if (tr.exiting_bonds[i] > 0) acc += 1.0 / static_cast<double>(tr.exiting_bonds[i]);
          r.partial.push_back(acc);
        }
      },
      spec.workers);

  // gamma fit on the first half (mean |Pi| over log interval length), tested
  // on the second half
  double coeff_sum = 0;
  std::uint64_t coeff_n = 0;
  const std::uint64_t half = spec.replicas / 2;
  for (std::uint64_t rep = 0; rep < half; ++rep) {
    double loglen = std::log(5.0);
    for (std::size_t i = 0; i < reps[rep].log_d.size(); ++i) {
      loglen += reps[rep].log_d[i];
      if (loglen > 0 && reps[rep].pis[i] > 0) {
        coeff_sum += reps[rep].pis[i] / loglen;
        ++coeff_n;
      }
    }
  }
  const double gamma_hat = coeff_n ? 2.0 * coeff_sum / static_cast<double>(coeff_n) : 0.0;
  std::uint64_t below = 0, total = 0;
  for (std::uint64_t rep = half; rep < spec.replicas; ++rep) {
    double sum_logd = 0;
    for (std::size_t i = 0; i < reps[rep].log_d.size(); ++i) {
      sum_logd += reps[rep].log_d[i];
      ++total;
      if (reps[rep].pis[i] < gamma_hat * std::max(sum_logd, std::log(5.0))) ++below;
    }
  }
  notes["gamma"] = "gamma_hat=" + fmt(gamma_hat) + " fraction_below=" +
                   fmt(total ? static_cast<double>(below) / total : 0.0);
  result.stats["gamma_hat"] = gamma_hat;
  result.stats["fraction_below"] =
      total ? static_cast<double>(below) / static_cast<double>(total) : 0.0;

  Csv csv(dir / "growth.csv");
  csv.row({"step", "mean_log_d", "mean_exiting", "mean_partial_sum", "replicas_alive"});
  for (int i = 0; i < steps; ++i) {
    std::vector<double> ld, pi, ps;
    for (const Rep& r : reps)
      if (i < static_cast<int>(r.log_d.size())) {
        ld.push_back(r.log_d[i]);
        pi.push_back(r.pis[i]);
        ps.push_back(r.partial[i]);
      }
    if (ld.empty()) break;
    csv.row({std::to_string(i), fmt(mean_of(ld)), fmt(mean_of(pi)), fmt(mean_of(ps)),
             std::to_string(ld.size())});
  }
  result.files.push_back("growth.csv");

  // exiting-bond counts against the log N envelope
  Csv ecsv(dir / "exiting.csv");
  ecsv.row({"n", "mean_count", "count_over_logn"});
  std::vector<std::int64_t> ns = {16, 32, 64, 128, 256, 512, 1024};
  for (std::int64_t n : ns) {
    const Box ebox = centered_box(1, 2 * n);
    const Kernel k1 = Kernel::make_eta(1, spec.s, spec.beta);
    std::vector<double> counts(std::max<std::uint64_t>(spec.replicas / 4, 8), 0.0);
    parallel_for(
        counts.size(),
        [&](std::uint64_t rep) {
          SeedRecord rec;
          rec.seed = replica_seed(spec, "exit-n" + std::to_string(n), rep);
          const Configuration c = sample_config(k1, ebox, rec);
          counts[rep] = static_cast<double>(exiting_bond_stats(c, 0, n - 1).count);
        },
        spec.workers);
    ecsv.row({std::to_string(n), fmt(mean_of(counts)),
              fmt(mean_of(counts) / std::log(static_cast<double>(n)))});
  }
  result.files.push_back("exiting.csv");
}

void run_recurrence_2d(const ExperimentSpec& spec, const std::filesystem::path& dir,
                       ExperimentResult& result, nlohmann::json& notes) {
  // cutset sums on projected networks
  const std::int64_t radius = spec.box_sides.empty() ? 256 : spec.box_sides[0];
  const int n_max = static_cast<int>(radius) - 1;
  const Kernel kernel = Kernel::make_eta(2, spec.s, spec.beta);
  const Box box = centered_box(2, radius);
  std::vector<std::vector<double>> sums(spec.replicas);
  parallel_for(
      spec.replicas,
      [&](std::uint64_t rep) {
        SeedRecord rec;
        rec.seed = replica_seed(spec, "project", rep);
        const Configuration c = sample_config(kernel, box, rec);
        const ElectricalNetwork net = project_long_bonds(c);
        const CutsetSeries cuts = boundary_cutsets(net, n_max);
        const PartialSums ps = nash_williams_partial_sums(net, cuts);
        sums[rep] = ps.sums;
      },
      spec.workers);
  Csv csv(dir / "cutsums.csv");
  csv.row({"n", "mean_partial_sum"});
  for (int n = 1; n <= n_max; ++n) {
    std::vector<double> v;
    for (const auto& s : sums)
      if (n <= static_cast<int>(s.size())) v.push_back(s[n - 1]);
    csv.row({std::to_string(n), fmt(mean_of(v))});
  }
  // dyadic growth-trend statistic: late increments vs early increments
  {
    auto mean_at = [&](int n) {
      std::vector<double> v;
      for (const auto& s : sums)
        if (n <= static_cast<int>(s.size())) v.push_back(s[n - 1]);
      return mean_of(v);
    };
    const int top = n_max;
    const double late = mean_at(top) - mean_at(top / 2);
    const double early = mean_at(top / 2) - mean_at(top / 4);
    result.stats["increment_ratio"] = early > 0 ? late / early : 0.0;
    notes["cutsums"] = "late/early increment ratio=" + fmt(result.stats["increment_ratio"]);
  }
  result.files.push_back("cutsums.csv");

  // Cauchy-tail diagnostics on projected conductances at s_cauchy
  const std::int64_t cradius = 64;
  const Kernel ck = Kernel::make_eta(2, spec.s_cauchy, spec.beta);
  const Box cbox = centered_box(2, cradius);
  std::vector<double> pilot, test;
  for (std::uint64_t rep = 0; rep < std::max<std::uint64_t>(2, spec.pilot_replicas / 16); ++rep) {
    SeedRecord rec;
    rec.seed = replica_seed(spec, "cauchy", rep);
    const Configuration c = sample_config(ck, cbox, rec);
    const ElectricalNetwork net = project_long_bonds(c);
    auto& sink = rep % 2 == 0 ? pilot : test;
    for (const NetEdge& e : net.edges) sink.push_back(e.c);
  }
  // smallest chi compatible with the pilot sample's tail
  double chi_hat = spec.chi;
  {
    std::vector<double> sorted(pilot);
    std::sort(sorted.begin(), sorted.end());
    for (int n = 1; n <= 32; ++n) {
      const std::size_t idx = static_cast<std::size_t>(
          std::min<double>(static_cast<double>(sorted.size()) * (1.0 - 1.0 / n),
                           static_cast<double>(sorted.size() - 1)));
      chi_hat = std::max(chi_hat, sorted[idx] / static_cast<double>(n));
    }
  }
  const CauchyTailReport rep = cauchy_tail_diagnostics(test, chi_hat, 100);
  Csv ccsv(dir / "cauchy.csv");
  ccsv.row({"n", "exceedance", "envelope", "sigma"});
  for (int n = 1; n <= 100; ++n)
    ccsv.row({std::to_string(n), fmt(rep.exceedance[n - 1]), fmt(rep.envelope[n - 1]),
              fmt(rep.sigma[n - 1])});
  notes["cauchy"] = std::string("chi_hat=") + fmt(chi_hat) +
                    (rep.within_3sigma ? " within 3 sigma" : " exceeds envelope");
  result.stats["cauchy_ok"] = rep.within_3sigma ? 1.0 : 0.0;
  result.files.push_back("cauchy.csv");
}

void run_transience_profile(const ExperimentSpec& spec, const std::filesystem::path& dir,
                            ExperimentResult& result, nlohmann::json&) {
  Csv csv(dir / "profile.csv");
  csv.row({"d", "s", "radius", "replicas", "finite", "mean_resistance", "stderr",
           "mean_escape"});
  struct Regime {
    int d;
    double s;
    double beta;
    std::vector<std::int64_t> radii;
  };
  std::vector<Regime> regimes = {{1, 1.5, spec.beta_d1, spec.radii_d1},
                                 {1, 2.0, spec.beta_d1, spec.radii_d1},
                                 {2, 3.5, spec.beta_d2, spec.radii_d2},
                                 {2, 4.5, spec.beta_d2, spec.radii_d2}};
  for (const Regime& rg : regimes) {
    if (rg.radii.empty()) continue;
    const std::int64_t rmax = *std::max_element(rg.radii.begin(), rg.radii.end());
    const std::int64_t pad = rg.d == 1 ? 8 : 4;
    const Box box = centered_box(rg.d, rmax + pad);
    const Kernel kernel = Kernel::make_eta(rg.d, rg.s, rg.beta);
    const std::uint32_t start = box.index_of({0, 0, 0, 0});

    std::vector<std::vector<double>> res(rg.radii.size());
    std::vector<std::vector<double>> esc(rg.radii.size());
    for (auto& v : res) v.assign(spec.replicas, -1.0);
    for (auto& v : esc) v.assign(spec.replicas, -1.0);
    parallel_for(
        spec.replicas,
        [&](std::uint64_t rep) {
          SeedRecord rec;
          rec.seed = replica_seed(
              spec, "profile-d" + std::to_string(rg.d) + "-s" + fmt(rg.s), rep);
          const Configuration c = sample_config(kernel, box, rec);
          const ElectricalNetwork net = ElectricalNetwork::from_configuration(c);
          SeedRecord wseed = rec;
          wseed.seed = derive_key(rec.seed, "walks");
          const auto profile = recurrence_profile(net, start, rg.radii, spec.walk_replicas,
                                                  spec.walk_budget, wseed, 1e-8);
          for (std::size_t ri = 0; ri < rg.radii.size(); ++ri) {
            if (!profile[ri].infinite) res[ri][rep] = profile[ri].resistance;
            esc[ri][rep] = profile[ri].escape;
          }
        },
        spec.workers);

    for (std::size_t ri = 0; ri < rg.radii.size(); ++ri) {
      std::vector<double> finite;
      for (double v : res[ri])
        if (v >= 0) finite.push_back(v);
      std::vector<double> escv;
      for (double v : esc[ri])
        if (v >= 0) escv.push_back(v);
      csv.row({std::to_string(rg.d), fmt(rg.s), std::to_string(rg.radii[ri]),
               std::to_string(spec.replicas), std::to_string(finite.size()),
               fmt(mean_of(finite)), fmt(stderr_of(finite)),
               fmt(spec.walk_replicas ? mean_of(escv) : 0.0)});
      result.stats["resistance_d" + std::to_string(rg.d) + "_s" + fmt(rg.s) + "_r" +
                   std::to_string(rg.radii[ri])] = mean_of(finite);
      result.stats["stderr_d" + std::to_string(rg.d) + "_s" + fmt(rg.s) + "_r" +
                   std::to_string(rg.radii[ri])] = stderr_of(finite);
    }
  }
  result.files.push_back("profile.csv");
}

void run_iid_stability(const ExperimentSpec& spec, const std::filesystem::path& dir,
                       ExperimentResult& result, nlohmann::json&) {
  Csv csv(dir / "iid.csv");
  csv.row({"radius", "variant", "replicas", "finite", "mean_resistance", "stderr"});
  std::vector<std::int64_t> radii = spec.box_sides;
  if (radii.empty()) radii = {32, 128};
  for (std::int64_t radius : radii) {
    const Box box = centered_box(2, radius);
    // unit Z^2 lattice as the recurrent base graph
    std::vector<std::vector<double>> values(3);  // cauchy, regularized, bounded
    for (auto& v : values) v.assign(spec.replicas, -1.0);
    parallel_for(
        spec.replicas,
        [&](std::uint64_t rep) {
          Rng rng(replica_seed(spec, "iid-r" + std::to_string(radius), rep));
          ElectricalNetwork net;
          net.n = box.site_count();
          net.embed_dim = 2;
          net.coords.resize(net.n);
          for (std::uint32_t i = 0; i < net.n; ++i) {
            const Coord c = box.coord_of(i);
            net.coords[i] = {c[0], c[1]};
          }
          ElectricalNetwork bounded = net;
          for (std::int64_t x = -radius; x <= radius; ++x)
            for (std::int64_t y = -radius; y <= radius; ++y) {
              const std::uint32_t a = box.index_of({x, y, 0, 0});
              for (int axis = 0; axis < 2; ++axis) {
                Coord nb = {x + (axis == 0 ? 1 : 0), y + (axis == 1 ? 1 : 0), 0, 0};
                if (!box.contains(nb)) continue;
                const std::uint32_t b = box.index_of(nb);
                const double pareto = spec.chi / rng.next_unit_pos();  // P(C > t) = chi/t
                const double unif = 2.0 * spec.chi * rng.next_unit();
                net.edges.push_back({a, b, pareto});
                bounded.edges.push_back({a, b, unif});
              }
            }
          const std::uint32_t start = box.index_of({0, 0, 0, 0});
          const auto frame = shell_vertices(net, radius);
          auto solve = [&](const ElectricalNetwork& nw) {
            const std::uint32_t src[1] = {start};
            const ResistanceResult rr = effective_resistance(
                nw, std::span<const std::uint32_t>(src, 1), frame, 1e-8);
            return rr.infinite ? -1.0 : rr.resistance;
          };
          values[0][rep] = solve(net);
          values[1][rep] = solve(regularize_bad_clusters(net, spec.reg_m));
          values[2][rep] = solve(bounded);
        },
        spec.workers);
    const char* names[3] = {"cauchy", "regularized", "bounded_mean"};
    for (int vi = 0; vi < 3; ++vi) {
      std::vector<double> finite;
      for (double v : values[vi])
        if (v >= 0) finite.push_back(v);
      csv.row({std::to_string(radius), names[vi], std::to_string(spec.replicas),
               std::to_string(finite.size()), fmt(mean_of(finite)), fmt(stderr_of(finite))});
      result.stats[std::string(names[vi]) + "_r" + std::to_string(radius)] = mean_of(finite);
    }
  }
  result.files.push_back("iid.csv");
}

const std::vector<std::tuple<std::string, std::string, RunFn>>& recipe_table() {
  static const std::vector<std::tuple<std::string, std::string, RunFn>> table = {
      {"exp-normal1", "fraction of N-cubes holding a cluster >= rho N^(s/2) vs N",
       &run_normal1},
      {"exp-connectprob", "planted-cluster attachment frequency vs the analytic bound",
       &run_connectprob},
      {"exp-criti", "largest-cluster density before/after epsilon-thinning", &run_criti},
      {"exp-jeff", "giant-component density after bond-length truncation", &run_jeff},
      {"exp-hierarchy", "per-stage alive fractions vs analytic failure bounds",
       &run_hierarchy_exp},
      {"exp-flow-energy", "q-energy and recursion bound across depths and schedules",
       &run_flow_energy},
      {"exp-recurrence-1d", "interval growth, exiting bonds, cutset sums at s=2",
       &run_recurrence_1d},
      {"exp-recurrence-2d", "projection, Cauchy-tail diagnostics, cutset sums",
       &run_recurrence_2d},
      {"exp-transience-profile", "resistance profiles across (d, s) regimes",
       &run_transience_profile},
      {"exp-iid-stability", "i.i.d. conductances and bad-cluster regularization",
       &run_iid_stability},
  };
  return table;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> experiment_list() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [id, summary, fn] : recipe_table()) out.emplace_back(id, summary);
  return out;
}

ExperimentSpec experiment_preset(const std::string& recipe) {
  ExperimentSpec s;
  s.experiment = recipe;
  s.seed_root = 20240601;
  s.out_dir = "out/" + recipe;
  if (recipe == "exp-normal1") {
    s.d = 1;
    s.s = 1.5;
    s.beta_mode = "fixed";
    s.beta = 1.0;
    s.rho = 1.0;
    s.box_sides = {16, 32, 64};
    s.replicas = 50;
  } else if (recipe == "exp-connectprob") {
    s.d = 1;
    s.s = 1.5;
    s.beta = 2.0;
    s.rho = 4.0;
    s.cube_side = 64;
    s.distances = {1, 2, 4};
    s.replicas = 400;
  } else if (recipe == "exp-criti") {
    s.d = 1;
    s.s = 1.5;
    s.beta_mode = "fixed";
    s.beta = 0.8;
    s.box_sides = {128};
    s.epsilons = {0.0, 0.05, 0.1};
    s.replicas = 40;
  } else if (recipe == "exp-jeff") {
    s.d = 2;
    s.s = 3.0;
    s.beta_mode = "fixed";
    s.beta = 0.6;
    s.box_sides = {64};
    s.cube_side = 8;
    s.replicas = 20;
  } else if (recipe == "exp-hierarchy") {
    s.d = 1;
    s.s = 1.5;
    s.beta = 2.0;
    s.sched_a = 5;
    s.sched_b = 1.1;
    s.depth = 2;
    s.base_cube = 4;
    s.k_enlarge = 4;
    s.replicas = 20;
    s.site_lambda = 0.9;
  } else if (recipe == "exp-flow-energy") {
    s.depth = 4;
  } else if (recipe == "exp-recurrence-1d") {
    s.d = 1;
    s.s = 2.0;
    s.beta = 1.5;
    s.box_sides = {2048};
    s.depth = 2;
    s.replicas = 24;
  } else if (recipe == "exp-recurrence-2d") {
    s.d = 2;
    s.s = 4.5;
    s.s_cauchy = 4.0;
    s.beta = 1.5;
    s.box_sides = {48};
    s.replicas = 2;
    s.pilot_replicas = 32;
  } else if (recipe == "exp-transience-profile") {
    s.radii_d1 = {16, 32};
    s.radii_d2 = {8, 16};
    s.beta_d1 = 3.0;
    s.beta_d2 = 1.5;
    s.replicas = 6;
  } else if (recipe == "exp-iid-stability") {
    s.box_sides = {16, 32};
    s.chi = 1.0;
    s.reg_m = 4.0;
    s.replicas = 4;
  } else {
    throw std::invalid_argument("unknown recipe: " + recipe);
  }
  return s;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  const auto& table = recipe_table();
  RunFn fn = nullptr;
  for (const auto& [id, summary, f] : table)
    if (id == spec.experiment) fn = f;
  if (!fn) throw std::invalid_argument("unknown experiment: " + spec.experiment);

  const std::filesystem::path dir(spec.out_dir);
  std::filesystem::create_directories(dir);

  ExperimentResult result;
  nlohmann::json notes;
  try {
    fn(spec, dir, result, notes);
  } catch (const std::exception& e) {
    result.complete = false;
    result.failures.push_back(e.what());
  }

  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["experiment"] = spec.experiment;
  manifest["spec_hash"] = spec.hash();
  manifest["seed_root"] = spec.seed_root;
  manifest["rng"] = std::string(kRngAlgorithm);
  manifest["complete"] = result.complete;
  manifest["files"] = result.files;
  manifest["notes"] = notes;
  nlohmann::json stats;
  for (const auto& [k, v] : result.stats) stats[k] = fmt(v);
  manifest["stats"] = stats;
  if (!result.failures.empty()) manifest["failures"] = result.failures;
  std::ofstream mf(dir / "manifest.json", std::ios::binary);
  mf << manifest.dump(2) << "\n";
  result.files.push_back("manifest.json");
  return result;
}

}  // namespace lrp
