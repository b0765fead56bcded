#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lrp/kernel.hpp"
#include "lrp/rng.hpp"

namespace lrp {

// Flat experiment description: one structured file per experiment, every key
// documented in docs/csv_schemas.md. Unused keys keep their defaults.
struct ExperimentSpec {
  std::string experiment;        // recipe id, see experiment_list()
  std::uint64_t seed_root = 1;
  std::string out_dir = "out";

  // kernel section
  std::string kernel_form = "eta";
  int d = 1;
  double s = 1.5;
  double beta = 1.0;             // ignored when beta_mode != "fixed"
  std::string beta_mode = "fixed";  // fixed | auto-supercritical | auto-near-critical

  std::uint64_t replicas = 100;
  unsigned workers = 0;          // 0 = hardware concurrency

  // recipe parameters
  double rho = 1.0;
  std::vector<std::int64_t> box_sides;   // N schedule (exp-normal1, exp-transience, ...)
  std::vector<std::int64_t> distances;   // l values (exp-connectprob)
  std::int64_t cube_side = 0;            // planted-cube side / exp-normal1 preset N_cube
  std::int64_t k_enlarge = 0;
  std::vector<double> epsilons;          // exp-criti thinning grid
  int sched_a = 5;                       // polynomial schedule exponents
  double sched_b = 1.1;
  int depth = 3;                         // hierarchy / flow truncation L
  std::int64_t base_cube = 4;            // M, polynomial hierarchy base cube side
  double site_lambda = 0.9;              // subgraph-variant site density
  double chi = 1.0;                      // Cauchy-tail scale
  double reg_m = 4.0;                    // regularization threshold M
  std::uint64_t walk_replicas = 0;
  std::uint64_t walk_budget = 100000;

  // exp-transience-profile regimes
  std::vector<std::int64_t> radii_d1 = {32, 64, 128, 256};
  std::vector<std::int64_t> radii_d2 = {32, 64, 128};
  double beta_d1 = 3.0;
  double beta_d2 = 1.5;
  double s_cauchy = 4.0;                 // projected-tail diagnostics exponent
  std::uint64_t pilot_replicas = 100;    // threshold scans and tail fits

  std::string to_json() const;
  static ExperimentSpec from_json(const std::string& text);
  std::uint64_t hash() const;
};

std::vector<std::pair<std::string, std::string>> experiment_list();  // id, summary

// Built-in small presets (used by `experiment run --preset` and the
// reproducibility checks); every recipe has one.
ExperimentSpec experiment_preset(const std::string& recipe);

struct ExperimentResult {
  std::vector<std::string> files;  // paths written, relative to out_dir
  std::map<std::string, double> stats;  // headline numbers (also in manifest)
  bool complete = true;
  std::vector<std::string> failures;  // per-replica failure notes
};

// Executes the recipe, writes its CSV outputs plus manifest.json into
// out_dir. Identical spec (including seed_root) reproduces every output file
// byte for byte.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// Finite-size crossing estimate of the percolation threshold: the order
// parameter (largest cluster / volume) is scanned over beta for two box
// sizes; the estimate is the first sign change of theta_big - theta_small.
struct ThresholdEstimate {
  bool found = false;
  bool saturated = false;  // curves already crossed at the scan minimum
  double beta_hat = 0;
  double band_lo = 0;
  double band_hi = 0;
  std::vector<double> grid;
  std::vector<double> theta_small;
  std::vector<double> theta_big;
};

ThresholdEstimate estimate_threshold(int d, double s, const std::vector<double>& beta_grid,
                                     std::int64_t box_small, std::int64_t box_big,
                                     std::uint64_t replicas, const SeedRecord& seed,
                                     unsigned workers = 0);

// beta_mode resolution used by the recipes: auto-supercritical multiplies the
// crossing estimate by 1.5 (floor +0.25), auto-near-critical by 1.1.
double resolve_beta(const ExperimentSpec& spec, std::string* note = nullptr);

}  // namespace lrp
