// Command-line harness: sampling, cluster analysis, renormalization runs,
// flows, resistance solves, random walks, and full experiment recipes.
// Exit codes: 0 success, 2 validation error, 3 numerical non-convergence.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lrp/clusters.hpp"
#include "lrp/config.hpp"
#include "lrp/electro.hpp"
#include "lrp/experiments.hpp"
#include "lrp/renorm.hpp"
#include "lrp/renorm_graph.hpp"
#include "lrp/walk.hpp"

namespace {

lrp::Kernel kernel_from(int d, double s, double beta) {
  return lrp::Kernel::make_eta(d, s, beta);
}

lrp::Configuration load_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::invalid_argument("cannot open configuration file " + path);
  return lrp::read_config_csv(is);
}

lrp::ElectricalNetwork load_network(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::invalid_argument("cannot open network file " + path);
  lrp::ElectricalNetwork net;
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("empty network file");
  net.n = static_cast<std::uint32_t>(std::stoul(line));
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string u, v, c;
    std::getline(ss, u, ',');
    std::getline(ss, v, ',');
    std::getline(ss, c, ',');
    net.edges.push_back({static_cast<std::uint32_t>(std::stoul(u)),
                         static_cast<std::uint32_t>(std::stoul(v)), std::stod(c)});
  }
  return net;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"long-range percolation and electrical-network laboratory"};
  app.require_subcommand(1);

  // --- sample ---------------------------------------------------------
  auto* sample = app.add_subcommand("sample", "sample an open-bond configuration");
  int sd = 1;
  double ss = 1.5, sbeta = 1.0;
  std::int64_t sn = 64;
  std::uint64_t sseed = 1;
  std::string sout = "config.csv";
  sample->add_option("-d,--dim", sd);
  sample->add_option("-s,--decay", ss);
  sample->add_option("-b,--beta", sbeta);
  sample->add_option("-n,--side", sn);
  sample->add_option("--seed", sseed);
  sample->add_option("-o,--out", sout);

  // --- clusters -------------------------------------------------------
  auto* clusters = app.add_subcommand("clusters", "label clusters and report cubes");
  std::string cin_path, cout_path = "cubes.csv";
  std::int64_t cm = 8, ck = 0;
  std::uint32_t cthreshold = 1;
  clusters->add_option("-i,--config", cin_path)->required();
  clusters->add_option("-m,--cube-side", cm);
  clusters->add_option("-k,--enlarge", ck);
  clusters->add_option("-t,--threshold", cthreshold);
  clusters->add_option("-o,--out", cout_path);

  // --- renorm ---------------------------------------------------------
  auto* renorm = app.add_subcommand("renorm", "run the renormalization hierarchy");
  std::string rin_path, rout_path = "stages.csv";
  int ra = 5, rdepth = 2;
  double rb = 1.1;
  std::int64_t rm = 4, rk = 0;
  std::uint32_t rthreshold = 1;
  renorm->add_option("-i,--config", rin_path)->required();
  renorm->add_option("-a,--sched-a", ra);
  renorm->add_option("-b,--sched-b", rb);
  renorm->add_option("-L,--depth", rdepth);
  renorm->add_option("-m,--cube-side", rm);
  renorm->add_option("-k,--enlarge", rk);
  renorm->add_option("-t,--threshold", rthreshold);
  renorm->add_option("-o,--out", rout_path);

  // --- flow -----------------------------------------------------------
  auto* flow = app.add_subcommand("flow", "build the canonical renormalized-graph flow");
  std::string fsched = "(n+1)^2";
  int fdepth = 3;
  std::string fout = "flow.csv";
  flow->add_option("--schedule", fsched, "(n+1)^2 or 2^n");
  flow->add_option("-L,--depth", fdepth);
  flow->add_option("-o,--out", fout);

  // --- resist ---------------------------------------------------------
  auto* resist = app.add_subcommand("resist", "effective resistance between vertex sets");
  std::string nin_path;
  std::vector<std::uint32_t> rsources, rsinks;
  double rtol = 1e-10;
  resist->add_option("-i,--network", nin_path)->required();
  resist->add_option("--source", rsources)->required();
  resist->add_option("--sink", rsinks)->required();
  resist->add_option("--tol", rtol);

  // --- walk -----------------------------------------------------------
  auto* walk = app.add_subcommand("walk", "conductance-weighted random walk");
  std::string win_path;
  std::uint32_t wstart = 0;
  std::vector<std::uint32_t> wboundary;
  std::uint64_t wreplicas = 1000, wbudget = 100000, wseed = 1;
  walk->add_option("-i,--network", win_path)->required();
  walk->add_option("--start", wstart);
  walk->add_option("--boundary", wboundary)->required();
  walk->add_option("--replicas", wreplicas);
  walk->add_option("--budget", wbudget);
  walk->add_option("--seed", wseed);

  // --- experiment -----------------------------------------------------
  auto* experiment = app.add_subcommand("experiment", "run or list experiment recipes");
  auto* exp_list = experiment->add_subcommand("list", "list recipes");
  auto* exp_run = experiment->add_subcommand("run", "run a recipe from a spec file");
  std::string spec_path, preset_name, out_override;
  exp_run->add_option("spec", spec_path, "json spec file (or use --preset)");
  exp_run->add_option("--preset", preset_name, "built-in small preset recipe id");
  exp_run->add_option("--out-dir", out_override, "override the spec's output directory");
  auto* exp_spec = experiment->add_subcommand("spec", "print a preset spec as json");
  std::string spec_recipe;
  exp_spec->add_option("recipe", spec_recipe)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) {
      const lrp::Kernel k = kernel_from(sd, ss, sbeta);
      lrp::SeedRecord rec;
      rec.seed = sseed;
      const lrp::Configuration c = lrp::sample_config(k, lrp::Box(sd, sn), rec);
      std::ofstream os(sout, std::ios::binary);
      lrp::write_config_csv(os, c);
      std::cout << c.bonds.size() << " bonds -> " << sout << "\n";
    } else if (*clusters) {
      const lrp::Configuration c = load_config(cin_path);
      const auto reports = lrp::cube_aliveness(c, cm, ck, cthreshold);
      std::ofstream os(cout_path, std::ios::binary);
      os << "cube";
      for (int i = 0; i < c.box.d; ++i) os << ",g" << i;
      os << ",alive,semi_size\n";
      for (const auto& r : reports) {
        os << r.cube;
        for (int i = 0; i < c.box.d; ++i) os << "," << r.grid_coord[i];
        os << "," << (r.alive ? 1 : 0) << "," << r.semi_size << "\n";
      }
      std::cout << reports.size() << " cubes -> " << cout_path << "\n";
    } else if (*renorm) {
      const lrp::Configuration c = load_config(rin_path);
      lrp::StageSchedule sched;
      sched.variant = lrp::ScheduleVariant::Polynomial;
      sched.a = ra;
      sched.b = rb;
      sched.depth = rdepth;
      lrp::validate_schedule(sched, c.box.d, 1.5);
      const auto input = lrp::hierarchy_input_from_config(c, rm, rk, rthreshold);
      const auto hr = lrp::run_hierarchy(input, sched);
      std::ofstream os(rout_path, std::ios::binary);
      os << "stage,vertices,alive,alive_fraction,a_failures,b_failures\n";
      for (const auto& st : hr.stages)
        os << st.stage << "," << st.vertex_count << "," << st.alive_count << ","
           << st.alive_fraction() << "," << st.a_failures << "," << st.b_failures << "\n";
      std::cout << hr.stages.size() << " stages -> " << rout_path << "\n";
    } else if (*flow) {
      std::vector<std::int64_t> c;
      for (int n = 1; n <= fdepth; ++n) {
        if (fsched == "2^n")
          c.push_back(std::int64_t(1) << n);
        else
          c.push_back(static_cast<std::int64_t>(n + 1) * (n + 1));
      }
      const auto g = lrp::build_renorm_graph(c, fdepth);
      const auto f = lrp::build_flow(g);
      std::ofstream os(fout, std::ios::binary);
      os << "u,v,flow\n";
      for (const auto& e : f.edges)
        os << g.address_of(e.u) << "," << g.address_of(e.v) << "," << e.value.str() << "\n";
      std::cout << f.edges.size() << " flow edges, 2-energy " << lrp::q_energy(f, 2.0)
                << ", bound " << lrp::energy_recursion_bound(c, fdepth) << " -> " << fout
                << "\n";
    } else if (*resist) {
      const lrp::ElectricalNetwork net = load_network(nin_path);
      const auto rr = lrp::effective_resistance(net, rsources, rsinks, rtol);
      if (rr.infinite)
        std::cout << "{\"infinite\": true, \"iterations\": " << rr.iterations << "}\n";
      else
        std::cout << "{\"resistance\": " << rr.resistance
                  << ", \"conductance\": " << rr.conductance
                  << ", \"iterations\": " << rr.iterations
                  << ", \"residual\": " << rr.residual << ", \"tolerance\": " << rtol
                  << "}\n";
    } else if (*walk) {
      const lrp::ElectricalNetwork net = load_network(win_path);
      lrp::SeedRecord rec;
      rec.seed = wseed;
      const auto est = lrp::escape_probability(net, wstart, wboundary, wreplicas, wbudget, rec);
      std::cout << "escape " << est.probability << " +- " << est.stderr_ << " (returned "
                << est.returned << ", escaped " << est.escaped << ", exhausted "
                << est.exhausted << ")\n";
    } else if (*experiment) {
      if (*exp_list) {
        for (const auto& [id, summary] : lrp::experiment_list())
          std::cout << id << "  " << summary << "\n";
      } else if (*exp_spec) {
        std::cout << lrp::experiment_preset(spec_recipe).to_json();
      } else if (*exp_run) {
        lrp::ExperimentSpec spec;
        if (!preset_name.empty()) {
          spec = lrp::experiment_preset(preset_name);
        } else if (!spec_path.empty()) {
          std::ifstream is(spec_path, std::ios::binary);
          if (!is) throw std::invalid_argument("cannot open spec file " + spec_path);
          std::stringstream buf;
          buf << is.rdbuf();
          spec = lrp::ExperimentSpec::from_json(buf.str());
        } else {
          throw std::invalid_argument("experiment run needs a spec file or --preset");
        }
        if (!out_override.empty()) spec.out_dir = out_override;
        const auto result = lrp::run_experiment(spec);
        for (const auto& f : result.files) std::cout << spec.out_dir << "/" << f << "\n";
        if (!result.complete) {
          for (const auto& f : result.failures) std::cerr << "incomplete: " << f << "\n";
          return 3;
        }
      } else {
        std::cerr << "experiment: expected list, run, or spec\n";
        return 2;
      }
    }
  } catch (const lrp::ConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
