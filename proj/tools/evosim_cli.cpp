// evosim: graph generation, epidemic simulation, parameter scans, analytic
// summaries and verification suites from the command line.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evosim/evosim.hpp"

namespace {

using namespace evosim;

/// Output stream for --out (stdout when empty).
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

struct ModelOptions {
  std::string dist = "poisson:5";
  std::size_t n = 1000;
  std::string variant = "evoSI";
  std::string lambda = "1", rho = "0", gamma = "0";
  std::string duration = "exp";
  double rewire_prob = std::numeric_limits<double>::quiet_NaN();
  double eta = 0.01;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::size_t trials = 1;
  bool er = false;
  bool dynamic = false;
  bool time_changed = false;
  std::string out;
  std::string format = "jsonl";
  std::string config;
};

void add_config_option(CLI::App* cmd, ModelOptions& o) {
  cmd->add_option("--config", o.config, "key=value file; command-line flags take precedence");
}

void add_graph_options(CLI::App* cmd, ModelOptions& o) {
  cmd->add_option("--dist", o.dist, "degree law: poisson:MU, geometric:P, regular:R or pmf:p0,p1,...");
  cmd->add_option("--n", o.n, "number of vertices")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "root seed");
  cmd->add_flag("--er", o.er, "Erdos-Renyi G(n, mu/n) instead of CM(n, Poisson(mu))");
  cmd->add_option("--out", o.out, "output path (stdout by default)");
}

void add_model_options(CLI::App* cmd, ModelOptions& o) {
  add_graph_options(cmd, o);
  cmd->add_option("--variant", o.variant, "delSI, evoSI, avoSI, abAvoSI, delSIR, evoSIR or sirOmega");
  cmd->add_option("--lambda", o.lambda, "infection rate, value or min:max:step");
  cmd->add_option("--rho", o.rho, "rewiring / deletion rate, value or min:max:step");
  cmd->add_option("--gamma", o.gamma, "recovery rate, value or min:max:step");
  cmd->add_option("--duration", o.duration, "infectious period law")->check(CLI::IsMember({"exp", "fixed"}));
  cmd->add_option("--rewire-prob", o.rewire_prob, "probability that a sirOmega rho-event rewires");
  cmd->add_option("--eta", o.eta, "large-outbreak threshold as a fraction of n");
  cmd->add_option("--trials", o.trials, "replicas")->check(CLI::PositiveNumber);
  cmd->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--dynamic", o.dynamic, "half-edge construction (avoSI, abAvoSI)");
  cmd->add_flag("--time-changed", o.time_changed, "time-changed clock for the dynamic construction");
}

double single_value(const std::string& text, const char* name) {
  const Grid g = Grid::parse(text);
  if (!g.is_single()) throw ConfigError(std::string("--") + name + " takes a single value here");
  return g.min;
}

EpidemicConfig make_config(const ModelOptions& o) {
  EpidemicConfig cfg;
  cfg.variant = parse_variant(o.variant);
  cfg.lambda = Grid::parse(o.lambda).min;
  cfg.rho = Grid::parse(o.rho).min;
  cfg.gamma = Grid::parse(o.gamma).min;
  cfg.duration = o.duration == "fixed" ? DurationMode::Fixed : DurationMode::Exponential;
  cfg.rewire_prob = o.rewire_prob;
  cfg.eta = o.eta;
  cfg.time_changed = o.time_changed;
  return cfg;
}

HalfEdgeGraph make_graph(const ModelOptions& o, const DegreeDistribution& dist, std::uint64_t seed) {
  if (o.er) {
    if (dist.family() != Family::Poisson) throw ConfigError("--er needs a poisson degree law");
    return gen_er(o.n, dist.parameter(), seed);
  }
  return gen_config_model(o.n, dist, seed);
}

// ---- generate ----

int cmd_generate(const ModelOptions& o) {
  const DegreeDistribution dist = DegreeDistribution::parse(o.dist);
  const HalfEdgeGraph g = make_graph(o, dist, o.seed);
  Output out(o.out);
  g.write(out.stream());
  std::cerr << "generated n=" << g.n() << " edges=" << g.num_edges() << " unpaired=" << g.num_unpaired() << "\n";
  return 0;
}

// ---- simulate ----

struct SimulateExtras {
  std::string graph_path;
  std::string record = "adaptive";
  double dt = 0.01;
  double horizon = std::numeric_limits<double>::infinity();
  std::size_t k_max = 10;
  std::optional<std::uint32_t> seed_vertex;
};

int cmd_simulate(const ModelOptions& o, const SimulateExtras& x) {
  EpidemicConfig cfg = make_config(o);
  single_value(o.lambda, "lambda");
  single_value(o.rho, "rho");
  single_value(o.gamma, "gamma");
  cfg.seed_vertex = x.seed_vertex;
  const bool csv = o.format == "csv";
  if (csv) {
    if (o.trials != 1) throw ConfigError("csv trajectory output takes a single run (--trials 1)");
    cfg.record.mode = x.record == "grid" ? RecordPolicy::Mode::Grid : RecordPolicy::Mode::Adaptive;
    cfg.record.grid_dt = x.dt;
    cfg.record.horizon = x.horizon;
    cfg.record.k_max = x.k_max;
  }
  cfg.validate();
  const DegreeDistribution dist = DegreeDistribution::parse(o.dist);
  std::optional<HalfEdgeGraph> fixed_graph;
  if (!x.graph_path.empty()) {
    if (o.dynamic) throw ConfigError("--graph and --dynamic are exclusive");
    std::ifstream in(x.graph_path);
    if (!in) throw std::runtime_error("cannot open graph file '" + x.graph_path + "'");
    fixed_graph = HalfEdgeGraph::read(in);
  }

  struct Result {
    Trajectory trajectory;
    std::size_t n = 0;
    double ms = 0;
  };
  const auto results = run_replicas(
      [&](std::uint64_t s) {
        const auto start = std::chrono::steady_clock::now();
        Result r;
        if (o.dynamic) {
          r.trajectory = run_dynamic(dist, o.n, cfg, s);
          r.n = o.n;
        } else {
          const HalfEdgeGraph g = fixed_graph ? *fixed_graph : make_graph(o, dist, derive_seed(s, 0));
          r.trajectory = run_static(g, cfg, derive_seed(s, 1));
          r.n = g.n();
        }
        r.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        return r;
      },
      o.trials, o.seed, o.workers);

  Output out(o.out);
  if (csv) {
    write_trajectory_csv(out.stream(), results.front().trajectory.samples, x.k_max);
    return 0;
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    RunRecord rec;
    rec.variant = cfg.variant;
    rec.n = r.n;
    rec.lambda = cfg.lambda;
    rec.rho = cfg.rho;
    rec.gamma = cfg.gamma;
    rec.seed = derive_seed(o.seed, i);
    rec.final_size = r.trajectory.final_size;
    rec.events = r.trajectory.events;
    rec.wallclock_ms = r.ms;
    rec.outcome = r.trajectory.outcome;
    write_jsonl(out.stream(), rec);
  }
  return 0;
}

// ---- scan ----

int cmd_scan(const ModelOptions& o) {
  ScanSpec spec;
  spec.dist = o.dist;
  spec.n = o.n;
  spec.base = make_config(o);
  spec.trials = o.trials;
  spec.seed = o.seed;
  spec.workers = o.workers;
  spec.er = o.er;
  spec.dynamic = o.dynamic;
  const Grid lg = Grid::parse(o.lambda), rg = Grid::parse(o.rho), gg = Grid::parse(o.gamma);
  const int ranges = !lg.is_single() + !rg.is_single() + !gg.is_single();
  if (ranges > 1) throw ConfigError("sweep one parameter at a time");
  spec.param = SweptParam::Lambda;
  spec.grid = lg;
  if (!rg.is_single()) {
    spec.param = SweptParam::Rho;
    spec.grid = rg;
  } else if (!gg.is_single()) {
    spec.param = SweptParam::Gamma;
    spec.grid = gg;
  }
  Output out(o.out);
  std::cerr << "scan over " << to_string(spec.param) << ": " << spec.grid.values().size() << " points x "
            << spec.trials << " trials\n";
  run_scan(spec, &out.stream());
  return 0;
}

// ---- analytic ----

int cmd_analytic(const ModelOptions& o) {
  const DegreeDistribution dist = DegreeDistribution::parse(o.dist);
  const double rho = single_value(o.rho, "rho");
  const double gamma = single_value(o.gamma, "gamma");
  const CriticalSummary cs = critical_values(dist, rho, gamma);
  nlohmann::json j;
  j["dist"] = dist.describe();
  j["m1"] = cs.m1;
  j["m2"] = cs.m2;
  j["m3"] = cs.m3;
  j["mu1"] = cs.mu1;
  j["mu2"] = cs.mu2;
  j["mu3"] = cs.mu3;
  j["delta"] = cs.delta;
  j["alpha_c"] = cs.alpha_c;
  j["rho"] = rho;
  j["gamma"] = gamma;
  j["supercritical_graph"] = cs.supercritical_graph();
  if (cs.lambda_c)
    j["lambda_c"] = *cs.lambda_c;
  else
    j["lambda_c"] = nullptr;
  if (!cs.supercritical_graph()) j["note"] = "alpha_c <= 0: the graph has no giant component";
  j["transition"] = cs.delta > 0 ? "discontinuous" : (cs.delta < 0 ? "continuous" : "boundary");
  nlohmann::json points = nlohmann::json::array();
  for (double lambda : Grid::parse(o.lambda).values()) {
    nlohmann::json p;
    p["lambda"] = lambda;
    if (lambda > 0.0) {
      const double alpha = alpha_parameter(dist, lambda, rho);
      p["alpha"] = alpha;
      p["q"] = bp_survival(dist, lambda, rho);
      if (alpha < cs.alpha_c) {
        const SigmaNu sn = sigma_nu(dist, alpha);
        p["sigma"] = sn.sigma;
        p["nu"] = sn.nu;
        p["star_holds"] = sn.star_holds;
      } else {
        p["note"] = "alpha >= alpha_c: subcritical";
      }
    }
    points.push_back(p);
  }
  j["points"] = points;
  Output out(o.out);
  out.stream() << j.dump(2) << "\n";
  return 0;
}

// ---- verify ----

struct VerifyOptions {
  std::string suite;
  std::size_t n = 0;
  std::size_t runs = 0;
  std::size_t trials = 20'000;
  std::string dist = "poisson:5";
  std::uint64_t seed = 1;
  std::string config;
};

int cmd_verify(const VerifyOptions& v) {
  std::vector<Check> checks;
  if (v.suite == "coupling") {
    CouplingSweep sweep;
    sweep.dist = v.dist;
    sweep.n = v.n ? v.n : 1000;
    sweep.runs = v.runs ? v.runs : 100;
    sweep.seed = v.seed;
    checks = coupling_checks(coupling_stats(sweep));
  } else if (v.suite == "percolation") {
    checks = percolation_checks(v.trials, v.seed);
  } else if (v.suite == "limits") {
    LimitStudy study;
    study.dist = v.dist;
    study.n = v.n ? v.n : 100'000;
    study.surviving_runs = v.runs ? v.runs : 20;
    study.seed = v.seed;
    checks = limit_checks(limit_stats(study), study.surviving_runs, 0.03);
  } else if (v.suite == "survival") {
    checks = survival_checks(default_survival_points(), v.trials, v.seed);
  }
  for (const Check& c : checks) std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
  return all_passed(checks) ? 0 : 1;
}

/// Appends --key=value for every config-file entry whose flag is absent from argv.
std::vector<std::string> merge_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  std::set<std::string> given;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    const auto eq = a.find('=');
    const std::string key = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    given.insert(key);
    if (key == "config") path = eq != std::string::npos ? a.substr(eq + 1) : (i + 1 < args.size() ? args[i + 1] : "");
  }
  if (path.empty()) return args;
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(path)) {
    if (given.count(item.name)) continue;
    std::string value;
    for (std::size_t i = 0; i < item.inputs.size(); ++i) value += (i ? "," : "") + item.inputs[i];
    args.push_back("--" + item.name + "=" + value);
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Epidemics with rewiring on configuration-model graphs"};
  app.require_subcommand(1);

  ModelOptions gen_o, sim_o, scan_o, ana_o;
  SimulateExtras sim_x;
  VerifyOptions ver_o;

  auto* gen = app.add_subcommand("generate", "write a random graph as an edge list");
  add_graph_options(gen, gen_o);
  add_config_option(gen, gen_o);

  auto* sim = app.add_subcommand("simulate", "run epidemics and emit run records or a trajectory");
  add_model_options(sim, sim_o);
  add_config_option(sim, sim_o);
  sim->add_option("--format", sim_o.format, "jsonl run records or csv trajectory")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  sim->add_option("--graph", sim_x.graph_path, "edge-list file to run on instead of a generated graph");
  sim->add_option("--record", sim_x.record, "trajectory sampling")->check(CLI::IsMember({"adaptive", "grid"}));
  sim->add_option("--dt", sim_x.dt, "grid sampling step");
  sim->add_option("--horizon", sim_x.horizon, "last sampled time");
  sim->add_option("--kmax", sim_x.k_max, "largest k of the S_k columns");
  sim->add_option("--seed-vertex", sim_x.seed_vertex, "initial infective (uniform by default)");

  auto* scan = app.add_subcommand("scan", "sweep one rate and estimate outbreak statistics");
  scan_o.trials = 100;
  add_model_options(scan, scan_o);
  add_config_option(scan, scan_o);
  scan_o.format = "csv";
  scan->add_option("--format", scan_o.format, "scan output is csv")->check(CLI::IsMember({"csv"}));

  auto* ana = app.add_subcommand("analytic", "moments, critical values, q, sigma and nu as JSON");
  ana->add_option("--dist", ana_o.dist, "degree law");
  ana->add_option("--lambda", ana_o.lambda, "value or min:max:step");
  ana->add_option("--rho", ana_o.rho, "rewiring rate");
  ana->add_option("--gamma", ana_o.gamma, "recovery rate");
  ana->add_option("--out", ana_o.out, "output path");
  add_config_option(ana, ana_o);

  auto* ver = app.add_subcommand("verify", "run a verification suite; nonzero exit on failure");
  ver->add_option("suite", ver_o.suite, "coupling, percolation, limits or survival")
      ->required()
      ->check(CLI::IsMember({"coupling", "percolation", "limits", "survival"}));
  ver->add_option("--n", ver_o.n, "graph size");
  ver->add_option("--runs", ver_o.runs, "coupled runs, or surviving runs for limits");
  ver->add_option("--trials", ver_o.trials, "Monte Carlo trials");
  ver->add_option("--dist", ver_o.dist, "degree law");
  ver->add_option("--seed", ver_o.seed, "root seed");
  ver->add_option("--config", ver_o.config, "key=value file");

  try {
    std::vector<std::string> args = merge_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*gen) return cmd_generate(gen_o);
    if (*sim) return cmd_simulate(sim_o, sim_x);
    if (*scan) return cmd_scan(scan_o);
    if (*ana) return cmd_analytic(ana_o);
    if (*ver) return cmd_verify(ver_o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
