// mdthresh command-line driver.

#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdthresh/mdthresh.hpp"

namespace {

using namespace mdthresh;

struct Options {
  std::string config;
  std::string out;
  std::string graph;
  std::optional<std::uint64_t> master_seed;
  std::optional<unsigned> threads;
  std::optional<int> tau;
  std::optional<double> grid_step;
  std::string tie;
  std::optional<double> refine;
  std::string route;
  std::optional<double> beta;
  std::optional<double> alpha;
  std::optional<std::size_t> realizations;
  std::optional<std::size_t> max_steps;
  std::string seed_policy;
  std::string settings;
  std::string beta_grid;
  std::string alpha_grid;
  std::size_t realization = 0;
  bool cumulative = false;
};

// Config file first, then flags on top.
ExperimentConfig resolve(const Options& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_experiment_config(o.config);
  if (!o.graph.empty()) {
    cfg.graph_file = o.graph;
    cfg.generator.reset();
    cfg.source.erase("network.file");
    cfg.source["network.file"] = o.graph;
  }
  auto& src = cfg.source;
  if (o.master_seed) {
    cfg.master_seed = *o.master_seed;
    src["run.master_seed"] = std::to_string(*o.master_seed);
  }
  if (o.threads) cfg.threads = *o.threads;
  if (o.tau) {
    cfg.analysis.tau = cfg.simulation.tau = *o.tau;
    src["analysis.tau"] = src["simulation.tau"] = std::to_string(*o.tau);
  }
  if (o.grid_step) {
    cfg.analysis.grid_step = *o.grid_step;
    src["analysis.grid_step"] = format_number(*o.grid_step);
  }
  if (!o.tie.empty()) {
    cfg.analysis.ties = parse_ties("--tie", o.tie);
    src["analysis.tie"] = o.tie;
  }
  if (o.refine) {
    cfg.analysis.refine = *o.refine;
    src["analysis.refine"] = format_number(*o.refine);
  }
  if (!o.route.empty()) {
    cfg.analysis.route = o.route;
    src["analysis.route"] = o.route;
  }
  if (o.realizations) {
    cfg.simulation.realizations = *o.realizations;
    src["simulation.realizations"] = std::to_string(*o.realizations);
  }
  if (o.max_steps) {
    cfg.simulation.max_steps = *o.max_steps;
    src["simulation.max_steps"] = std::to_string(*o.max_steps);
  }
  if (!o.seed_policy.empty()) {
    cfg.simulation.seeds = parse_seed_policy("--seed-policy", o.seed_policy);
    src["simulation.seed_policy"] = o.seed_policy;
  }
  if (!o.beta_grid.empty()) {
    cfg.simulation.beta_grid = parse_rate_grid("--beta-grid", o.beta_grid);
    src["simulation.beta_grid"] = o.beta_grid;
  }
  if (!o.alpha_grid.empty()) {
    cfg.simulation.alpha_grid = parse_rate_grid("--alpha-grid", o.alpha_grid);
    src["simulation.alpha_grid"] = o.alpha_grid;
  }
  if (!o.settings.empty()) {
    cfg.simulation.dynamics = parse_settings("--settings", o.settings);
    src["simulation.dynamics"] = o.settings;
  }
  validate(cfg);
  return cfg;
}

// Writes to --out when given, stdout otherwise.
template <class Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::ConfigError, "cannot write " + path);
  fn(f);
}

double require(const std::optional<double>& v, const char* flag) {
  if (!v) throw Error(Errc::ConfigError, std::string(flag) + " is required");
  if (!(*v >= 0.0 && *v <= 1.0)) throw Error(Errc::DomainError, std::string(flag) + " must lie in [0,1]");
  return *v;
}

int cmd_generate(const Options& o) {
  const auto cfg = resolve(o);
  if (!cfg.generator) throw Error(Errc::ConfigError, "generate needs network.layer.* keys in --config");
  const auto g = materialize_network(cfg);
  emit(o.out, [&](std::ostream& out) { write_edge_list(out, g); });
  print_summary(std::cerr, summarize(g));
  return 0;
}

int cmd_info(const Options& o) {
  const auto g = materialize_network(resolve(o));
  print_summary(std::cout, summarize(g));
  const auto gcc = gcc_sizes(g);
  for (std::size_t l = 0; l < gcc.per_layer.size(); ++l)
    std::cout << "  gcc L" << (l + 1) << " = " << gcc.per_layer[l] << '\n';
  std::cout << "  gcc all = " << gcc.whole << '\n';
  return 0;
}

int cmd_classify(const Options& o) {
  const auto g = materialize_network(resolve(o));
  for (std::size_t l = 0; l < g.layer_count(); ++l) {
    std::cout << "kappa_L" << (l + 1) << " = ";
    try {
      std::cout << format_number(kappa(g, KappaScope::single_layer(l))) << '\n';
    } catch (const Error&) {
      std::cout << "undefined\n";
    }
  }
  std::cout << "kappa_T = ";
  try {
    std::cout << format_number(kappa(g)) << '\n';
  } catch (const Error&) {
    std::cout << "undefined\n";
  }
  std::cout << "coupling = " << to_string(classify_coupling(g)) << '\n';
  return 0;
}

int cmd_threshold(const Options& o) {
  const auto cfg = resolve(o);
  const auto g = materialize_network(cfg);
  const auto frontier = compute_frontier(cfg, g);
  emit(o.out, [&](std::ostream& out) { write_frontier_csv(out, frontier, g.color_count()); });
  return 0;
}

int cmd_simulate(const Options& o) {
  const auto cfg = resolve(o);
  const auto g = materialize_network(cfg);
  auto sir = sir_config(cfg, g);
  sir.rates = intra_inter_rates(g.colors(), require(o.beta, "--beta"), require(o.alpha, "--alpha"));
  const auto summary = run_sir(g, sir, o.realization);
  emit(o.out, [&](std::ostream& out) { write_run_csv(out, summary); });
  const auto d = infection_density(summary, g);
  for (std::size_t l = 0; l < d.per_layer.size(); ++l)
    std::cerr << "density_L" << (l + 1) << " = " << format_number(d.per_layer[l]) << '\n';
  std::cerr << "density_all = " << format_number(d.whole) << '\n';
  return 0;
}

int cmd_sweep(const Options& o) {
  const auto cfg = resolve(o);
  const auto g = materialize_network(cfg);
  const auto h = sweep_heatmap(g, cfg.simulation.beta_grid, cfg.simulation.alpha_grid, sir_config(cfg, g), cfg.threads);
  emit(o.out, [&](std::ostream& out) { write_sweep_csv(out, h, g.layer_count()); });
  return 0;
}

int cmd_dynamics(const Options& o) {
  const auto cfg = resolve(o);
  const auto g = materialize_network(cfg);
  auto settings = cfg.simulation.dynamics;
  if (o.beta || o.alpha) settings = {{require(o.beta, "--beta"), require(o.alpha, "--alpha")}};
  const auto series = dynamics(g, settings, sir_config(cfg, g), cfg.threads);
  emit(o.out, [&](std::ostream& out) { write_dynamics_csv(out, series, g.layer_count(), o.cumulative); });
  return 0;
}

int cmd_run(const Options& o) {
  auto cfg = resolve(o);
  if (!o.out.empty()) cfg.output_dir = o.out;
  const auto result = run_experiment(cfg);
  for (const auto& f : result.files) std::cout << f.string() << '\n';
  return 0;
}

void report(int code, std::string_view kind, const std::string& message) {
  nlohmann::json record{{"error", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << record.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multidimensional epidemic thresholds on interdependent networks"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "key = value experiment config");
    sub->add_option("--out", o.out, "output file (output directory for run)");
    sub->add_option("--master-seed", o.master_seed, "seed for all randomness");
    sub->add_option("--threads", o.threads, "worker threads");
    sub->add_option("--graph", o.graph, "edge-list graph file");
  };
  const auto sim_flags = [&](CLI::App* sub) {
    sub->add_option("--tau", o.tau, "infectious period in steps (default 5)");
    sub->add_option("--realizations", o.realizations, "realizations per cell (default 100)");
    sub->add_option("--max-steps", o.max_steps, "step cap per realization");
    sub->add_option("--seed-policy", o.seed_policy, "uniform:K | per-layer:K1,K2 | nodes:L:I,...");
  };

  auto* generate = app.add_subcommand("generate", "generate a network and write its edge list");
  common(generate);
  auto* info = app.add_subcommand("info", "print graph statistics");
  common(info);
  auto* classify = app.add_subcommand("classify", "kappa values and coupling strength");
  common(classify);

  auto* threshold = app.add_subcommand("threshold", "multidimensional threshold frontier as CSV");
  common(threshold);
  threshold->add_option("--tau", o.tau, "infectious period in steps");
  threshold->add_option("--grid-step", o.grid_step, "grid step in (0, 0.5]");
  threshold->add_option("--tie", o.tie, "tie colors, e.g. 1=2");
  threshold->add_option("--refine", o.refine, "bisection tolerance");
  threshold->add_option("--route", o.route, "closed-form | measured | empirical");

  auto* simulate = app.add_subcommand("simulate", "one SIR realization as CSV");
  common(simulate);
  sim_flags(simulate);
  simulate->add_option("--beta", o.beta, "intra-layer rate")->required();
  simulate->add_option("--alpha", o.alpha, "inter-layer rate")->required();
  simulate->add_option("--realization", o.realization, "realization index");

  auto* sweep = app.add_subcommand("sweep", "density heat map over (beta, alpha)");
  common(sweep);
  sim_flags(sweep);
  sweep->add_option("--beta-grid", o.beta_grid, "start:stop:step or list");
  sweep->add_option("--alpha-grid", o.alpha_grid, "start:stop:step or list");

  auto* dyn = app.add_subcommand("dynamics", "mean infected per step");
  common(dyn);
  sim_flags(dyn);
  dyn->add_option("--beta", o.beta, "intra-layer rate");
  dyn->add_option("--alpha", o.alpha, "inter-layer rate");
  dyn->add_option("--settings", o.settings, "beta:alpha;beta:alpha;...");
  dyn->add_flag("--cumulative", o.cumulative, "cumulative counts instead of current");

  auto* run = app.add_subcommand("run", "full experiment from --config into --out");
  common(run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report(2, "UsageError", e.what());
    return 2;
  }

  try {
    if (*generate) return cmd_generate(o);
    if (*info) return cmd_info(o);
    if (*classify) return cmd_classify(o);
    if (*threshold) return cmd_threshold(o);
    if (*simulate) return cmd_simulate(o);
    if (*sweep) return cmd_sweep(o);
    if (*dyn) return cmd_dynamics(o);
    if (*run) return cmd_run(o);
  } catch (const Error& e) {
    const int code = exit_code(e.code());
    report(code, to_string(e.code()), e.what());
    return code;
  } catch (const std::exception& e) {
    report(3, "InternalError", e.what());
    return 3;
  }
  return 0;
}
