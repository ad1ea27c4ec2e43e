#pragma once

// Experiment configuration and orchestration.
//
// Configuration is flat `key = value` text, one entry per line, '#' starting
// a comment line. Keys are grouped by prefix:
//
//   network.file = polblogs.txt             # either a graph file ...
//   network.layer.1.model = er              # ... or generated layers (1-based)
//   network.layer.1.n = 10000
//   network.layer.1.mean = 1.5
//   network.layer.2.model = powerlaw
//   network.layer.2.n = 1500
//   network.layer.2.gamma = 2.1
//   network.layer.2.y_min = 1
//   network.inter.1.2.mean = 1.5
//   analysis.tau = 5
//   analysis.grid_step = 0.01
//   analysis.tie = 1=2                      # beta_1 = beta_2; groups separated by ';'
//   analysis.refine = 0                     # bisection tolerance, 0 = off
//   analysis.route = closed-form            # closed-form | measured | empirical
//   simulation.tau = 5
//   simulation.realizations = 100
//   simulation.max_steps = 100000
//   simulation.seed_policy = per-layer:1,1  # uniform:K | per-layer:K1,K2,.. | nodes:L:I,L:I,..
//   simulation.beta_grid = 0:0.3:0.05       # start:stop:step or a comma list
//   simulation.alpha_grid = 0,0.05,0.1
//   simulation.dynamics = 0.3:0.05;0.3:0.3  # beta:alpha settings
//   run.master_seed = 1
//   run.threads = 1
//   output.dir = results

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mdthresh/error.hpp"
#include "mdthresh/frontier.hpp"
#include "mdthresh/generators.hpp"
#include "mdthresh/io.hpp"
#include "mdthresh/sir.hpp"
#include "mdthresh/threshold.hpp"

namespace mdthresh {

inline constexpr std::string_view kVersion = "0.1.0";

using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || text.empty())
    throw Error(Errc::ConfigError, key + ": expected a number, got '" + text + "'");
  return v;
}

inline std::uint64_t to_uint(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  if (text.empty() || !parse_integer(std::string_view(text), v))
    throw Error(Errc::ConfigError, key + ": expected a non-negative integer, got '" + text + "'");
  return v;
}

}  // namespace detail

inline KeyValues parse_key_values(std::istream& in, std::string_view source = "<config>") {
  KeyValues kv;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    const auto where = std::string(source) + ":" + std::to_string(number);
    if (eq == std::string::npos) throw Error(Errc::ConfigError, where + ": expected 'key = value'");
    auto key = detail::trim(std::string_view(text).substr(0, eq));
    auto value = detail::trim(std::string_view(text).substr(eq + 1));
    if (key.empty()) throw Error(Errc::ConfigError, where + ": empty key");
    if (!kv.emplace(key, value).second) throw Error(Errc::ConfigError, where + ": duplicate key " + key);
  }
  return kv;
}

inline KeyValues load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigError, "cannot open config " + path);
  return parse_key_values(in, path);
}

// ---------------------------------------------------------------------------
// Value grammars shared by the config file and the CLI

/// "start:stop:step" (inclusive) or "v1,v2,...".
inline std::vector<double> parse_rate_grid(const std::string& key, const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = detail::split(text, ':');
    if (parts.size() != 3) throw Error(Errc::ConfigError, key + ": grid must be start:stop:step");
    const double start = detail::to_double(key, parts[0]);
    const double stop = detail::to_double(key, parts[1]);
    const double step = detail::to_double(key, parts[2]);
    if (!(step > 0.0) || stop < start) throw Error(Errc::ConfigError, key + ": empty or invalid grid");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t k = 0; k < count; ++k) out.push_back(snap_decimal(start + static_cast<double>(k) * step));
  } else {
    for (const auto& p : detail::split(text, ',')) out.push_back(detail::to_double(key, p));
  }
  for (double v : out)
    if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::ConfigError, key + ": rates must lie in [0,1]");
  return out;
}

/// "1=2" ties beta_1 and beta_2; "beta1=beta2", "b1=b2" and "β1=β2" are accepted,
/// groups are separated by ';' or ','. Returns zero-based color groups.
inline std::vector<std::vector<std::size_t>> parse_ties(const std::string& key, const std::string& text) {
  std::vector<std::vector<std::size_t>> ties;
  std::string normalized = text;
  std::replace(normalized.begin(), normalized.end(), ',', ';');
  for (const auto& group : detail::split(normalized, ';')) {
    if (group.empty()) continue;
    std::vector<std::size_t> colors;
    for (auto item : detail::split(group, '=')) {
      for (std::string_view prefix : {"beta_", "beta", "\xCE\xB2", "b"})
        if (item.rfind(prefix, 0) == 0) {
          item = item.substr(prefix.size());
          break;
        }
      const auto c = detail::to_uint(key, item);
      if (c < 1) throw Error(Errc::ConfigError, key + ": colors are numbered from 1");
      colors.push_back(static_cast<std::size_t>(c - 1));
    }
    if (colors.size() < 2) throw Error(Errc::ConfigError, key + ": a tie needs two colors");
    ties.push_back(std::move(colors));
  }
  return ties;
}

/// "uniform:K", "per-layer:K1,K2,..." or "nodes:L:I,L:I,..." (0-based layer and index).
inline SeedPolicy parse_seed_policy(const std::string& key, const std::string& text) {
  const auto colon = text.find(':');
  const auto kind = detail::trim(std::string_view(text).substr(0, colon));
  const std::string rest = colon == std::string::npos ? "" : detail::trim(std::string_view(text).substr(colon + 1));
  if (kind == "uniform") return UniformSeeds{rest.empty() ? 1 : static_cast<std::size_t>(detail::to_uint(key, rest))};
  if (kind == "per-layer") {
    PerLayerSeeds p;
    for (const auto& c : detail::split(rest, ',')) p.counts.push_back(static_cast<std::size_t>(detail::to_uint(key, c)));
    return p;
  }
  if (kind == "nodes") {
    ExplicitSeeds p;
    for (const auto& item : detail::split(rest, ',')) {
      const auto parts = detail::split(item, ':');
      if (parts.size() != 2) throw Error(Errc::ConfigError, key + ": node seeds are layer:index");
      p.nodes.push_back({static_cast<std::uint32_t>(detail::to_uint(key, parts[0])),
                         static_cast<NodeIndex>(detail::to_uint(key, parts[1]))});
    }
    return p;
  }
  throw Error(Errc::ConfigError, key + ": unknown seed policy '" + text + "'");
}

/// "beta:alpha;beta:alpha;..."
inline std::vector<DynamicsSetting> parse_settings(const std::string& key, const std::string& text) {
  std::vector<DynamicsSetting> out;
  for (const auto& item : detail::split(text, ';')) {
    if (item.empty()) continue;
    const auto parts = detail::split(item, ':');
    if (parts.size() != 2) throw Error(Errc::ConfigError, key + ": settings are beta:alpha pairs");
    DynamicsSetting s{detail::to_double(key, parts[0]), detail::to_double(key, parts[1])};
    if (!(s.beta >= 0.0 && s.beta <= 1.0 && s.alpha >= 0.0 && s.alpha <= 1.0))
      throw Error(Errc::ConfigError, key + ": rates must lie in [0,1]");
    out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment configuration

struct AnalysisConfig {
  int tau = 5;
  double grid_step = 0.01;
  std::vector<std::vector<std::size_t>> ties;
  double refine = 0.0;
  std::string route;  ///< empty: closed-form for two layers, empirical otherwise
};

struct SimulationConfig {
  int tau = 5;
  std::size_t realizations = 100;
  std::size_t max_steps = 100000;
  SeedPolicy seeds = UniformSeeds{1};
  std::vector<double> beta_grid{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  std::vector<double> alpha_grid{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  std::vector<DynamicsSetting> dynamics{{0.05, 0.05}, {0.05, 0.3}, {0.1, 0.1}, {0.3, 0.05}, {0.3, 0.3}, {0.1, 0.3}};
};

struct ExperimentConfig {
  std::optional<std::string> graph_file;
  std::optional<NetworkSpec> generator;
  AnalysisConfig analysis;
  SimulationConfig simulation;
  std::uint64_t master_seed = 0;
  unsigned threads = 1;
  std::string output_dir = "results";
  KeyValues source;  ///< the entries this config was parsed from, echoed into the manifest
};

namespace detail {

inline const std::set<std::string>& fixed_keys() {
  static const std::set<std::string> keys = {
      "network.file",          "analysis.tau",          "analysis.grid_step",     "analysis.tie",
      "analysis.refine",       "analysis.route",        "simulation.tau",         "simulation.realizations",
      "simulation.max_steps",  "simulation.seed_policy", "simulation.beta_grid",  "simulation.alpha_grid",
      "simulation.dynamics",   "run.master_seed",       "run.threads",            "output.dir"};
  return keys;
}

}  // namespace detail

/// Generator spec from network.layer.* / network.inter.* keys; nullopt when there are none.
/// Keys consumed are added to `used`.
inline std::optional<NetworkSpec> parse_network_spec(const KeyValues& kv, std::set<std::string>& used) {
  std::map<std::size_t, std::map<std::string, std::string>> layers;
  std::vector<std::pair<std::string, std::string>> inter;
  for (const auto& [key, value] : kv) {
    if (key.rfind("network.layer.", 0) == 0) {
      const auto parts = detail::split(std::string_view(key).substr(14), '.');
      if (parts.size() != 2) continue;
      std::size_t index = 0;
      if (!detail::parse_integer(std::string_view(parts[0]), index) || index < 1) continue;
      layers[index][parts[1]] = value;
      used.insert(key);
    } else if (key.rfind("network.inter.", 0) == 0) {
      inter.emplace_back(key, value);
    }
  }
  if (layers.empty() && inter.empty()) return std::nullopt;

  NetworkSpec spec;
  std::size_t expected = 1;
  for (const auto& [index, fields] : layers) {
    if (index != expected) throw Error(Errc::ConfigError, "network.layer indices must run 1.." + std::to_string(layers.size()));
    ++expected;
    const auto field = [&](const std::string& name) -> const std::string& {
      const auto it = fields.find(name);
      if (it == fields.end())
        throw Error(Errc::ConfigError, "network.layer." + std::to_string(index) + "." + name + " is required");
      return it->second;
    };
    const auto prefix = "network.layer." + std::to_string(index) + ".";
    const std::string model = fields.count("model") ? fields.at("model") : "er";
    const std::set<std::string> allowed = model == "er" ? std::set<std::string>{"model", "n", "mean"}
                                                        : std::set<std::string>{"model", "n", "gamma", "y_min"};
    for (const auto& [name, value] : fields)
      if (!allowed.count(name)) throw Error(Errc::ConfigError, "unknown key " + prefix + name);
    const auto n = detail::to_uint(prefix + "n", field("n"));
    if (model == "er") {
      spec.layers.emplace_back(ErLayerSpec{n, detail::to_double(prefix + "mean", field("mean"))});
    } else if (model == "powerlaw") {
      const auto y_min = fields.count("y_min") ? detail::to_uint(prefix + "y_min", fields.at("y_min")) : 1;
      spec.layers.emplace_back(PowerLawLayerSpec{detail::to_double(prefix + "gamma", field("gamma")), y_min, n});
    } else {
      throw Error(Errc::ConfigError, prefix + "model: unknown model '" + model + "'");
    }
  }
  for (const auto& [key, value] : inter) {
    const auto parts = detail::split(std::string_view(key).substr(14), '.');
    std::size_t a = 0;
    std::size_t b = 0;
    if (parts.size() != 3 || parts[2] != "mean" || !detail::parse_integer(std::string_view(parts[0]), a) ||
        !detail::parse_integer(std::string_view(parts[1]), b))
      throw Error(Errc::ConfigError, "unknown key " + key);
    if (a < 1 || b < 1 || a > spec.layers.size() || b > spec.layers.size() || a == b)
      throw Error(Errc::ConfigError, key + ": must join two distinct declared layers");
    spec.interconnections.push_back({a - 1, b - 1, detail::to_double(key, value)});
    used.insert(key);
  }
  return spec;
}

inline ExperimentConfig parse_experiment_config(const KeyValues& kv) {
  ExperimentConfig cfg;
  cfg.source = kv;
  std::set<std::string> used;
  const auto get = [&](const std::string& key) -> const std::string* {
    const auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    used.insert(key);
    return &it->second;
  };

  cfg.generator = parse_network_spec(kv, used);
  if (const auto* v = get("network.file")) cfg.graph_file = *v;

  if (const auto* v = get("analysis.tau")) cfg.analysis.tau = static_cast<int>(detail::to_uint("analysis.tau", *v));
  if (const auto* v = get("analysis.grid_step")) cfg.analysis.grid_step = detail::to_double("analysis.grid_step", *v);
  if (const auto* v = get("analysis.tie")) cfg.analysis.ties = parse_ties("analysis.tie", *v);
  if (const auto* v = get("analysis.refine")) cfg.analysis.refine = detail::to_double("analysis.refine", *v);
  if (const auto* v = get("analysis.route")) cfg.analysis.route = *v;
  if (const auto* v = get("simulation.tau")) cfg.simulation.tau = static_cast<int>(detail::to_uint("simulation.tau", *v));
  if (const auto* v = get("simulation.realizations"))
    cfg.simulation.realizations = static_cast<std::size_t>(detail::to_uint("simulation.realizations", *v));
  if (const auto* v = get("simulation.max_steps"))
    cfg.simulation.max_steps = static_cast<std::size_t>(detail::to_uint("simulation.max_steps", *v));
  if (const auto* v = get("simulation.seed_policy")) cfg.simulation.seeds = parse_seed_policy("simulation.seed_policy", *v);
  if (const auto* v = get("simulation.beta_grid")) cfg.simulation.beta_grid = parse_rate_grid("simulation.beta_grid", *v);
  if (const auto* v = get("simulation.alpha_grid")) cfg.simulation.alpha_grid = parse_rate_grid("simulation.alpha_grid", *v);
  if (const auto* v = get("simulation.dynamics")) cfg.simulation.dynamics = parse_settings("simulation.dynamics", *v);
  if (const auto* v = get("run.master_seed")) cfg.master_seed = detail::to_uint("run.master_seed", *v);
  if (const auto* v = get("run.threads")) cfg.threads = static_cast<unsigned>(detail::to_uint("run.threads", *v));
  if (const auto* v = get("output.dir")) cfg.output_dir = *v;

  std::vector<std::string> unknown;
  for (const auto& [key, value] : kv)
    if (!used.count(key)) unknown.push_back(key);
  if (!unknown.empty()) {
    std::string list;
    for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
    throw Error(Errc::ConfigError, "unknown key(s): " + list);
  }
  return cfg;
}

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.graph_file.has_value() == cfg.generator.has_value())
    throw Error(Errc::ConfigError, "exactly one network source required: network.file or network.layer.*");
  if (cfg.graph_file && !std::filesystem::exists(*cfg.graph_file))
    throw Error(Errc::ConfigError, "network.file does not exist: " + *cfg.graph_file);
  if (cfg.generator && cfg.generator->layers.empty())
    throw Error(Errc::ConfigError, "generator declares no layers");
  if (cfg.analysis.tau < 1 || cfg.simulation.tau < 1) throw Error(Errc::ConfigError, "tau must be at least 1");
  if (!(cfg.analysis.grid_step > 0.0 && cfg.analysis.grid_step <= 0.5))
    throw Error(Errc::ConfigError, "analysis.grid_step must lie in (0, 0.5]");
  if (cfg.analysis.refine < 0.0) throw Error(Errc::ConfigError, "analysis.refine must be non-negative");
  static const std::set<std::string> routes{"", "closed-form", "measured", "empirical"};
  if (!routes.count(cfg.analysis.route)) throw Error(Errc::ConfigError, "analysis.route: unknown route " + cfg.analysis.route);
  if (cfg.simulation.realizations < 1) throw Error(Errc::ConfigError, "simulation.realizations must be at least 1");
  if (cfg.threads < 1) throw Error(Errc::ConfigError, "run.threads must be at least 1");
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(load_key_values(path));
}

// ---------------------------------------------------------------------------
// Running

inline LayeredGraph materialize_network(const ExperimentConfig& cfg) {
  if (cfg.graph_file) return load_graph(*cfg.graph_file);
  if (!cfg.generator) throw Error(Errc::ConfigError, "no network source");
  return generate_network(*cfg.generator, derive_seed(cfg.master_seed, tag_id("network")));
}

/// Degree models implied by a generator spec: Poisson for ER layers and
/// interconnections, the truncated continuous power law for power-law layers.
inline MomentSet analytic_moments(const NetworkSpec& spec) {
  std::vector<std::size_t> sizes;
  for (const auto& l : spec.layers) sizes.push_back(static_cast<std::size_t>(layer_node_count(l)));
  const ColorTable table(sizes.size());
  std::vector<DegreeModel> models(table.count());
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    models[table.intra(i)] = std::visit(
        [](const auto& s) -> DegreeModel {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, ErLayerSpec>) {
            return er_degree_model(s.mean_degree);
          } else {
            const auto p = s.spec();
            return powerlaw_moments(p.gamma, p.y_min, p.y_max);
          }
        },
        spec.layers[i]);
  }
  for (const auto& inter : spec.interconnections)
    models[table.inter(inter.layer_a, inter.layer_b)] = er_degree_model(inter.mean_degree);
  return moments_from_models(sizes, models);
}

inline std::string resolved_route(const ExperimentConfig& cfg, std::size_t layers) {
  if (!cfg.analysis.route.empty()) return cfg.analysis.route;
  return layers == 2 ? "closed-form" : "empirical";
}

inline FrontierSet compute_frontier(const ExperimentConfig& cfg, const LayeredGraph& g) {
  FrontierOptions options;
  options.grid_step = cfg.analysis.grid_step;
  options.ties = cfg.analysis.ties;
  options.refine_tolerance = cfg.analysis.refine;
  options.threads = cfg.threads;
  const auto route = resolved_route(cfg, g.layer_count());
  const int tau = cfg.analysis.tau;
  if (route == "empirical") {
    (void)jacobian_empirical(g, Transmissibilities::uniform(g.color_count(), 1.0));
    return multi_threshold([&](const RateTuple& r) { return epidemic_indicator_empirical(g, r, tau).theta; },
                           g.color_count(), options);
  }
  const auto moments = (route == "closed-form" && cfg.generator) ? analytic_moments(*cfg.generator) : compute_moments(g);
  return multi_threshold(moments, g.layer_sizes(), tau, options);
}

inline SirConfig sir_config(const ExperimentConfig& cfg, const LayeredGraph& g) {
  SirConfig s;
  s.rates = RateTuple(std::vector<double>(g.color_count(), 0.0));
  s.tau = cfg.simulation.tau;
  s.seeds = cfg.simulation.seeds;
  s.max_steps = cfg.simulation.max_steps;
  s.realizations = cfg.simulation.realizations;
  s.master_seed = derive_seed(cfg.master_seed, tag_id("simulation"));
  return s;
}

inline void write_manifest(std::ostream& out, const ExperimentConfig& cfg) {
  out << "# mdthresh experiment manifest\n";
  out << "version = " << kVersion << '\n';
  out << "master_seed = " << cfg.master_seed << '\n';
  for (const auto& [key, value] : cfg.source) out << "config." << key << " = " << value << '\n';
  out << "files = frontier.csv sweep.csv dynamics.csv dynamics_cumulative.csv\n";
}

struct ExperimentOutputs {
  std::filesystem::path directory;
  std::vector<std::filesystem::path> files;
};

/// Writes frontier.csv, sweep.csv, dynamics.csv, dynamics_cumulative.csv and
/// manifest.txt into the output directory. Identical configs give identical files.
inline ExperimentOutputs run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto g = materialize_network(cfg);
  const auto frontier = compute_frontier(cfg, g);
  const auto sir = sir_config(cfg, g);
  const auto heatmap = sweep_heatmap(g, cfg.simulation.beta_grid, cfg.simulation.alpha_grid, sir, cfg.threads);
  const auto series = dynamics(g, cfg.simulation.dynamics, sir, cfg.threads);

  ExperimentOutputs out;
  out.directory = cfg.output_dir;
  std::filesystem::create_directories(out.directory);
  const std::string manifest = "manifest.txt";
  const auto open = [&](const std::string& name) {
    out.files.push_back(out.directory / name);
    std::ofstream f(out.files.back(), std::ios::binary);
    if (!f) throw Error(Errc::ConfigError, "cannot write " + out.files.back().string());
    return f;
  };
  {
    auto f = open("frontier.csv");
    write_frontier_csv(f, frontier, g.color_count(), manifest);
  }
  {
    auto f = open("sweep.csv");
    write_sweep_csv(f, heatmap, g.layer_count(), manifest);
  }
  {
    auto f = open("dynamics.csv");
    write_dynamics_csv(f, series, g.layer_count(), false, manifest);
  }
  {
    auto f = open("dynamics_cumulative.csv");
    write_dynamics_csv(f, series, g.layer_count(), true, manifest);
  }
  {
    auto f = open(manifest);
    write_manifest(f, cfg);
  }
  return out;
}

}  // namespace mdthresh
