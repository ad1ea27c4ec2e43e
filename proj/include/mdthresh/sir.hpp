#pragma once

// Discrete-time SIR on a colored graph.
//
// Synchronous updates: during step t every infected node tries once to infect
// each susceptible neighbour, succeeding with the rate of the connecting
// edge's color. A node infected at step t transmits during steps t..t+tau-1
// and is recovered from t+tau on, so each edge gets exactly tau attempts.
// Nodes reached by several successful attempts in one step are infected once.
//
// The seed set comes from an Rng keyed by (master seed, cell, realization);
// the attempt of arc a at offset k after its source's infection succeeds iff
// counter_uniform(key, a, k) < rate. Runs are reproducible in any execution
// order, and raising a rate with the key fixed can only enlarge the infected set.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "mdthresh/error.hpp"
#include "mdthresh/graph.hpp"
#include "mdthresh/parallel.hpp"
#include "mdthresh/rng.hpp"
#include "mdthresh/threshold.hpp"

namespace mdthresh {

struct UniformSeeds {
  std::size_t count = 1;
};
struct PerLayerSeeds {
  std::vector<std::size_t> counts;
};
struct ExplicitSeeds {
  std::vector<NodeId> nodes;
};
using SeedPolicy = std::variant<UniformSeeds, PerLayerSeeds, ExplicitSeeds>;

struct SirConfig {
  RateTuple rates;
  int tau = 5;
  SeedPolicy seeds = UniformSeeds{1};
  std::size_t max_steps = 100000;
  std::size_t realizations = 100;
  std::uint64_t master_seed = 0;
};

inline void validate(const SirConfig& cfg, const LayeredGraph& g) {
  if (cfg.rates.size() != g.color_count())
    throw Error(Errc::LengthMismatch, "expected " + std::to_string(g.color_count()) + " rates, got " +
                                          std::to_string(cfg.rates.size()));
  if (cfg.tau < 1) throw Error(Errc::ConfigError, "tau must be at least 1");
  if (cfg.realizations < 1) throw Error(Errc::ConfigError, "realizations must be at least 1");
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, UniformSeeds>) {
          if (p.count < 1 || p.count > g.node_count())
            throw Error(Errc::ConfigError, "seed count must lie in [1, n]");
        } else if constexpr (std::is_same_v<T, PerLayerSeeds>) {
          if (p.counts.size() != g.layer_count())
            throw Error(Errc::ConfigError, "per-layer seeding needs one count per layer");
          std::size_t total = 0;
          for (std::size_t l = 0; l < p.counts.size(); ++l) {
            if (p.counts[l] > g.layer_size(l))
              throw Error(Errc::ConfigError, "more seeds than nodes in layer " + std::to_string(l));
            total += p.counts[l];
          }
          if (total < 1) throw Error(Errc::ConfigError, "at least one seed required");
        } else {
          if (p.nodes.empty()) throw Error(Errc::ConfigError, "at least one seed required");
          for (const auto& id : p.nodes)
            if (id.layer >= g.layer_count() || id.index >= g.layer_size(id.layer))
              throw Error(Errc::UnknownNode, "seed node " + std::to_string(id.layer) + ":" +
                                                 std::to_string(id.index) + " does not exist");
        }
      },
      cfg.seeds);
}

/// One realization. Step-indexed series hold one entry per time point
/// 0..steps_run; column L of each row is the whole network.
struct SimSummary {
  std::size_t layers = 0;
  std::size_t steps_run = 0;
  bool capped = false;                         ///< stopped by max_steps with infections left
  std::vector<std::uint32_t> infected;         ///< (steps_run + 1) x (layers + 1), currently infected
  std::vector<std::uint32_t> cumulative;       ///< same shape, ever infected so far
  std::vector<std::uint8_t> ever_infected;     ///< per node
  std::vector<std::size_t> ever_per_layer;
  std::size_t ever_total = 0;
  std::vector<std::int64_t> infected_via_arc;  ///< arc that transmitted to each node, -1 for seeds/untouched

  std::size_t points() const noexcept { return steps_run + 1; }
  std::uint32_t infected_at(std::size_t step, std::size_t column) const {
    return infected[step * (layers + 1) + column];
  }
  std::uint32_t cumulative_at(std::size_t step, std::size_t column) const {
    return cumulative[step * (layers + 1) + column];
  }

  friend bool operator==(const SimSummary&, const SimSummary&) = default;
};

inline std::vector<NodeIndex> choose_seeds(const LayeredGraph& g, const SeedPolicy& policy, Rng& rng) {
  std::vector<NodeIndex> seeds;
  const auto pick = [&](std::size_t first, std::size_t size, std::size_t count) {
    // Partial Fisher-Yates over the index range, through a sparse swap map.
    std::unordered_map<std::size_t, std::size_t> swapped;
    const auto at = [&](std::size_t i) {
      const auto it = swapped.find(i);
      return it == swapped.end() ? i : it->second;
    };
    for (std::size_t i = 0; i < count; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(size - i));
      const auto vi = at(i);
      const auto vj = at(j);
      swapped[j] = vi;
      swapped[i] = vj;
      seeds.push_back(static_cast<NodeIndex>(first + vj));
    }
  };
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, UniformSeeds>) {
          pick(0, g.node_count(), p.count);
        } else if constexpr (std::is_same_v<T, PerLayerSeeds>) {
          for (std::size_t l = 0; l < p.counts.size(); ++l) pick(g.layer_offset(l), g.layer_size(l), p.counts[l]);
        } else {
          for (const auto& id : p.nodes) seeds.push_back(g.flat(id));
        }
      },
      policy);
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  return seeds;
}

inline std::uint64_t realization_key(std::uint64_t master_seed, std::uint64_t cell, std::uint64_t realization) {
  return derive_seed(master_seed, cell, realization);
}

/// Runs one realization; deterministic in (graph, cfg, cell_index, realization_index).
inline SimSummary run_sir(const LayeredGraph& g, const SirConfig& cfg, std::uint64_t realization_index,
                          std::uint64_t cell_index = 0) {
  validate(cfg, g);
  const std::uint64_t key = realization_key(cfg.master_seed, cell_index, realization_index);
  Rng rng(derive_seed(key, tag_id("seeds")));
  const auto seeds = choose_seeds(g, cfg.seeds, rng);

  const std::size_t n = g.node_count();
  const std::size_t columns = g.layer_count() + 1;
  const auto tau = static_cast<std::int64_t>(cfg.tau);
  const auto rates = cfg.rates.values();

  SimSummary s;
  s.layers = g.layer_count();
  s.ever_infected.assign(n, 0);
  s.ever_per_layer.assign(s.layers, 0);
  s.infected_via_arc.assign(n, -1);
  std::vector<std::int64_t> infected_at(n, -1);

  std::vector<NodeIndex> active;
  std::vector<std::uint32_t> current(columns, 0);
  const auto infect = [&](NodeIndex v, std::int64_t time) {
    infected_at[v] = time;
    s.ever_infected[v] = 1;
    ++s.ever_per_layer[g.layer_of(v)];
    ++s.ever_total;
  };
  for (auto v : seeds) {
    infect(v, 0);
    active.push_back(v);
  }
  const auto record = [&] {
    std::fill(current.begin(), current.end(), 0);
    for (auto v : active) ++current[g.layer_of(v)];
    current[s.layers] = static_cast<std::uint32_t>(active.size());
    s.infected.insert(s.infected.end(), current.begin(), current.end());
    for (std::size_t l = 0; l < s.layers; ++l) s.cumulative.push_back(static_cast<std::uint32_t>(s.ever_per_layer[l]));
    s.cumulative.push_back(static_cast<std::uint32_t>(s.ever_total));
  };
  record();

  std::int64_t t = 0;
  std::vector<NodeIndex> fresh;
  while (!active.empty() && static_cast<std::size_t>(t) < cfg.max_steps) {
    fresh.clear();
    for (auto u : active) {
      const auto offset = static_cast<std::uint64_t>(t - infected_at[u]);
      const auto arcs = g.neighbors(u);
      const auto base = g.first_arc(u);
      for (std::size_t k = 0; k < arcs.size(); ++k) {
        const auto v = arcs[k].target;
        if (infected_at[v] != -1) continue;
        const double rate = rates[arcs[k].color];
        if (rate <= 0.0) continue;
        if (counter_uniform(key, base + k, offset) < rate) {
          infect(v, t + 1);
          s.infected_via_arc[v] = static_cast<std::int64_t>(base + k);
          fresh.push_back(v);
        }
      }
    }
    ++t;
    std::erase_if(active, [&](NodeIndex u) { return infected_at[u] + tau <= t; });
    active.insert(active.end(), fresh.begin(), fresh.end());
    record();
  }
  s.steps_run = static_cast<std::size_t>(t);
  s.capped = !active.empty();
  return s;
}

// ---------------------------------------------------------------------------
// Densities

/// Structural giant-component sizes: per layer (intra edges only) and whole network.
struct GccSizes {
  std::vector<std::size_t> per_layer;
  std::size_t whole = 0;
};

inline GccSizes gcc_sizes(const LayeredGraph& g) {
  GccSizes out;
  for (std::size_t l = 0; l < g.layer_count(); ++l) {
    const auto comps = giant_component(g, color_mask(g, g.colors().intra(l)));
    out.per_layer.push_back(g.edge_count(g.colors().intra(l)) == 0 ? 0 : comps.largest_per_layer[l]);
  }
  out.whole = g.edges().empty() ? 0 : giant_component(g).largest;
  return out;
}

struct Densities {
  std::vector<double> per_layer;
  double whole = 0.0;
  bool exceeds_one = false;  ///< infection reached more nodes than the giant component holds
};

inline Densities infection_density(const SimSummary& s, const GccSizes& gcc) {
  Densities d;
  for (std::size_t l = 0; l < gcc.per_layer.size(); ++l) {
    if (gcc.per_layer[l] == 0) throw Error(Errc::ZeroGcc, "layer " + std::to_string(l) + " has no edges");
    d.per_layer.push_back(static_cast<double>(s.ever_per_layer.at(l)) / static_cast<double>(gcc.per_layer[l]));
  }
  if (gcc.whole == 0) throw Error(Errc::ZeroGcc, "network has no edges");
  d.whole = static_cast<double>(s.ever_total) / static_cast<double>(gcc.whole);
  d.exceeds_one = d.whole > 1.0 ||
                  std::any_of(d.per_layer.begin(), d.per_layer.end(), [](double x) { return x > 1.0; });
  return d;
}

inline Densities infection_density(const SimSummary& s, const LayeredGraph& g) {
  return infection_density(s, gcc_sizes(g));
}

// ---------------------------------------------------------------------------
// Sweeps

/// Intra-layer colors get beta, inter-layer colors alpha.
inline RateTuple intra_inter_rates(const ColorTable& table, double beta, double alpha) {
  std::vector<double> r(table.count());
  for (Color c = 0; c < r.size(); ++c) r[c] = table.is_intra(c) ? beta : alpha;
  return RateTuple(std::move(r));
}

struct HeatmapCell {
  double beta = 0.0;
  double alpha = 0.0;
  std::vector<double> density_per_layer;  ///< mean over realizations
  double density_whole = 0.0;
  bool exceeds_one = false;
};

struct Heatmap {
  std::vector<double> betas;
  std::vector<double> alphas;
  std::vector<HeatmapCell> cells;  ///< beta-major

  const HeatmapCell& at(std::size_t bi, std::size_t ai) const { return cells.at(bi * alphas.size() + ai); }
};

/// Mean densities on every (beta, alpha) cell; cell i realization r runs with
/// key (master_seed, i, r). Realizations are reduced in index order.
inline Heatmap sweep_heatmap(const LayeredGraph& g, std::span<const double> beta_grid,
                             std::span<const double> alpha_grid, const SirConfig& cfg, unsigned threads = 1) {
  const auto gcc = gcc_sizes(g);
  for (std::size_t l = 0; l < gcc.per_layer.size(); ++l)
    if (gcc.per_layer[l] == 0) throw Error(Errc::ZeroGcc, "layer " + std::to_string(l) + " has no edges");
  if (gcc.whole == 0) throw Error(Errc::ZeroGcc, "network has no edges");

  Heatmap out;
  out.betas.assign(beta_grid.begin(), beta_grid.end());
  out.alphas.assign(alpha_grid.begin(), alpha_grid.end());
  const std::size_t cells = out.betas.size() * out.alphas.size();
  const std::size_t reps = cfg.realizations;
  std::vector<SirConfig> cell_cfg(cells, cfg);
  for (std::size_t i = 0; i < cells; ++i)
    cell_cfg[i].rates = intra_inter_rates(g.colors(), out.betas[i / out.alphas.size()], out.alphas[i % out.alphas.size()]);
  for (const auto& c : cell_cfg) validate(c, g);

  std::vector<Densities> runs(cells * reps);
  parallel_for(cells * reps, threads, [&](std::size_t job) {
    const auto cell = job / reps;
    const auto r = job % reps;
    runs[job] = infection_density(run_sir(g, cell_cfg[cell], r, cell), gcc);
  });

  out.cells.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    auto& cell = out.cells[i];
    cell.beta = out.betas[i / out.alphas.size()];
    cell.alpha = out.alphas[i % out.alphas.size()];
    cell.density_per_layer.assign(g.layer_count(), 0.0);
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& d = runs[i * reps + r];
      for (std::size_t l = 0; l < d.per_layer.size(); ++l) cell.density_per_layer[l] += d.per_layer[l];
      cell.density_whole += d.whole;
      cell.exceeds_one = cell.exceeds_one || d.exceeds_one;
    }
    for (auto& v : cell.density_per_layer) v /= static_cast<double>(reps);
    cell.density_whole /= static_cast<double>(reps);
  }
  return out;
}

struct DynamicsSetting {
  double beta = 0.0;
  double alpha = 0.0;
};

/// Mean series over realizations, zero-padded to the longest run.
/// Rows are time points; column L is the whole network.
struct DynamicsSeries {
  DynamicsSetting setting;
  std::size_t layers = 0;
  std::vector<double> mean_infected;
  std::vector<double> mean_cumulative;

  std::size_t points() const noexcept { return layers + 1 == 0 ? 0 : mean_infected.size() / (layers + 1); }
  double infected_at(std::size_t step, std::size_t column) const { return mean_infected[step * (layers + 1) + column]; }
  double cumulative_at(std::size_t step, std::size_t column) const {
    return mean_cumulative[step * (layers + 1) + column];
  }
};

inline std::vector<DynamicsSeries> dynamics(const LayeredGraph& g, std::span<const DynamicsSetting> settings,
                                            const SirConfig& cfg, unsigned threads = 1) {
  const std::size_t reps = cfg.realizations;
  const std::size_t columns = g.layer_count() + 1;
  std::vector<SirConfig> setting_cfg(settings.size(), cfg);
  for (std::size_t i = 0; i < settings.size(); ++i) {
    setting_cfg[i].rates = intra_inter_rates(g.colors(), settings[i].beta, settings[i].alpha);
    validate(setting_cfg[i], g);
  }
  std::vector<SimSummary> runs(settings.size() * reps);
  parallel_for(runs.size(), threads, [&](std::size_t job) {
    runs[job] = run_sir(g, setting_cfg[job / reps], job % reps, job / reps);
  });

  std::vector<DynamicsSeries> out(settings.size());
  for (std::size_t i = 0; i < settings.size(); ++i) {
    auto& series = out[i];
    series.setting = settings[i];
    series.layers = g.layer_count();
    std::size_t points = 0;
    for (std::size_t r = 0; r < reps; ++r) points = std::max(points, runs[i * reps + r].points());
    series.mean_infected.assign(points * columns, 0.0);
    series.mean_cumulative.assign(points * columns, 0.0);
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& s = runs[i * reps + r];
      for (std::size_t t = 0; t < points; ++t) {
        // Past its end a run has no infected nodes and a constant cumulative count.
        const auto src = std::min(t, s.points() - 1);
        for (std::size_t c = 0; c < columns; ++c) {
          series.mean_infected[t * columns + c] += t < s.points() ? s.infected_at(t, c) : 0.0;
          series.mean_cumulative[t * columns + c] += s.cumulative_at(src, c);
        }
      }
    }
    for (auto& v : series.mean_infected) v /= static_cast<double>(reps);
    for (auto& v : series.mean_cumulative) v /= static_cast<double>(reps);
  }
  return out;
}

}  // namespace mdthresh
