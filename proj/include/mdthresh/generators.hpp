#pragma once

// Random interdependent networks: G(n, m) layers and interconnections, and
// power-law layers wired by the configuration model.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "mdthresh/error.hpp"
#include "mdthresh/graph.hpp"
#include "mdthresh/rng.hpp"

namespace mdthresh {

/// Edge between two local node indices (same layer, or first in layer a and
/// second in layer b for an interconnection).
using LocalEdge = std::pair<NodeIndex, NodeIndex>;
using EdgeSet = std::vector<LocalEdge>;

struct PowerLawSpec {
  double gamma = 2.5;
  std::uint64_t y_min = 1;
  std::uint64_t n = 0;
  std::uint64_t y_max = 1;

  /// Spec with the natural cutoff y_max = floor(y_min * n^(1/(gamma-1))).
  static PowerLawSpec with_natural_cutoff(double gamma, std::uint64_t y_min, std::uint64_t n) {
    PowerLawSpec s{gamma, y_min, n, y_min};
    if (gamma > 1.0 && n > 0) {
      const double cutoff = static_cast<double>(y_min) * std::pow(static_cast<double>(n), 1.0 / (gamma - 1.0));
      s.y_max = static_cast<std::uint64_t>(std::floor(cutoff));
    }
    s.validate();
    return s;
  }

  /// The moment formulas need gamma > 1 for normalization.
  void validate() const {
    if (!(gamma > 1.0) || !std::isfinite(gamma))
      throw Error(Errc::DomainError, "power-law exponent must exceed 1, got " + std::to_string(gamma));
    if (y_min < 1) throw Error(Errc::DomainError, "y_min must be at least 1");
    if (y_max < y_min) throw Error(Errc::DomainError, "y_max must not be below y_min");
  }
};

namespace detail {

/// m distinct integers from [0, total), sorted (Floyd's algorithm).
inline std::vector<std::uint64_t> sample_distinct(std::uint64_t total, std::uint64_t m, Rng& rng) {
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(m) * 2);
  for (std::uint64_t j = total - m; j < total; ++j) {
    const auto t = rng.below(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

/// Index k of the strictly upper triangle of an n x n matrix, row-major, to (row, col).
inline LocalEdge decode_pair(std::uint64_t k, std::uint64_t n) {
  const double nd = static_cast<double>(n);
  auto row = static_cast<std::uint64_t>(
      std::floor(nd - 0.5 - std::sqrt((nd - 0.5) * (nd - 0.5) - 2.0 * static_cast<double>(k))));
  const auto row_start = [n](std::uint64_t r) { return r * (2 * n - r - 1) / 2; };
  while (row > 0 && row_start(row) > k) --row;
  while (row + 1 < n && row_start(row + 1) <= k) ++row;
  const auto col = row + 1 + (k - row_start(row));
  return {static_cast<NodeIndex>(row), static_cast<NodeIndex>(col)};
}

inline std::uint64_t edge_count_for(double mean_degree, double nodes) {
  return static_cast<std::uint64_t>(std::llround(mean_degree * nodes / 2.0));
}

}  // namespace detail

/// G(n, m) layer with m = round(n * mean_degree / 2) distinct node pairs.
inline EdgeSet gen_er_layer(std::uint64_t n, double mean_degree, std::uint64_t seed) {
  if (!(mean_degree >= 0.0)) throw Error(Errc::DomainError, "mean degree must be non-negative");
  const auto m = detail::edge_count_for(mean_degree, static_cast<double>(n));
  const std::uint64_t total = n < 2 ? 0 : n * (n - 1) / 2;
  if (m > total)
    throw Error(Errc::MeanDegreeTooLarge,
                std::to_string(m) + " edges requested but only " + std::to_string(total) + " pairs exist");
  Rng rng(seed);
  EdgeSet edges;
  edges.reserve(m);
  for (auto k : detail::sample_distinct(total, m, rng)) edges.push_back(detail::decode_pair(k, n));
  return edges;
}

/// Random bipartite interconnection with round(mean_degree * (n1 + n2) / 2)
/// distinct cross pairs, so that mean_degree is the mean over all n1 + n2 nodes.
inline EdgeSet gen_er_interlayer(std::uint64_t n1, std::uint64_t n2, double mean_degree, std::uint64_t seed) {
  if (!(mean_degree >= 0.0)) throw Error(Errc::DomainError, "mean degree must be non-negative");
  const auto m = detail::edge_count_for(mean_degree, static_cast<double>(n1 + n2));
  const std::uint64_t total = n1 * n2;
  if (m > total)
    throw Error(Errc::MeanDegreeTooLarge,
                std::to_string(m) + " edges requested but only " + std::to_string(total) + " pairs exist");
  Rng rng(seed);
  EdgeSet edges;
  edges.reserve(m);
  for (auto k : detail::sample_distinct(total, m, rng))
    edges.emplace_back(static_cast<NodeIndex>(k / n2), static_cast<NodeIndex>(k % n2));
  return edges;
}

/// Degree drawn from the continuous power law on [y_min, y_max] and rounded
/// to the nearest integer, which keeps the sample close to the continuous moments.
inline std::uint64_t sample_powerlaw_degree(const PowerLawSpec& spec, Rng& rng) {
  const double lo = static_cast<double>(spec.y_min);
  const double hi = static_cast<double>(spec.y_max);
  if (spec.y_max == spec.y_min) return spec.y_min;
  const double a = spec.gamma - 1.0;
  const double tail = std::pow(hi / lo, -a);
  const double x = lo * std::pow(1.0 - rng.uniform() * (1.0 - tail), -1.0 / a);
  const auto d = static_cast<std::uint64_t>(std::llround(x));
  return std::clamp(d, spec.y_min, spec.y_max);
}

inline std::vector<std::uint64_t> sample_powerlaw_sequence(const PowerLawSpec& spec, Rng& rng) {
  std::vector<std::uint64_t> degrees(spec.n);
  std::uint64_t sum = 0;
  for (auto& d : degrees) {
    d = sample_powerlaw_degree(spec, rng);
    sum += d;
  }
  if (sum % 2 == 1) {
    if (spec.y_min == spec.y_max)
      throw Error(Errc::WiringFailed, "constant odd degree sequence cannot be wired");
    const auto i = rng.below(spec.n);
    std::uint64_t d;
    do {
      d = sample_powerlaw_degree(spec, rng);
    } while ((d - degrees[i]) % 2 == 0);
    degrees[i] = d;
  }
  return degrees;
}

namespace detail {

inline std::uint64_t pair_key(NodeIndex a, NodeIndex b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t{a} << 32) | b;
}

/// Random stub matching followed by double-edge swaps that remove self-loops
/// and repeated pairs. Returns false if the swap budget runs out.
inline bool wire_configuration(const std::vector<std::uint64_t>& degrees, Rng& rng, EdgeSet& out) {
  std::vector<NodeIndex> stubs;
  for (std::size_t v = 0; v < degrees.size(); ++v)
    stubs.insert(stubs.end(), degrees[v], static_cast<NodeIndex>(v));
  rng.shuffle(stubs.begin(), stubs.end());
  const std::size_t m = stubs.size() / 2;
  EdgeSet edges(m);
  std::unordered_map<std::uint64_t, std::uint32_t> multiplicity;
  multiplicity.reserve(m * 2);
  for (std::size_t i = 0; i < m; ++i) {
    edges[i] = {stubs[2 * i], stubs[2 * i + 1]};
    ++multiplicity[pair_key(edges[i].first, edges[i].second)];
  }
  const auto is_bad = [&](const LocalEdge& e) {
    return e.first == e.second || multiplicity[pair_key(e.first, e.second)] > 1;
  };

  std::size_t budget = 200 * m + 10000;
  for (;;) {
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < m; ++i)
      if (is_bad(edges[i])) bad.push_back(i);
    if (bad.empty()) break;
    for (auto i : bad) {
      if (!is_bad(edges[i])) continue;
      while (budget > 0) {
        --budget;
        const auto j = static_cast<std::size_t>(rng.below(m));
        if (j == i) continue;
        auto [a, b] = edges[i];
        auto [c, d] = edges[j];
        if (rng.below(2) == 1) std::swap(c, d);
        // Proposed rewiring: (a,b),(c,d) -> (a,c),(b,d).
        if (a == c || b == d) continue;
        const auto ac = pair_key(a, c);
        const auto bd = pair_key(b, d);
        if (ac == bd) continue;
        if (multiplicity.count(ac) && multiplicity[ac] > 0) continue;
        if (multiplicity.count(bd) && multiplicity[bd] > 0) continue;
        --multiplicity[pair_key(a, b)];
        --multiplicity[pair_key(c, d)];
        ++multiplicity[ac];
        ++multiplicity[bd];
        edges[i] = {a, c};
        edges[j] = {b, d};
        break;
      }
      if (budget == 0) return false;
    }
  }
  for (auto& e : edges)
    if (e.first > e.second) std::swap(e.first, e.second);
  std::sort(edges.begin(), edges.end());
  out = std::move(edges);
  return true;
}

}  // namespace detail

/// Power-law layer: i.i.d. degrees with an even sum, wired into a simple graph.
inline EdgeSet gen_powerlaw_layer(const PowerLawSpec& spec, std::uint64_t seed, int attempts = 8) {
  spec.validate();
  if (spec.n > 0 && spec.y_max >= spec.n)
    throw Error(Errc::WiringFailed, "y_max must be below the node count for a simple graph");
  Rng rng(seed);
  const auto degrees = sample_powerlaw_sequence(spec, rng);
  EdgeSet edges;
  for (int attempt = 0; attempt < attempts; ++attempt)
    if (detail::wire_configuration(degrees, rng, edges)) return edges;
  throw Error(Errc::WiringFailed, "configuration model did not reach a simple graph after " +
                                      std::to_string(attempts) + " attempts");
}

// ---------------------------------------------------------------------------
// Whole networks

struct ErLayerSpec {
  std::uint64_t n = 0;
  double mean_degree = 0.0;
};

struct PowerLawLayerSpec {
  double gamma = 2.5;
  std::uint64_t y_min = 1;
  std::uint64_t n = 0;

  PowerLawSpec spec() const { return PowerLawSpec::with_natural_cutoff(gamma, y_min, n); }
};

using LayerSpec = std::variant<ErLayerSpec, PowerLawLayerSpec>;

inline std::uint64_t layer_node_count(const LayerSpec& s) {
  return std::visit([](const auto& v) { return v.n; }, s);
}

struct InterSpec {
  std::size_t layer_a = 0;
  std::size_t layer_b = 1;
  double mean_degree = 0.0;
};

struct NetworkSpec {
  std::vector<LayerSpec> layers;
  std::vector<InterSpec> interconnections;
};

/// Generates every layer and interconnection from its own child seed of master_seed.
inline LayeredGraph generate_network(const NetworkSpec& spec, std::uint64_t master_seed) {
  std::vector<std::size_t> sizes;
  for (const auto& l : spec.layers) sizes.push_back(static_cast<std::size_t>(layer_node_count(l)));
  const ColorTable table(sizes.size());
  std::vector<ColoredEdge> edges;

  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto seed = derive_seed(master_seed, tag_id("layer"), i);
    const EdgeSet local = std::visit(
        [&](const auto& s) -> EdgeSet {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, ErLayerSpec>)
            return gen_er_layer(s.n, s.mean_degree, seed);
          else
            return gen_powerlaw_layer(s.spec(), seed);
        },
        spec.layers[i]);
    const auto l = static_cast<std::uint32_t>(i);
    for (const auto& [a, b] : local) edges.push_back({{l, a}, {l, b}, table.intra(i)});
  }
  for (const auto& inter : spec.interconnections) {
    if (inter.layer_a >= sizes.size() || inter.layer_b >= sizes.size() || inter.layer_a == inter.layer_b)
      throw Error(Errc::UnknownNode, "interconnection must join two distinct declared layers");
    const auto c = table.inter(inter.layer_a, inter.layer_b);
    const auto seed = derive_seed(master_seed, tag_id("inter"), c);
    const auto la = static_cast<std::uint32_t>(inter.layer_a);
    const auto lb = static_cast<std::uint32_t>(inter.layer_b);
    for (const auto& [a, b] : gen_er_interlayer(sizes[la], sizes[lb], inter.mean_degree, seed))
      edges.push_back({{la, a}, {lb, b}, c});
  }
  return build_graph(std::move(sizes), std::span<const ColoredEdge>(edges));
}

}  // namespace mdthresh
