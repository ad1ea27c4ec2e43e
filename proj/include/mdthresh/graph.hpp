#pragma once

// Disjoint interdependent networks as a single graph with colored edges.
//
// Layers 0..L-1 hold disjoint node sets. Every edge carries exactly one
// color determined by the layers of its endpoints: color i for edges inside
// layer i, and color L + pair_index(i, j) for edges between layers i < j,
// pairs enumerated lexicographically. Two layers therefore give colors
// {0: layer 0, 1: layer 1, 2: between}.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mdthresh/error.hpp"
#include "mdthresh/matrix.hpp"

namespace mdthresh {

using Color = std::uint32_t;
using NodeIndex = std::uint32_t;

struct NodeId {
  std::uint32_t layer = 0;
  NodeIndex index = 0;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

struct ColoredEdge {
  NodeId u;
  NodeId v;
  Color color = 0;
};

/// Edge between flat node ids, normalized so that u < v.
struct Edge {
  NodeIndex u = 0;
  NodeIndex v = 0;
  Color color = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct Arc {
  NodeIndex target = 0;
  Color color = 0;
};

class ColorTable {
 public:
  ColorTable() = default;
  explicit ColorTable(std::size_t layers) : layers_(layers) {}

  std::size_t layer_count() const noexcept { return layers_; }
  std::size_t count() const noexcept { return layers_ + layers_ * (layers_ - 1) / 2; }

  Color intra(std::size_t layer) const noexcept { return static_cast<Color>(layer); }

  Color inter(std::size_t a, std::size_t b) const noexcept {
    if (a > b) std::swap(a, b);
    const std::size_t offset = a * layers_ - a * (a + 1) / 2 + (b - a - 1);
    return static_cast<Color>(layers_ + offset);
  }

  Color between(std::size_t a, std::size_t b) const noexcept {
    return a == b ? intra(a) : inter(a, b);
  }

  bool is_intra(Color c) const noexcept { return c < layers_; }

  /// Layers joined by color c; equal for an intra-layer color.
  std::pair<std::size_t, std::size_t> endpoints(Color c) const noexcept {
    if (c < layers_) return {c, c};
    std::size_t rest = c - layers_;
    for (std::size_t a = 0; a + 1 < layers_; ++a) {
      const std::size_t row = layers_ - a - 1;
      if (rest < row) return {a, a + 1 + rest};
      rest -= row;
    }
    return {layers_, layers_};
  }

  friend bool operator==(const ColorTable&, const ColorTable&) = default;

 private:
  std::size_t layers_ = 0;
};

/// Immutable validated colored graph. Construct through build_graph.
class LayeredGraph {
 public:
  std::size_t node_count() const noexcept { return layer_of_.size(); }
  std::size_t layer_count() const noexcept { return layer_sizes_.size(); }
  std::size_t color_count() const noexcept { return colors_.count(); }
  const ColorTable& colors() const noexcept { return colors_; }

  std::span<const std::size_t> layer_sizes() const noexcept { return layer_sizes_; }
  std::size_t layer_size(std::size_t layer) const { return layer_sizes_.at(layer); }
  std::size_t layer_offset(std::size_t layer) const { return layer_offsets_.at(layer); }

  NodeIndex flat(NodeId id) const noexcept {
    return static_cast<NodeIndex>(layer_offsets_[id.layer] + id.index);
  }
  NodeId node(NodeIndex v) const noexcept {
    const auto layer = layer_of_[v];
    return {layer, static_cast<NodeIndex>(v - layer_offsets_[layer])};
  }
  std::uint32_t layer_of(NodeIndex v) const noexcept { return layer_of_[v]; }

  std::span<const Edge> edges() const noexcept { return edges_; }
  std::size_t edge_count(Color c) const { return color_edge_counts_.at(c); }

  /// All arcs leaving v, grouped by color.
  std::span<const Arc> neighbors(NodeIndex v) const noexcept {
    const auto first = arc_begin_[std::size_t{v} * color_count()];
    const auto last = arc_begin_[(std::size_t{v} + 1) * color_count()];
    return {arcs_.data() + first, last - first};
  }
  std::span<const Arc> neighbors(NodeIndex v, Color c) const noexcept {
    const auto slot = std::size_t{v} * color_count() + c;
    return {arcs_.data() + arc_begin_[slot], arc_begin_[slot + 1] - arc_begin_[slot]};
  }
  /// Global position of v's first arc; arc ids are stable keys for random draws.
  std::size_t first_arc(NodeIndex v) const noexcept {
    return arc_begin_[std::size_t{v} * color_count()];
  }
  std::size_t arc_count() const noexcept { return arcs_.size(); }

  std::size_t degree(NodeIndex v) const noexcept { return neighbors(v).size(); }
  std::size_t degree(NodeIndex v, Color c) const noexcept { return neighbors(v, c).size(); }

  friend bool operator==(const LayeredGraph& a, const LayeredGraph& b) {
    return a.layer_sizes_ == b.layer_sizes_ && a.edges_ == b.edges_;
  }

 private:
  friend LayeredGraph build_graph(std::vector<std::size_t>, std::span<const ColoredEdge>);

  std::vector<std::size_t> layer_sizes_;
  std::vector<std::size_t> layer_offsets_;
  std::vector<std::uint32_t> layer_of_;
  ColorTable colors_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> color_edge_counts_;
  std::vector<std::size_t> arc_begin_;
  std::vector<Arc> arcs_;
};

inline LayeredGraph build_graph(std::vector<std::size_t> layer_sizes,
                                std::span<const ColoredEdge> edges) {
  if (layer_sizes.empty()) throw Error(Errc::UnknownNode, "graph must declare at least one layer");

  LayeredGraph g;
  g.colors_ = ColorTable(layer_sizes.size());
  g.layer_offsets_.resize(layer_sizes.size());
  std::size_t n = 0;
  for (std::size_t i = 0; i < layer_sizes.size(); ++i) {
    g.layer_offsets_[i] = n;
    n += layer_sizes[i];
  }
  if (n > std::size_t{UINT32_MAX}) throw Error(Errc::UnknownNode, "too many nodes");
  g.layer_of_.resize(n);
  for (std::size_t i = 0; i < layer_sizes.size(); ++i)
    std::fill_n(g.layer_of_.begin() + static_cast<std::ptrdiff_t>(g.layer_offsets_[i]),
                layer_sizes[i], static_cast<std::uint32_t>(i));
  g.layer_sizes_ = std::move(layer_sizes);

  const auto describe = [](const ColoredEdge& e) {
    return "(" + std::to_string(e.u.layer) + ":" + std::to_string(e.u.index) + ", " +
           std::to_string(e.v.layer) + ":" + std::to_string(e.v.index) + ", color " +
           std::to_string(e.color) + ")";
  };
  const auto known = [&](NodeId id) {
    return id.layer < g.layer_sizes_.size() && id.index < g.layer_sizes_[id.layer];
  };

  const std::size_t colors = g.colors_.count();
  g.edges_.reserve(edges.size());
  for (const auto& e : edges) {
    if (!known(e.u) || !known(e.v)) throw Error(Errc::UnknownNode, "edge " + describe(e));
    if (e.u == e.v) throw Error(Errc::SelfLoop, "edge " + describe(e));
    if (e.color >= colors || e.color != g.colors_.between(e.u.layer, e.v.layer))
      throw Error(Errc::CrossLayerColorMismatch, "edge " + describe(e));
    auto a = g.flat(e.u);
    auto b = g.flat(e.v);
    if (a > b) std::swap(a, b);
    g.edges_.push_back({a, b, e.color});
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  const auto dup = std::adjacent_find(g.edges_.begin(), g.edges_.end(), [](const Edge& x, const Edge& y) {
    return x.u == y.u && x.v == y.v;
  });
  if (dup != g.edges_.end()) {
    const auto u = g.node(dup->u);
    const auto v = g.node(dup->v);
    throw Error(Errc::DuplicateEdge, "edge " + describe({u, v, dup->color}));
  }

  g.color_edge_counts_.assign(colors, 0);
  g.arc_begin_.assign(n * colors + 1, 0);
  for (const auto& e : g.edges_) {
    ++g.color_edge_counts_[e.color];
    ++g.arc_begin_[std::size_t{e.u} * colors + e.color + 1];
    ++g.arc_begin_[std::size_t{e.v} * colors + e.color + 1];
  }
  std::partial_sum(g.arc_begin_.begin(), g.arc_begin_.end(), g.arc_begin_.begin());
  g.arcs_.resize(2 * g.edges_.size());
  std::vector<std::size_t> cursor(g.arc_begin_.begin(), g.arc_begin_.end() - 1);
  // Edges are sorted, so each (node, color) slot ends up ordered by target.
  for (const auto& e : g.edges_) {
    g.arcs_[cursor[std::size_t{e.u} * colors + e.color]++] = {e.v, e.color};
  }
  for (const auto& e : g.edges_) {
    g.arcs_[cursor[std::size_t{e.v} * colors + e.color]++] = {e.u, e.color};
  }
  for (std::size_t slot = 0; slot + 1 < g.arc_begin_.size(); ++slot) {
    std::sort(g.arcs_.begin() + static_cast<std::ptrdiff_t>(g.arc_begin_[slot]),
              g.arcs_.begin() + static_cast<std::ptrdiff_t>(g.arc_begin_[slot + 1]),
              [](const Arc& x, const Arc& y) { return x.target < y.target; });
  }
  return g;
}

inline LayeredGraph build_graph(std::vector<std::size_t> layer_sizes,
                                const std::vector<ColoredEdge>& edges) {
  return build_graph(std::move(layer_sizes), std::span<const ColoredEdge>(edges));
}

/// Builds a graph whose edge colors are inferred from endpoint layers.
inline LayeredGraph build_graph_inferred(std::vector<std::size_t> layer_sizes,
                                         std::span<const std::pair<NodeId, NodeId>> pairs) {
  const ColorTable table(layer_sizes.size());
  std::vector<ColoredEdge> edges;
  edges.reserve(pairs.size());
  for (const auto& [u, v] : pairs) {
    const bool ok = u.layer < table.layer_count() && v.layer < table.layer_count();
    edges.push_back({u, v, ok ? table.between(u.layer, v.layer) : Color{0}});
  }
  return build_graph(std::move(layer_sizes), std::span<const ColoredEdge>(edges));
}

// ---------------------------------------------------------------------------
// Degree moments

struct ColorMoments {
  double mean_restricted = 0.0;    ///< <y_c>, over nodes of the incident layer(s)
  double second_restricted = 0.0;  ///< <y_c^2>
  double mean_global = 0.0;        ///< <x_c>, over all nodes
  double second_global = 0.0;      ///< <x_c^2>
  std::size_t population_restricted = 0;
};

struct MomentSet {
  std::vector<ColorMoments> colors;
  std::size_t population_global = 0;
};

inline std::size_t color_population(const ColorTable& table, std::span<const std::size_t> sizes,
                                    Color c) {
  const auto [a, b] = table.endpoints(c);
  return a == b ? sizes[a] : sizes[a] + sizes[b];
}

inline MomentSet compute_moments(const LayeredGraph& g) {
  const std::size_t colors = g.color_count();
  std::vector<double> sum(colors, 0.0);
  std::vector<double> sum_sq(colors, 0.0);
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    for (Color c = 0; c < colors; ++c) {
      const auto d = static_cast<double>(g.degree(v, c));
      sum[c] += d;
      sum_sq[c] += d * d;
    }
  }
  MomentSet m;
  m.population_global = g.node_count();
  m.colors.resize(colors);
  const auto n = static_cast<double>(g.node_count());
  for (Color c = 0; c < colors; ++c) {
    auto& cm = m.colors[c];
    cm.population_restricted = color_population(g.colors(), g.layer_sizes(), c);
    const auto pop = static_cast<double>(cm.population_restricted);
    if (pop > 0) {
      cm.mean_restricted = sum[c] / pop;
      cm.second_restricted = sum_sq[c] / pop;
    }
    if (n > 0) {
      cm.mean_global = sum[c] / n;
      cm.second_global = sum_sq[c] / n;
    }
  }
  return m;
}

/// Matrix of <x_i x_j> over all nodes; the diagonal holds <x_i^2>.
inline SquareMatrix colored_cross_moments(const LayeredGraph& g) {
  const std::size_t colors = g.color_count();
  SquareMatrix out(colors);
  std::vector<double> d(colors);
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    for (Color c = 0; c < colors; ++c) d[c] = static_cast<double>(g.degree(v, c));
    for (std::size_t i = 0; i < colors; ++i)
      for (std::size_t j = 0; j < colors; ++j) out(i, j) += d[i] * d[j];
  }
  const auto n = static_cast<double>(g.node_count());
  if (n > 0)
    for (std::size_t i = 0; i < colors; ++i)
      for (std::size_t j = 0; j < colors; ++j) out(i, j) /= n;
  return out;
}

// ---------------------------------------------------------------------------
// Kappa

/// Whole coupled network (all colors), or one layer's internal edges only.
struct KappaScope {
  std::optional<std::size_t> layer;

  static KappaScope whole() { return {}; }
  static KappaScope single_layer(std::size_t l) { return {l}; }
};

/// <k^2>/<k>: mean degree seen from a uniformly chosen edge endpoint.
inline double kappa(const LayeredGraph& g, KappaScope scope = KappaScope::whole()) {
  double sum = 0.0;
  double sum_sq = 0.0;
  if (scope.layer) {
    const auto layer = *scope.layer;
    if (layer >= g.layer_count()) throw Error(Errc::UnknownNode, "no layer " + std::to_string(layer));
    const auto c = g.colors().intra(layer);
    const auto first = static_cast<NodeIndex>(g.layer_offset(layer));
    for (NodeIndex v = first; v < first + g.layer_size(layer); ++v) {
      const auto d = static_cast<double>(g.degree(v, c));
      sum += d;
      sum_sq += d * d;
    }
  } else {
    for (NodeIndex v = 0; v < g.node_count(); ++v) {
      const auto d = static_cast<double>(g.degree(v));
      sum += d;
      sum_sq += d * d;
    }
  }
  if (sum == 0.0) throw Error(Errc::NoEdgesInScope, "kappa is undefined without edges");
  return sum_sq / sum;
}

// ---------------------------------------------------------------------------
// Connected components

using EdgeMask = std::vector<bool>;

inline EdgeMask full_mask(const LayeredGraph& g) { return EdgeMask(g.edges().size(), true); }

inline EdgeMask color_mask(const LayeredGraph& g, Color c) {
  EdgeMask mask(g.edges().size(), false);
  const auto edges = g.edges();
  for (std::size_t i = 0; i < edges.size(); ++i) mask[i] = edges[i].color == c;
  return mask;
}

struct Components {
  std::vector<std::uint32_t> component_of;  ///< dense ids, numbered by lowest member node
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> layer_counts;    ///< component-major, layer_count entries each
  std::size_t layers = 0;
  std::size_t largest = 0;                  ///< size of the largest component
  std::vector<std::size_t> largest_per_layer;

  std::size_t count() const noexcept { return sizes.size(); }
  std::size_t in_layer(std::size_t component, std::size_t layer) const {
    return layer_counts[component * layers + layer];
  }
};

inline Components giant_component(const LayeredGraph& g, const EdgeMask& mask) {
  if (mask.size() != g.edges().size())
    throw Error(Errc::LengthMismatch, "edge mask size differs from edge count");
  const std::size_t n = g.node_count();
  std::vector<NodeIndex> parent(n);
  std::iota(parent.begin(), parent.end(), NodeIndex{0});
  const auto find = [&](NodeIndex x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  const auto edges = g.edges();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!mask[i]) continue;
    auto a = find(edges[i].u);
    auto b = find(edges[i].v);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    parent[b] = a;
  }

  Components out;
  out.layers = g.layer_count();
  out.component_of.assign(n, 0);
  std::vector<std::uint32_t> id_of_root(n, UINT32_MAX);
  for (NodeIndex v = 0; v < n; ++v) {
    const auto r = find(v);
    if (id_of_root[r] == UINT32_MAX) {
      id_of_root[r] = static_cast<std::uint32_t>(out.sizes.size());
      out.sizes.push_back(0);
      out.layer_counts.resize(out.layer_counts.size() + out.layers, 0);
    }
    const auto id = id_of_root[r];
    out.component_of[v] = id;
    ++out.sizes[id];
    ++out.layer_counts[std::size_t{id} * out.layers + g.layer_of(v)];
  }
  out.largest_per_layer.assign(out.layers, 0);
  for (std::size_t c = 0; c < out.sizes.size(); ++c) {
    out.largest = std::max(out.largest, out.sizes[c]);
    for (std::size_t l = 0; l < out.layers; ++l)
      out.largest_per_layer[l] = std::max(out.largest_per_layer[l], out.in_layer(c, l));
  }
  return out;
}

inline Components giant_component(const LayeredGraph& g) { return giant_component(g, full_mask(g)); }

// ---------------------------------------------------------------------------
// Coupling strength

enum class Coupling { StronglyCoupled, WeaklyCoupled, Other };

constexpr std::string_view to_string(Coupling c) noexcept {
  switch (c) {
    case Coupling::StronglyCoupled: return "strongly-coupled";
    case Coupling::WeaklyCoupled: return "weakly-coupled";
    case Coupling::Other: return "other";
  }
  return "other";
}

/// Strongly coupled when the whole-network kappa exceeds both layer kappas;
/// weakly coupled when it lies strictly between them. A layer without edges
/// makes the comparison meaningless and yields Other.
inline Coupling classify_coupling(const LayeredGraph& g) {
  if (g.layer_count() != 2) throw Error(Errc::NotTwoLayers, "coupling needs exactly two layers");
  double total = 0.0;
  double a = 0.0;
  double b = 0.0;
  try {
    total = kappa(g);
    a = kappa(g, KappaScope::single_layer(0));
    b = kappa(g, KappaScope::single_layer(1));
  } catch (const Error& e) {
    if (e.code() == Errc::NoEdgesInScope) return Coupling::Other;
    throw;
  }
  const double sparse = std::min(a, b);
  const double dense = std::max(a, b);
  if (total > dense && total > sparse) return Coupling::StronglyCoupled;
  if (dense > total && total > sparse) return Coupling::WeaklyCoupled;
  return Coupling::Other;
}

}  // namespace mdthresh
