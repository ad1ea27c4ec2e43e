#pragma once

// Edge-list files and CSV output.
//
// Edge-list format, ASCII, whitespace separated, one record per line:
//
//   #layers 759 735
//   # any other line starting with '#' is a comment
//   0 12 0 57        <- layer_u u layer_v v, 0-indexed
//   0 12 1 3
//
// The header must precede every record. Colors follow from the layer pair.
// External datasets are converted by mapping their ids to dense per-layer
// indices and dropping self-loops and repeated pairs before writing this format.

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "mdthresh/error.hpp"
#include "mdthresh/frontier.hpp"
#include "mdthresh/graph.hpp"
#include "mdthresh/sir.hpp"

namespace mdthresh {

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const auto start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <class T>
bool parse_integer(std::string_view text, T& out) {
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace detail

inline LayeredGraph read_edge_list(std::istream& in, std::string_view source = "<input>") {
  const auto fail = [&](std::size_t line, const std::string& why) {
    throw Error(Errc::ParseError, std::string(source) + ":" + std::to_string(line) + ": " + why);
  };
  std::vector<std::size_t> sizes;
  bool have_header = false;
  std::vector<ColoredEdge> edges;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto tokens = detail::split_ws(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "#layers") {
      if (have_header) fail(number, "duplicate #layers header");
      if (tokens.size() < 2) fail(number, "#layers needs at least one layer size");
      for (std::size_t k = 1; k < tokens.size(); ++k) {
        std::size_t s = 0;
        if (!detail::parse_integer(tokens[k], s)) fail(number, "bad layer size '" + std::string(tokens[k]) + "'");
        sizes.push_back(s);
      }
      have_header = true;
      continue;
    }
    if (tokens[0].front() == '#') continue;
    if (!have_header) fail(number, "record before #layers header");
    if (tokens.size() != 4) fail(number, "expected 'layer_u u layer_v v', got " + std::to_string(tokens.size()) + " fields");
    std::uint32_t f[4];
    for (int k = 0; k < 4; ++k)
      if (!detail::parse_integer(tokens[k], f[k])) fail(number, "bad integer '" + std::string(tokens[k]) + "'");
    if (f[0] >= sizes.size() || f[2] >= sizes.size()) fail(number, "layer out of range");
    const ColorTable table(sizes.size());
    edges.push_back({{f[0], f[1]}, {f[2], f[3]}, table.between(f[0], f[2])});
  }
  if (!have_header) throw Error(Errc::ParseError, std::string(source) + ": missing #layers header");
  return build_graph(std::move(sizes), std::span<const ColoredEdge>(edges));
}

inline LayeredGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ParseError, "cannot open " + path);
  return read_edge_list(in, path);
}

inline void write_edge_list(std::ostream& out, const LayeredGraph& g) {
  out << "#layers";
  for (auto s : g.layer_sizes()) out << ' ' << s;
  out << '\n';
  for (const auto& e : g.edges()) {
    const auto u = g.node(e.u);
    const auto v = g.node(e.v);
    out << u.layer << ' ' << u.index << ' ' << v.layer << ' ' << v.index << '\n';
  }
}

inline void save_graph(const std::string& path, const LayeredGraph& g) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::ConfigError, "cannot write " + path);
  write_edge_list(out, g);
}

struct GraphSummary {
  std::vector<std::size_t> layer_sizes;
  std::vector<std::size_t> edges_per_color;
  std::vector<double> mean_restricted;
  std::vector<std::string> color_names;
};

inline std::string color_name(const ColorTable& table, Color c) {
  const auto [a, b] = table.endpoints(c);
  if (a == b) return "L" + std::to_string(a + 1);
  return "L" + std::to_string(a + 1) + "-L" + std::to_string(b + 1);
}

inline GraphSummary summarize(const LayeredGraph& g) {
  GraphSummary s;
  s.layer_sizes.assign(g.layer_sizes().begin(), g.layer_sizes().end());
  const auto m = compute_moments(g);
  for (Color c = 0; c < g.color_count(); ++c) {
    s.edges_per_color.push_back(g.edge_count(c));
    s.mean_restricted.push_back(m.colors[c].mean_restricted);
    s.color_names.push_back(color_name(g.colors(), c));
  }
  return s;
}

// ---------------------------------------------------------------------------
// CSV

/// Shortest representation that reads back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

inline void print_summary(std::ostream& out, const GraphSummary& s) {
  std::size_t n = 0;
  for (auto v : s.layer_sizes) n += v;
  out << "layers " << s.layer_sizes.size() << ", nodes " << n << '\n';
  for (std::size_t l = 0; l < s.layer_sizes.size(); ++l) out << "  n_" << (l + 1) << " = " << s.layer_sizes[l] << '\n';
  for (std::size_t c = 0; c < s.edges_per_color.size(); ++c)
    out << "  color " << (c + 1) << " (" << s.color_names[c] << "): " << s.edges_per_color[c]
        << " edges, <y> = " << format_number(s.mean_restricted[c]) << '\n';
}

inline void write_manifest_reference(std::ostream& out, std::string_view manifest) {
  if (!manifest.empty()) out << "# manifest: " << manifest << '\n';
}

/// beta_1,...,beta_C,theta
inline void write_frontier_csv(std::ostream& out, const FrontierSet& f, std::size_t colors,
                               std::string_view manifest = {}) {
  for (std::size_t c = 0; c < colors; ++c) out << "beta_" << (c + 1) << ',';
  out << "theta\n";
  for (const auto& p : f.points) {
    for (double r : p.rates.values()) out << format_number(r) << ',';
    out << format_number(p.theta) << '\n';
  }
  write_manifest_reference(out, manifest);
}

/// beta,alpha,density_L1,...,density_LL,density_all
inline void write_sweep_csv(std::ostream& out, const Heatmap& h, std::size_t layers, std::string_view manifest = {}) {
  out << "beta,alpha";
  for (std::size_t l = 0; l < layers; ++l) out << ",density_L" << (l + 1);
  out << ",density_all\n";
  for (const auto& cell : h.cells) {
    out << format_number(cell.beta) << ',' << format_number(cell.alpha);
    for (double d : cell.density_per_layer) out << ',' << format_number(d);
    out << ',' << format_number(cell.density_whole) << '\n';
  }
  write_manifest_reference(out, manifest);
}

/// setting,step,infected_L1,...,infected_LL,infected_all (or cumulative_*).
inline void write_dynamics_csv(std::ostream& out, std::span<const DynamicsSeries> series, std::size_t layers,
                               bool cumulative = false, std::string_view manifest = {}) {
  const std::string_view prefix = cumulative ? "cumulative" : "infected";
  out << "setting,step";
  for (std::size_t l = 0; l < layers; ++l) out << ',' << prefix << "_L" << (l + 1);
  out << ',' << prefix << "_all\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    for (std::size_t t = 0; t < s.points(); ++t) {
      out << i << ',' << t;
      for (std::size_t c = 0; c <= layers; ++c)
        out << ',' << format_number(cumulative ? s.cumulative_at(t, c) : s.infected_at(t, c));
      out << '\n';
    }
  }
  write_manifest_reference(out, manifest);
}

/// step,infected_L1,...,infected_all,cumulative_all for a single realization.
inline void write_run_csv(std::ostream& out, const SimSummary& s) {
  out << "step";
  for (std::size_t l = 0; l < s.layers; ++l) out << ",infected_L" << (l + 1);
  out << ",infected_all,cumulative_all\n";
  for (std::size_t t = 0; t < s.points(); ++t) {
    out << t;
    for (std::size_t c = 0; c <= s.layers; ++c) out << ',' << s.infected_at(t, c);
    out << ',' << s.cumulative_at(t, s.layers) << '\n';
  }
}

}  // namespace mdthresh
