#pragma once

// Approximate multidimensional epidemic threshold: the minimal rate tuples,
// on a uniform grid over [0,1]^C, at which theta >= 1.
//
// theta is non-decreasing in every rate, so the epidemic grid points form an
// up-set and every grid line along the last search axis crosses into it at
// most once. The search binary-searches that crossing on each line, then
// keeps a line's crossing point only if stepping down along any other axis
// lands on a line whose crossing is strictly higher (or absent). For an
// up-set these are exactly the points whose one-step-down neighbours are all
// non-epidemic, i.e. the minimal elements.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "mdthresh/error.hpp"
#include "mdthresh/graph.hpp"
#include "mdthresh/parallel.hpp"
#include "mdthresh/threshold.hpp"

namespace mdthresh {

/// Maps free search axes onto colors. Colors listed together in a tie group
/// share one axis; any color not mentioned has its own. Axes are ordered by
/// the smallest color they contain.
class SearchSpace {
 public:
  SearchSpace() = default;
  SearchSpace(std::size_t colors, const std::vector<std::vector<std::size_t>>& ties) : colors_(colors) {
    std::vector<std::size_t> group(colors);
    std::iota(group.begin(), group.end(), std::size_t{0});
    const auto root = [&](std::size_t c) {
      while (group[c] != c) c = group[c];
      return c;
    };
    for (const auto& tie : ties) {
      for (auto c : tie)
        if (c >= colors) throw Error(Errc::ConfigError, "tie references color " + std::to_string(c + 1));
      for (std::size_t k = 1; k < tie.size(); ++k) {
        const auto a = root(tie[0]);
        const auto b = root(tie[k]);
        group[std::max(a, b)] = std::min(a, b);
      }
    }
    std::vector<std::size_t> axis_of_root(colors, colors);
    for (std::size_t c = 0; c < colors; ++c) {
      const auto r = root(c);
      if (axis_of_root[r] == colors) {
        axis_of_root[r] = axes_.size();
        axes_.emplace_back();
      }
      axes_[axis_of_root[r]].push_back(c);
    }
  }

  std::size_t colors() const noexcept { return colors_; }
  std::size_t dimension() const noexcept { return axes_.size(); }
  const std::vector<std::size_t>& axis_colors(std::size_t axis) const { return axes_.at(axis); }

  RateTuple expand(std::span<const double> coordinates) const {
    std::vector<double> rates(colors_, 0.0);
    for (std::size_t a = 0; a < axes_.size(); ++a)
      for (auto c : axes_[a]) rates[c] = coordinates[a];
    return RateTuple(std::move(rates));
  }

 private:
  std::size_t colors_ = 0;
  std::vector<std::vector<std::size_t>> axes_;
};

/// Snaps to 12 decimals so that grid values print as written (0.15, not 0.15000000000000002).
inline double snap_decimal(double v) { return std::round(v * 1e12) / 1e12; }

/// Grid values k * step for k = 0..K, the last one clamped to 1.
class RateGrid {
 public:
  explicit RateGrid(double step) : step_(step) {
    if (!(step > 0.0 && step <= 0.5)) throw Error(Errc::ConfigError, "grid step must lie in (0, 0.5]");
    last_ = static_cast<std::size_t>(std::ceil(1.0 / step - 1e-9));
  }
  double step() const noexcept { return step_; }
  std::size_t last() const noexcept { return last_; }
  std::size_t size() const noexcept { return last_ + 1; }
  double value(std::size_t k) const noexcept {
    return k >= last_ ? 1.0 : std::min(1.0, snap_decimal(static_cast<double>(k) * step_));
  }

 private:
  double step_;
  std::size_t last_;
};

struct FrontierOptions {
  double grid_step = 0.01;
  std::vector<std::vector<std::size_t>> ties;  ///< zero-based color groups sharing one rate
  double refine_tolerance = 0.0;               ///< > 0 bisects each point along the last axis
  unsigned threads = 1;
};

struct FrontierPoint {
  std::vector<double> coordinates;  ///< one value per search axis
  RateTuple rates;                  ///< expanded to every color
  double theta = 0.0;
};

struct FrontierSet {
  std::vector<FrontierPoint> points;
  double grid_step = 0.0;
  bool refined = false;
  SearchSpace space;

  bool empty() const noexcept { return points.empty(); }
};

/// theta_of(const RateTuple&) -> double must be safe to call concurrently when threads > 1.
template <class ThetaFn>
FrontierSet multi_threshold(ThetaFn&& theta_of, std::size_t colors, const FrontierOptions& options) {
  const RateGrid grid(options.grid_step);
  FrontierSet out;
  out.grid_step = options.grid_step;
  out.space = SearchSpace(colors, options.ties);
  const auto& space = out.space;
  const std::size_t dim = space.dimension();
  const std::size_t g = grid.size();
  const std::size_t none = g;

  std::size_t lines = 1;
  for (std::size_t a = 0; a + 1 < dim; ++a) lines *= g;

  const auto coords_of = [&](std::size_t line, std::size_t last_index) {
    std::vector<double> coords(dim);
    for (std::size_t a = dim - 1; a-- > 0;) {
      coords[a] = grid.value(line % g);
      line /= g;
    }
    coords[dim - 1] = grid.value(last_index);
    return coords;
  };
  const auto epidemic = [&](const std::vector<double>& coords) {
    return theta_of(space.expand(coords)) >= 1.0;
  };

  std::vector<std::size_t> crossing(lines, none);
  parallel_for(lines, options.threads, [&](std::size_t line) {
    if (!epidemic(coords_of(line, grid.last()))) return;
    std::size_t lo = 0;
    std::size_t hi = grid.last();
    if (epidemic(coords_of(line, 0))) {
      crossing[line] = 0;
      return;
    }
    // Invariant: lo not epidemic, hi epidemic.
    while (hi - lo > 1) {
      const auto mid = lo + (hi - lo) / 2;
      if (epidemic(coords_of(line, mid)))
        hi = mid;
      else
        lo = mid;
    }
    crossing[line] = hi;
  });

  std::vector<std::size_t> stride(dim, 1);
  if (dim >= 2)
    for (std::size_t a = dim - 1; a-- > 0;) stride[a] = (a + 2 == dim) ? 1 : stride[a + 1] * g;

  std::vector<std::size_t> kept;
  for (std::size_t line = 0; line < lines; ++line) {
    const auto h = crossing[line];
    if (h == none) continue;
    bool minimal = true;
    std::size_t rest = line;
    for (std::size_t a = dim - 1; a-- > 0 && minimal;) {
      const auto index = rest % g;
      rest /= g;
      if (index == 0) continue;
      const auto below = crossing[line - stride[a]];
      if (below != none && below <= h) minimal = false;
    }
    if (minimal) kept.push_back(line);
  }

  out.points.resize(kept.size());
  parallel_for(kept.size(), options.threads, [&](std::size_t i) {
    const auto line = kept[i];
    const auto h = crossing[line];
    auto coords = coords_of(line, h);
    if (options.refine_tolerance > 0.0 && h > 0) {
      double lo = grid.value(h - 1);
      double hi = coords[dim - 1];
      while (hi - lo > options.refine_tolerance) {
        const double mid = 0.5 * (lo + hi);
        coords[dim - 1] = mid;
        if (epidemic(coords))
          hi = mid;
        else
          lo = mid;
      }
      coords[dim - 1] = hi;
    }
    auto rates = space.expand(coords);
    const double theta = theta_of(rates);
    out.points[i] = {std::move(coords), std::move(rates), theta};
  });

  if (options.refine_tolerance > 0.0) {
    out.refined = true;
    std::vector<FrontierPoint> filtered;
    for (std::size_t i = 0; i < out.points.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < out.points.size() && !dominated; ++j)
        dominated = j != i && dominates(out.points[j].coordinates, out.points[i].coordinates);
      if (!dominated) filtered.push_back(out.points[i]);
    }
    out.points = std::move(filtered);
  }
  return out;
}

/// Frontier of the closed-form two-layer criterion.
inline FrontierSet multi_threshold(const MomentSet& m, std::span<const std::size_t> layer_sizes, int tau,
                                   const FrontierOptions& options) {
  const Transmissibilities probe = Transmissibilities::uniform(m.colors.size(), 1.0);
  (void)jacobian_closed_form(m, layer_sizes, probe);  // validates shape up front
  return multi_threshold(
      [&](const RateTuple& rates) { return epidemic_indicator(m, layer_sizes, rates, tau).theta; },
      m.colors.size(), options);
}

}  // namespace mdthresh
