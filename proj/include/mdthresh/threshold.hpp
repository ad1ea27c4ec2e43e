#pragma once

// Epidemic thresholds on interdependent networks.
//
// Each color c carries a diffusion rate beta_c. Over a recovery time of tau
// steps an edge of color c is traversed with transmissibility
// R_c = 1 - (1 - beta_c)^tau, which thins the color's degree distribution.
// The thinned colored-degree Jacobian J(1) = T E(1) has Perron root theta;
// theta >= 1 marks a giant diffusion component spanning the network.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mdthresh/error.hpp"
#include "mdthresh/graph.hpp"
#include "mdthresh/matrix.hpp"

namespace mdthresh {

/// One diffusion rate per color, each in [0, 1].
class RateTuple {
 public:
  RateTuple() = default;
  explicit RateTuple(std::vector<double> rates) : rates_(std::move(rates)) {
    for (double r : rates_)
      if (!(r >= 0.0 && r <= 1.0))
        throw Error(Errc::DomainError, "rate " + std::to_string(r) + " outside [0,1]");
  }
  RateTuple(std::initializer_list<double> rates) : RateTuple(std::vector<double>(rates)) {}

  std::size_t size() const noexcept { return rates_.size(); }
  double operator[](std::size_t i) const noexcept { return rates_[i]; }
  std::span<const double> values() const noexcept { return rates_; }

  friend bool operator==(const RateTuple&, const RateTuple&) = default;

 private:
  std::vector<double> rates_;
};

inline double transmissibility(double beta, int tau) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw Error(Errc::DomainError, "rate outside [0,1]");
  if (tau < 1) throw Error(Errc::DomainError, "recovery time must be at least one step");
  return 1.0 - std::pow(1.0 - beta, tau);
}

struct Transmissibilities {
  std::vector<double> values;
  int tau = 1;

  static Transmissibilities from_rates(const RateTuple& rates, int tau) {
    Transmissibilities t;
    t.tau = tau;
    t.values.reserve(rates.size());
    for (double b : rates.values()) t.values.push_back(transmissibility(b, tau));
    return t;
  }
  static Transmissibilities uniform(std::size_t colors, double value) {
    return {std::vector<double>(colors, value), 1};
  }
};

struct SingleLayerThreshold {
  double beta = 0.0;
  bool saturated = false;  ///< no rate below 1 suffices (1 < kappa <= 2)
};

/// beta_c = 1 - [1 - 1/(kappa - 1)]^(1/tau).
inline SingleLayerThreshold single_layer_threshold(double kappa, int tau) {
  if (tau < 1) throw Error(Errc::DomainError, "recovery time must be at least one step");
  if (!(kappa > 1.0)) throw Error(Errc::KappaAtMostOne, "threshold undefined for kappa " + std::to_string(kappa));
  const double bracket = 1.0 - 1.0 / (kappa - 1.0);
  if (bracket <= 0.0) return {1.0, true};
  return {1.0 - std::pow(bracket, 1.0 / tau), false};
}

/// Binomial thinning of every color's degree distribution by R_c, applied to
/// both the restricted and the global moments.
inline MomentSet thin_moments(const MomentSet& m, const Transmissibilities& t) {
  if (t.values.size() != m.colors.size())
    throw Error(Errc::LengthMismatch, "one transmissibility per color required");
  MomentSet out = m;
  for (std::size_t c = 0; c < m.colors.size(); ++c) {
    const double r = t.values[c];
    auto& cm = out.colors[c];
    const auto& src = m.colors[c];
    cm.mean_restricted = r * src.mean_restricted;
    cm.second_restricted = r * r * (src.second_restricted - src.mean_restricted) + r * src.mean_restricted;
    cm.mean_global = r * src.mean_global;
    cm.second_global = r * r * (src.second_global - src.mean_global) + r * src.mean_global;
  }
  return out;
}

/// (<y^2> - <y>) / <y> for a Poisson degree distribution, which is <y>.
inline double er_moment_ratio(double mean) {
  if (!(mean >= 0.0)) throw Error(Errc::DomainError, "mean degree must be non-negative");
  return mean;
}

/// Mean degree and excess ratio (<y^2> - <y>) / <y> of a degree distribution.
struct DegreeModel {
  double mean = 0.0;
  double ratio = 0.0;
};

inline DegreeModel er_degree_model(double mean) { return {mean, er_moment_ratio(mean)}; }

struct PowerLawMomentOptions {
  /// Evaluate gamma in {2, 3} through the logarithmic antiderivative instead of rejecting.
  bool allow_log_limit = false;
};

namespace detail {

/// Integral of y^k * c * y^-gamma over [lo, hi].
inline double powerlaw_moment(double gamma, double lo, double hi, int k, double norm, bool allow_log) {
  const double e = k - gamma + 1.0;
  if (std::abs(e) < 1e-12) {
    if (!allow_log)
      throw Error(Errc::ExponentSingularity, "moment " + std::to_string(k) + " singular at gamma " +
                                                 std::to_string(gamma));
    return norm * std::log(hi / lo);
  }
  return norm * (std::pow(hi, e) - std::pow(lo, e)) / e;
}

}  // namespace detail

/// Closed-form mean and excess ratio of p(y) = c y^-gamma on [y_min, y_max],
/// c = (gamma - 1) y_min^(gamma - 1). A cutoff equal to y_min is the point mass there.
inline DegreeModel powerlaw_moments(double gamma, std::uint64_t y_min, std::uint64_t y_max,
                                    PowerLawMomentOptions options = {}) {
  if (!(gamma > 1.0)) throw Error(Errc::DomainError, "power-law exponent must exceed 1");
  if (y_min < 1 || y_max < y_min) throw Error(Errc::DomainError, "need 1 <= y_min <= y_max");
  const double lo = static_cast<double>(y_min);
  const double hi = static_cast<double>(y_max);
  for (double singular : {2.0, 3.0})
    if (std::abs(gamma - singular) < 1e-12 && !options.allow_log_limit)
      throw Error(Errc::ExponentSingularity, "gamma " + std::to_string(gamma) + " is a singular exponent");
  if (y_max == y_min) return {lo, lo - 1.0};
  const double norm = (gamma - 1.0) * std::pow(lo, gamma - 1.0);
  const double first = detail::powerlaw_moment(gamma, lo, hi, 1, norm, options.allow_log_limit);
  const double second = detail::powerlaw_moment(gamma, lo, hi, 2, norm, options.allow_log_limit);
  return {first, second / first - 1.0};
}

/// Moment set from a per-color mean and excess ratio; the restricted second
/// moment is <y>(ratio + 1), and global moments scale by population / n.
inline MomentSet moments_from_models(std::span<const std::size_t> layer_sizes,
                                     std::span<const DegreeModel> models) {
  const ColorTable table(layer_sizes.size());
  if (models.size() != table.count())
    throw Error(Errc::LengthMismatch, "expected " + std::to_string(table.count()) + " color models");
  MomentSet m;
  for (auto s : layer_sizes) m.population_global += s;
  const auto n = static_cast<double>(m.population_global);
  m.colors.resize(models.size());
  for (Color c = 0; c < models.size(); ++c) {
    auto& cm = m.colors[c];
    cm.population_restricted = color_population(table, layer_sizes, c);
    cm.mean_restricted = models[c].mean;
    cm.second_restricted = models[c].mean * (models[c].ratio + 1.0);
    const double share = n > 0 ? static_cast<double>(cm.population_restricted) / n : 0.0;
    cm.mean_global = share * cm.mean_restricted;
    cm.second_global = share * cm.second_restricted;
  }
  return m;
}

using Jacobian = SquareMatrix;

/// Two-layer Jacobian under independent color degrees. Columns carry
/// (n1/n) R1, (n2/n) R2 and R3; a column's diagonal entry uses the excess
/// ratio (<y^2> - <y>) / <y> and its off-diagonal entries the mean <y>.
/// A color with zero mean degree has its row and column zeroed, which leaves
/// the remaining spectrum unchanged.
inline Jacobian jacobian_closed_form(const MomentSet& m, std::span<const std::size_t> layer_sizes,
                                     const Transmissibilities& t) {
  if (layer_sizes.size() != 2 || m.colors.size() != 3)
    throw Error(Errc::NotTwoLayers, "closed-form Jacobian covers exactly two layers");
  if (t.values.size() != 3) throw Error(Errc::LengthMismatch, "one transmissibility per color required");
  const double n = static_cast<double>(layer_sizes[0] + layer_sizes[1]);
  const double share[3] = {static_cast<double>(layer_sizes[0]) / n, static_cast<double>(layer_sizes[1]) / n, 1.0};
  Jacobian j(3);
  for (std::size_t col = 0; col < 3; ++col) {
    const auto& cm = m.colors[col];
    if (cm.mean_restricted <= 0.0) continue;
    const double scale = share[col] * t.values[col];
    const double ratio = (cm.second_restricted - cm.mean_restricted) / cm.mean_restricted;
    for (std::size_t row = 0; row < 3; ++row) {
      if (row != col && m.colors[row].mean_restricted <= 0.0) continue;
      j(row, col) = scale * (row == col ? ratio : cm.mean_restricted);
    }
  }
  return j;
}

/// Jacobian from measured colored-degree cross-moments over all n nodes:
/// J_ii = R_i <x_i^2 - x_i> / <x_i>, J_ij = R_j <x_i x_j> / <x_i>.
/// These are T E(1) with thinned moments and the R_i of T_ii = 1/(R_i <x_i>)
/// cancelled, so R_i = 0 stays finite and only zeroes column i.
inline Jacobian jacobian_empirical(const LayeredGraph& g, const Transmissibilities& t) {
  const std::size_t colors = g.color_count();
  if (t.values.size() != colors) throw Error(Errc::LengthMismatch, "one transmissibility per color required");
  for (Color c = 0; c < colors; ++c)
    if (g.edge_count(c) == 0) throw Error(Errc::EmptyColor, "color " + std::to_string(c) + " has no edges");
  const auto cross = colored_cross_moments(g);
  const auto m = compute_moments(g);
  Jacobian j(colors);
  for (std::size_t i = 0; i < colors; ++i) {
    const double mean = m.colors[i].mean_global;
    for (std::size_t k = 0; k < colors; ++k) {
      const double e = i == k ? cross(i, i) - mean : cross(i, k);
      j(i, k) = t.values[k] * e / mean;
    }
  }
  return j;
}

// ---------------------------------------------------------------------------
// Perron root

namespace detail {

/// Real roots of a polynomial (coefficients by ascending power), found by
/// bracketing between the real roots of its derivative.
inline std::vector<long double> real_roots(std::vector<long double> coeffs) {
  while (coeffs.size() > 1 && coeffs.back() == 0.0L) coeffs.pop_back();
  const std::size_t degree = coeffs.size() - 1;
  if (degree == 0) return {};
  if (degree == 1) return {-coeffs[0] / coeffs[1]};
  const auto eval = [&](long double x) {
    long double acc = 0.0L;
    for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
    return acc;
  };
  long double bound = 0.0L;
  for (std::size_t i = 0; i < degree; ++i) bound = std::max(bound, std::abs(coeffs[i] / coeffs[degree]));
  bound += 1.0L;

  std::vector<long double> deriv(degree);
  for (std::size_t i = 1; i <= degree; ++i) deriv[i - 1] = coeffs[i] * static_cast<long double>(i);
  std::vector<long double> knots{-bound};
  for (auto r : real_roots(deriv))
    if (r > -bound && r < bound) knots.push_back(r);
  knots.push_back(bound);
  std::sort(knots.begin(), knots.end());

  long double scale = 0.0L;
  for (auto c : coeffs) scale = std::max(scale, std::abs(c));
  const long double touch = 1e-14L * scale;

  std::vector<long double> roots;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    long double lo = knots[k];
    long double hi = knots[k + 1];
    long double flo = eval(lo);
    const long double fhi = eval(hi);
    if (std::abs(flo) <= touch) {
      roots.push_back(lo);
      continue;
    }
    if ((flo < 0) == (fhi < 0)) continue;
    for (int it = 0; it < 200 && hi - lo > 0; ++it) {
      const long double mid = 0.5L * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const long double fm = eval(mid);
      if ((fm < 0) == (flo < 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    roots.push_back(0.5L * (lo + hi));
  }
  if (std::abs(eval(knots.back())) <= touch) roots.push_back(knots.back());
  return roots;
}

/// Characteristic polynomial det(x I - A), ascending coefficients (Faddeev-LeVerrier).
inline std::vector<long double> characteristic_polynomial(const SquareMatrix& a) {
  const std::size_t n = a.dim();
  std::vector<long double> coeffs(n + 1, 0.0L);
  coeffs[n] = 1.0L;
  std::vector<long double> m(n * n, 0.0L);  // M_0 = 0
  std::vector<long double> am(n * n, 0.0L);
  for (std::size_t k = 1; k <= n; ++k) {
    // M_k = A M_{k-1} + c_{n-k+1} I
    std::vector<long double> next(n * n, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        long double acc = 0.0L;
        for (std::size_t l = 0; l < n; ++l) acc += static_cast<long double>(a(i, l)) * m[l * n + j];
        next[i * n + j] = acc;
      }
      next[i * n + i] += coeffs[n - k + 1];
    }
    m = std::move(next);
    long double trace = 0.0L;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l) trace += static_cast<long double>(a(i, l)) * m[l * n + i];
    coeffs[n - k] = -trace / static_cast<long double>(k);
  }
  return coeffs;
}

}  // namespace detail

struct SpectralOptions {
  double tolerance = 1e-10;
  std::size_t max_iterations = 100000;
};

/// Perron root of a non-negative matrix via the largest real root of its
/// characteristic polynomial (dimension <= 4 only).
inline double perron_root_polynomial(const SquareMatrix& a) {
  if (a.dim() == 0) return 0.0;
  if (a.dim() > 4) throw Error(Errc::NonConvergence, "polynomial route limited to dimension 4");
  const auto roots = detail::real_roots(detail::characteristic_polynomial(a));
  long double best = 0.0L;
  for (auto r : roots) best = std::max(best, r);
  return static_cast<double>(best);
}

/// Perron root of a non-negative square matrix. Power iteration on A + sI,
/// where the shift s makes every eigenvalue of modulus rho other than rho itself
/// strictly smaller; if it stalls (defective or nearly tied spectrum) the
/// characteristic polynomial is solved directly for dimension <= 4.
inline double spectral_radius(const SquareMatrix& a, SpectralOptions options = {}) {
  const std::size_t n = a.dim();
  double max_row = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (double v : a.row(i)) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw Error(Errc::DomainError, "matrix must be finite and non-negative");
      row += v;
    }
    max_row = std::max(max_row, row);
  }
  if (n == 0 || max_row == 0.0) return 0.0;

  const double shift = max_row;
  std::vector<double> x(n, 1.0);
  std::vector<double> y(n);
  double estimate = 0.0;
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = shift * x[i];
      const auto row = a.row(i);
      for (std::size_t k = 0; k < n; ++k) acc += row[k] * x[k];
      y[i] = acc;
      norm = std::max(norm, acc);
    }
    for (std::size_t i = 0; i < n; ++i) y[i] /= norm;
    const double next = norm - shift;
    // Residual of the eigen-equation for the normalized iterate.
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      const auto row = a.row(i);
      for (std::size_t k = 0; k < n; ++k) acc += row[k] * y[k];
      residual = std::max(residual, std::abs(acc - next * y[i]));
    }
    x.swap(y);
    if (it > 0 && std::abs(next - estimate) < 0.1 * options.tolerance &&
        residual < 0.1 * options.tolerance)
      return next;
    estimate = next;
  }
  if (n <= 4) return perron_root_polynomial(a);
  throw Error(Errc::NonConvergence, "power iteration did not converge");
}

struct EpidemicIndicator {
  double theta = 0.0;
  bool epidemic = false;
};

inline EpidemicIndicator epidemic_indicator(const MomentSet& m, std::span<const std::size_t> layer_sizes,
                                            const RateTuple& rates, int tau) {
  const auto t = Transmissibilities::from_rates(rates, tau);
  const double theta = spectral_radius(jacobian_closed_form(m, layer_sizes, t));
  return {theta, theta >= 1.0};
}

inline EpidemicIndicator epidemic_indicator_empirical(const LayeredGraph& g, const RateTuple& rates, int tau) {
  const auto t = Transmissibilities::from_rates(rates, tau);
  const double theta = spectral_radius(jacobian_empirical(g, t));
  return {theta, theta >= 1.0};
}

// ---------------------------------------------------------------------------
// Dominance and states

/// t1 dominates t2 when it is componentwise <= with at least one strict component.
inline bool dominates(std::span<const double> t1, std::span<const double> t2) {
  if (t1.size() != t2.size()) throw Error(Errc::LengthMismatch, "tuples differ in length");
  bool strict = false;
  for (std::size_t i = 0; i < t1.size(); ++i) {
    if (t1[i] > t2[i]) return false;
    if (t1[i] < t2[i]) strict = true;
  }
  return strict;
}

inline bool dominates(const RateTuple& t1, const RateTuple& t2) { return dominates(t1.values(), t2.values()); }

enum class NetworkState { InfectionFree, Mixed, Epidemic };

constexpr std::string_view to_string(NetworkState s) noexcept {
  switch (s) {
    case NetworkState::InfectionFree: return "infection-free";
    case NetworkState::Mixed: return "mixed";
    case NetworkState::Epidemic: return "epidemic";
  }
  return "mixed";
}

struct StateReport {
  NetworkState state = NetworkState::InfectionFree;
  double theta = 0.0;
  std::vector<bool> layer_epidemic;
};

/// A layer is epidemic alone when R_c (<y_c^2> - <y_c>) / <y_c> >= 1 on its
/// intra color; the whole network when theta >= 1.
inline StateReport classify_state(const MomentSet& m, std::span<const std::size_t> layer_sizes,
                                  const RateTuple& rates, int tau) {
  if (layer_sizes.size() != 2 || m.colors.size() != 3)
    throw Error(Errc::NotTwoLayers, "states are defined for two-layer networks");
  StateReport report;
  const auto whole = epidemic_indicator(m, layer_sizes, rates, tau);
  report.theta = whole.theta;
  bool all_layers = true;
  bool any_layer = false;
  for (Color c = 0; c < 2; ++c) {
    const auto& cm = m.colors[c];
    bool epidemic = false;
    if (cm.mean_restricted > 0.0) {
      const double ratio = (cm.second_restricted - cm.mean_restricted) / cm.mean_restricted;
      epidemic = transmissibility(rates[c], tau) * ratio >= 1.0;
    }
    report.layer_epidemic.push_back(epidemic);
    all_layers = all_layers && epidemic;
    any_layer = any_layer || epidemic;
  }
  if (!whole.epidemic && !any_layer)
    report.state = NetworkState::InfectionFree;
  else if (whole.epidemic && all_layers)
    report.state = NetworkState::Epidemic;
  else
    report.state = NetworkState::Mixed;
  return report;
}

}  // namespace mdthresh
