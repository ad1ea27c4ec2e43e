#include <gtest/gtest.h>

#include <cmath>

#include "mdthresh/frontier.hpp"
#include "mdthresh/rng.hpp"
#include "oracles.hpp"

using namespace mdthresh;

namespace {

MomentSet random_moments(Rng& rng, std::span<const std::size_t> sizes) {
  std::vector<DegreeModel> models;
  for (int c = 0; c < 3; ++c) models.push_back({0.3 + 6.0 * rng.uniform(), 8.0 * rng.uniform()});
  return moments_from_models(sizes, models);
}

bool is_antichain(const FrontierSet& f) {
  for (const auto& a : f.points)
    for (const auto& b : f.points)
      if (dominates(a.coordinates, b.coordinates)) return false;
  return true;
}

}  // namespace

TEST(RateGrid, ValuesAndEnd) {
  const RateGrid g(0.05);
  EXPECT_EQ(g.last(), 20u);
  EXPECT_EQ(g.value(3), 0.15);
  EXPECT_EQ(g.value(20), 1.0);
  const RateGrid odd(0.3);
  EXPECT_EQ(odd.last(), 4u);
  EXPECT_EQ(odd.value(3), 0.9);
  EXPECT_EQ(odd.value(4), 1.0);
  EXPECT_THROW(RateGrid(0.0), Error);
  EXPECT_THROW(RateGrid(0.6), Error);
}

TEST(SearchSpace, TiesShareAxes) {
  const SearchSpace s(3, {{0, 1}});
  EXPECT_EQ(s.dimension(), 2u);
  EXPECT_EQ(s.axis_colors(0), (std::vector<std::size_t>{0, 1}));
  const std::vector<double> coords{0.2, 0.4};
  const auto r = s.expand(coords);
  EXPECT_EQ(r[0], 0.2);
  EXPECT_EQ(r[1], 0.2);
  EXPECT_EQ(r[2], 0.4);
  EXPECT_THROW(SearchSpace(3, {{0, 5}}), Error);
}

TEST(Frontier, EqualsExhaustiveScan) {
  Rng rng(31);
  const std::vector<std::size_t> sizes{800, 1200};
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = random_moments(rng, sizes);
    FrontierOptions opt;
    opt.grid_step = 0.05;
    const auto f = multi_threshold(m, sizes, 5, opt);
    const RateGrid grid(0.05);
    const auto expected = oracle::exhaustive_minimal(3, grid.last(), [&](const std::vector<std::size_t>& idx) {
      const RateTuple r{grid.value(idx[0]), grid.value(idx[1]), grid.value(idx[2])};
      return epidemic_indicator(m, sizes, r, 5).theta >= 1.0;
    });
    std::vector<std::vector<double>> want;
    for (const auto& idx : expected) want.push_back({grid.value(idx[0]), grid.value(idx[1]), grid.value(idx[2])});
    std::vector<std::vector<double>> got;
    for (const auto& p : f.points) got.push_back(p.coordinates);
    std::sort(want.begin(), want.end());
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, want) << "trial " << trial;
    EXPECT_TRUE(is_antichain(f));
  }
}

TEST(Frontier, MinimalityAndEpidemic) {
  Rng rng(8);
  const std::vector<std::size_t> sizes{1000, 1000};
  const RateGrid grid(0.02);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = random_moments(rng, sizes);
    FrontierOptions opt;
    opt.grid_step = 0.02;
    const auto f = multi_threshold(m, sizes, 5, opt);
    for (const auto& p : f.points) {
      EXPECT_GE(p.theta, 1.0);
      for (std::size_t a = 0; a < 3; ++a) {
        if (p.coordinates[a] == 0.0) continue;
        auto down = p.coordinates;
        const auto k = static_cast<std::size_t>(std::llround(down[a] / 0.02));
        down[a] = grid.value(k - 1);
        EXPECT_LT(epidemic_indicator(m, sizes, RateTuple(down), 5).theta, 1.0);
      }
    }
  }
}

TEST(Frontier, SubcriticalEverywhereGivesEmpty) {
  const std::vector<std::size_t> sizes{100, 100};
  const auto m = moments_from_models(sizes, std::vector<DegreeModel>{{0.1, 0.1}, {0.1, 0.1}, {0.1, 0.1}});
  FrontierOptions opt;
  opt.grid_step = 0.1;
  EXPECT_TRUE(multi_threshold(m, sizes, 5, opt).empty());
}

TEST(Frontier, TiedStrongErMatchesClosedForm) {
  // theta = 3.75 R_beta + 1.5 R_alpha when rows are equal
  const std::vector<std::size_t> sizes{10000, 10000};
  const auto m = moments_from_models(sizes, std::vector<DegreeModel>{er_degree_model(1.5), er_degree_model(6.0),
                                                                    er_degree_model(1.5)});
  FrontierOptions opt;
  opt.grid_step = 0.01;
  opt.ties = {{0, 1}};
  const auto f = multi_threshold(m, sizes, 5, opt);
  ASSERT_FALSE(f.empty());
  for (const auto& p : f.points) {
    EXPECT_EQ(p.coordinates.size(), 2u);
    EXPECT_EQ(p.rates[0], p.rates[1]);
    const double theta = 3.75 * transmissibility(p.coordinates[0], 5) + 1.5 * transmissibility(p.coordinates[1], 5);
    EXPECT_NEAR(p.theta, theta, 1e-9);
  }
}

TEST(Frontier, RefinementTightensAndStaysAntichain) {
  const std::vector<std::size_t> sizes{10000, 10000};
  const auto m = moments_from_models(sizes, std::vector<DegreeModel>{er_degree_model(1.5), er_degree_model(6.0),
                                                                    er_degree_model(1.5)});
  FrontierOptions opt;
  opt.grid_step = 0.05;
  opt.ties = {{0, 1}};
  opt.refine_tolerance = 1e-6;
  const auto f = multi_threshold(m, sizes, 5, opt);
  EXPECT_TRUE(f.refined);
  EXPECT_TRUE(is_antichain(f));
  for (const auto& p : f.points) {
    EXPECT_GE(p.theta, 1.0);
    if (p.coordinates[1] > 0.0) EXPECT_LT(p.theta, 1.0 + 1e-4);
  }
}

TEST(Frontier, ThreadCountDoesNotChangeOutput) {
  Rng rng(4);
  const std::vector<std::size_t> sizes{700, 900};
  const auto m = random_moments(rng, sizes);
  FrontierOptions a;
  a.grid_step = 0.02;
  auto b = a;
  b.threads = 4;
  const auto fa = multi_threshold(m, sizes, 5, a);
  const auto fb = multi_threshold(m, sizes, 5, b);
  ASSERT_EQ(fa.points.size(), fb.points.size());
  for (std::size_t i = 0; i < fa.points.size(); ++i) {
    EXPECT_EQ(fa.points[i].coordinates, fb.points[i].coordinates);
    EXPECT_EQ(fa.points[i].theta, fb.points[i].theta);
  }
}

TEST(Frontier, GenericPredicateOnFourColors) {
  // theta = sum of rates, frontier is the simplex slice sum >= 1 at coarse step
  FrontierOptions opt;
  opt.grid_step = 0.25;
  const auto f = multi_threshold(
      [](const RateTuple& r) {
        double s = 0;
        for (double v : r.values()) s += v;
        return s;
      },
      4, opt);
  for (const auto& p : f.points) {
    double s = 0;
    for (double v : p.coordinates) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  // compositions of 4 quarters into 4 parts
  EXPECT_EQ(f.points.size(), 35u);
}
