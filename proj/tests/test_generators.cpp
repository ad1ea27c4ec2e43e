#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "mdthresh/generators.hpp"
#include "mdthresh/threshold.hpp"

using namespace mdthresh;

TEST(Rng, DeriveSeedSeparatesStreams) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 2));
  EXPECT_EQ(derive_seed(7, tag_id("layer"), 0), derive_seed(7, tag_id("layer"), 0));
}

TEST(Rng, BelowIsUniformEnough) {
  Rng rng(5);
  std::vector<int> counts(6, 0);
  for (int i = 0; i < 60000; ++i) ++counts[rng.below(6)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
}

TEST(Rng, UniformInUnitInterval) {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(ErLayer, ExactEdgeCountSimpleAndDeterministic) {
  const auto a = gen_er_layer(1000, 6.0, 42);
  EXPECT_EQ(a.size(), 3000u);
  std::set<std::pair<NodeIndex, NodeIndex>> seen;
  for (const auto& [u, v] : a) {
    EXPECT_LT(u, v);
    EXPECT_LT(v, 1000u);
    EXPECT_TRUE(seen.insert({u, v}).second);
  }
  EXPECT_EQ(a, gen_er_layer(1000, 6.0, 42));
  EXPECT_NE(a, gen_er_layer(1000, 6.0, 43));
}

TEST(ErLayer, DegenerateAndTooDense) {
  EXPECT_TRUE(gen_er_layer(10, 0.0, 1).empty());
  EXPECT_EQ(gen_er_layer(10, 9.0, 1).size(), 45u);
  try {
    gen_er_layer(10, 9.5, 1);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MeanDegreeTooLarge);
  }
}

TEST(ErLayer, PoissonExcessRatio) {
  for (double mean : {1.5, 6.0}) {
    const std::uint64_t n = 5000;
    const auto edges = gen_er_layer(n, mean, 17);
    std::vector<double> deg(n, 0.0);
    for (const auto& [u, v] : edges) {
      ++deg[u];
      ++deg[v];
    }
    double m1 = 0, m2 = 0;
    for (double d : deg) {
      m1 += d;
      m2 += d * d;
    }
    m1 /= n;
    m2 /= n;
    EXPECT_NEAR((m2 - m1) / m1, m1, 0.1 * m1);
  }
}

TEST(Interlayer, CountsAndRange) {
  const auto e = gen_er_interlayer(300, 200, 1.5, 8);
  EXPECT_EQ(e.size(), 375u);
  std::set<std::pair<NodeIndex, NodeIndex>> seen;
  for (const auto& [a, b] : e) {
    EXPECT_LT(a, 300u);
    EXPECT_LT(b, 200u);
    EXPECT_TRUE(seen.insert({a, b}).second);
  }
  try {
    gen_er_interlayer(2, 2, 3.0, 1);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MeanDegreeTooLarge);
  }
}

TEST(PowerLaw, NaturalCutoff) {
  EXPECT_EQ(PowerLawSpec::with_natural_cutoff(2.9, 1, 1500).y_max, 46u);
  EXPECT_EQ(PowerLawSpec::with_natural_cutoff(2.1, 1, 1500).y_max, 771u);
  EXPECT_EQ(PowerLawSpec::with_natural_cutoff(3.0, 2, 100).y_max, 20u);
}

TEST(PowerLaw, RejectsBadExponent) {
  try {
    PowerLawSpec::with_natural_cutoff(1.0, 1, 100);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DomainError);
  }
}

TEST(PowerLaw, SequenceWithinBoundsAndEven) {
  const auto spec = PowerLawSpec::with_natural_cutoff(2.1, 1, 1500);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto d = sample_powerlaw_sequence(spec, rng);
    ASSERT_EQ(d.size(), 1500u);
    std::uint64_t sum = 0;
    for (auto x : d) {
      EXPECT_GE(x, spec.y_min);
      EXPECT_LE(x, spec.y_max);
      sum += x;
    }
    EXPECT_EQ(sum % 2, 0u);
  }
}

TEST(PowerLaw, SampleMeanNearAnalytic) {
  for (double gamma : {2.9, 2.1}) {
    const auto spec = PowerLawSpec::with_natural_cutoff(gamma, 1, 1500);
    const auto analytic = powerlaw_moments(gamma, spec.y_min, spec.y_max);
    double mean = 0.0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
      Rng rng(static_cast<std::uint64_t>(s));
      const auto d = sample_powerlaw_sequence(spec, rng);
      mean += static_cast<double>(std::accumulate(d.begin(), d.end(), std::uint64_t{0})) / 1500.0;
    }
    mean /= seeds;
    EXPECT_NEAR(mean, analytic.mean, 0.15 * analytic.mean) << "gamma " << gamma;
  }
}

TEST(PowerLaw, WiredLayerIsSimpleAndKeepsDegrees) {
  const auto spec = PowerLawSpec::with_natural_cutoff(2.1, 1, 1500);
  const auto edges = gen_powerlaw_layer(spec, 4);
  std::set<std::pair<NodeIndex, NodeIndex>> seen;
  for (const auto& [u, v] : edges) {
    EXPECT_NE(u, v);
    EXPECT_TRUE(seen.insert({std::min(u, v), std::max(u, v)}).second);
  }
  Rng rng(4);
  const auto degrees = sample_powerlaw_sequence(spec, rng);
  std::vector<std::uint64_t> wired(1500, 0);
  for (const auto& [u, v] : edges) {
    ++wired[u];
    ++wired[v];
  }
  EXPECT_EQ(wired, degrees);
  EXPECT_EQ(edges, gen_powerlaw_layer(spec, 4));
}

TEST(PowerLaw, ImpossibleSequenceFails) {
  for (const PowerLawSpec spec : {PowerLawSpec{2.5, 1, 3, 1}, PowerLawSpec{2.5, 1, 5, 5}}) {
    try {
      gen_powerlaw_layer(spec, 0);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::WiringFailed);
    }
  }
}

TEST(Network, ColorsAndSizes) {
  NetworkSpec spec{{ErLayerSpec{400, 1.5}, PowerLawLayerSpec{2.9, 1, 300}}, {{0, 1, 1.5}}};
  const auto g = generate_network(spec, 9);
  EXPECT_EQ(g.layer_size(0), 400u);
  EXPECT_EQ(g.layer_size(1), 300u);
  EXPECT_EQ(g.edge_count(0), 300u);
  EXPECT_EQ(g.edge_count(2), 525u);
  EXPECT_EQ(g, generate_network(spec, 9));
  EXPECT_FALSE(g == generate_network(spec, 10));
}

TEST(Network, LayerStreamsAreIndependent) {
  // Changing the interconnection must not perturb the layer edges.
  const auto a = generate_network({{ErLayerSpec{200, 2.0}, ErLayerSpec{200, 3.0}}, {{0, 1, 0.5}}}, 1);
  const auto b = generate_network({{ErLayerSpec{200, 2.0}, ErLayerSpec{200, 3.0}}, {{0, 1, 2.5}}}, 1);
  std::vector<Edge> la, lb;
  for (const auto& e : a.edges())
    if (e.color != 2) la.push_back(e);
  for (const auto& e : b.edges())
    if (e.color != 2) lb.push_back(e);
  EXPECT_EQ(la, lb);
}
