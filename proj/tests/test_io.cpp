#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mdthresh/experiment.hpp"

using namespace mdthresh;
namespace fs = std::filesystem;

namespace {

Errc parse_code(const std::string& text) {
  std::istringstream in(text);
  try {
    read_edge_list(in);
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::ConfigError;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("mdthresh_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const char* kSmallConfig = R"(# small ER pair
network.layer.1.model = er
network.layer.1.n = 200
network.layer.1.mean = 1.5
network.layer.2.model = er
network.layer.2.n = 200
network.layer.2.mean = 6
network.inter.1.2.mean = 1.5
analysis.grid_step = 0.1
analysis.tie = 1=2
simulation.realizations = 2
simulation.seed_policy = per-layer:1,1
simulation.beta_grid = 0:0.3:0.1
simulation.alpha_grid = 0.1,0.2
simulation.dynamics = 0.1:0.1;0.3:0.05
run.master_seed = 5
)";

}  // namespace

TEST(EdgeList, ParsesHeaderCommentsAndColors) {
  std::istringstream in("# comment\n#layers 3 2\n0 0 0 1\n\n0 2   1 1\n1 0 1 1\n");
  const auto g = read_edge_list(in);
  EXPECT_EQ(g.layer_size(0), 3u);
  EXPECT_EQ(g.layer_size(1), 2u);
  EXPECT_EQ(g.edge_count(0), 1u);
  EXPECT_EQ(g.edge_count(1), 1u);
  EXPECT_EQ(g.edge_count(2), 1u);
}

TEST(EdgeList, Errors) {
  EXPECT_EQ(parse_code(""), Errc::ParseError);
  EXPECT_EQ(parse_code("0 0 0 1\n#layers 2\n"), Errc::ParseError);
  EXPECT_EQ(parse_code("#layers 2\n0 0 0\n"), Errc::ParseError);
  EXPECT_EQ(parse_code("#layers 2\n0 x 0 1\n"), Errc::ParseError);
  EXPECT_EQ(parse_code("#layers 2\n0 0 3 1\n"), Errc::ParseError);
  EXPECT_EQ(parse_code("#layers 2\n#layers 2\n"), Errc::ParseError);
  EXPECT_EQ(parse_code("#layers 2\n0 0 0 2\n"), Errc::UnknownNode);
  EXPECT_EQ(parse_code("#layers 2\n0 0 0 0\n"), Errc::SelfLoop);
  EXPECT_EQ(parse_code("#layers 2\n0 0 0 1\n0 1 0 0\n"), Errc::DuplicateEdge);
}

TEST(EdgeList, LineNumberInMessage) {
  std::istringstream in("#layers 2\n0 0 0 1\n0 0 q 1\n");
  try {
    read_edge_list(in, "f.txt");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("f.txt:3"), std::string::npos) << e.what();
  }
}

TEST(EdgeList, HeaderOnlyIsEmptyGraph) {
  std::istringstream in("#layers 4 4\n");
  const auto g = read_edge_list(in);
  EXPECT_EQ(g.node_count(), 8u);
  EXPECT_TRUE(g.edges().empty());
}

TEST(EdgeList, RoundTrip) {
  NetworkSpec spec{{ErLayerSpec{300, 2.0}, PowerLawLayerSpec{2.5, 1, 250}}, {{0, 1, 1.0}}};
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto g = generate_network(spec, seed);
    std::stringstream buf;
    write_edge_list(buf, g);
    EXPECT_EQ(read_edge_list(buf), g);
  }
}

TEST(EdgeList, PolblogsShapedSummary) {
  // Synthetic graph with the published layer sizes and edge counts.
  const std::vector<std::size_t> sizes{759, 735};
  std::vector<ColoredEdge> edges;
  const auto add = [&](std::uint32_t la, std::uint32_t lb, std::size_t count, std::uint64_t seed) {
    const auto set = la == lb ? gen_er_layer(sizes[la], 2.0 * static_cast<double>(count) / sizes[la], seed)
                              : gen_er_interlayer(sizes[la], sizes[lb], 2.0 * static_cast<double>(count) / (759 + 735), seed);
    for (const auto& [a, b] : set) edges.push_back({{la, a}, {lb, b}, ColorTable(2).between(la, lb)});
  };
  add(0, 0, 7303, 1);
  add(1, 1, 7841, 2);
  add(0, 1, 1575, 3);
  const auto g = build_graph(sizes, edges);
  std::stringstream buf;
  write_edge_list(buf, g);
  const auto s = summarize(read_edge_list(buf));
  EXPECT_EQ(s.edges_per_color, (std::vector<std::size_t>{7303, 7841, 1575}));
  EXPECT_EQ(s.color_names[2], "L1-L2");
  std::ostringstream printed;
  print_summary(printed, s);
  EXPECT_NE(printed.str().find("7841 edges"), std::string::npos);
}

TEST(Csv, FormatsAndManifestReference) {
  EXPECT_EQ(format_number(0.15), "0.15");
  EXPECT_EQ(format_number(1.0), "1");
  FrontierSet f;
  f.points.push_back({{0.1, 0.2}, RateTuple{0.1, 0.1, 0.2}, 1.5});
  std::ostringstream out;
  write_frontier_csv(out, f, 3, "manifest.txt");
  EXPECT_EQ(out.str(), "beta_1,beta_2,beta_3,theta\n0.1,0.1,0.2,1.5\n# manifest: manifest.txt\n");
}

TEST(Config, KeyValueGrammar) {
  std::istringstream ok("# c\n a = 1 \nb=two words\n\n");
  const auto kv = parse_key_values(ok);
  EXPECT_EQ(kv.at("a"), "1");
  EXPECT_EQ(kv.at("b"), "two words");
  std::istringstream dup("a = 1\na = 2\n");
  EXPECT_THROW(parse_key_values(dup), Error);
  std::istringstream bad("just text\n");
  EXPECT_THROW(parse_key_values(bad), Error);
}

TEST(Config, ValueGrammars) {
  EXPECT_EQ(parse_rate_grid("k", "0:0.3:0.1"), (std::vector<double>{0.0, 0.1, 0.2, 0.3}));
  EXPECT_EQ(parse_rate_grid("k", "0.05, 0.3"), (std::vector<double>{0.05, 0.3}));
  EXPECT_EQ(parse_rate_grid("k", "0:0.3:0.01").size(), 31u);
  EXPECT_THROW(parse_rate_grid("k", "0:2:0.5"), Error);
  EXPECT_EQ(parse_ties("k", "1=2"), (std::vector<std::vector<std::size_t>>{{0, 1}}));
  EXPECT_EQ(parse_ties("k", "beta1=beta2"), (std::vector<std::vector<std::size_t>>{{0, 1}}));
  EXPECT_EQ(parse_ties("k", "\xCE\xB2" "1=\xCE\xB2" "2;3=4=5").size(), 2u);
  EXPECT_THROW(parse_ties("k", "0=1"), Error);
  const auto p = parse_seed_policy("k", "per-layer:1,2");
  ASSERT_TRUE(std::holds_alternative<PerLayerSeeds>(p));
  EXPECT_EQ(std::get<PerLayerSeeds>(p).counts, (std::vector<std::size_t>{1, 2}));
  const auto nodes = parse_seed_policy("k", "nodes:0:3,1:7");
  ASSERT_TRUE(std::holds_alternative<ExplicitSeeds>(nodes));
  EXPECT_EQ(std::get<ExplicitSeeds>(nodes).nodes[1].index, 7u);
  EXPECT_EQ(std::get<UniformSeeds>(parse_seed_policy("k", "uniform:4")).count, 4u);
  EXPECT_THROW(parse_seed_policy("k", "random"), Error);
  const auto s = parse_settings("k", "0.3:0.05; 0.1:0.2");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].alpha, 0.05);
}

TEST(Config, UnknownKeysAreListed) {
  std::istringstream in(std::string(kSmallConfig) + "analysis.colour = 3\nfoo = 1\n");
  try {
    parse_experiment_config(parse_key_values(in));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ConfigError);
    const std::string what = e.what();
    EXPECT_NE(what.find("analysis.colour"), std::string::npos);
    EXPECT_NE(what.find("foo"), std::string::npos);
  }
}

TEST(Config, NetworkSourceRules) {
  std::istringstream both(std::string(kSmallConfig) + "network.file = x.txt\n");
  const auto cfg = parse_experiment_config(parse_key_values(both));
  EXPECT_THROW(validate(cfg), Error);
  std::istringstream none("analysis.tau = 5\n");
  EXPECT_THROW(validate(parse_experiment_config(parse_key_values(none))), Error);
  std::istringstream missing("network.file = /nonexistent/graph.txt\n");
  EXPECT_THROW(validate(parse_experiment_config(parse_key_values(missing))), Error);
  std::istringstream bad_layer("network.layer.1.model = er\nnetwork.layer.1.n = 10\nnetwork.layer.1.gamma = 2\n");
  EXPECT_THROW(parse_experiment_config(parse_key_values(bad_layer)), Error);
}

TEST(Config, ParsesGeneratorSpec) {
  std::istringstream in(kSmallConfig);
  const auto cfg = parse_experiment_config(parse_key_values(in));
  validate(cfg);
  ASSERT_TRUE(cfg.generator);
  ASSERT_EQ(cfg.generator->layers.size(), 2u);
  EXPECT_EQ(std::get<ErLayerSpec>(cfg.generator->layers[1]).mean_degree, 6.0);
  EXPECT_EQ(cfg.generator->interconnections[0].mean_degree, 1.5);
  EXPECT_EQ(cfg.analysis.ties.size(), 1u);
  EXPECT_EQ(cfg.simulation.beta_grid.size(), 4u);
  EXPECT_EQ(cfg.master_seed, 5u);
}

TEST(Experiment, WritesAllFilesAndIsReproducible) {
  const auto dir_a = scratch("a");
  const auto dir_b = scratch("b");
  std::istringstream in(kSmallConfig);
  auto cfg = parse_experiment_config(parse_key_values(in));
  cfg.output_dir = dir_a.string();
  const auto out = run_experiment(cfg);
  EXPECT_EQ(out.files.size(), 5u);
  for (const char* name : {"frontier.csv", "sweep.csv", "dynamics.csv", "dynamics_cumulative.csv", "manifest.txt"})
    EXPECT_TRUE(fs::exists(dir_a / name)) << name;

  // sweep rows = grid cells, plus header and manifest reference
  std::istringstream sweep(slurp(dir_a / "sweep.csv"));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(sweep, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u * 2u + 2u);
  EXPECT_EQ(lines.front(), "beta,alpha,density_L1,density_L2,density_all");
  EXPECT_EQ(lines.back(), "# manifest: manifest.txt");
  EXPECT_NE(slurp(dir_a / "manifest.txt").find("master_seed = 5"), std::string::npos);

  cfg.output_dir = dir_b.string();
  cfg.threads = 3;
  run_experiment(cfg);
  for (const char* name : {"frontier.csv", "sweep.csv", "dynamics.csv", "dynamics_cumulative.csv"})
    EXPECT_EQ(slurp(dir_a / name), slurp(dir_b / name)) << name;
}

TEST(Experiment, GraphFileSource) {
  const auto dir = scratch("file");
  const auto g = generate_network({{ErLayerSpec{150, 2.0}, ErLayerSpec{150, 4.0}}, {{0, 1, 1.0}}}, 3);
  save_graph((dir / "g.txt").string(), g);
  std::istringstream in("network.file = " + (dir / "g.txt").string() +
                        "\nanalysis.grid_step = 0.1\nsimulation.realizations = 1\nsimulation.beta_grid = 0.1\n"
                        "simulation.alpha_grid = 0.1\nsimulation.dynamics = 0.1:0.1\noutput.dir = " +
                        (dir / "out").string() + "\n");
  const auto cfg = parse_experiment_config(parse_key_values(in));
  EXPECT_EQ(materialize_network(cfg), g);
  EXPECT_EQ(resolved_route(cfg, 2), "closed-form");
  run_experiment(cfg);
  EXPECT_TRUE(fs::exists(dir / "out" / "frontier.csv"));
}

TEST(Experiment, AnalyticMomentsFromSpec) {
  NetworkSpec spec{{ErLayerSpec{1500, 1.5}, PowerLawLayerSpec{2.1, 1, 1500}}, {{0, 1, 6.0}}};
  const auto m = analytic_moments(spec);
  EXPECT_EQ(m.colors[0].mean_restricted, 1.5);
  EXPECT_NEAR(m.colors[1].mean_restricted, 5.34168, 1e-5);
  EXPECT_EQ(m.colors[2].mean_restricted, 6.0);
  EXPECT_EQ(m.colors[2].population_restricted, 3000u);
}
