#include "fairgi/config.hpp"
#include "test_support.hpp"

namespace fairgi {
namespace {

using nlohmann::json;
using testing::TempDir;

TEST(Config, PresetsMatchPublishedSettings) {
  const TrainConfig nba = preset_config("nba");
  EXPECT_EQ(nba.alpha, 1e-9);
  EXPECT_EQ(nba.beta, 0.01);
  EXPECT_EQ(nba.lambdas, (std::vector<double>{0.5, 1.0}));
  EXPECT_EQ(nba.eta, 16.0);
  EXPECT_EQ(nba.sensitive_budget, 50u);
  EXPECT_EQ(nba.learning_rate, 0.001);
  const TrainConfig credit = preset_config("credit");
  EXPECT_EQ(credit.alpha, 0.5);
  EXPECT_EQ(credit.beta, 0.8);
  EXPECT_EQ(credit.lambdas, (std::vector<double>{0.5, 1.25}));
  EXPECT_EQ(credit.eta, 6.0);
  EXPECT_EQ(credit.sensitive_budget, 500u);
  const TrainConfig pokec = preset_config("pokec-n");
  EXPECT_EQ(pokec.alpha, 1e-9);
  EXPECT_EQ(pokec.beta, 0.02);
  EXPECT_EQ(pokec.eta, 3.0);
  EXPECT_EQ(pokec.sensitive_budget, 200u);
  EXPECT_EQ(pokec.learning_rate, 0.0005);
  for (const auto& c : {nba, credit, pokec}) {
    EXPECT_EQ(c.gamma_bound, 0.004);
    EXPECT_EQ(c.weight_decay, 1e-5);
  }
  EXPECT_FAIRGI_ERROR(preset_config("cora"), ErrorKind::kConfig);
}

TEST(Config, JsonRoundTrip) {
  RunConfig c;
  c.train.alpha = 0.25;
  c.train.lambdas = {0.1, 0.2};
  c.train.seed = 123456789012345ULL;
  c.train.model.hidden = 17;
  c.train.split = {0.6, 0.2, 0.2};
  c.train.similarity_method = SimilarityMethod::kAdjacencyJaccard;
  c.train.if_epsilon = 0.5;
  c.dataset.name = "toy";
  c.dataset.delimiter = ';';
  c.synthetic = SyntheticConfig{};
  c.synthetic->nodes_per_group = {10, 20};
  const RunConfig back = run_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.train.seed, c.train.seed);
  EXPECT_EQ(back.dataset.delimiter, ';');
  EXPECT_EQ(back.synthetic->nodes_per_group[1], 20);
}

TEST(Config, FileFieldsOverridePreset) {
  const RunConfig c = run_config_from_json(json{{"preset", "nba"}, {"beta", 0.5}, {"model", {{"hidden", 8}}}});
  EXPECT_EQ(c.train.beta, 0.5);
  EXPECT_EQ(c.train.eta, 16.0);
  EXPECT_EQ(c.train.model.hidden, 8);
  EXPECT_EQ(c.train.model.heads, 1);
  EXPECT_EQ(c.dataset.name, "nba");
  EXPECT_EQ(*c.preset, "nba");
}

TEST(Config, UnknownKeysAndBadTypesAreConfigErrors) {
  EXPECT_FAIRGI_ERROR(run_config_from_json(json{{"alpah", 1.0}}), ErrorKind::kConfig);
  EXPECT_FAIRGI_ERROR(run_config_from_json(json{{"model", {{"width", 3}}}}), ErrorKind::kConfig);
  EXPECT_FAIRGI_ERROR(run_config_from_json(json{{"epochs", "ten"}}), ErrorKind::kConfig);
  EXPECT_FAIRGI_ERROR(run_config_from_json(json{{"epochs", 2.5}}), ErrorKind::kConfig);
  EXPECT_FAIRGI_ERROR(run_config_from_json(json{{"seed", -1}}), ErrorKind::kConfig);
  EXPECT_FAIRGI_ERROR(run_config_from_json(json{{"similarity_method", "euclid"}}), ErrorKind::kConfig);
  EXPECT_FAIRGI_ERROR(run_config_from_json(json{{"dataset", {{"delimiter", ";;"}}}}), ErrorKind::kConfig);
  EXPECT_FAIRGI_ERROR(run_config_from_json(json::array()), ErrorKind::kConfig);
}

TEST(Config, ValidationRunsOnLoad) {
  EXPECT_FAIRGI_ERROR(run_config_from_json(json{{"learning_rate", -1.0}}), ErrorKind::kConfig);
  EXPECT_FAIRGI_ERROR(run_config_from_json(json{{"lambdas", {0.5}}}), ErrorKind::kConfig);
  EXPECT_FAIRGI_ERROR(run_config_from_json(json{{"split", {{"train", 0.9}}}}), ErrorKind::kConfig);
}

TEST(Config, FileErrors) {
  TempDir dir;
  EXPECT_FAIRGI_ERROR(load_run_config(dir / "absent.json"), ErrorKind::kConfig);
  testing::write_text(dir / "bad.json", "{\"alpha\": ");
  EXPECT_FAIRGI_ERROR(load_run_config(dir / "bad.json"), ErrorKind::kConfig);
}

TEST(Config, SaveLoadIsStable) {
  TempDir dir;
  RunConfig c = run_config_from_json(json{{"preset", "credit"}, {"epochs", 7}});
  save_run_config(c, dir / "a.json");
  save_run_config(load_run_config(dir / "a.json"), dir / "b.json");
  EXPECT_EQ(testing::read_text(dir / "a.json"), testing::read_text(dir / "b.json"));
}

TEST(Config, HashIsStableAndSensitive) {
  TrainConfig a;
  TrainConfig b;
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b.beta += 1e-12;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, VariantNames) {
  TrainConfig c;
  EXPECT_EQ(variant_name(c), "full");
  c.disable_ifg = true;
  EXPECT_EQ(variant_name(c), "w/o Ifg");
  c.disable_eo_terms = true;
  EXPECT_EQ(variant_name(c), "w/o Ifg, EO");
  c.disable_ifg = false;
  EXPECT_EQ(variant_name(c), "w/o EO");
  c.alpha = c.beta = c.eta = 0.0;
  EXPECT_EQ(variant_name(c), "vanilla");
}

TEST(Config, SchemaForCopiesColumns) {
  DatasetOptions o;
  o.sensitive_column = "gender";
  o.feature_columns = {"a"};
  o.delimiter = '\t';
  const DatasetSchema s = schema_for(o, "/data");
  EXPECT_EQ(s.nodes_path, std::filesystem::path("/data/nodes.csv"));
  EXPECT_EQ(s.edges_path, std::filesystem::path("/data/edges.csv"));
  EXPECT_EQ(s.sensitive_column, "gender");
  EXPECT_EQ(s.feature_columns, std::vector<std::string>{"a"});
  EXPECT_EQ(s.delimiter, '\t');
}

}  // namespace
}  // namespace fairgi
