#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "hetnids/cli/config.hpp"

using namespace hetnids;

namespace {

nlohmann::json minimal_synth() {
  nlohmann::json j;
  j["mode"] = "synthetic";
  return j;
}

std::string write_fixture_csv(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "hetnids_tests";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream out(path);
  out << "Protocol,Flow_Duration,multilabel\n1,2,NORMAL\n3,4,DoS\n";
  return path.string();
}

}  // namespace

TEST_CASE("minimal synthetic config fills every default") {
  const ExperimentConfig cfg = config_from_json(minimal_synth());
  CHECK(cfg.mode == "synthetic");
  CHECK(cfg.runs == 5);
  CHECK(cfg.base_seed == 1);
  CHECK(cfg.fractions == std::vector<double>{1.0});
  CHECK(cfg.train.alpha == 1.0);
  CHECK(cfg.train.beta == 1.0);
  CHECK(cfg.train.latent_dim == 32);
  CHECK(cfg.train.max_cycles == 1000);
  CHECK(cfg.train.epochs_per_phase == 2);
  CHECK(cfg.input.synth.has_value());
  CHECK(cfg.input.synth->latent_dim == 4);
  CHECK(cfg.input.synth->dims == std::array<int, 2>{5, 20});
  // the echo round-trips through json and carries the defaults
  const nlohmann::json echo = nlohmann::json::parse(cfg.echo);
  CHECK(echo.at("runs") == 5);
  CHECK(echo.at("train").at("alpha") == 1.0);
  CHECK(echo.at("train").at("max_cycles") == 1000);
}

TEST_CASE("unknown keys are rejected with their path") {
  nlohmann::json j = minimal_synth();
  j["trian"] = nlohmann::json::object();
  CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("trian"), std::invalid_argument);

  nlohmann::json j2 = minimal_synth();
  j2["train"] = {{"alpah", 1.0}};
  CHECK_THROWS_WITH_AS(config_from_json(j2), doctest::Contains("train.alpah"),
                       std::invalid_argument);
}

TEST_CASE("constraint violations carry the key") {
  nlohmann::json j = minimal_synth();
  j["runs"] = 0;
  CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("runs"), std::invalid_argument);
  nlohmann::json j2 = minimal_synth();
  j2["train"] = {{"batch_size", 1}};
  CHECK_THROWS_WITH_AS(config_from_json(j2), doctest::Contains("train"), std::invalid_argument);
}

TEST_CASE("csv mode validation") {
  const std::string csv_path = write_fixture_csv("cfg_fixture.csv");
  nlohmann::json j;
  j["mode"] = "csv";
  j["csv"] = {{"datasets", {{{"name", "CIC17"}, {"path", csv_path}}}}};
  SUBCASE("sr_id and explicit lists are mutually exclusive") {
    j["combination"] = {{"sr_id", 6}, {"feature_id_lists", {{1, 2}, {3, 4}}}};
    CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("exactly one"),
                         std::invalid_argument);
  }
  SUBCASE("neither sr_id nor lists is also an error") {
    j["combination"] = nlohmann::json::object();
    CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
  }
  SUBCASE("a two-dataset combination needs two csv paths") {
    j["combination"] = {{"sr_id", 14}};
    CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("Sr#14 requires 2 datasets"),
                         std::invalid_argument);
  }
  SUBCASE("single-dataset combinations work with one csv path") {
    j["combination"] = {{"sr_id", 6}};
    const ExperimentConfig cfg = config_from_json(j);
    CHECK(cfg.input.combination->feature_id_lists.size() == 2);
    CHECK(cfg.input.combination->dataset_names ==
          std::vector<std::string>{"CIC17", "CIC17"});
  }
  SUBCASE("missing files are rejected at validation time") {
    j["csv"] = {{"datasets", {{{"name", "CIC17"}, {"path", "/nonexistent/x.csv"}}}}};
    j["combination"] = {{"sr_id", 6}};
    CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("does not exist"),
                         std::invalid_argument);
  }
  SUBCASE("explicit lists need one dataset entry per list") {
    j["combination"] = {{"feature_id_lists", {{1, 2}, {3, 4}}}};
    CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("one csv dataset entry per list"),
                         std::invalid_argument);
  }
  SUBCASE("synth section is rejected in csv mode") {
    j["combination"] = {{"sr_id", 6}};
    j["synth"] = {{"latent_dim", 4}};
    CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
  }
}

TEST_CASE("parse_config reads a file and rejects bad json") {
  const auto dir = std::filesystem::temp_directory_path() / "hetnids_tests";
  std::filesystem::create_directories(dir);
  const auto good = dir / "good_config.json";
  {
    std::ofstream out(good);
    out << minimal_synth().dump();
  }
  CHECK(parse_config(good.string()).mode == "synthetic");
  const auto bad = dir / "bad_config.json";
  {
    std::ofstream out(bad);
    out << "{not json";
  }
  CHECK_THROWS_AS(parse_config(bad.string()), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("/nonexistent/config.json"), std::invalid_argument);
}

TEST_CASE("kernel policy parsing") {
  nlohmann::json j = minimal_synth();
  j["train"] = {{"kernel", {{"policy", "mixture"}, {"mixture_multipliers", {0.5, 1.0, 2.0}}}}};
  const ExperimentConfig cfg = config_from_json(j);
  CHECK(cfg.train.kernel.policy == BandwidthPolicy::kMixture);
  CHECK(cfg.train.kernel.mixture_multipliers == std::vector<double>{0.5, 1.0, 2.0});

  nlohmann::json j2 = minimal_synth();
  j2["train"] = {{"kernel", {{"policy", "nonsense"}}}};
  CHECK_THROWS_WITH_AS(config_from_json(j2), doctest::Contains("train.kernel"),
                       std::invalid_argument);
}
