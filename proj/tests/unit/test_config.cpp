#include "hjlab/config.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace hjlab;
using nlohmann::json;

namespace {

std::string pointer_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.pointer();
  }
  return "<accepted>";
}

}  // namespace

TEST_CASE("minimal config populates the documented defaults") {
  const ExperimentConfig cfg = parse_config(json::object());
  CHECK(cfg.N == 512);
  CHECK(cfg.tau == 0.01);
  CHECK(cfg.T == 30.0);
  CHECK(cfg.preset == "mechanical");
  CHECK(cfg.potential == "cos");
  CHECK(cfg.R_schedule == std::vector<double>{4.0, 8.0});
  CHECK(cfg.initial_data.size() == 4);
  CHECK(cfg.initial_data[3].seed.has_value());
  CHECK_FALSE(cfg.v_max_override.has_value());
}

TEST_CASE("config errors name the JSON pointer") {
  try {
    parse_config(json{{"R_schedule", {8, 4}}});
    FAIL("accepted a descending schedule");
  } catch (const ConfigError& e) {
    CHECK(e.pointer() == "/R_schedule");
    CHECK(std::string(e.what()).find("R_schedule not ascending") != std::string::npos);
  }
  CHECK(pointer_of(json{{"taus", 0.01}}) == "/taus");
  CHECK(pointer_of(json{{"N", "512"}}) == "/N");
  CHECK(pointer_of(json{{"N", 4}}) == "/N");
  CHECK(pointer_of(json{{"tau", 0}}) == "/tau");
  CHECK(pointer_of(json{{"R_schedule", {0.5, 4}}}) == "/R_schedule/0");
  CHECK(pointer_of(json{{"R_schedule", json::array()}}) == "/R_schedule");
  CHECK(pointer_of(json{{"preset", "quartic"}}) == "/preset");
  CHECK(pointer_of(json{{"potential", "cos-2d"}}) == "/potential");
  CHECK(pointer_of(json{{"tolerances", {{"flatnes", 0.1}}}}) == "/tolerances/flatnes");
  CHECK(pointer_of(json{{"initial_data", {{{"name", "random-nodal"}}}}}) == "/initial_data/0/seed");
  CHECK(pointer_of(json{{"initial_data", {{{"name", "cosine"}, {"seed", 3}}}}}) == "/initial_data/0/seed");
  CHECK(pointer_of(json{{"initial_data", {{{"name", "cosine"}}, {{"name", "cosine"}}}}}) == "/initial_data/1/id");
  CHECK(pointer_of(json{{"initial_data", {{{"name", "blob"}}}}}) == "/initial_data/0/name");
  CHECK(pointer_of(json{{"a/b", 1}}) == "/a~1b");
  CHECK(pointer_of(json{{"subgrid_refinement", 1}}) == "/subgrid_refinement");
  CHECK(pointer_of(json::array()) == "");
}

TEST_CASE("explicit values are kept and round trip through to_json") {
  const json doc = {
      {"preset", "coercive-nonsuperlinear"},
      {"potential", "cos-2d"},
      {"dim", 2},
      {"N", 64},
      {"tau", 0.02},
      {"T", 5},
      {"R_schedule", {2, 3.5}},
      {"v_max_override", 2.5},
      {"initial_data", {{{"name", "holder"}, {"exponent", 0.5}, {"center", {0.1, 0.2}}},
                        {{"name", "random-nodal"}, {"seed", 99}, {"knots", 8}, {"id", "rn"}}}},
      {"tolerances", {{"window", 5}}},
      {"sample_every", 2},
      {"subgrid_refinement", true},
  };
  const ExperimentConfig cfg = parse_config(doc);
  CHECK(cfg.dim == 2);
  CHECK(*cfg.v_max_override == 2.5);
  CHECK(cfg.initial_data[0].exponent == 0.5);
  CHECK(*cfg.initial_data[1].seed == 99);
  CHECK(cfg.tolerances.window == 5);
  CHECK(cfg.subgrid_refinement);
  CHECK(cfg.tolerances.flatness == 0.05);
  const ExperimentConfig again = parse_config(cfg.to_json());
  CHECK(again.to_json() == cfg.to_json());
}

TEST_CASE("config files") {
  const auto dir = std::filesystem::temp_directory_path() / "hjlab_config_test";
  std::filesystem::create_directories(dir);
  const auto good = dir / "good.json";
  std::ofstream(good) << R"({"N": 128, "T": 2})";
  CHECK(parse_config(good).N == 128);
  const auto bad = dir / "bad.json";
  std::ofstream(bad) << "{not json";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  CHECK_THROWS_AS(parse_config(dir / "missing.json"), ConfigError);
  std::filesystem::remove_all(dir);
}
