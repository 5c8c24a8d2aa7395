#include <doctest.h>

#include <filesystem>
#include <regex>

#include <json.hpp>

#include "cli_runner.hpp"

using json = nlohmann::json;
using densideal::testing::run_cli;

namespace {

const std::string kCli = DENSIDEAL_CLI_PATH;
const std::string kScratch = DENSIDEAL_CLI_SCRATCH;

json run_json(const std::string& args) {
  auto r = run_cli(kCli, args);
  REQUIRE(r.exit_code == 0);
  return json::parse(r.output);
}

// every string under a key named like a rational is "num/den"
void check_rationals(const json& j) {
  static const std::regex frac("-?[0-9]+/[0-9]+");
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (v.is_string() && (k == "value" || k == "delta" || k == "max" || k == "final" || k == "sigma")) {
        CHECK(std::regex_match(v.get<std::string>(), frac));
      }
      check_rationals(v);
    }
  } else if (j.is_array()) {
    for (const auto& v : j) check_rationals(v);
  }
}

}  // namespace

TEST_CASE("corpus invocations exit as expected and repeat byte for byte") {
  std::filesystem::create_directories(kScratch);
  auto corpus = densideal::testing::read_corpus(DENSIDEAL_CLI_CORPUS, kScratch);
  REQUIRE(corpus.size() >= 40);
  for (const auto& c : corpus) {
    CAPTURE(c.args);
    auto first = run_cli(kCli, c.args);
    auto second = run_cli(kCli, c.args);
    CHECK(first.exit_code == c.expected_exit);
    CHECK(first.output == second.output);
  }
}

TEST_CASE("gallery emit and the increasing-invariance probe") {
  auto g = run_json("gallery emit eu_not_ii --format json");
  CHECK(g["measures"]["name"] == "eu_blocks");
  CHECK(g["B"]["kind"] == "factorial_band");
  CHECK(g["C"]["from"] == "2");

  auto p = run_json("probe increasing-invariance --gallery eu_not_ii --horizon 120960 --delta 1/2");
  CHECK(p["classification"] == "CounterexampleEvidence");
  CHECK(p["domination"]["holds"] == true);
  check_rationals(p);

  auto nu = run_json("probe increasing-invariance --gallery iso_pair --second --horizon '2*(0!+1!+2!+3!+4!+5!+6!+7!+8!)'");
  auto mu = run_json("probe increasing-invariance --gallery iso_pair --horizon '2*(0!+1!+2!+3!+4!+5!+6!+7!+8!)'");
  CHECK(nu["classification"] == "CounterexampleEvidence");
  CHECK(mu["classification"] == "NoEvidence");
}

TEST_CASE("weight synthesis on uniform doubling blocks writes its trace") {
  std::filesystem::create_directories(kScratch);
  std::string trace = kScratch + "/trace_test.json";
  std::filesystem::remove(trace);
  auto out = run_json("construct weight-from-measures --measures uniform_doubling --blocks 6 --trace " + trace);
  REQUIRE(out["block_ends"].size() == 6);
  for (std::size_t n = 0; n < 6; ++n) CHECK(out["block_ends"][n]["g"] == std::to_string(4ul << n));
  CHECK(out["trace_check"] == "ok");
  std::ifstream f(trace);
  json t = json::parse(f);
  CHECK(t["blocks"].size() == 6);
  CHECK(t["blocks"][2]["r"] == "1");
}

TEST_CASE("configuration file values yield to flags") {
  std::filesystem::create_directories(kScratch);
  std::string cfg = kScratch + "/density.ini";
  {
    std::ofstream f(cfg);
    f << "format=csv\n[density]\nset=omega\nweight=n+1\ncheckpoints=\"10,100\"\n";
  }
  auto csv = run_cli(kCli, "--config " + cfg + " density");
  CHECK(csv.exit_code == 0);
  CHECK(csv.output == "series,n,value,value_decimal\ndensity,10,10/11,0.909090909090\n"
                      "density,100,100/101,0.990099009900\n");
  auto flagged = run_cli(kCli, "--config " + cfg + " density --format json --checkpoints 4");
  CHECK(flagged.exit_code == 0);
  auto j = json::parse(flagged.output);
  CHECK(j["verdict"]["evidence"]["points"].size() == 1);
  CHECK(j["verdict"]["evidence"]["points"][0]["value"] == "4/5");
}

TEST_CASE("usage errors print the usage text") {
  auto r = run_cli(kCli, "density --set omega --weight n+1 --checkpoints 10 --frobnicate");
  CHECK(r.exit_code == 64);
  CHECK(r.output.find("Usage:") != std::string::npos);
  auto v = run_cli(kCli, "gallery emit no_such_example");
  CHECK(v.exit_code == 2);
  CHECK(v.output.find("unknown gallery example") != std::string::npos);
}
