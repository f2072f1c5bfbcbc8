#include "dexsim/scenario.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace dexsim;
using namespace dexsim::scenario;

namespace {

std::string source(const std::string& rel) { return std::string(DEXSIM_SOURCE_DIR) + "/" + rel; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  std::string cmd = std::string(DEXSIM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Nat fa2_balance(const ChainState& s, const Address& token, const Address& owner) {
  auto st = decode<fa2::State>(*contract_state(s, token));
  return fa2::balance(*st, owner, Nat{0});
}

}  // namespace

TEST(scenario, parse_rejects_malformed_files) {
  const char* bad[] = {
      R"({"users": [)",
      R"({"users": [], "blocks": [], "extra": 1})",
      R"({"users": [{"name": "a", "balance": 1}, {"name": "a", "balance": 1}], "blocks": []})",
      R"({"users": [{"name": "u3", "balance": 1}], "blocks": []})",
      R"({"users": [{"name": "a b", "balance": 1}], "blocks": []})",
      R"({"users": [{"name": "a", "balance": -1}], "blocks": []})",
      R"({"users": [{"name": "a", "balance": 1}], "blocks": [[{"type": "mint", "from": "a"}]]})",
      R"({"users": [{"name": "a", "balance": 1}], "blocks": [[{"type": "call", "from": "zed", "to": "a"}]]})",
      R"({"users": [{"name": "a", "balance": 1}], "blocks": [[{"type": "call", "from": "a", "to": "a", "msg": "(1"}]]})",
      R"({"users": [{"name": "a", "balance": 1}], "blocks": [[{"type": "transfer", "from": "a", "to": "a", "msg": "unit"}]]})",
      R"({"users": [{"name": "a", "balance": 1}], "blocks": [[{"type": "deploy", "from": "a", "name": "t", "contract": "erc20"}]]})",
  };
  for (const char* text : bad) EXPECT_THROW(parse_scenario(text), ScenarioError) << text;
  EXPECT_THROW(load_scenario(source("tests/data/malformed.json")), ScenarioError);
  EXPECT_THROW(load_scenario(source("tests/data/missing.json")), ScenarioError);
}

TEST(scenario, amounts_accept_decimal_strings) {
  auto f = parse_scenario(R"({"users": [{"name": "a", "balance": "18446744073709551616"}], "blocks": []})");
  EXPECT_EQ(f.users[0].balance.mutez, Nat::parse("18446744073709551616"));
}

TEST(scenario, wiring_deploys_three_contracts) {
  std::stringstream trace;
  auto r = run_scenario(load_scenario(source("scenarios/wiring.json")), ExecOrder::depth_first, true, &trace);
  EXPECT_TRUE(r.all_committed());
  EXPECT_TRUE(r.report.passed()) << r.report.render();
  int deployed = 0;
  std::string line;
  while (std::getline(trace, line)) {
    auto j = nlohmann::json::parse(line);
    if (j["kind"] == "deployed") ++deployed;
  }
  EXPECT_EQ(deployed, 3);
  auto st = harness::typed_state<cpmm::State>(r.final_state, Address::contract(2));
  ASSERT_TRUE(st);
  EXPECT_EQ(st->xtz_pool, Nat{1000});
  EXPECT_EQ(st->token_pool, Nat{1000});
  EXPECT_EQ(st->lqt_address, Address::contract(3));
}

TEST(scenario, slippage_bound_rejects_one_block) {
  std::stringstream trace;
  auto r = run_scenario(load_scenario(source("scenarios/slippage.json")), ExecOrder::depth_first, true, &trace);
  ASSERT_EQ(r.blocks.size(), 4u);
  EXPECT_TRUE(r.blocks[2].rejection);
  EXPECT_FALSE(r.blocks[3].rejection);
  EXPECT_TRUE(r.report.passed()) << r.report.render();
  int rejections = 0;
  std::string line;
  while (std::getline(trace, line)) rejections += nlohmann::json::parse(line)["kind"] == "block_rejected";
  EXPECT_EQ(rejections, 1);
  EXPECT_EQ(fa2_balance(r.final_state, Address::contract(1), Address::user(1)), Nat{100090});
}

TEST(scenario, token_to_token_pays_the_same_under_both_orders) {
  auto f = load_scenario(source("scenarios/token_to_token.json"));
  for (auto order : {ExecOrder::depth_first, ExecOrder::breadth_first}) {
    auto r = run_scenario(f, order, true);
    EXPECT_TRUE(r.all_committed());
    EXPECT_TRUE(r.report.passed()) << r.report.render();
    EXPECT_EQ(fa2_balance(r.final_state, Address::contract(4), Address::user(1)), Nat{100082});
    EXPECT_EQ(fa2_balance(r.final_state, Address::contract(1), Address::user(1)), Nat{99900});
  }
}

TEST(scenario, trace_matches_the_documented_example) {
  std::stringstream trace;
  run_scenario(load_scenario(source("scenarios/slippage.json")), ExecOrder::depth_first, false, &trace);
  EXPECT_EQ(trace.str(), slurp(source("docs/example-trace.jsonl")));
}

TEST(scenario, names_of_rejected_deploys_stay_unbound) {
  auto f = parse_scenario(R"js({"users": [{"name": "a", "balance": 10}],
    "blocks": [[{"type": "deploy", "from": "a", "name": "t", "contract": "fa2", "setup": "[initial([])]", "amount": 1}],
               [{"type": "call", "from": "a", "to": "t", "msg": "transfer([from(@a), to(@a), tokenId(0), value(0)])"}]]})js");
  EXPECT_THROW(run_scenario(f, ExecOrder::depth_first, false), ScenarioError);
}

TEST(cli, exit_codes) {
  EXPECT_EQ(cli("run --scenario " + source("scenarios/wiring.json") + " --check"), 0);
  EXPECT_EQ(cli("run --scenario " + source("tests/data/malformed.json")), 1);
  EXPECT_EQ(cli("run --scenario " + source("scenarios/slippage.json")), 0);
  EXPECT_EQ(cli("run --scenario " + source("scenarios/slippage.json") + " --strict-blocks"), 2);
  EXPECT_EQ(cli("run --scenario " + source("scenarios/wiring.json") + " --order sideways"), 1);
  EXPECT_EQ(cli("fuzz --seed 0 --runs 1 --blocks 0"), 0);
  EXPECT_EQ(cli("fuzz --seed 0 --runs 2 --blocks 5 --mutation default_skips_xtz_credit"), 2);
  EXPECT_EQ(cli("replay --seed 1 --prefix 11 --blocks 10"), 1);
  EXPECT_EQ(cli("replay --seed 1 --prefix 3 --blocks 10 --order bfs"), 0);
  EXPECT_EQ(cli("bogus"), 1);
}
