// dexsim: run scenario files, fuzz the exchange model, replay failing seeds.
//
// Exit codes: 0 success, 1 parse/IO/usage error, 2 check failure (or a
// rejected block under --strict-blocks).

#include "dexsim/harness/runner.hpp"
#include "dexsim/scenario.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace dexsim;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kCheckFailed = 2;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("SIM_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring non-numeric SIM_SEED\n";
    }
  }
  return 0;
}

ExecOrder parse_order(const std::string& s) { return s == "bfs" ? ExecOrder::breadth_first : ExecOrder::depth_first; }

struct GenOptions {
  std::size_t blocks = 10;
  std::size_t users = 4;
  std::size_t exchanges = 2;
  std::string mutation = "none";

  void add_to(CLI::App* app) {
    app->add_option("--blocks", blocks, "user blocks per trace")->capture_default_str();
    app->add_option("--users", users, "user accounts")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--exchanges", exchanges, "exchange deployments")->capture_default_str()->check(CLI::PositiveNumber);
    std::vector<std::string> names{"none"};
    for (auto m : kAllMutations) names.emplace_back(to_string(m));
    app->add_option("--mutation", mutation, "deploy a mutated contract variant")
        ->capture_default_str()
        ->check(CLI::IsMember(names));
  }

  harness::TraceConfig config(std::uint64_t seed) const {
    harness::TraceConfig cfg;
    cfg.seed = seed;
    cfg.blocks = blocks;
    cfg.users = users;
    cfg.exchanges = exchanges;
    cfg.mutation = parse_mutation(mutation).value_or(Mutation::none);
    return cfg;
  }

  std::string flags() const {
    std::string out = " --blocks " + std::to_string(blocks);
    if (users != 4) out += " --users " + std::to_string(users);
    if (exchanges != 2) out += " --exchanges " + std::to_string(exchanges);
    if (mutation != "none") out += " --mutation " + mutation;
    return out;
  }
};

int cmd_run(const std::string& path, const std::string& order, const std::string& trace_out, bool check,
            bool strict) {
  scenario::ScenarioFile file;
  try {
    file = scenario::load_scenario(path);
  } catch (const scenario::ScenarioError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  std::ofstream trace;
  if (!trace_out.empty()) {
    trace.open(trace_out);
    if (!trace) {
      std::cerr << "error: cannot write " << trace_out << '\n';
      return kUsage;
    }
  }
  scenario::RunResult result;
  try {
    result = scenario::run_scenario(file, parse_order(order), check, trace_out.empty() ? nullptr : &trace);
  } catch (const scenario::ScenarioError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  for (const auto& b : result.blocks) {
    std::cout << "block " << b.block << " height " << b.height;
    if (b.rejection) {
      std::cout << " rejected: " << to_string(b.rejection->reason) << " (root " << b.rejection->root_index
                << ", step " << b.rejection->step << ")\n";
    } else {
      std::cout << " committed, " << b.events << " events\n";
    }
  }
  int rc = kOk;
  if (check) {
    std::cout << result.report.render();
    if (!result.report.passed()) rc = kCheckFailed;
  }
  if (strict && !result.all_committed()) rc = kCheckFailed;
  return rc;
}

int cmd_fuzz(std::uint64_t seed, std::size_t runs, const std::string& order, const GenOptions& gen) {
  harness::CampaignConfig cc;
  cc.base = gen.config(seed);
  cc.first_seed = seed;
  cc.runs = runs;
  cc.orders = order == "dfs" ? harness::OrderMode::dfs
                             : (order == "bfs" ? harness::OrderMode::bfs : harness::OrderMode::both);
  auto r = harness::run_campaign(cc);
  std::cout << "traces " << r.traces << ", blocks committed " << r.stats.committed_blocks << ", rejected "
            << r.stats.rejected_blocks << '\n';
  std::cout << r.report.render();
  if (r.passed()) return kOk;
  const auto& f = r.failures.front();
  std::size_t prefix = f.counterexample.where.user_block ? *f.counterexample.where.user_block + 1 : 0;
  std::cout << r.failures.size() << " failing trace(s); first: " << f.invariant << " at seed " << f.seed << '\n'
            << "replay: dexsim replay --seed " << f.seed << " --prefix " << prefix << " --order "
            << to_string(f.order) << gen.flags() << '\n';
  return kCheckFailed;
}

/// State dump lines that can change between snapshots (log lines only grow).
std::vector<std::string> diffable_lines(const ChainState& s) {
  std::vector<std::string> out;
  std::istringstream in(render_state(s));
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("log ", 0) == 0 || line.rfind("delivered ", 0) == 0) continue;
    out.push_back(line);
  }
  return out;
}

void print_diff(const ChainState& before, const ChainState& after) {
  auto a = diffable_lines(before), b = diffable_lines(after);
  std::multiset<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  for (const auto& l : a) {
    if (auto it = sb.find(l); it != sb.end()) {
      sb.erase(it);
    } else {
      std::cout << "    - " << l << '\n';
    }
  }
  for (const auto& l : b) {
    if (auto it = sa.find(l); it != sa.end()) {
      sa.erase(it);
    } else {
      std::cout << "    + " << l << '\n';
    }
  }
}

int cmd_replay(std::uint64_t seed, std::size_t prefix, const std::string& order, const GenOptions& gen) {
  if (prefix > gen.blocks) {
    std::cerr << "error: prefix " << prefix << " exceeds trace length " << gen.blocks << '\n';
    return kUsage;
  }
  auto t = harness::trace_prefix(gen.config(seed), parse_order(order), prefix, harness::RunOptions{true, true});
  std::cout << "seed " << seed << " order " << order << " prefix " << prefix << '\n';
  const ChainState* prev = nullptr;
  for (const auto& sn : t.snapshots) {
    if (sn.step == 0 && !sn.committed) {
      std::cout << "block " << (sn.user_block ? std::to_string(*sn.user_block) : std::string("wiring"))
                << " height " << sn.height << '\n';
    }
    if (sn.executed && prev) {
      std::cout << "  step " << sn.step << ": " << render(*sn.executed) << '\n';
      print_diff(*prev, sn.state);
    }
    prev = &sn.state;
  }
  for (std::size_t i = 0; i < t.rejections.size(); ++i) {
    if (const auto& r = t.rejections[i]) {
      std::cout << "block " << i << " rejected: " << to_string(r->reason) << " (root " << r->root_index
                << ", step " << r->step << ")\n";
    }
  }
  std::cout << t.report.render();
  return t.report.passed() ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constant-product exchange simulator and invariant checker"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "execute a scenario file");
  std::string scenario_path, run_order = "dfs", trace_out;
  bool check = false, strict = false;
  run->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--order", run_order, "execution order")->capture_default_str()->check(CLI::IsMember({"dfs", "bfs"}));
  run->add_option("--trace-out", trace_out, "write line-delimited trace records here");
  run->add_flag("--check", check, "run every invariant checker on every snapshot");
  run->add_flag("--strict-blocks", strict, "exit 2 if any block is rejected");

  auto* fuzz = app.add_subcommand("fuzz", "random trace campaign");
  std::uint64_t fuzz_seed = default_seed();
  std::size_t runs = 100;
  std::string fuzz_order = "both";
  GenOptions fuzz_gen;
  fuzz->add_option("--seed", fuzz_seed, "first seed (default: $SIM_SEED or 0)")->capture_default_str();
  fuzz->add_option("--runs", runs, "number of seeds")->capture_default_str();
  fuzz->add_option("--order", fuzz_order, "execution order(s)")
      ->capture_default_str()
      ->check(CLI::IsMember({"dfs", "bfs", "both"}));
  fuzz_gen.add_to(fuzz);

  auto* replay = app.add_subcommand("replay", "re-execute a prefix of one seed's trace");
  std::uint64_t replay_seed = default_seed();
  std::size_t prefix = 0;
  std::string replay_order = "dfs";
  GenOptions replay_gen;
  replay->add_option("--seed", replay_seed, "seed (default: $SIM_SEED or 0)")->capture_default_str();
  replay->add_option("--prefix", prefix, "user blocks to replay")->required();
  replay->add_option("--order", replay_order, "execution order")
      ->capture_default_str()
      ->check(CLI::IsMember({"dfs", "bfs"}));
  replay_gen.add_to(replay);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (run->parsed()) return cmd_run(scenario_path, run_order, trace_out, check, strict);
  if (fuzz->parsed()) return cmd_fuzz(fuzz_seed, runs, fuzz_order, fuzz_gen);
  return cmd_replay(replay_seed, prefix, replay_order, replay_gen);
}
