// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "dexsim/harness/runner.hpp"
#include "dexsim/scenario.hpp"

#include <gmpxx.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace dexsim;
using namespace dexsim::harness;

namespace {

// Pinned thresholds.
constexpr std::size_t kOracleTriples = 1000;
constexpr std::uint64_t kMaxPool = 1'000'000'000'000ULL;
constexpr double kOracleSeconds = 5.0;
constexpr std::size_t kCampaignSeeds = 500;
constexpr std::size_t kCampaignBlocks = 10;
constexpr double kCampaignSeconds = 300.0;
constexpr std::size_t kMutationSeeds = 100;  // two orders each: 200 traces
constexpr std::size_t kDeterminismSeeds = 100;
constexpr std::uint64_t kAllowedViolations = 0;

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(const char* id, const char* name, const Outcome& o) {
  std::printf("%s %s %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

mpz_class mpz(const Nat& n) { return mpz_class(n.str()); }

std::string status_of(const CheckReport& r, std::string_view name) {
  const auto* st = r.find(name);
  if (!st) return std::string(name) + " never evaluated";
  return std::string(name) + " checks=" + std::to_string(st->checks) + " failures=" + std::to_string(st->failures);
}

Outcome zero_violations(const CheckReport& r, std::initializer_list<std::string_view> names) {
  Outcome o{true, ""};
  for (auto n : names) {
    const auto* st = r.find(n);
    if (!st || st->checks == 0 || st->failures > kAllowedViolations) o.pass = false;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += status_of(r, n);
  }
  return o;
}

Outcome formula_oracle() {
  std::mt19937_64 rng(20210301);
  auto t0 = std::chrono::steady_clock::now();
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < kOracleTriples; ++i) {
    std::uint64_t xp = 1 + rng() % kMaxPool;
    std::uint64_t tp = 1 + rng() % kMaxPool;
    std::uint64_t a = rng() % (kMaxPool + 1);
    mpz_class num = mpz_class(std::to_string(a)) * 997 * mpz_class(std::to_string(tp));
    mpz_class den = mpz_class(std::to_string(xp)) * 1000 + mpz_class(std::to_string(a)) * 997;
    mpz_class expected;
    mpz_fdiv_q(expected.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());

    cpmm::State s;
    s.xtz_pool = xp;
    s.token_pool = tp;
    s.token_address = Address::contract(1);
    Chain chain{1, 1, 0};
    ContractCallContext ctx{Address::user(0), Address::user(0), Address::contract(2), Tez{a}, Tez{a}};
    auto r = cpmm::xtz_to_token(chain, ctx, s, {Address::user(0), Nat{0}, 2});
    if (!r) {
      ++mismatches;
      continue;
    }
    mpz_class got = mpz(s.token_pool) - mpz(r->first.token_pool);
    if (got != expected) ++mismatches;
  }
  double secs = seconds_since(t0);
  return {mismatches == 0 && secs < kOracleSeconds,
          std::to_string(kOracleTriples) + " triples, " + std::to_string(mismatches) + " mismatches, " +
              std::to_string(secs) + " s"};
}

Outcome mutation_caught(Mutation m) {
  CampaignConfig cc;
  cc.base.blocks = kCampaignBlocks;
  cc.base.mutation = m;
  cc.runs = kMutationSeeds;
  cc.stop_on_failure = true;
  auto r = run_campaign(cc);
  std::string name(to_string(m));
  if (r.failures.empty()) return {false, name + " survived " + std::to_string(r.traces) + " traces"};
  const auto& f = r.failures.front();
  return {true, name + " caught by " + f.invariant + " after " + std::to_string(r.traces) + " traces"};
}

std::string campaign_fingerprint(std::size_t seeds) {
  std::string out;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    TraceConfig cfg;
    cfg.seed = seed;
    cfg.blocks = kCampaignBlocks;
    auto t = gen_trace(cfg);
    out += render_state(t.final_state);
    out += render_state(replay_trace(t, ExecOrder::breadth_first, RunOptions{false, false}).final_state);
  }
  return out;
}

// A block whose second root must fail: its state after rejection is compared
// byte for byte with the input.
bool injected_failure_is_atomic() {
  TraceConfig cfg;
  cfg.blocks = 0;
  auto t = gen_trace(cfg);
  const auto& ex = t.deployment.exchanges.front();
  const Address u = t.deployment.users[1];
  Payload good = cpmm::message(cpmm::XtzToToken{u, Nat{0}, 1000});
  Payload bad = cpmm::message(cpmm::XtzToToken{u, Nat{1'000'000'000}, 1000});
  std::string before = render_state(t.final_state);
  for (auto order : {ExecOrder::depth_first, ExecOrder::breadth_first}) {
    auto r = add_block(t.final_state, {user_call(u, ex.main, Tez{500}, good), user_call(u, ex.main, Tez{500}, bad)},
                       order);
    if (r.committed() || render_state(r.state()) != before) return false;
  }
  return render_state(t.final_state) == before;
}

Outcome six_contract_scenario() {
  auto f = scenario::load_scenario(std::string(DEXSIM_SOURCE_DIR) + "/scenarios/token_to_token.json");
  // Composed oracle: 100 tokens sold into (1000 mutez, 1000 tokens), the tez
  // proceeds sold into an identical pool.
  auto quote = [](const mpz_class& in, const mpz_class& in_pool, const mpz_class& out_pool) {
    mpz_class q = in * 997 * out_pool / (in_pool * 1000 + in * 997);
    return q;
  };
  mpz_class tez = quote(100, 1000, 1000);
  mpz_class expected = quote(tez, 1000, 1000);
  std::string detail = "oracle " + expected.get_str();
  bool ok = true;
  for (auto order : {ExecOrder::depth_first, ExecOrder::breadth_first}) {
    auto r = scenario::run_scenario(f, order, true);
    auto st = decode<fa2::State>(*contract_state(r.final_state, Address::contract(4)));
    mpz_class got = mpz(fa2::balance(*st, Address::user(1), Nat{0})) - 100000;
    bool this_ok = r.all_committed() && r.report.passed() && got == expected;
    ok = ok && this_ok;
    detail += std::string(", ") + (order == ExecOrder::depth_first ? "dfs " : "bfs ") + got.get_str() +
              (r.all_committed() ? " committed" : " rejected") + (r.report.passed() ? "" : " invariant failure");
  }
  return {ok, detail};
}

}  // namespace

int main() {
  report("AC1", "tokens_bought_matches_oracle", formula_oracle());

  CampaignConfig cc;
  cc.base.blocks = kCampaignBlocks;
  cc.runs = kCampaignSeeds;
  auto t0 = std::chrono::steady_clock::now();
  auto campaign = run_campaign(cc);
  double secs = seconds_since(t0);
  const auto& rep = campaign.report;
  std::string scale = std::to_string(campaign.traces) + " traces, " + std::to_string(secs) + " s; ";

  auto ac2 = zero_violations(rep, {names::incoming_outgoing});
  ac2.pass = ac2.pass && secs < kCampaignSeconds && campaign.traces == 2 * kCampaignSeeds;
  ac2.detail = scale + ac2.detail;
  report("AC2", "incoming_calls_match_outgoing", ac2);
  report("AC3", "xtz_pool_tracks_balance", zero_violations(rep, {names::tez_pool, names::tez_pool_committed}));
  report("AC4", "lqt_supply_accounting",
         zero_violations(rep, {names::lqt_condition, names::main_counter, names::lqt_supply,
                               names::lqt_supply_composed, names::lqt_supply_agreement}));
  report("AC5", "constant_product_nondecreasing", zero_violations(rep, {names::constant_product}));
  report("AC6", "exchange_never_overdraws", zero_violations(rep, {names::no_overdraft}));

  Outcome ac7{true, ""};
  for (auto m : {Mutation::default_skips_xtz_credit, Mutation::drop_min_tokens_bought_guard,
                 Mutation::floor_tokens_deposited, Mutation::skip_allowance_decrement,
                 Mutation::non_admin_mint_or_burn}) {
    auto o = mutation_caught(m);
    ac7.pass = ac7.pass && o.pass;
    ac7.detail += (ac7.detail.empty() ? "" : "; ") + o.detail;
  }
  report("AC7", "mutations_are_caught", ac7);

  auto a = run_campaign([] {
    CampaignConfig c;
    c.base.blocks = kCampaignBlocks;
    c.runs = kDeterminismSeeds;
    return c;
  }());
  auto b = run_campaign([] {
    CampaignConfig c;
    c.base.blocks = kCampaignBlocks;
    c.runs = kDeterminismSeeds;
    return c;
  }());
  bool same_reports = a.report.render() == b.report.render();
  bool same_states = campaign_fingerprint(kDeterminismSeeds / 4) == campaign_fingerprint(kDeterminismSeeds / 4);
  auto atomic = zero_violations(rep, {names::atomicity});
  bool injected = injected_failure_is_atomic();
  report("AC8", "deterministic_and_atomic",
         {same_reports && same_states && atomic.pass && injected,
          std::string("reports ") + (same_reports ? "identical" : "differ") + ", states " +
              (same_states ? "identical" : "differ") + ", injected " + (injected ? "atomic" : "NOT atomic") +
              "; " + atomic.detail});

  report("AC9", "six_contract_token_to_token", six_contract_scenario());

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
