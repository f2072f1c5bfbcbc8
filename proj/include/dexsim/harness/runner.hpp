#pragma once

// Runs traces block by block, feeding every snapshot of every committed block
// to the checkers, and drives multi-seed campaigns.

#include "dexsim/chain.hpp"
#include "dexsim/harness/checks.hpp"
#include "dexsim/harness/generator.hpp"
#include "dexsim/harness/report.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dexsim::harness {

struct Snapshot {
  std::optional<std::size_t> user_block;
  std::uint64_t height = 0;
  /// 0 right after the roots were queued, k after the k-th executed action.
  std::size_t step = 0;
  /// True for the state the block committed.
  bool committed = false;
  ChainState state;
  std::optional<Action> executed;
};

struct RunOptions {
  bool check = true;
  bool collect_snapshots = false;
};

struct Rejection {
  std::size_t root_index = 0;
  std::size_t step = 0;
  FailureReason reason = FailureReason::contract_rejected;
};

struct TraceStats {
  std::uint64_t committed_blocks = 0;
  std::uint64_t rejected_blocks = 0;
  /// Executed calls in committed blocks, keyed "family.entrypoint".
  std::map<std::string, std::uint64_t> entrypoints;

  void merge(const TraceStats& o) {
    committed_blocks += o.committed_blocks;
    rejected_blocks += o.rejected_blocks;
    for (const auto& [k, v] : o.entrypoints) entrypoints[k] += v;
  }
};

/// "family.entrypoint" for an executed action, empty for user-bound transfers.
inline std::string entrypoint_key(const ChainState& s, const Action& a) {
  auto target = action_target(a.body);
  if (!target) return "deploy";
  auto code = contract_code(s, *target);
  if (!code) return {};
  std::string name = "default";
  if (auto* c = std::get_if<CallBody>(&a.body)) {
    const Payload* p = &c->payload;
    if (p->is_tag("other_msg")) p = p->tag_arg();
    name = p->kind() == Payload::Kind::tag ? std::string(p->tag_name()) : std::string("?");
  }
  return code->family + "." + name;
}

class TraceRunner {
 public:
  TraceRunner(ChainState initial, ExecOrder order, std::uint64_t seed, RunOptions opt = {})
      : state_(std::move(initial)), order_(order), seed_(seed), opt_(opt) {}

  /// Adds one block. Checks and snapshots from a rejected block are dropped,
  /// but atomicity of the rejection itself is always checked.
  std::optional<Rejection> add(const std::vector<Action>& roots, std::optional<std::size_t> user_block) {
    CheckReport pending;
    std::vector<Snapshot> snaps;
    std::map<std::string, std::uint64_t> hits;
    StateMap before;
    std::size_t step = 0;
    std::uint64_t height = state_.chain.chain_height + 1;

    auto observer = [&](const ChainState& s, const Action* executed) {
      Location where{seed_, order_, height, user_block, step, false};
      if (opt_.check) {
        run_state_checks(s, where, pending);
        if (executed) run_step_checks(StepInfo{before, s, *executed}, where, pending);
        before = s.states;
      }
      if (executed) {
        auto key = entrypoint_key(s, *executed);
        if (!key.empty()) ++hits[key];
      }
      if (opt_.collect_snapshots) {
        snaps.push_back(Snapshot{user_block, height, step, false, s,
                                 executed ? std::optional<Action>(*executed) : std::nullopt});
      }
      ++step;
    };

    BlockResult r = add_block(state_, roots, order_, observer);
    if (auto* err = r.error()) {
      ++stats_.rejected_blocks;
      Location where{seed_, order_, height, user_block, err->step, false};
      std::optional<Violation> v;
      if (render_state(err->state) != render_state(state_)) {
        v = Violation{"rejected block changed the chain state", "unchanged", "modified"};
      }
      report_.record(names::atomicity, v, where);
      return Rejection{err->root_index, err->step, err->reason};
    }

    state_ = std::get<ChainState>(std::move(r.outcome));
    ++stats_.committed_blocks;
    for (const auto& [k, v] : hits) stats_.entrypoints[k] += v;
    if (opt_.check) {
      Location where{seed_, order_, height, user_block, step, true};
      run_state_checks(state_, where, pending);
      report_.merge(pending);
    }
    if (opt_.collect_snapshots) {
      for (auto& sn : snaps) snapshots_.push_back(std::move(sn));
      snapshots_.push_back(Snapshot{user_block, height, step, true, state_, std::nullopt});
    }
    return std::nullopt;
  }

  const ChainState& state() const { return state_; }
  const CheckReport& report() const { return report_; }
  const TraceStats& stats() const { return stats_; }
  std::vector<Snapshot>& snapshots() { return snapshots_; }

 private:
  ChainState state_;
  ExecOrder order_;
  std::uint64_t seed_;
  RunOptions opt_;
  CheckReport report_;
  TraceStats stats_;
  std::vector<Snapshot> snapshots_;
};

struct Trace {
  TraceConfig config;
  ExecOrder order = ExecOrder::depth_first;
  Deployment deployment;
  std::vector<std::vector<Action>> wiring;
  std::vector<std::vector<Action>> blocks;
  std::vector<std::optional<Rejection>> rejections;
  ChainState final_state;
  CheckReport report;
  TraceStats stats;
  std::vector<Snapshot> snapshots;
};

/// Wires the exchanges, then draws and runs `cfg.blocks` user blocks under
/// `cfg.order`. With `prefix` set, stops after that many user blocks.
inline Trace gen_trace(const TraceConfig& cfg, RunOptions opt = {}, std::optional<std::size_t> prefix = {}) {
  Trace t;
  t.config = cfg;
  t.order = cfg.order;
  t.deployment = plan_deployment(cfg);
  t.wiring = wiring_blocks(cfg, t.deployment);
  TraceRunner runner(initial_chain(cfg), cfg.order, cfg.seed, opt);
  for (const auto& b : t.wiring) {
    if (auto rej = runner.add(b, std::nullopt)) {
      throw std::logic_error(std::string("wiring block rejected: ") + to_string(rej->reason));
    }
  }
  ActionGenerator gen(cfg, t.deployment);
  std::size_t n = prefix ? std::min(*prefix, cfg.blocks) : cfg.blocks;
  for (std::size_t i = 0; i < n; ++i) {
    auto roots = gen.next_block(runner.state());
    t.rejections.push_back(runner.add(roots, i));
    t.blocks.push_back(std::move(roots));
  }
  t.final_state = runner.state();
  t.report = runner.report();
  t.stats = runner.stats();
  t.snapshots = std::move(runner.snapshots());
  return t;
}

/// Re-runs the exact blocks of `t` under another execution order.
inline Trace replay_trace(const Trace& t, ExecOrder order, RunOptions opt = {}) {
  Trace out;
  out.config = t.config;
  out.order = order;
  out.deployment = t.deployment;
  out.wiring = t.wiring;
  out.blocks = t.blocks;
  TraceRunner runner(initial_chain(t.config), order, t.config.seed, opt);
  for (const auto& b : t.wiring) {
    if (auto rej = runner.add(b, std::nullopt)) {
      throw std::logic_error(std::string("wiring block rejected: ") + to_string(rej->reason));
    }
  }
  for (std::size_t i = 0; i < t.blocks.size(); ++i) out.rejections.push_back(runner.add(t.blocks[i], i));
  out.final_state = runner.state();
  out.report = runner.report();
  out.stats = runner.stats();
  out.snapshots = std::move(runner.snapshots());
  return out;
}

/// The first `prefix` user blocks drawn for `cfg`, executed under `order`.
inline Trace trace_prefix(TraceConfig cfg, ExecOrder order, std::size_t prefix, RunOptions opt = {}) {
  cfg.order = ExecOrder::depth_first;
  if (order == ExecOrder::depth_first) return gen_trace(cfg, opt, prefix);
  return replay_trace(gen_trace(cfg, RunOptions{false, false}, prefix), order, opt);
}

enum class OrderMode : std::uint8_t { dfs, bfs, both };

struct CampaignConfig {
  TraceConfig base;
  std::uint64_t first_seed = 0;
  std::size_t runs = 100;
  OrderMode orders = OrderMode::both;
  /// Stop at the first failing trace.
  bool stop_on_failure = false;
};

struct FailingTrace {
  std::uint64_t seed = 0;
  ExecOrder order = ExecOrder::depth_first;
  std::string invariant;
  Counterexample counterexample;
};

struct CampaignResult {
  CheckReport report;
  TraceStats stats;
  std::size_t traces = 0;
  std::vector<FailingTrace> failures;

  bool passed() const { return failures.empty() && report.passed(); }
};

/// Seeds first_seed .. first_seed + runs - 1. Blocks are always drawn under
/// depth-first order; breadth-first runs replay those same blocks.
inline CampaignResult run_campaign(const CampaignConfig& cc) {
  CampaignResult out;
  auto absorb = [&](const Trace& t) {
    ++out.traces;
    out.report.merge(t.report);
    out.stats.merge(t.stats);
    if (auto f = t.report.first_failure()) out.failures.push_back({t.config.seed, t.order, f->first, f->second});
  };
  for (std::size_t i = 0; i < cc.runs; ++i) {
    TraceConfig cfg = cc.base;
    cfg.seed = cc.first_seed + i;
    cfg.order = ExecOrder::depth_first;
    Trace t = gen_trace(cfg, RunOptions{cc.orders != OrderMode::bfs, false});
    if (cc.orders != OrderMode::bfs) absorb(t);
    if (cc.orders != OrderMode::dfs) absorb(replay_trace(t, ExecOrder::breadth_first));
    if (cc.stop_on_failure && !out.failures.empty()) break;
  }
  return out;
}

}  // namespace dexsim::harness
