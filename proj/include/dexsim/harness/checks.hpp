#pragma once

// Invariant checkers. Each one is a pure function over chain states and
// returns the first violation found, or nullopt. None of them mutate or
// execute anything.
//
// State checks run on every snapshot. Step checks compare the contract
// states before and after a single executed action.

#include "dexsim/chain.hpp"
#include "dexsim/contracts/cpmm.hpp"
#include "dexsim/contracts/fa12.hpp"
#include "dexsim/contracts/fa2.hpp"
#include "dexsim/harness/report.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dexsim::harness {

namespace names {
inline constexpr std::string_view incoming_outgoing = "incoming_calls_match_outgoing_txs";
inline constexpr std::string_view tez_pool = "xtz_pool_tracks_balance";
inline constexpr std::string_view tez_pool_committed = "xtz_pool_equals_balance_when_idle";
inline constexpr std::string_view no_overdraft = "exchange_never_overdraws";
inline constexpr std::string_view lqt_condition = "lqt_supply_tracks_admin_mints";
inline constexpr std::string_view main_counter = "lqt_total_tracks_emitted_mints";
inline constexpr std::string_view lqt_supply = "lqt_total_equals_lqt_supply";
inline constexpr std::string_view lqt_supply_composed = "lqt_total_equals_lqt_supply_composed";
inline constexpr std::string_view lqt_supply_agreement = "lqt_supply_direct_and_composed_agree";
inline constexpr std::string_view constant_product = "constant_product_nondecreasing";
inline constexpr std::string_view share_value = "share_value_nondecreasing";
inline constexpr std::string_view entrypoint_bounds = "entrypoint_respects_bounds";
inline constexpr std::string_view lqt_reference = "lqt_token_matches_reference";
inline constexpr std::string_view lqt_ledger_sum = "lqt_ledger_sums_to_supply";
inline constexpr std::string_view tez_conservation = "tez_conserved";
inline constexpr std::string_view queue_drained = "queue_empty_after_block";
inline constexpr std::string_view atomicity = "rejected_block_leaves_state_unchanged";
}  // namespace names

// ---------------------------------------------------------------------------
// Helpers

inline bool has_family(const ChainState& s, const Address& a, std::string_view family) {
  auto code = contract_code(s, a);
  return code && code->family == family;
}

inline std::vector<Address> contracts_of(const ChainState& s, std::string_view family) {
  std::vector<Address> out;
  for (const auto& [a, code] : s.contracts) {
    if (code->family == family) out.push_back(a);
  }
  return out;
}

template <typename T>
std::optional<T> typed_state(const ChainState& s, const Address& a) {
  auto it = s.states.find(a);
  if (it == s.states.end()) return std::nullopt;
  return decode<T>(it->second);
}

template <typename T>
std::optional<T> typed_setup(const ChainState& s, const Address& a) {
  auto d = deployment_info(s, a);
  if (!d) return std::nullopt;
  return decode<T>(d->setup);
}

/// Quantity of a mint_or_burn call payload, nullopt for any other payload.
inline std::optional<Int> mint_quantity(const std::optional<Payload>& payload) {
  if (!payload) return std::nullopt;
  auto m = decode<fa12::Msg>(*payload);
  if (!m) return std::nullopt;
  if (auto* mb = std::get_if<fa12::MintOrBurn>(&*m)) return mb->quantity;
  return std::nullopt;
}

inline std::string addr_text(const Address& a) { return "@" + a.str(); }

inline std::string int_text(const Int& v) { return v.str(); }

// ---------------------------------------------------------------------------
// State checks

/// Every call or transfer A emitted to contract B equals the one B received
/// from A, in the same order.
inline std::optional<Violation> check_incoming_outgoing(const ChainState& s, const Address& from,
                                                        const Address& to) {
  auto in = incoming_calls(s, from, to);
  auto out = outgoing_txs(s, from, to);
  if (in == out) return std::nullopt;
  std::size_t i = 0;
  while (i < in.size() && i < out.size() && in[i] == out[i]) ++i;
  auto show = [&](const std::vector<Tx>& v) {
    return i < v.size() ? render(Event{v[i]}) : std::string("<none>");
  };
  return Violation{"calls from " + addr_text(from) + " to " + addr_text(to) + " diverge at index " +
                       std::to_string(i),
                   show(out), show(in)};
}

/// Pairwise form over every emitter and every contract receiver in one pass.
inline std::optional<Violation> check_incoming_outgoing(const ChainState& s) {
  using Key = std::pair<Address, Address>;
  std::map<Key, std::vector<const Tx*>> out, in;
  for (const auto& e : s.log) {
    if (auto* tx = std::get_if<Tx>(&e); tx && tx->to.is_contract()) out[{tx->from, tx->to}].push_back(tx);
  }
  for (const auto& tx : s.deliveries) in[{tx.from, tx.to}].push_back(&tx);
  auto same = [](const std::vector<const Tx*>& a, const std::vector<const Tx*>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!(*a[i] == *b[i])) return false;
    }
    return true;
  };
  for (const auto& [key, txs] : out) {
    auto it = in.find(key);
    if (it == in.end() || !same(txs, it->second)) return check_incoming_outgoing(s, key.first, key.second);
  }
  for (const auto& [key, txs] : in) {
    if (!out.count(key)) return check_incoming_outgoing(s, key.first, key.second);
  }
  return std::nullopt;
}

/// xtzPool + (tez held in pending emitted actions) = balance, for every exchange.
inline std::optional<Violation> check_tez_pool(const ChainState& s) {
  for (const auto& m : contracts_of(s, cpmm::kFamily)) {
    auto st = typed_state<cpmm::State>(s, m);
    if (!st) return Violation{"undecodable exchange state at " + addr_text(m), "cpmm state", "?"};
    Tez pending;
    for (const auto& a : outgoing_acts(s, m)) pending += action_amount(a.body);
    Tez bal = env_balance(s, m);
    if (Tez{st->xtz_pool} + pending != bal) {
      return Violation{"exchange " + addr_text(m) + ": xtzPool + pending outflow != balance", bal.str(),
                       st->xtz_pool.str() + " + " + pending.str()};
    }
  }
  return std::nullopt;
}

/// Committed form: nothing is pending, so xtzPool equals the balance exactly.
inline std::optional<Violation> check_tez_pool_committed(const ChainState& s) {
  for (const auto& m : contracts_of(s, cpmm::kFamily)) {
    auto st = typed_state<cpmm::State>(s, m);
    if (!st) return Violation{"undecodable exchange state at " + addr_text(m), "cpmm state", "?"};
    Tez bal = env_balance(s, m);
    if (Tez{st->xtz_pool} != bal) {
      return Violation{"exchange " + addr_text(m) + ": xtzPool != balance", bal.str(), st->xtz_pool.str()};
    }
  }
  return std::nullopt;
}

/// The next action to run, if emitted by an exchange, is covered by its balance.
inline std::optional<Violation> check_no_overdraft(const ChainState& s) {
  if (s.queue.empty()) return std::nullopt;
  const auto& head = s.queue.front();
  if (!has_family(s, head.from, cpmm::kFamily)) return std::nullopt;
  const Tez& amount = action_amount(head.body);
  Tez bal = env_balance(s, head.from);
  if (amount > bal) {
    return Violation{"exchange " + addr_text(head.from) + " about to send more than it holds",
                     "amount <= " + bal.str(), amount.str()};
  }
  return std::nullopt;
}

struct LqtSums {
  Int initial;
  Int delivered;  // sum of mint_or_burn quantities received from the admin
};

inline std::optional<LqtSums> lqt_admin_sums(const ChainState& s, const Address& lqt) {
  auto setup = typed_setup<fa12::Setup>(s, lqt);
  if (!setup) return std::nullopt;
  LqtSums out{setup->initial_pool.value(), 0};
  for (const auto& tx : s.deliveries) {
    if (tx.to != lqt || tx.from != setup->admin) continue;
    if (auto q = mint_quantity(tx.payload)) out.delivered += *q;
  }
  return out;
}

/// total_supply = initial pool + every mint_or_burn the admin got through.
inline std::optional<Violation> check_lqt_condition(const ChainState& s, const Address& lqt) {
  auto st = typed_state<fa12::State>(s, lqt);
  auto sums = lqt_admin_sums(s, lqt);
  if (!st || !sums) return Violation{"undecodable liquidity token at " + addr_text(lqt), "fa12 state", "?"};
  Int expected = sums->initial + sums->delivered;
  if (expected != st->total_supply.value()) {
    return Violation{"liquidity token " + addr_text(lqt) + " supply differs from admin mint history",
                     int_text(expected), st->total_supply.str()};
  }
  return std::nullopt;
}

inline std::optional<Violation> check_lqt_condition(const ChainState& s) {
  for (const auto& l : contracts_of(s, fa12::kFamily)) {
    if (auto v = check_lqt_condition(s, l)) return v;
  }
  return std::nullopt;
}

struct MainSums {
  Int initial;
  Int executed;  // mint_or_burn quantities already sent to the lqt address
  Int pending;   // ... and still queued
};

inline std::optional<MainSums> main_mint_sums(const ChainState& s, const Address& main, const cpmm::State& st) {
  auto setup = typed_setup<cpmm::Setup>(s, main);
  if (!setup) return std::nullopt;
  MainSums out{setup->lqt_total.value(), 0, 0};
  if (st.lqt_address.is_null()) return out;
  for (const auto& e : s.log) {
    auto* tx = std::get_if<Tx>(&e);
    if (!tx || tx->from != main || tx->to != st.lqt_address) continue;
    if (auto q = mint_quantity(tx->payload)) out.executed += *q;
  }
  for (const auto& a : s.queue) {
    auto* c = std::get_if<CallBody>(&a.body);
    if (!c || a.from != main || c->to != st.lqt_address) continue;
    if (auto q = mint_quantity(c->payload)) out.pending += *q;
  }
  return out;
}

/// lqtTotal = initial + executed mints + pending mints towards the lqt address.
inline std::optional<Violation> check_main_counter(const ChainState& s, const Address& main) {
  auto st = typed_state<cpmm::State>(s, main);
  if (!st) return Violation{"undecodable exchange state at " + addr_text(main), "cpmm state", "?"};
  auto sums = main_mint_sums(s, main, *st);
  if (!sums) return Violation{"exchange " + addr_text(main) + " has no deployment record", "setup", "?"};
  Int expected = sums->initial + sums->executed + sums->pending;
  if (expected != st->lqt_total.value()) {
    return Violation{"exchange " + addr_text(main) + " lqtTotal differs from its mint history",
                     int_text(expected), st->lqt_total.str()};
  }
  return std::nullopt;
}

inline std::optional<Violation> check_main_counter(const ChainState& s) {
  for (const auto& m : contracts_of(s, cpmm::kFamily)) {
    if (auto v = check_main_counter(s, m)) return v;
  }
  return std::nullopt;
}

/// An exchange paired with its liquidity token such that the supply equality
/// applies: the token's admin is the exchange, both started from the same
/// pool size, and no mint_or_burn from the exchange is pending.
struct Pairing {
  Address main;
  Address lqt;
  cpmm::State main_state;
  fa12::State lqt_state;
};

inline std::optional<Pairing> paired(const ChainState& s, const Address& main) {
  auto ms = typed_state<cpmm::State>(s, main);
  if (!ms || ms->lqt_address.is_null() || !has_family(s, ms->lqt_address, fa12::kFamily)) return std::nullopt;
  auto ls = typed_state<fa12::State>(s, ms->lqt_address);
  auto msetup = typed_setup<cpmm::Setup>(s, main);
  auto lsetup = typed_setup<fa12::Setup>(s, ms->lqt_address);
  if (!ls || !msetup || !lsetup) return std::nullopt;
  if (ls->admin != main || msetup->lqt_total != lsetup->initial_pool) return std::nullopt;
  for (const auto& a : s.queue) {
    if (a.from == main && action_target(a.body) == ms->lqt_address) return std::nullopt;
  }
  return Pairing{main, ms->lqt_address, *ms, *ls};
}

/// Direct check: compares the two stored counters.
inline std::optional<Violation> check_lqt_supply(const ChainState& s, const Address& main) {
  auto p = paired(s, main);
  if (!p) return std::nullopt;
  if (p->main_state.lqt_total != p->lqt_state.total_supply) {
    return Violation{"exchange " + addr_text(main) + " lqtTotal differs from supply of " + addr_text(p->lqt),
                     p->lqt_state.total_supply.str(), p->main_state.lqt_total.str()};
  }
  return std::nullopt;
}

/// Composed check: holds when its three premises hold on this state (the
/// exchange's mint history, the token's admin history, and emitted = received
/// between them), each side then being initial + the same sum.
inline std::optional<Violation> check_lqt_supply_composed(const ChainState& s, const Address& main) {
  auto p = paired(s, main);
  if (!p) return std::nullopt;
  if (auto v = check_main_counter(s, main)) return Violation{"premise: " + v->detail, v->expected, v->actual};
  if (auto v = check_lqt_condition(s, p->lqt)) return Violation{"premise: " + v->detail, v->expected, v->actual};
  if (auto v = check_incoming_outgoing(s, main, p->lqt)) {
    return Violation{"premise: " + v->detail, v->expected, v->actual};
  }
  auto ms = main_mint_sums(s, main, p->main_state);
  auto ls = lqt_admin_sums(s, p->lqt);
  if (!ms || !ls) return Violation{"missing deployment record", "setup", "?"};
  Int from_main = ms->initial + ms->executed;
  Int from_lqt = ls->initial + ls->delivered;
  if (from_main != from_lqt) {
    return Violation{"derived counters differ for " + addr_text(main), int_text(from_lqt), int_text(from_main)};
  }
  return std::nullopt;
}

inline std::optional<Violation> check_lqt_ledger_sum(const ChainState& s) {
  for (const auto& l : contracts_of(s, fa12::kFamily)) {
    auto st = typed_state<fa12::State>(s, l);
    if (!st) return Violation{"undecodable liquidity token at " + addr_text(l), "fa12 state", "?"};
    Nat sum;
    for (const auto& [_, v] : st->tokens) sum += v;
    if (sum != st->total_supply) {
      return Violation{"liquidity token " + addr_text(l) + " balances do not sum to supply",
                       st->total_supply.str(), sum.str()};
    }
  }
  return std::nullopt;
}

inline std::optional<Violation> check_tez_conservation(const ChainState& s) {
  Tez sum;
  for (const auto& [_, b] : s.balances) sum += b;
  if (sum != s.total_minted) return Violation{"sum of balances changed", s.total_minted.str(), sum.str()};
  return std::nullopt;
}

inline std::optional<Violation> check_queue_drained(const ChainState& s) {
  if (s.queue.empty()) return std::nullopt;
  return Violation{"committed state has pending actions", "0", std::to_string(s.queue.size())};
}

// ---------------------------------------------------------------------------
// Step checks

using StateMap = std::map<Address, Payload>;

struct StepInfo {
  const StateMap& before;
  const ChainState& after;
  const Action& executed;
};

/// The executed action as a decoded exchange call, if it was one.
inline std::optional<std::tuple<Address, cpmm::State, cpmm::State, cpmm::Msg>> exchange_step(const StepInfo& st) {
  auto* c = std::get_if<CallBody>(&st.executed.body);
  if (!c || !has_family(st.after, c->to, cpmm::kFamily)) return std::nullopt;
  auto it = st.before.find(c->to);
  if (it == st.before.end()) return std::nullopt;
  auto pre = decode<cpmm::State>(it->second);
  auto post = typed_state<cpmm::State>(st.after, c->to);
  auto msg = decode<cpmm::Msg>(c->payload);
  if (!pre || !post || !msg) return std::nullopt;
  return std::tuple{c->to, *pre, *post, *msg};
}

/// xtzPool * tokenPool never shrinks across a swap.
inline std::optional<Violation> check_constant_product(const StepInfo& st) {
  auto step = exchange_step(st);
  if (!step) return std::nullopt;
  const auto& [at, pre, post, msg] = *step;
  bool swap = std::holds_alternative<cpmm::XtzToToken>(msg) || std::holds_alternative<cpmm::TokenToXtz>(msg) ||
              std::holds_alternative<cpmm::TokenToToken>(msg);
  if (!swap) return std::nullopt;
  Nat k0 = pre.xtz_pool * pre.token_pool;
  Nat k1 = post.xtz_pool * post.token_pool;
  if (k1 < k0) return Violation{"swap at " + addr_text(at) + " lowered the pool product", ">= " + k0.str(), k1.str()};
  return std::nullopt;
}

/// Adding or removing liquidity never lowers the pool value per share:
/// pool'/lqt' >= pool/lqt for both pools, cross-multiplied.
inline std::optional<Violation> check_share_value(const StepInfo& st) {
  auto step = exchange_step(st);
  if (!step) return std::nullopt;
  const auto& [at, pre, post, msg] = *step;
  if (!std::holds_alternative<cpmm::AddLiquidity>(msg) && !std::holds_alternative<cpmm::RemoveLiquidity>(msg)) {
    return std::nullopt;
  }
  auto lhs_t = post.token_pool * pre.lqt_total, rhs_t = pre.token_pool * post.lqt_total;
  auto lhs_x = post.xtz_pool * pre.lqt_total, rhs_x = pre.xtz_pool * post.lqt_total;
  if (lhs_t < rhs_t) {
    return Violation{"liquidity change at " + addr_text(at) + " diluted tokens per share",
                     ">= " + rhs_t.str(), lhs_t.str()};
  }
  if (lhs_x < rhs_x) {
    return Violation{"liquidity change at " + addr_text(at) + " diluted tez per share", ">= " + rhs_x.str(),
                     lhs_x.str()};
  }
  return std::nullopt;
}

/// Deadlines and the caller's min/max bounds, judged from pool deltas.
inline std::optional<Violation> check_entrypoint_bounds(const StepInfo& st) {
  auto step = exchange_step(st);
  if (!step) return std::nullopt;
  const auto& [at, pre, post, msg] = *step;
  std::uint64_t slot = st.after.chain.current_slot;
  auto fail = [&](const std::string& what, const std::string& expected, const std::string& actual) {
    return Violation{what + " at " + addr_text(at), expected, actual};
  };
  auto dropped = [](const Nat& a, const Nat& b) { return sub_opt(a, b); };
  return std::visit(
      [&](const auto& m) -> std::optional<Violation> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, cpmm::XtzToToken>) {
          if (m.deadline <= slot) return fail("stale swap accepted", "deadline > " + std::to_string(slot), std::to_string(m.deadline));
          auto out = dropped(pre.token_pool, post.token_pool);
          if (!out || *out < m.min_tokens_bought) {
            return fail("tokens bought below minimum", ">= " + m.min_tokens_bought.str(), out ? out->str() : "none");
          }
        } else if constexpr (std::is_same_v<T, cpmm::TokenToXtz>) {
          if (m.deadline <= slot) return fail("stale swap accepted", "deadline > " + std::to_string(slot), std::to_string(m.deadline));
          auto out = dropped(pre.xtz_pool, post.xtz_pool);
          if (!out || *out < m.min_xtz_bought.mutez) {
            return fail("tez bought below minimum", ">= " + m.min_xtz_bought.str(), out ? out->str() : "none");
          }
        } else if constexpr (std::is_same_v<T, cpmm::TokenToToken>) {
          if (m.deadline <= slot) return fail("stale swap accepted", "deadline > " + std::to_string(slot), std::to_string(m.deadline));
        } else if constexpr (std::is_same_v<T, cpmm::AddLiquidity>) {
          if (m.deadline <= slot) return fail("stale deposit accepted", "deadline > " + std::to_string(slot), std::to_string(m.deadline));
          auto deposited = dropped(post.token_pool, pre.token_pool);
          auto minted = dropped(post.lqt_total, pre.lqt_total);
          if (!deposited || *deposited > m.max_tokens_deposited) {
            return fail("tokens deposited above maximum", "<= " + m.max_tokens_deposited.str(),
                        deposited ? deposited->str() : "none");
          }
          if (!minted || *minted < m.min_lqt_minted) {
            return fail("liquidity minted below minimum", ">= " + m.min_lqt_minted.str(), minted ? minted->str() : "none");
          }
        } else if constexpr (std::is_same_v<T, cpmm::RemoveLiquidity>) {
          if (m.deadline <= slot) return fail("stale withdrawal accepted", "deadline > " + std::to_string(slot), std::to_string(m.deadline));
          auto xtz_out = dropped(pre.xtz_pool, post.xtz_pool);
          auto tok_out = dropped(pre.token_pool, post.token_pool);
          if (!xtz_out || *xtz_out < m.min_xtz_withdrawn.mutez) {
            return fail("tez withdrawn below minimum", ">= " + m.min_xtz_withdrawn.str(), xtz_out ? xtz_out->str() : "none");
          }
          if (!tok_out || *tok_out < m.min_tokens_withdrawn) {
            return fail("tokens withdrawn below minimum", ">= " + m.min_tokens_withdrawn.str(),
                        tok_out ? tok_out->str() : "none");
          }
        }
        return std::nullopt;
      },
      msg);
}

namespace detail {

/// Straightforward model of the liquidity token used as a reference.
struct LqtModel {
  std::map<Address, Int> tokens;
  std::map<std::pair<Address, Address>, Int> allowances;
  Address admin;
  Int supply;

  static LqtModel from(const fa12::State& s) {
    LqtModel m;
    for (const auto& [a, v] : s.tokens) m.tokens[a] = v.value();
    for (const auto& [k, v] : s.allowances) m.allowances[k] = v.value();
    m.admin = s.admin;
    m.supply = s.total_supply.value();
    return m;
  }

  void prune() {
    std::erase_if(tokens, [](const auto& kv) { return kv.second == 0; });
    std::erase_if(allowances, [](const auto& kv) { return kv.second == 0; });
  }

  bool operator==(const LqtModel& o) const {
    return tokens == o.tokens && allowances == o.allowances && admin == o.admin && supply == o.supply;
  }

  std::string str() const {
    std::string out = "supply=" + supply.str() + " tokens={";
    for (const auto& [a, v] : tokens) out += "@" + a.str() + ":" + v.str() + " ";
    out += "} allowances={";
    for (const auto& [k, v] : allowances) out += "@" + k.first.str() + "->@" + k.second.str() + ":" + v.str() + " ";
    return out + "}";
  }
};

/// Expected state after `sender` sends `msg`, or nullopt if it must be refused.
inline std::optional<LqtModel> lqt_reference_step(LqtModel m, const Address& sender, const fa12::Msg& msg) {
  if (auto* t = std::get_if<fa12::Transfer>(&msg)) {
    if (sender != t->from) {
      Int& allowed = m.allowances[{t->from, sender}];
      allowed -= t->value.value();
      if (allowed < 0) return std::nullopt;
    }
    m.tokens[t->from] -= t->value.value();
    if (m.tokens[t->from] < 0) return std::nullopt;
    m.tokens[t->to] += t->value.value();
  } else if (auto* a = std::get_if<fa12::Approve>(&msg)) {
    Int& cur = m.allowances[{sender, a->spender}];
    if (cur != 0 && !a->value.is_zero()) return std::nullopt;
    cur = a->value.value();
  } else if (auto* mb = std::get_if<fa12::MintOrBurn>(&msg)) {
    if (sender != m.admin) return std::nullopt;
    m.tokens[mb->target] += mb->quantity;
    m.supply += mb->quantity;
    if (m.tokens[mb->target] < 0 || m.supply < 0) return std::nullopt;
  }
  m.prune();
  return m;
}

}  // namespace detail

/// Each accepted call to a liquidity token leaves the state the reference
/// model predicts; calls the reference refuses must not be accepted.
inline std::optional<Violation> check_lqt_reference(const StepInfo& st) {
  auto target = action_target(st.executed.body);
  if (!target || !has_family(st.after, *target, fa12::kFamily)) return std::nullopt;
  auto it = st.before.find(*target);
  auto post = typed_state<fa12::State>(st.after, *target);
  if (it == st.before.end() || !post) return std::nullopt;
  auto pre = decode<fa12::State>(it->second);
  auto* c = std::get_if<CallBody>(&st.executed.body);
  std::optional<fa12::Msg> msg;
  if (c) msg = decode<fa12::Msg>(c->payload);
  if (!pre) return std::nullopt;
  std::string where = "call from " + addr_text(st.executed.from) + " to " + addr_text(*target);
  if (!msg) return Violation{where + " accepted a message the token does not define", "rejection", "accepted"};
  auto expected = detail::lqt_reference_step(detail::LqtModel::from(*pre), st.executed.from, *msg);
  auto actual = detail::LqtModel::from(*post);
  if (!expected) return Violation{where + " accepted a call the reference refuses", "rejection", actual.str()};
  if (!(*expected == actual)) return Violation{where + " left an unexpected state", expected->str(), actual.str()};
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Drivers

/// Runs every state check on `s`, recording into `report`.
inline void run_state_checks(const ChainState& s, const Location& where, CheckReport& report) {
  report.record(names::incoming_outgoing, check_incoming_outgoing(s), where);
  report.record(names::tez_pool, check_tez_pool(s), where);
  report.record(names::no_overdraft, check_no_overdraft(s), where);
  report.record(names::lqt_condition, check_lqt_condition(s), where);
  report.record(names::main_counter, check_main_counter(s), where);
  report.record(names::lqt_ledger_sum, check_lqt_ledger_sum(s), where);
  report.record(names::tez_conservation, check_tez_conservation(s), where);
  for (const auto& m : contracts_of(s, cpmm::kFamily)) {
    auto direct = check_lqt_supply(s, m);
    auto composed = check_lqt_supply_composed(s, m);
    report.record(names::lqt_supply, direct, where);
    report.record(names::lqt_supply_composed, composed, where);
    std::optional<Violation> disagree;
    if (direct.has_value() != composed.has_value()) {
      disagree = Violation{"direct and composed supply checks disagree for " + addr_text(m),
                           direct ? "direct fails" : "direct passes",
                           composed ? "composed fails" : "composed passes"};
    }
    report.record(names::lqt_supply_agreement, disagree, where);
  }
  if (where.committed) {
    report.record(names::tez_pool_committed, check_tez_pool_committed(s), where);
    report.record(names::queue_drained, check_queue_drained(s), where);
  }
}

/// Step checks are only counted on the steps they apply to: swaps, liquidity
/// changes, any exchange call, and any call into a liquidity token.
inline void run_step_checks(const StepInfo& st, const Location& where, CheckReport& report) {
  if (auto step = exchange_step(st)) {
    const auto& msg = std::get<3>(*step);
    if (std::holds_alternative<cpmm::XtzToToken>(msg) || std::holds_alternative<cpmm::TokenToXtz>(msg) ||
        std::holds_alternative<cpmm::TokenToToken>(msg)) {
      report.record(names::constant_product, check_constant_product(st), where);
    }
    if (std::holds_alternative<cpmm::AddLiquidity>(msg) || std::holds_alternative<cpmm::RemoveLiquidity>(msg)) {
      report.record(names::share_value, check_share_value(st), where);
    }
    report.record(names::entrypoint_bounds, check_entrypoint_bounds(st), where);
  }
  auto target = action_target(st.executed.body);
  if (target && has_family(st.after, *target, fa12::kFamily)) {
    report.record(names::lqt_reference, check_lqt_reference(st), where);
  }
}

}  // namespace dexsim::harness
