#pragma once

// Execution environment: balances, deployed code, the action queue and the
// event log. ChainState is a value; add_block never mutates its input.

#include "dexsim/contract.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dexsim {

enum class ExecOrder : std::uint8_t { depth_first, breadth_first };

inline const char* to_string(ExecOrder o) { return o == ExecOrder::depth_first ? "dfs" : "bfs"; }

struct Action {
  Address origin;
  Address from;
  ActionBody body;
  friend bool operator==(const Action&, const Action&) = default;
};

/// An executed transfer or call. payload is absent for plain transfers.
struct Tx {
  Address from;
  Address to;
  Tez amount;
  std::optional<Payload> payload;
  friend bool operator==(const Tx&, const Tx&) = default;
};

struct Deployed {
  Address at;
  Address by;
  Tez amount;
  Payload setup;
  friend bool operator==(const Deployed&, const Deployed&) = default;
};

using Event = std::variant<Deployed, Tx>;

enum class FailureReason : std::uint8_t {
  insufficient_balance,
  unknown_contract,
  not_a_contract,
  contract_rejected,
  init_rejected,
  invalid_root_action,
  step_limit,
};

inline const char* to_string(FailureReason r) {
  switch (r) {
    case FailureReason::insufficient_balance: return "insufficient_balance";
    case FailureReason::unknown_contract: return "unknown_contract";
    case FailureReason::not_a_contract: return "not_a_contract";
    case FailureReason::contract_rejected: return "contract_rejected";
    case FailureReason::init_rejected: return "init_rejected";
    case FailureReason::invalid_root_action: return "invalid_root_action";
    case FailureReason::step_limit: return "step_limit";
  }
  return "unknown";
}

struct ChainState {
  Chain chain;
  std::map<Address, Tez> balances;
  std::map<Address, ContractRef> contracts;
  std::map<Address, Payload> states;
  std::vector<Action> queue;
  /// Executed steps in execution order, as seen by the emitter.
  std::vector<Event> log;
  /// Calls and transfers as delivered to receiving contracts, recorded from
  /// the call context handed to receive.
  std::vector<Tx> deliveries;
  std::uint64_t next_contract_index = 1;
  Tez total_minted;
};

class ChainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws ChainError on a duplicate or contract-kind address.
inline ChainState empty_chain(const std::vector<std::pair<Address, Tez>>& initial_users) {
  ChainState s;
  for (const auto& [addr, amount] : initial_users) {
    if (!addr.is_user()) throw ChainError("initial account must be a user address: " + addr.str());
    if (!s.balances.emplace(addr, amount).second) throw ChainError("duplicate address: " + addr.str());
    s.total_minted += amount;
  }
  return s;
}

inline Tez env_balance(const ChainState& s, const Address& a) {
  auto it = s.balances.find(a);
  return it == s.balances.end() ? Tez{} : it->second;
}

inline std::optional<Payload> contract_state(const ChainState& s, const Address& a) {
  auto it = s.states.find(a);
  if (it == s.states.end()) return std::nullopt;
  return it->second;
}

inline ContractRef contract_code(const ChainState& s, const Address& a) {
  auto it = s.contracts.find(a);
  return it == s.contracts.end() ? nullptr : it->second;
}

inline std::optional<Deployed> deployment_info(const ChainState& s, const Address& a) {
  for (const auto& e : s.log) {
    if (auto* d = std::get_if<Deployed>(&e); d && d->at == a) return *d;
  }
  return std::nullopt;
}

/// Executed calls received by `to` from `from`, taken from the receive side.
inline std::vector<Tx> incoming_calls(const ChainState& s, const Address& from, const Address& to) {
  std::vector<Tx> out;
  for (const auto& tx : s.deliveries) {
    if (tx.from == from && tx.to == to) out.push_back(tx);
  }
  return out;
}

/// Executed transfers and calls emitted by `from` towards `to`.
inline std::vector<Tx> outgoing_txs(const ChainState& s, const Address& from, const Address& to) {
  std::vector<Tx> out;
  for (const auto& e : s.log) {
    if (auto* tx = std::get_if<Tx>(&e); tx && tx->from == from && tx->to == to) out.push_back(*tx);
  }
  return out;
}

/// Pending (not yet executed) actions emitted by `from`.
inline std::vector<Action> outgoing_acts(const ChainState& s, const Address& from) {
  std::vector<Action> out;
  for (const auto& a : s.queue) {
    if (a.from == from) out.push_back(a);
  }
  return out;
}

inline constexpr std::size_t kMaxStepsPerBlock = 100'000;

namespace detail {

inline bool debit(ChainState& s, const Address& a, const Tez& amount) {
  auto rest = sub_opt(env_balance(s, a), amount);
  if (!rest) return false;
  if (rest->is_zero()) {
    s.balances.erase(a);
  } else {
    s.balances[a] = std::move(*rest);
  }
  return true;
}

inline void credit(ChainState& s, const Address& a, const Tez& amount) {
  if (amount.is_zero()) return;
  s.balances[a] += amount;
}

inline void enqueue(ChainState& s, const Action& parent, const Address& emitter,
                    std::vector<ActionBody> bodies, ExecOrder order) {
  std::vector<Action> acts;
  acts.reserve(bodies.size());
  for (auto& b : bodies) acts.push_back(Action{parent.origin, emitter, std::move(b)});
  if (order == ExecOrder::depth_first) {
    s.queue.insert(s.queue.begin(), std::make_move_iterator(acts.begin()),
                   std::make_move_iterator(acts.end()));
  } else {
    s.queue.insert(s.queue.end(), std::make_move_iterator(acts.begin()),
                   std::make_move_iterator(acts.end()));
  }
}

inline std::optional<FailureReason> deliver(ChainState& s, const Action& action, const Address& to,
                                            const Tez& amount, const std::optional<Payload>& msg,
                                            ExecOrder order) {
  auto code = contract_code(s, to);
  if (!code) return FailureReason::unknown_contract;
  ContractCallContext ctx{action.origin, action.from, to, env_balance(s, to), amount};
  auto result = code->receive(s.chain, ctx, s.states.at(to), msg);
  if (!result) return FailureReason::contract_rejected;
  s.states[to] = std::move(result->state);
  s.deliveries.push_back(Tx{ctx.from, to, amount, msg});
  enqueue(s, action, to, std::move(result->actions), order);
  return std::nullopt;
}

}  // namespace detail

/// Executes one already-dequeued action against `s` in place. On failure the
/// state is left partially updated; callers work on a scratch copy.
inline std::optional<FailureReason> execute_action(ChainState& s, const Action& action, ExecOrder order) {
  if (auto* t = std::get_if<TransferBody>(&action.body)) {
    if (!detail::debit(s, action.from, t->amount)) return FailureReason::insufficient_balance;
    detail::credit(s, t->to, t->amount);
    s.log.push_back(Tx{action.from, t->to, t->amount, std::nullopt});
    if (t->to.is_contract()) return detail::deliver(s, action, t->to, t->amount, std::nullopt, order);
    return std::nullopt;
  }
  if (auto* c = std::get_if<CallBody>(&action.body)) {
    if (c->to.is_user() && !c->payload.is_unit()) return FailureReason::not_a_contract;
    if (!detail::debit(s, action.from, c->amount)) return FailureReason::insufficient_balance;
    detail::credit(s, c->to, c->amount);
    s.log.push_back(Tx{action.from, c->to, c->amount, c->payload});
    if (c->to.is_contract()) return detail::deliver(s, action, c->to, c->amount, c->payload, order);
    return std::nullopt;
  }
  const auto& d = std::get<DeployBody>(action.body);
  if (!d.code) return FailureReason::init_rejected;
  if (!detail::debit(s, action.from, d.amount)) return FailureReason::insufficient_balance;
  Address at = Address::contract(s.next_contract_index++);
  detail::credit(s, at, d.amount);
  ContractCallContext ctx{action.origin, action.from, at, env_balance(s, at), d.amount};
  auto st = d.code->init(s.chain, ctx, d.setup);
  if (!st) return FailureReason::init_rejected;
  s.contracts[at] = d.code;
  s.states[at] = std::move(*st);
  s.log.push_back(Deployed{at, action.from, d.amount, d.setup});
  return std::nullopt;
}

struct BlockError {
  /// Index of the root action whose call tree contained the failing step.
  std::size_t root_index = 0;
  /// Zero-based count of steps executed in the block before the failure.
  std::size_t step = 0;
  FailureReason reason = FailureReason::contract_rejected;
  /// The input state, unchanged.
  ChainState state;
};

struct BlockResult {
  std::variant<ChainState, BlockError> outcome;

  bool committed() const { return outcome.index() == 0; }
  /// The committed state, or the unchanged input on rejection.
  const ChainState& state() const {
    return committed() ? std::get<ChainState>(outcome) : std::get<BlockError>(outcome).state;
  }
  const BlockError* error() const { return std::get_if<BlockError>(&outcome); }
};

/// Called with the in-progress state once after the root actions are queued
/// (executed == nullptr) and again after every executed action.
using StepObserver = std::function<void(const ChainState& state, const Action* executed)>;

/// Adds one block: bumps height and slot, then runs every root action and
/// everything they emit. Any failure rejects the whole block.
inline BlockResult add_block(const ChainState& input, const std::vector<Action>& roots, ExecOrder order,
                             const StepObserver& observer = {}) {
  auto reject = [&](std::size_t root, std::size_t step, FailureReason reason) {
    return BlockResult{BlockError{root, step, reason, input}};
  };
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const auto& a = roots[i];
    if (!a.origin.is_user() || a.from != a.origin) return reject(i, 0, FailureReason::invalid_root_action);
  }

  ChainState s = input;
  s.queue.clear();
  s.chain.finalized_height = s.chain.chain_height;
  s.chain.chain_height += 1;
  s.chain.current_slot += 1;
  s.queue = roots;
  // Root index of every queued action, kept in lockstep with s.queue.
  std::vector<std::size_t> owners(roots.size());
  for (std::size_t i = 0; i < owners.size(); ++i) owners[i] = i;
  if (observer) observer(s, nullptr);

  std::size_t step = 0;
  while (!s.queue.empty()) {
    if (step >= kMaxStepsPerBlock) return reject(owners.front(), step, FailureReason::step_limit);
    Action action = std::move(s.queue.front());
    s.queue.erase(s.queue.begin());
    std::size_t owner = owners.front();
    owners.erase(owners.begin());
    std::size_t before = s.queue.size();
    if (auto err = execute_action(s, action, order)) return reject(owner, step, *err);
    std::size_t emitted = s.queue.size() - before;
    if (order == ExecOrder::depth_first) {
      owners.insert(owners.begin(), emitted, owner);
    } else {
      owners.insert(owners.end(), emitted, owner);
    }
    ++step;
    if (observer) observer(s, &action);
  }
  return BlockResult{std::move(s)};
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string render(const ActionBody& body) {
  if (auto* t = std::get_if<TransferBody>(&body)) {
    return "transfer(to=@" + t->to.str() + ", amount=" + t->amount.str() + ")";
  }
  if (auto* c = std::get_if<CallBody>(&body)) {
    return "call(to=@" + c->to.str() + ", amount=" + c->amount.str() + ", msg=" + render(c->payload) + ")";
  }
  const auto& d = std::get<DeployBody>(body);
  return "deploy(code=" + (d.code ? d.code->display_name() : std::string("?")) +
         ", amount=" + d.amount.str() + ", setup=" + render(d.setup) + ")";
}

inline std::string render(const Action& a) {
  return "@" + a.from.str() + " [origin @" + a.origin.str() + "] " + render(a.body);
}

inline std::string render(const Event& e) {
  if (auto* d = std::get_if<Deployed>(&e)) {
    return "deployed @" + d->at.str() + " by @" + d->by.str() + " amount " + d->amount.str() +
           " setup " + render(d->setup);
  }
  const auto& t = std::get<Tx>(e);
  return "tx @" + t.from.str() + " -> @" + t.to.str() + " amount " + t.amount.str() +
         (t.payload ? " msg " + render(*t.payload) : std::string{});
}

/// Full textual dump; two states are identical iff their dumps are.
inline std::string render_state(const ChainState& s) {
  std::string out;
  out += "chain height=" + std::to_string(s.chain.chain_height) + " slot=" +
         std::to_string(s.chain.current_slot) + " finalized=" + std::to_string(s.chain.finalized_height) +
         " next_contract=" + std::to_string(s.next_contract_index) + " minted=" + s.total_minted.str() + "\n";
  for (const auto& [a, b] : s.balances) out += "balance @" + a.str() + " " + b.str() + "\n";
  for (const auto& [a, c] : s.contracts) out += "code @" + a.str() + " " + c->display_name() + "\n";
  for (const auto& [a, p] : s.states) out += "state @" + a.str() + " " + render(p) + "\n";
  for (const auto& a : s.queue) out += "queued " + render(a) + "\n";
  for (const auto& e : s.log) out += "log " + render(e) + "\n";
  for (const auto& t : s.deliveries) out += "delivered " + render(Event{t}) + "\n";
  return out;
}

}  // namespace dexsim
