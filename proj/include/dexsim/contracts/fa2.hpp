#pragma once

// Minimal FA2 token: a multi-asset ledger with single transfers and a
// balance_of view. Operator permissions are reduced to one rule: a user may
// only move its own tokens, while a calling contract may move any holder's
// tokens (the exchange pulls tokens from its callers this way).

#include "dexsim/contract.hpp"

#include <map>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace dexsim::fa2 {

inline constexpr const char* kFamily = "fa2-token";

using LedgerKey = std::pair<Address, Nat>;  // (owner, token id)

struct State {
  std::map<LedgerKey, Nat> ledger;
  friend bool operator==(const State&, const State&) = default;
};

struct Setup {
  std::vector<std::pair<LedgerKey, Nat>> initial;
};

struct Transfer {
  Address from;
  Address to;
  Nat token_id;
  Nat value;
};

struct BalanceOf {
  std::vector<LedgerKey> requests;
  Address callback;
};

using Msg = std::variant<Transfer, BalanceOf>;

using BalanceResponse = std::pair<LedgerKey, Nat>;

/// Callback message delivered to a balance_of caller.
inline Payload balance_callback(const std::vector<BalanceResponse>& responses) {
  return Payload::tag("receive_balance_of", encode(responses));
}

inline Nat balance(const State& s, const Address& owner, const Nat& token_id) {
  auto it = s.ledger.find({owner, token_id});
  return it == s.ledger.end() ? Nat{} : it->second;
}

inline std::optional<State> init(const Chain&, const ContractCallContext& ctx, const Setup& setup) {
  if (!ctx.amount.is_zero()) return std::nullopt;
  State s;
  for (const auto& [key, value] : setup.initial) {
    if (value.is_zero()) continue;
    s.ledger[key] += value;
  }
  return s;
}

inline TypedResult<State> transfer(const ContractCallContext& ctx, State s, const Transfer& p) {
  if (ctx.from.is_user() && ctx.from != p.from) return std::nullopt;
  auto from_left = sub_opt(balance(s, p.from, p.token_id), p.value);
  if (!from_left) return std::nullopt;
  if (from_left->is_zero()) {
    s.ledger.erase({p.from, p.token_id});
  } else {
    s.ledger[{p.from, p.token_id}] = *from_left;
  }
  if (!p.value.is_zero()) s.ledger[{p.to, p.token_id}] += p.value;
  return std::pair{std::move(s), std::vector<ActionBody>{}};
}

inline TypedResult<State> balance_of(const State& s, const BalanceOf& p) {
  std::vector<BalanceResponse> responses;
  responses.reserve(p.requests.size());
  for (const auto& key : p.requests) responses.emplace_back(key, balance(s, key.first, key.second));
  std::vector<ActionBody> ops{CallBody{p.callback, Tez{}, balance_callback(responses)}};
  return std::pair{s, std::move(ops)};
}

inline TypedResult<State> receive(const Chain&, const ContractCallContext& ctx, const State& s,
                                  const std::optional<Msg>& msg) {
  if (!msg || !ctx.amount.is_zero()) return std::nullopt;
  if (auto* t = std::get_if<Transfer>(&*msg)) return transfer(ctx, s, *t);
  return balance_of(s, std::get<BalanceOf>(*msg));
}

}  // namespace dexsim::fa2

namespace dexsim {

template <>
struct Codec<fa2::State> {
  static Payload encode(const fa2::State& s) { return RecordBuilder{}.field("ledger", s.ledger).build(); }
  static std::optional<fa2::State> decode(const Payload& p) {
    fa2::State s;
    RecordReader r(p);
    r.field("ledger", s.ledger);
    if (!r.done()) return std::nullopt;
    return s;
  }
};

template <>
struct Codec<fa2::Setup> {
  static Payload encode(const fa2::Setup& s) { return RecordBuilder{}.field("initial", s.initial).build(); }
  static std::optional<fa2::Setup> decode(const Payload& p) {
    fa2::Setup s;
    RecordReader r(p);
    r.field("initial", s.initial);
    if (!r.done()) return std::nullopt;
    return s;
  }
};

template <>
struct Codec<fa2::Msg> {
  static Payload encode(const fa2::Msg& m) {
    if (auto* t = std::get_if<fa2::Transfer>(&m)) {
      return Payload::tag("transfer", RecordBuilder{}
                                          .field("from", t->from)
                                          .field("to", t->to)
                                          .field("tokenId", t->token_id)
                                          .field("value", t->value)
                                          .build());
    }
    const auto& b = std::get<fa2::BalanceOf>(m);
    return Payload::tag("balance_of",
                        RecordBuilder{}.field("requests", b.requests).field("callback", b.callback).build());
  }

  static std::optional<fa2::Msg> decode(const Payload& p) {
    if (p.is_tag("transfer")) {
      fa2::Transfer t;
      RecordReader r(*p.tag_arg());
      r.field("from", t.from);
      r.field("to", t.to);
      r.field("tokenId", t.token_id);
      r.field("value", t.value);
      if (!r.done()) return std::nullopt;
      return t;
    }
    if (p.is_tag("balance_of")) {
      fa2::BalanceOf b;
      RecordReader r(*p.tag_arg());
      r.field("requests", b.requests);
      r.field("callback", b.callback);
      if (!r.done()) return std::nullopt;
      return b;
    }
    return std::nullopt;
  }
};

}  // namespace dexsim

namespace dexsim::fa2 {

inline ContractRef contract() {
  return make_contract<Setup, State, Msg>(kFamily, "", init, receive);
}

}  // namespace dexsim::fa2
