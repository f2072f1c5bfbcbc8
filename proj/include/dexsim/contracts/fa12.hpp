#pragma once

// Liquidity token: an FA1.2 ledger with allowances, three callback views and
// an admin-only mintOrBurn. Every entrypoint is non-payable. Ledger and
// allowance entries are pruned when they reach zero, so absent means zero.

#include "dexsim/contract.hpp"
#include "dexsim/contracts/mutation.hpp"

#include <map>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace dexsim::fa12 {

inline constexpr const char* kFamily = "dexter2-lqt";

using AllowanceKey = std::pair<Address, Address>;  // (owner, spender)

struct State {
  std::map<Address, Nat> tokens;
  std::map<AllowanceKey, Nat> allowances;
  Address admin;
  Nat total_supply;
  friend bool operator==(const State&, const State&) = default;
};

struct Setup {
  Address admin;
  Address lqt_provider;
  Nat initial_pool;
};

struct Transfer {
  Address from;
  Address to;
  Nat value;
};
struct Approve {
  Address spender;
  Nat value;
};
struct MintOrBurn {
  Int quantity;
  Address target;
};
struct GetAllowance {
  Address owner;
  Address spender;
  Address callback;
};
struct GetBalance {
  Address owner;
  Address callback;
};
struct GetTotalSupply {
  Address callback;
};

using Msg = std::variant<Transfer, Approve, MintOrBurn, GetAllowance, GetBalance, GetTotalSupply>;

inline Nat balance(const State& s, const Address& owner) {
  auto it = s.tokens.find(owner);
  return it == s.tokens.end() ? Nat{} : it->second;
}

inline Nat allowance(const State& s, const Address& owner, const Address& spender) {
  auto it = s.allowances.find({owner, spender});
  return it == s.allowances.end() ? Nat{} : it->second;
}

template <typename K>
void store(std::map<K, Nat>& m, const K& key, Nat value) {
  if (value.is_zero()) {
    m.erase(key);
  } else {
    m[key] = std::move(value);
  }
}

inline std::optional<State> init(const Chain&, const ContractCallContext& ctx, const Setup& setup) {
  if (!ctx.amount.is_zero()) return std::nullopt;
  State s;
  s.admin = setup.admin;
  s.total_supply = setup.initial_pool;
  store(s.tokens, setup.lqt_provider, setup.initial_pool);
  return s;
}

inline TypedResult<State> transfer(const ContractCallContext& ctx, State s, const Transfer& p, Mutation mut) {
  if (ctx.from != p.from) {
    auto left = sub_opt(allowance(s, p.from, ctx.from), p.value);
    if (!left) return std::nullopt;
    if (mut != Mutation::skip_allowance_decrement) store(s.allowances, AllowanceKey{p.from, ctx.from}, *left);
  }
  auto from_left = sub_opt(balance(s, p.from), p.value);
  if (!from_left) return std::nullopt;
  store(s.tokens, p.from, *from_left);
  store(s.tokens, p.to, balance(s, p.to) + p.value);
  return std::pair{std::move(s), std::vector<ActionBody>{}};
}

/// Changing a nonzero allowance to another nonzero value is refused.
inline TypedResult<State> approve(const ContractCallContext& ctx, State s, const Approve& p) {
  if (!allowance(s, ctx.from, p.spender).is_zero() && !p.value.is_zero()) return std::nullopt;
  store(s.allowances, AllowanceKey{ctx.from, p.spender}, p.value);
  return std::pair{std::move(s), std::vector<ActionBody>{}};
}

inline TypedResult<State> mint_or_burn(const ContractCallContext& ctx, State s, const MintOrBurn& p,
                                       Mutation mut) {
  if (ctx.from != s.admin && mut != Mutation::non_admin_mint_or_burn) return std::nullopt;
  auto new_balance = int_add_nat(balance(s, p.target), p.quantity);
  auto new_supply = int_add_nat(s.total_supply, p.quantity);
  if (!new_balance || !new_supply) return std::nullopt;
  store(s.tokens, p.target, *new_balance);
  s.total_supply = *new_supply;
  return std::pair{std::move(s), std::vector<ActionBody>{}};
}

inline TypedResult<State> view(const State& s, const Address& callback, const char* tag, const Nat& value) {
  std::vector<ActionBody> ops{CallBody{callback, Tez{}, Payload::tag(tag, Payload::nat(value))}};
  return std::pair{s, std::move(ops)};
}

inline TypedResult<State> receive(const Chain&, const ContractCallContext& ctx, const State& s,
                                  const std::optional<Msg>& msg, Mutation mut = Mutation::none) {
  if (!msg || !ctx.amount.is_zero()) return std::nullopt;
  return std::visit(
      [&](const auto& p) -> TypedResult<State> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Transfer>) {
          return transfer(ctx, s, p, mut);
        } else if constexpr (std::is_same_v<T, Approve>) {
          return approve(ctx, s, p);
        } else if constexpr (std::is_same_v<T, MintOrBurn>) {
          return mint_or_burn(ctx, s, p, mut);
        } else if constexpr (std::is_same_v<T, GetAllowance>) {
          return view(s, p.callback, "receive_allowance", allowance(s, p.owner, p.spender));
        } else if constexpr (std::is_same_v<T, GetBalance>) {
          return view(s, p.callback, "receive_balance", balance(s, p.owner));
        } else {
          return view(s, p.callback, "receive_total_supply", s.total_supply);
        }
      },
      *msg);
}

}  // namespace dexsim::fa12

namespace dexsim {

template <>
struct Codec<fa12::State> {
  static Payload encode(const fa12::State& s) {
    return RecordBuilder{}
        .field("tokens", s.tokens)
        .field("allowances", s.allowances)
        .field("admin", s.admin)
        .field("total_supply", s.total_supply)
        .build();
  }
  static std::optional<fa12::State> decode(const Payload& p) {
    fa12::State s;
    RecordReader r(p);
    r.field("tokens", s.tokens);
    r.field("allowances", s.allowances);
    r.field("admin", s.admin);
    r.field("total_supply", s.total_supply);
    if (!r.done()) return std::nullopt;
    return s;
  }
};

template <>
struct Codec<fa12::Setup> {
  static Payload encode(const fa12::Setup& s) {
    return RecordBuilder{}
        .field("admin_", s.admin)
        .field("lqt_provider", s.lqt_provider)
        .field("initial_pool", s.initial_pool)
        .build();
  }
  static std::optional<fa12::Setup> decode(const Payload& p) {
    fa12::Setup s;
    RecordReader r(p);
    r.field("admin_", s.admin);
    r.field("lqt_provider", s.lqt_provider);
    r.field("initial_pool", s.initial_pool);
    if (!r.done()) return std::nullopt;
    return s;
  }
};

template <>
struct Codec<fa12::Msg> {
  static Payload encode(const fa12::Msg& m) {
    return std::visit(
        [](const auto& p) -> Payload {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, fa12::Transfer>) {
            return Payload::tag(
                "transfer",
                RecordBuilder{}.field("from", p.from).field("to", p.to).field("value", p.value).build());
          } else if constexpr (std::is_same_v<T, fa12::Approve>) {
            return Payload::tag("approve",
                                RecordBuilder{}.field("spender", p.spender).field("value", p.value).build());
          } else if constexpr (std::is_same_v<T, fa12::MintOrBurn>) {
            return Payload::tag("mint_or_burn",
                                RecordBuilder{}.field("quantity", p.quantity).field("target", p.target).build());
          } else if constexpr (std::is_same_v<T, fa12::GetAllowance>) {
            return Payload::tag("get_allowance", RecordBuilder{}
                                                     .field("owner", p.owner)
                                                     .field("spender", p.spender)
                                                     .field("callback", p.callback)
                                                     .build());
          } else if constexpr (std::is_same_v<T, fa12::GetBalance>) {
            return Payload::tag("get_balance",
                                RecordBuilder{}.field("owner", p.owner).field("callback", p.callback).build());
          } else {
            return Payload::tag("get_total_supply", RecordBuilder{}.field("callback", p.callback).build());
          }
        },
        m);
  }

  static std::optional<fa12::Msg> decode(const Payload& p) {
    if (p.kind() != Payload::Kind::tag) return std::nullopt;
    const Payload& arg = *p.tag_arg();
    RecordReader r(arg);
    if (p.is_tag("transfer")) {
      fa12::Transfer t;
      r.field("from", t.from);
      r.field("to", t.to);
      r.field("value", t.value);
      if (r.done()) return t;
    } else if (p.is_tag("approve")) {
      fa12::Approve a;
      r.field("spender", a.spender);
      r.field("value", a.value);
      if (r.done()) return a;
    } else if (p.is_tag("mint_or_burn")) {
      fa12::MintOrBurn m;
      r.field("quantity", m.quantity);
      r.field("target", m.target);
      if (r.done()) return m;
    } else if (p.is_tag("get_allowance")) {
      fa12::GetAllowance g;
      r.field("owner", g.owner);
      r.field("spender", g.spender);
      r.field("callback", g.callback);
      if (r.done()) return g;
    } else if (p.is_tag("get_balance")) {
      fa12::GetBalance g;
      r.field("owner", g.owner);
      r.field("callback", g.callback);
      if (r.done()) return g;
    } else if (p.is_tag("get_total_supply")) {
      fa12::GetTotalSupply g;
      r.field("callback", g.callback);
      if (r.done()) return g;
    }
    return std::nullopt;
  }
};

}  // namespace dexsim

namespace dexsim::fa12 {

inline ContractRef contract(Mutation mut = Mutation::none) {
  std::string variant = is_lqt_mutation(mut) ? std::string(to_string(mut)) : std::string();
  Mutation active = is_lqt_mutation(mut) ? mut : Mutation::none;
  return make_contract<Setup, State, Msg>(
      kFamily, std::move(variant), init,
      [active](const Chain& chain, const ContractCallContext& ctx, const State& s,
               const std::optional<Msg>& msg) { return receive(chain, ctx, s, msg, active); });
}

}  // namespace dexsim::fa12
