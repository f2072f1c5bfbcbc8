#pragma once

// Constant-product market maker between tez and one FA2 token, with a
// separate FA1.2 liquidity token. Every entrypoint is a pure function
// returning the new state and the emitted operations, or nullopt on failure.
//
// Own messages arrive wrapped as other_msg(...); the FA2 balance_of callback
// arrives as receive_balance_of(...). An empty message is a donation.

#include "dexsim/contract.hpp"
#include "dexsim/contracts/fa12.hpp"
#include "dexsim/contracts/fa2.hpp"
#include "dexsim/contracts/mutation.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace dexsim::cpmm {

inline constexpr const char* kFamily = "dexter2-cpmm";

using Slot = std::uint64_t;

struct State {
  Nat token_pool;
  Nat xtz_pool;
  Nat lqt_total;
  bool self_is_updating_token_pool = false;
  bool freeze_baker = false;
  Address manager;
  Address token_address;
  Nat token_id;
  Address lqt_address = Address::null();
  friend bool operator==(const State&, const State&) = default;
};

struct Setup {
  Nat lqt_total;
  Address manager;
  Address token_address;
  Nat token_id;
};

struct AddLiquidity {
  Address owner;
  Nat min_lqt_minted;
  Nat max_tokens_deposited;
  Slot deadline = 0;
};
struct RemoveLiquidity {
  Address to;
  Nat lqt_burned;
  Tez min_xtz_withdrawn;
  Nat min_tokens_withdrawn;
  Slot deadline = 0;
};
struct XtzToToken {
  Address to;
  Nat min_tokens_bought;
  Slot deadline = 0;
};
struct TokenToXtz {
  Address to;
  Nat tokens_sold;
  Tez min_xtz_bought;
  Slot deadline = 0;
};
struct TokenToToken {
  Address output_dexter;
  Address to;
  Nat tokens_sold;
  Nat min_tokens_bought;
  Slot deadline = 0;
};
struct UpdateTokenPool {};
struct SetBaker {
  bool freeze_baker = false;
};
struct SetManager {
  Address new_manager;
};
struct SetLqtAddress {
  Address addr;
};
struct Default {};
struct BalanceCallback {
  std::vector<fa2::BalanceResponse> responses;
};

using Msg = std::variant<AddLiquidity, RemoveLiquidity, XtzToToken, TokenToXtz, TokenToToken, UpdateTokenPool,
                         SetBaker, SetManager, SetLqtAddress, Default, BalanceCallback>;

using Result = TypedResult<State>;

/// Encodes an exchange message (own entrypoints inside the receiver envelope).
inline Payload message(const Msg& m);
using Ops = std::vector<ActionBody>;

// ---------------------------------------------------------------------------
// Pricing. Each returns nullopt where the on-chain division would fail.

inline const Nat kFeeNumerator = 997;
inline const Nat kFeeDenominator = 1000;

/// Tokens paid out for `amount` mutez sold into pools (xtz_pool, token_pool).
inline std::optional<Nat> tokens_bought(const Nat& amount, const Nat& xtz_pool, const Nat& token_pool) {
  return div_opt(amount * kFeeNumerator * token_pool, xtz_pool * kFeeDenominator + amount * kFeeNumerator);
}

/// Mutez paid out for `tokens_sold` tokens sold into the pools.
inline std::optional<Nat> xtz_bought(const Nat& tokens_sold, const Nat& xtz_pool, const Nat& token_pool) {
  return div_opt(tokens_sold * kFeeNumerator * xtz_pool,
                 token_pool * kFeeDenominator + tokens_sold * kFeeNumerator);
}

// ---------------------------------------------------------------------------
// Operation builders

inline ActionBody token_transfer(const State& s, const Address& from, const Address& to, const Nat& value) {
  return CallBody{s.token_address, Tez{}, encode(fa2::Msg{fa2::Transfer{from, to, s.token_id, value}})};
}

inline ActionBody mint_or_burn(const State& s, const Int& quantity, const Address& target) {
  return CallBody{s.lqt_address, Tez{}, encode(fa12::Msg{fa12::MintOrBurn{quantity, target}})};
}

inline ActionBody xtz_transfer(const Address& to, const Nat& mutez) { return TransferBody{to, Tez{mutez}}; }

// ---------------------------------------------------------------------------
// Entrypoints

namespace detail {

inline bool updating(const State& s) { return s.self_is_updating_token_pool; }
inline bool stale(const Chain& chain, Slot deadline) { return deadline <= chain.current_slot; }
inline bool paid(const ContractCallContext& ctx) { return !ctx.amount.is_zero(); }

}  // namespace detail

inline std::optional<State> init(const Chain&, const ContractCallContext& ctx, const Setup& setup) {
  if (!ctx.amount.is_zero()) return std::nullopt;
  State s;
  s.lqt_total = setup.lqt_total;
  s.manager = setup.manager;
  s.token_address = setup.token_address;
  s.token_id = setup.token_id;
  return s;
}

inline Result xtz_to_token(const Chain& chain, const ContractCallContext& ctx, State s, const XtzToToken& p,
                           Mutation mut = Mutation::none) {
  if (detail::updating(s) || detail::stale(chain, p.deadline)) return std::nullopt;
  Nat amount = amount_to_nat(ctx.amount);
  auto bought = tokens_bought(amount, s.xtz_pool, s.token_pool);
  if (!bought) return std::nullopt;
  if (*bought < p.min_tokens_bought && mut != Mutation::drop_min_tokens_bought_guard) return std::nullopt;
  auto new_token_pool = sub_opt(s.token_pool, *bought);
  if (!new_token_pool) return std::nullopt;
  s.xtz_pool += amount;
  s.token_pool = *new_token_pool;
  Ops ops{token_transfer(s, ctx.contract_address, p.to, *bought)};
  return std::pair{std::move(s), std::move(ops)};
}

inline Result token_to_xtz(const Chain& chain, const ContractCallContext& ctx, State s, const TokenToXtz& p) {
  if (detail::updating(s) || detail::stale(chain, p.deadline) || detail::paid(ctx)) return std::nullopt;
  auto bought = xtz_bought(p.tokens_sold, s.xtz_pool, s.token_pool);
  if (!bought || *bought < p.min_xtz_bought.mutez) return std::nullopt;
  auto new_xtz_pool = sub_opt(s.xtz_pool, *bought);
  if (!new_xtz_pool) return std::nullopt;
  s.token_pool += p.tokens_sold;
  s.xtz_pool = *new_xtz_pool;
  Ops ops{token_transfer(s, ctx.from, ctx.contract_address, p.tokens_sold), xtz_transfer(p.to, *bought)};
  return std::pair{std::move(s), std::move(ops)};
}

/// Sells tokens here for tez and forwards the tez to another exchange's
/// xtz_to_token; the output slippage bound is enforced there.
inline Result token_to_token(const Chain& chain, const ContractCallContext& ctx, State s, const TokenToToken& p) {
  if (detail::updating(s) || detail::stale(chain, p.deadline) || detail::paid(ctx)) return std::nullopt;
  auto bought = xtz_bought(p.tokens_sold, s.xtz_pool, s.token_pool);
  if (!bought) return std::nullopt;
  auto new_xtz_pool = sub_opt(s.xtz_pool, *bought);
  if (!new_xtz_pool) return std::nullopt;
  s.token_pool += p.tokens_sold;
  s.xtz_pool = *new_xtz_pool;
  Payload forward = message(XtzToToken{p.to, p.min_tokens_bought, p.deadline});
  Ops ops{token_transfer(s, ctx.from, ctx.contract_address, p.tokens_sold),
          CallBody{p.output_dexter, Tez{*bought}, std::move(forward)}};
  return std::pair{std::move(s), std::move(ops)};
}

/// Liquidity minted rounds down and tokens deposited round up, both in the
/// pool's favour.
inline Result add_liquidity(const Chain& chain, const ContractCallContext& ctx, State s, const AddLiquidity& p,
                            Mutation mut = Mutation::none) {
  if (detail::updating(s) || detail::stale(chain, p.deadline) || s.lqt_address.is_null()) return std::nullopt;
  Nat amount = amount_to_nat(ctx.amount);
  auto minted = div_opt(amount * s.lqt_total, s.xtz_pool);
  auto deposited = mut == Mutation::floor_tokens_deposited ? div_opt(amount * s.token_pool, s.xtz_pool)
                                                           : ceildiv_opt(amount * s.token_pool, s.xtz_pool);
  if (!minted || !deposited) return std::nullopt;
  if (*deposited > p.max_tokens_deposited || *minted < p.min_lqt_minted) return std::nullopt;
  s.xtz_pool += amount;
  s.token_pool += *deposited;
  s.lqt_total += *minted;
  Ops ops{token_transfer(s, ctx.from, ctx.contract_address, *deposited), mint_or_burn(s, minted->value(), p.owner)};
  return std::pair{std::move(s), std::move(ops)};
}

inline Result remove_liquidity(const Chain& chain, const ContractCallContext& ctx, State s,
                               const RemoveLiquidity& p) {
  if (detail::updating(s) || detail::stale(chain, p.deadline) || detail::paid(ctx) || s.lqt_address.is_null()) {
    return std::nullopt;
  }
  auto xtz_out = div_opt(p.lqt_burned * s.xtz_pool, s.lqt_total);
  auto tokens_out = div_opt(p.lqt_burned * s.token_pool, s.lqt_total);
  if (!xtz_out || !tokens_out) return std::nullopt;
  if (*xtz_out < p.min_xtz_withdrawn.mutez || *tokens_out < p.min_tokens_withdrawn) return std::nullopt;
  auto new_lqt = sub_opt(s.lqt_total, p.lqt_burned);
  auto new_xtz = sub_opt(s.xtz_pool, *xtz_out);
  auto new_tokens = sub_opt(s.token_pool, *tokens_out);
  if (!new_lqt || !new_xtz || !new_tokens) return std::nullopt;
  s.lqt_total = *new_lqt;
  s.xtz_pool = *new_xtz;
  s.token_pool = *new_tokens;
  Ops ops{mint_or_burn(s, -p.lqt_burned.value(), ctx.from),
          token_transfer(s, ctx.contract_address, p.to, *tokens_out), xtz_transfer(p.to, *xtz_out)};
  return std::pair{std::move(s), std::move(ops)};
}

/// User-initiated only: asks the token contract for our balance and raises
/// the updating flag until the callback lands.
inline Result update_token_pool(const ContractCallContext& ctx, State s) {
  if (detail::paid(ctx) || ctx.from != ctx.origin || detail::updating(s)) return std::nullopt;
  s.self_is_updating_token_pool = true;
  fa2::BalanceOf request{{fa2::LedgerKey{ctx.contract_address, s.token_id}}, ctx.contract_address};
  Ops ops{CallBody{s.token_address, Tez{}, encode(fa2::Msg{std::move(request)})}};
  return std::pair{std::move(s), std::move(ops)};
}

inline Result update_token_pool_internal(const ContractCallContext& ctx, State s, const BalanceCallback& p) {
  if (detail::paid(ctx) || !detail::updating(s) || ctx.from != s.token_address || p.responses.empty()) {
    return std::nullopt;
  }
  const auto& [key, value] = p.responses.front();
  if (key.first != ctx.contract_address || key.second != s.token_id) return std::nullopt;
  s.token_pool = value;
  s.self_is_updating_token_pool = false;
  return std::pair{std::move(s), Ops{}};
}

/// Records the freeze flag only; delegation itself is outside the model.
inline Result set_baker(const ContractCallContext& ctx, State s, const SetBaker& p) {
  if (detail::paid(ctx) || ctx.from != s.manager || s.freeze_baker) return std::nullopt;
  s.freeze_baker = p.freeze_baker;
  return std::pair{std::move(s), Ops{}};
}

inline Result set_manager(const ContractCallContext& ctx, State s, const SetManager& p) {
  if (detail::paid(ctx) || ctx.from != s.manager) return std::nullopt;
  s.manager = p.new_manager;
  return std::pair{std::move(s), Ops{}};
}

inline Result set_lqt_address(const ContractCallContext& ctx, State s, const SetLqtAddress& p) {
  if (detail::paid(ctx) || ctx.from != s.manager || !s.lqt_address.is_null()) return std::nullopt;
  s.lqt_address = p.addr;
  return std::pair{std::move(s), Ops{}};
}

inline Result default_(const ContractCallContext& ctx, State s, Mutation mut = Mutation::none) {
  if (detail::updating(s)) return std::nullopt;
  if (mut != Mutation::default_skips_xtz_credit) s.xtz_pool += amount_to_nat(ctx.amount);
  return std::pair{std::move(s), Ops{}};
}

inline Result receive(const Chain& chain, const ContractCallContext& ctx, const State& s,
                      const std::optional<Msg>& msg, Mutation mut = Mutation::none) {
  if (!msg) return default_(ctx, s, mut);
  return std::visit(
      [&](const auto& p) -> Result {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, AddLiquidity>) {
          return add_liquidity(chain, ctx, s, p, mut);
        } else if constexpr (std::is_same_v<T, RemoveLiquidity>) {
          return remove_liquidity(chain, ctx, s, p);
        } else if constexpr (std::is_same_v<T, XtzToToken>) {
          return xtz_to_token(chain, ctx, s, p, mut);
        } else if constexpr (std::is_same_v<T, TokenToXtz>) {
          return token_to_xtz(chain, ctx, s, p);
        } else if constexpr (std::is_same_v<T, TokenToToken>) {
          return token_to_token(chain, ctx, s, p);
        } else if constexpr (std::is_same_v<T, UpdateTokenPool>) {
          return update_token_pool(ctx, s);
        } else if constexpr (std::is_same_v<T, SetBaker>) {
          return set_baker(ctx, s, p);
        } else if constexpr (std::is_same_v<T, SetManager>) {
          return set_manager(ctx, s, p);
        } else if constexpr (std::is_same_v<T, SetLqtAddress>) {
          return set_lqt_address(ctx, s, p);
        } else if constexpr (std::is_same_v<T, Default>) {
          return default_(ctx, s, mut);
        } else {
          return update_token_pool_internal(ctx, s, p);
        }
      },
      *msg);
}

}  // namespace dexsim::cpmm

namespace dexsim {

template <>
struct Codec<cpmm::State> {
  static Payload encode(const cpmm::State& s) {
    return RecordBuilder{}
        .field("tokenPool", s.token_pool)
        .field("xtzPool", s.xtz_pool)
        .field("lqtTotal", s.lqt_total)
        .field("selfIsUpdatingTokenPool", s.self_is_updating_token_pool)
        .field("freezeBaker", s.freeze_baker)
        .field("manager", s.manager)
        .field("tokenAddress", s.token_address)
        .field("tokenId", s.token_id)
        .field("lqtAddress", s.lqt_address)
        .build();
  }
  static std::optional<cpmm::State> decode(const Payload& p) {
    cpmm::State s;
    RecordReader r(p);
    r.field("tokenPool", s.token_pool);
    r.field("xtzPool", s.xtz_pool);
    r.field("lqtTotal", s.lqt_total);
    r.field("selfIsUpdatingTokenPool", s.self_is_updating_token_pool);
    r.field("freezeBaker", s.freeze_baker);
    r.field("manager", s.manager);
    r.field("tokenAddress", s.token_address);
    r.field("tokenId", s.token_id);
    r.field("lqtAddress", s.lqt_address);
    if (!r.done()) return std::nullopt;
    return s;
  }
};

template <>
struct Codec<cpmm::Setup> {
  static Payload encode(const cpmm::Setup& s) {
    return RecordBuilder{}
        .field("lqtTotal_", s.lqt_total)
        .field("manager_", s.manager)
        .field("tokenAddress_", s.token_address)
        .field("tokenId_", s.token_id)
        .build();
  }
  static std::optional<cpmm::Setup> decode(const Payload& p) {
    cpmm::Setup s;
    RecordReader r(p);
    r.field("lqtTotal_", s.lqt_total);
    r.field("manager_", s.manager);
    r.field("tokenAddress_", s.token_address);
    r.field("tokenId_", s.token_id);
    if (!r.done()) return std::nullopt;
    return s;
  }
};

/// Own entrypoints are encoded inside the receiver envelope; the balance
/// callback is the only bare tag accepted.
template <>
struct Codec<cpmm::Msg> {
  static Payload encode(const cpmm::Msg& m) {
    using namespace cpmm;
    if (auto* cb = std::get_if<BalanceCallback>(&m)) return fa2::balance_callback(cb->responses);
    Payload inner = std::visit(
        [](const auto& p) -> Payload {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, AddLiquidity>) {
            return Payload::tag("add_liquidity", RecordBuilder{}
                                                     .field("owner", p.owner)
                                                     .field("minLqtMinted", p.min_lqt_minted)
                                                     .field("maxTokensDeposited", p.max_tokens_deposited)
                                                     .field("deadline", p.deadline)
                                                     .build());
          } else if constexpr (std::is_same_v<T, RemoveLiquidity>) {
            return Payload::tag("remove_liquidity", RecordBuilder{}
                                                        .field("to", p.to)
                                                        .field("lqtBurned", p.lqt_burned)
                                                        .field("minXtzWithdrawn", p.min_xtz_withdrawn)
                                                        .field("minTokensWithdrawn", p.min_tokens_withdrawn)
                                                        .field("deadline", p.deadline)
                                                        .build());
          } else if constexpr (std::is_same_v<T, XtzToToken>) {
            return Payload::tag("xtz_to_token", RecordBuilder{}
                                                    .field("to", p.to)
                                                    .field("minTokensBought", p.min_tokens_bought)
                                                    .field("deadline", p.deadline)
                                                    .build());
          } else if constexpr (std::is_same_v<T, TokenToXtz>) {
            return Payload::tag("token_to_xtz", RecordBuilder{}
                                                    .field("to", p.to)
                                                    .field("tokensSold", p.tokens_sold)
                                                    .field("minXtzBought", p.min_xtz_bought)
                                                    .field("deadline", p.deadline)
                                                    .build());
          } else if constexpr (std::is_same_v<T, TokenToToken>) {
            return Payload::tag("token_to_token", RecordBuilder{}
                                                      .field("outputDexter", p.output_dexter)
                                                      .field("to", p.to)
                                                      .field("tokensSold", p.tokens_sold)
                                                      .field("minTokensBought", p.min_tokens_bought)
                                                      .field("deadline", p.deadline)
                                                      .build());
          } else if constexpr (std::is_same_v<T, UpdateTokenPool>) {
            return Payload::tag("update_token_pool");
          } else if constexpr (std::is_same_v<T, SetBaker>) {
            return Payload::tag("set_baker", RecordBuilder{}.field("freezeBaker", p.freeze_baker).build());
          } else if constexpr (std::is_same_v<T, SetManager>) {
            return Payload::tag("set_manager", RecordBuilder{}.field("newManager", p.new_manager).build());
          } else if constexpr (std::is_same_v<T, SetLqtAddress>) {
            return Payload::tag("set_lqt_address", RecordBuilder{}.field("addr", p.addr).build());
          } else {
            return Payload::tag("default");
          }
        },
        m);
    return wrap_receiver(std::move(inner));
  }

  static std::optional<cpmm::Msg> decode(const Payload& p) {
    using namespace cpmm;
    if (p.is_tag("receive_balance_of")) {
      auto responses = dexsim::decode<std::vector<fa2::BalanceResponse>>(*p.tag_arg());
      if (!responses) return std::nullopt;
      return BalanceCallback{std::move(*responses)};
    }
    auto inner = unwrap_receiver(p);
    if (!inner || inner->kind() != Payload::Kind::tag) return std::nullopt;
    const Payload& arg = *inner->tag_arg();
    RecordReader r(arg);
    if (inner->is_tag("add_liquidity")) {
      AddLiquidity m;
      r.field("owner", m.owner);
      r.field("minLqtMinted", m.min_lqt_minted);
      r.field("maxTokensDeposited", m.max_tokens_deposited);
      r.field("deadline", m.deadline);
      if (r.done()) return m;
    } else if (inner->is_tag("remove_liquidity")) {
      RemoveLiquidity m;
      r.field("to", m.to);
      r.field("lqtBurned", m.lqt_burned);
      r.field("minXtzWithdrawn", m.min_xtz_withdrawn);
      r.field("minTokensWithdrawn", m.min_tokens_withdrawn);
      r.field("deadline", m.deadline);
      if (r.done()) return m;
    } else if (inner->is_tag("xtz_to_token")) {
      XtzToToken m;
      r.field("to", m.to);
      r.field("minTokensBought", m.min_tokens_bought);
      r.field("deadline", m.deadline);
      if (r.done()) return m;
    } else if (inner->is_tag("token_to_xtz")) {
      TokenToXtz m;
      r.field("to", m.to);
      r.field("tokensSold", m.tokens_sold);
      r.field("minXtzBought", m.min_xtz_bought);
      r.field("deadline", m.deadline);
      if (r.done()) return m;
    } else if (inner->is_tag("token_to_token")) {
      TokenToToken m;
      r.field("outputDexter", m.output_dexter);
      r.field("to", m.to);
      r.field("tokensSold", m.tokens_sold);
      r.field("minTokensBought", m.min_tokens_bought);
      r.field("deadline", m.deadline);
      if (r.done()) return m;
    } else if (inner->is_tag("update_token_pool")) {
      if (arg.is_unit()) return UpdateTokenPool{};
    } else if (inner->is_tag("set_baker")) {
      SetBaker m;
      r.field("freezeBaker", m.freeze_baker);
      if (r.done()) return m;
    } else if (inner->is_tag("set_manager")) {
      SetManager m;
      r.field("newManager", m.new_manager);
      if (r.done()) return m;
    } else if (inner->is_tag("set_lqt_address")) {
      SetLqtAddress m;
      r.field("addr", m.addr);
      if (r.done()) return m;
    } else if (inner->is_tag("default")) {
      if (arg.is_unit()) return Default{};
    }
    return std::nullopt;
  }
};

}  // namespace dexsim

namespace dexsim::cpmm {

inline Payload message(const Msg& m) { return encode(m); }

inline ContractRef contract(Mutation mut = Mutation::none) {
  bool own = mut != Mutation::none && !is_lqt_mutation(mut);
  Mutation active = own ? mut : Mutation::none;
  return make_contract<Setup, State, Msg>(
      kFamily, own ? std::string(to_string(mut)) : std::string(), init,
      [active](const Chain& chain, const ContractCallContext& ctx, const State& s, const std::optional<Msg>& msg) {
        return receive(chain, ctx, s, msg, active);
      });
}

}  // namespace dexsim::cpmm
