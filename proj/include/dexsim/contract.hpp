#pragma once

// The contract abstraction: a pair of pure functions over Payload, plus a
// helper that lifts typed init/receive functions into that weak form.

#include "dexsim/address.hpp"
#include "dexsim/arith.hpp"
#include "dexsim/codec.hpp"
#include "dexsim/payload.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dexsim {

struct Chain {
  std::uint64_t chain_height = 0;
  std::uint64_t current_slot = 0;
  std::uint64_t finalized_height = 0;

  friend bool operator==(const Chain&, const Chain&) = default;
};

/// What a contract sees about the call being executed. contract_balance
/// already includes amount.
struct ContractCallContext {
  Address origin;
  Address from;
  Address contract_address;
  Tez contract_balance;
  Tez amount;
};

struct Contract;
using ContractRef = std::shared_ptr<const Contract>;

struct TransferBody {
  Address to;
  Tez amount;
  friend bool operator==(const TransferBody&, const TransferBody&) = default;
};

struct CallBody {
  Address to;
  Tez amount;
  Payload payload;
  friend bool operator==(const CallBody&, const CallBody&) = default;
};

struct DeployBody {
  Tez amount;
  ContractRef code;
  Payload setup;
  friend bool operator==(const DeployBody&, const DeployBody&) = default;
};

using ActionBody = std::variant<TransferBody, CallBody, DeployBody>;

inline const Tez& action_amount(const ActionBody& body) {
  return std::visit([](const auto& b) -> const Tez& { return b.amount; }, body);
}

/// Destination of a transfer or call; nullopt for deployments.
inline std::optional<Address> action_target(const ActionBody& body) {
  if (auto* t = std::get_if<TransferBody>(&body)) return t->to;
  if (auto* c = std::get_if<CallBody>(&body)) return c->to;
  return std::nullopt;
}

struct ReceiveResult {
  Payload state;
  std::vector<ActionBody> actions;
};

using InitFn = std::function<std::optional<Payload>(const Chain&, const ContractCallContext&,
                                                    const Payload& setup)>;
using ReceiveFn = std::function<std::optional<ReceiveResult>(
    const Chain&, const ContractCallContext&, const Payload& state, const std::optional<Payload>& msg)>;

/// Deployable code. `family` identifies the contract kind ("dexter2-cpmm",
/// ...) and is shared by all variants; `variant` distinguishes mutants.
struct Contract {
  std::string family;
  std::string variant;
  InitFn init;
  ReceiveFn receive;

  std::string display_name() const { return variant.empty() ? family : family + ":" + variant; }
};

template <typename State>
using TypedResult = std::optional<std::pair<State, std::vector<ActionBody>>>;

/// Lifts typed entry functions to a weak contract. An undecodable setup,
/// state or (present) message is a failure.
template <typename Setup, typename State, typename Msg>
ContractRef make_contract(
    std::string family, std::string variant,
    std::function<std::optional<State>(const Chain&, const ContractCallContext&, const Setup&)> init,
    std::function<TypedResult<State>(const Chain&, const ContractCallContext&, const State&,
                                     const std::optional<Msg>&)>
        receive) {
  auto c = std::make_shared<Contract>();
  c->family = std::move(family);
  c->variant = std::move(variant);
  c->init = [init = std::move(init)](const Chain& chain, const ContractCallContext& ctx,
                                     const Payload& setup) -> std::optional<Payload> {
    auto s = decode<Setup>(setup);
    if (!s) return std::nullopt;
    auto st = init(chain, ctx, *s);
    if (!st) return std::nullopt;
    return encode(*st);
  };
  c->receive = [receive = std::move(receive)](
                   const Chain& chain, const ContractCallContext& ctx, const Payload& state,
                   const std::optional<Payload>& msg) -> std::optional<ReceiveResult> {
    auto st = decode<State>(state);
    if (!st) return std::nullopt;
    std::optional<Msg> m;
    if (msg) {
      m = decode<Msg>(*msg);
      if (!m) return std::nullopt;
    }
    auto r = receive(chain, ctx, *st, m);
    if (!r) return std::nullopt;
    return ReceiveResult{encode(r->first), std::move(r->second)};
  };
  return c;
}

/// Envelope that lets a contract with its own message type also accept
/// token callbacks: own messages travel as other_msg(inner).
inline Payload wrap_receiver(Payload inner) { return Payload::tag("other_msg", std::move(inner)); }

/// Inverse of wrap_receiver; nullopt for any other payload.
inline std::optional<Payload> unwrap_receiver(const Payload& p) {
  if (!p.is_tag("other_msg")) return std::nullopt;
  return *p.tag_arg();
}

}  // namespace dexsim
