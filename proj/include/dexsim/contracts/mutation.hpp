#pragma once

// Single-line faults that can be compiled into the exchange contracts at
// deployment time. Each one must be caught by at least one trace checker.

#include <array>
#include <optional>
#include <string_view>

namespace dexsim {

enum class Mutation {
  none,
  default_skips_xtz_credit,       // cpmm default: xtzPool is not credited
  drop_min_tokens_bought_guard,   // cpmm xtz_to_token: slippage guard removed
  floor_tokens_deposited,         // cpmm add_liquidity: floor instead of ceiling
  skip_allowance_decrement,       // fa12 transfer: spender allowance untouched
  non_admin_mint_or_burn,         // fa12 mintOrBurn: admin check removed
};

inline constexpr std::array<Mutation, 5> kAllMutations{
    Mutation::default_skips_xtz_credit, Mutation::drop_min_tokens_bought_guard,
    Mutation::floor_tokens_deposited, Mutation::skip_allowance_decrement,
    Mutation::non_admin_mint_or_burn};

inline constexpr std::string_view to_string(Mutation m) {
  switch (m) {
    case Mutation::none: return "none";
    case Mutation::default_skips_xtz_credit: return "default_skips_xtz_credit";
    case Mutation::drop_min_tokens_bought_guard: return "drop_min_tokens_bought_guard";
    case Mutation::floor_tokens_deposited: return "floor_tokens_deposited";
    case Mutation::skip_allowance_decrement: return "skip_allowance_decrement";
    case Mutation::non_admin_mint_or_burn: return "non_admin_mint_or_burn";
  }
  return "none";
}

inline std::optional<Mutation> parse_mutation(std::string_view name) {
  if (name == "none") return Mutation::none;
  for (auto m : kAllMutations) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

/// True for mutations that live in the liquidity token rather than the exchange.
inline constexpr bool is_lqt_mutation(Mutation m) {
  return m == Mutation::skip_allowance_decrement || m == Mutation::non_admin_mint_or_burn;
}

}  // namespace dexsim
