#pragma once

// Seeded random workloads against one or more wired-up exchanges.
//
// A trace starts with a fixed set of wiring blocks (deploy the FA2 tokens,
// the exchanges and their liquidity tokens, link them, seed the pools), then
// adds user blocks drawn from the committed state at each block boundary.
// A share of the drawn inputs is deliberately bad (stale deadlines, mins
// above the quote, overspends, unauthorized callers) so rejections and
// guards are exercised too.
//
// Randomness comes from std::mt19937_64 only, reduced by modulo, so a seed
// yields the same trace on every platform. Keep at most one draw per
// function-call argument list: argument evaluation order is unspecified.

#include "dexsim/chain.hpp"
#include "dexsim/contracts/cpmm.hpp"
#include "dexsim/contracts/fa12.hpp"
#include "dexsim/contracts/fa2.hpp"
#include "dexsim/contracts/mutation.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <iterator>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace dexsim::harness {

enum class ActionKind : std::uint8_t {
  xtz_to_token,
  token_to_xtz,
  token_to_token,
  add_liquidity,
  remove_liquidity,
  update_token_pool,
  donate,
  set_baker,
  set_manager,
  set_lqt_address,
  lqt_transfer,
  lqt_approve,
  lqt_transfer_from,
  lqt_mint_or_burn,
  token_transfer,
  tez_transfer,
};

inline constexpr std::size_t kActionKinds = 16;

inline constexpr std::array<std::string_view, kActionKinds> kActionKindNames{
    "xtz_to_token",   "token_to_xtz",     "token_to_token",    "add_liquidity",    "remove_liquidity",
    "update_token_pool", "donate",        "set_baker",         "set_manager",      "set_lqt_address",
    "lqt_transfer",   "lqt_approve",      "lqt_transfer_from", "lqt_mint_or_burn", "token_transfer",
    "tez_transfer",
};

struct Amounts {
  std::uint64_t user_tez = 1'000'000'000;
  std::uint64_t user_tokens = 10'000'000;
  std::uint64_t pool_tez = 1'000'000;
  std::uint64_t pool_tokens = 2'718'281;
  std::uint64_t initial_lqt = 1'000'000;
  std::uint64_t max_trade = 200'000;
};

struct TraceConfig {
  std::uint64_t seed = 0;
  std::size_t blocks = 10;
  std::size_t users = 4;
  std::size_t exchanges = 2;
  std::size_t max_actions_per_block = 3;
  ExecOrder order = ExecOrder::depth_first;
  Mutation mutation = Mutation::none;
  /// Chance, in percent, that a drawn input is made deliberately invalid.
  unsigned bad_input_percent = 15;
  Amounts amounts;
  std::array<unsigned, kActionKinds> weights{8, 7, 5, 6, 5, 3, 3, 1, 1, 1, 3, 3, 3, 1, 3, 2};
};

struct Exchange {
  Address token;
  Address main;
  Address lqt;
};

struct Deployment {
  std::vector<Address> users;
  std::vector<Exchange> exchanges;
};

/// Addresses the wiring blocks will produce for this config.
inline Deployment plan_deployment(const TraceConfig& cfg) {
  if (cfg.users == 0 || cfg.exchanges == 0) throw std::invalid_argument("need at least one user and one exchange");
  Deployment d;
  for (std::size_t i = 0; i < cfg.users; ++i) d.users.push_back(Address::user(i));
  std::uint64_t n = cfg.exchanges;
  for (std::uint64_t e = 0; e < n; ++e) {
    d.exchanges.push_back({Address::contract(1 + e), Address::contract(1 + n + e), Address::contract(1 + 2 * n + e)});
  }
  return d;
}

inline ChainState initial_chain(const TraceConfig& cfg) {
  std::vector<std::pair<Address, Tez>> users;
  for (std::size_t i = 0; i < cfg.users; ++i) users.emplace_back(Address::user(i), Tez{cfg.amounts.user_tez});
  return empty_chain(users);
}

inline Action user_call(const Address& u, const Address& to, Tez amount, Payload msg) {
  return Action{u, u, CallBody{to, std::move(amount), std::move(msg)}};
}

inline Action user_transfer(const Address& u, const Address& to, Tez amount) {
  return Action{u, u, TransferBody{to, std::move(amount)}};
}

inline Payload fa2_transfer_msg(const Address& from, const Address& to, const Nat& value) {
  return encode(fa2::Msg{fa2::Transfer{from, to, Nat{}, value}});
}

/// Blocks that deploy and link every exchange and seed its pools.
inline std::vector<std::vector<Action>> wiring_blocks(const TraceConfig& cfg, const Deployment& d) {
  const Address admin = d.users.front();
  const auto& a = cfg.amounts;
  std::vector<std::vector<Action>> blocks(4);
  for (const auto& ex : d.exchanges) {
    fa2::Setup token_setup;
    for (const auto& u : d.users) {
      Nat held = a.user_tokens;
      if (u == admin) held += a.pool_tokens;
      token_setup.initial.push_back({{u, Nat{}}, held});
    }
    blocks[0].push_back(Action{admin, admin, DeployBody{Tez{}, fa2::contract(), encode(token_setup)}});
    cpmm::Setup main_setup{a.initial_lqt, admin, ex.token, Nat{}};
    blocks[1].push_back(Action{admin, admin, DeployBody{Tez{}, cpmm::contract(cfg.mutation), encode(main_setup)}});
    fa12::Setup lqt_setup{ex.main, admin, a.initial_lqt};
    blocks[2].push_back(Action{admin, admin, DeployBody{Tez{}, fa12::contract(cfg.mutation), encode(lqt_setup)}});
    blocks[3].push_back(user_call(admin, ex.main, Tez{}, cpmm::message(cpmm::SetLqtAddress{ex.lqt})));
    blocks[3].push_back(user_call(admin, ex.token, Tez{}, fa2_transfer_msg(admin, ex.main, a.pool_tokens)));
    blocks[3].push_back(user_transfer(admin, ex.main, Tez{a.pool_tez}));
    blocks[3].push_back(user_call(admin, ex.main, Tez{}, cpmm::message(cpmm::UpdateTokenPool{})));
  }
  return blocks;
}

inline std::uint64_t to_u64(const Nat& n) {
  if (n.value() > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  return n.value().convert_to<std::uint64_t>();
}

/// Draws user blocks from the committed state.
class ActionGenerator {
 public:
  ActionGenerator(const TraceConfig& cfg, Deployment d) : cfg_(cfg), d_(std::move(d)), rng_(cfg.seed) {}

  std::vector<Action> next_block(const ChainState& s) {
    std::size_t n = 1 + below(cfg_.max_actions_per_block == 0 ? 1 : cfg_.max_actions_per_block);
    std::vector<Action> roots;
    for (std::size_t i = 0; i < n; ++i) roots.push_back(draw(s));
    return roots;
  }

  const Deployment& deployment() const { return d_; }

 private:
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : rng_() % n; }
  std::uint64_t range(std::uint64_t lo, std::uint64_t hi) { return hi <= lo ? lo : lo + below(hi - lo + 1); }
  bool bad() { return below(100) < cfg_.bad_input_percent; }
  bool chance(unsigned percent) { return below(100) < percent; }
  const Address& any_user() { return d_.users[below(d_.users.size())]; }
  const Exchange& any_exchange() { return d_.exchanges[below(d_.exchanges.size())]; }

  /// Somewhere in [90%, 100%] of a quote, used as a slippage bound.
  Nat under(const Nat& quote) {
    std::uint64_t q = to_u64(quote);
    return Nat{q - below(q / 10 + 1)};
  }

  std::uint64_t fresh_deadline(const ChainState& s) { return s.chain.current_slot + 2 + below(5); }
  std::uint64_t deadline(const ChainState& s) {
    if (bad() && chance(40)) return s.chain.current_slot + 1 - below(2);
    return fresh_deadline(s);
  }

  ActionKind pick_kind() {
    unsigned total = 0;
    for (unsigned w : cfg_.weights) total += w;
    if (total == 0) return ActionKind::tez_transfer;
    std::uint64_t r = below(total);
    for (std::size_t k = 0; k < kActionKinds; ++k) {
      if (r < cfg_.weights[k]) return static_cast<ActionKind>(k);
      r -= cfg_.weights[k];
    }
    return ActionKind::tez_transfer;
  }

  static cpmm::State pool(const ChainState& s, const Exchange& ex) {
    return decode<cpmm::State>(s.states.at(ex.main)).value();
  }
  static fa12::State lqt(const ChainState& s, const Exchange& ex) {
    return decode<fa12::State>(s.states.at(ex.lqt)).value();
  }
  static Nat tokens_of(const ChainState& s, const Exchange& ex, const Address& u) {
    return fa2::balance(decode<fa2::State>(s.states.at(ex.token)).value(), u, Nat{});
  }

  Action draw(const ChainState& s) {
    switch (pick_kind()) {
      case ActionKind::xtz_to_token: return xtz_to_token(s);
      case ActionKind::token_to_xtz: return token_to_xtz(s);
      case ActionKind::token_to_token: return token_to_token(s);
      case ActionKind::add_liquidity: return add_liquidity(s);
      case ActionKind::remove_liquidity: return remove_liquidity(s);
      case ActionKind::update_token_pool: {
        const auto& u = any_user();
        return user_call(u, any_exchange().main, Tez{}, cpmm::message(cpmm::UpdateTokenPool{}));
      }
      case ActionKind::donate: return donate();
      case ActionKind::set_baker: return set_baker(s);
      case ActionKind::set_manager: return set_manager(s);
      case ActionKind::set_lqt_address: {
        const auto& ex = any_exchange();
        return user_call(pool(s, ex).manager, ex.main, Tez{}, cpmm::message(cpmm::SetLqtAddress{ex.lqt}));
      }
      case ActionKind::lqt_transfer: return lqt_transfer(s);
      case ActionKind::lqt_approve: return lqt_approve(s);
      case ActionKind::lqt_transfer_from: return lqt_transfer_from(s);
      case ActionKind::lqt_mint_or_burn: {
        const auto& ex = any_exchange();
        Int q = Int(range(1, 1000));
        if (chance(30)) q = -q;
        const auto& caller = any_user();
        return user_call(caller, ex.lqt, Tez{}, encode(fa12::Msg{fa12::MintOrBurn{q, any_user()}}));
      }
      case ActionKind::token_transfer: return token_transfer(s);
      case ActionKind::tez_transfer: {
        const auto& u = any_user();
        std::uint64_t amt = bad() ? to_u64(env_balance(s, u).mutez) + 1 : range(1, 1'000'000);
        return user_transfer(u, any_user(), Tez{amt});
      }
    }
    return user_transfer(any_user(), any_user(), Tez{1});
  }

  Action xtz_to_token(const ChainState& s) {
    const auto& u = any_user();
    const auto& ex = any_exchange();
    auto p = pool(s, ex);
    std::uint64_t amt = range(0, cfg_.amounts.max_trade);
    Nat quote = cpmm::tokens_bought(amt, p.xtz_pool, p.token_pool).value_or(Nat{});
    Nat min = bad() ? quote + Nat{range(1, to_u64(quote) / 20 + 2)} : under(quote);
    return user_call(u, ex.main, Tez{amt}, cpmm::message(cpmm::XtzToToken{any_user(), min, deadline(s)}));
  }

  Action token_to_xtz(const ChainState& s) {
    const auto& u = any_user();
    const auto& ex = any_exchange();
    auto p = pool(s, ex);
    std::uint64_t held = to_u64(tokens_of(s, ex, u));
    std::uint64_t sold = range(0, std::min(held, cfg_.amounts.max_trade));
    if (bad() && chance(30)) sold = held + 1;
    Nat quote = cpmm::xtz_bought(sold, p.xtz_pool, p.token_pool).value_or(Nat{});
    Nat min = bad() ? quote + Nat{range(1, to_u64(quote) / 20 + 2)} : under(quote);
    return user_call(u, ex.main, Tez{},
                     cpmm::message(cpmm::TokenToXtz{any_user(), sold, Tez{min}, deadline(s)}));
  }

  Action token_to_token(const ChainState& s) {
    const auto& u = any_user();
    std::size_t i = below(d_.exchanges.size());
    std::size_t j = d_.exchanges.size() > 1 ? (i + 1 + below(d_.exchanges.size() - 1)) % d_.exchanges.size() : i;
    const auto& in = d_.exchanges[i];
    const auto& out = d_.exchanges[j];
    auto pi = pool(s, in);
    auto po = pool(s, out);
    std::uint64_t sold = range(0, std::min(to_u64(tokens_of(s, in, u)), cfg_.amounts.max_trade));
    Nat xtz = cpmm::xtz_bought(sold, pi.xtz_pool, pi.token_pool).value_or(Nat{});
    Nat quote = cpmm::tokens_bought(xtz, po.xtz_pool, po.token_pool).value_or(Nat{});
    Nat min = bad() ? quote + Nat{range(1, to_u64(quote) / 20 + 2)} : under(quote);
    return user_call(u, in.main, Tez{},
                     cpmm::message(cpmm::TokenToToken{out.main, any_user(), sold, min, deadline(s)}));
  }

  Action add_liquidity(const ChainState& s) {
    const auto& u = any_user();
    const auto& ex = any_exchange();
    auto p = pool(s, ex);
    std::uint64_t amt = range(1, cfg_.amounts.max_trade);
    Nat deposited = ceildiv_opt(Nat{amt} * p.token_pool, p.xtz_pool).value_or(Nat{});
    Nat minted = div_opt(Nat{amt} * p.lqt_total, p.xtz_pool).value_or(Nat{});
    Nat max = deposited + Nat{below(to_u64(deposited) / 20 + 2)};
    Nat min = under(minted);
    if (bad()) {
      if (chance(50)) {
        max = Nat{to_u64(deposited) == 0 ? 0 : to_u64(deposited) - 1};
      } else {
        min = minted + Nat{1};
      }
    }
    return user_call(u, ex.main, Tez{amt}, cpmm::message(cpmm::AddLiquidity{any_user(), min, max, deadline(s)}));
  }

  Action remove_liquidity(const ChainState& s) {
    const auto& ex = any_exchange();
    auto l = lqt(s, ex);
    if (l.tokens.empty()) return add_liquidity(s);
    auto it = l.tokens.begin();
    std::advance(it, below(l.tokens.size()));
    const auto& [holder, held] = *it;
    if (!holder.is_user()) return add_liquidity(s);
    auto p = pool(s, ex);
    std::uint64_t cap = std::min(to_u64(held), std::max<std::uint64_t>(1, to_u64(p.lqt_total) / 5));
    std::uint64_t burned = range(1, cap);
    if (bad() && chance(30)) burned = to_u64(held) + 1;
    Nat xtz_out = div_opt(Nat{burned} * p.xtz_pool, p.lqt_total).value_or(Nat{});
    Nat tok_out = div_opt(Nat{burned} * p.token_pool, p.lqt_total).value_or(Nat{});
    Nat min_x = under(xtz_out), min_t = under(tok_out);
    if (bad()) {
      if (chance(50)) {
        min_x = xtz_out + Nat{1};
      } else {
        min_t = tok_out + Nat{1};
      }
    }
    return user_call(holder, ex.main, Tez{},
                     cpmm::message(cpmm::RemoveLiquidity{any_user(), burned, Tez{min_x}, min_t, deadline(s)}));
  }

  Action donate() {
    const auto& ex = any_exchange();
    std::uint64_t amt = range(1, 100'000);
    if (chance(50)) return user_transfer(any_user(), ex.main, Tez{amt});
    return user_call(any_user(), ex.main, Tez{amt}, cpmm::message(cpmm::Default{}));
  }

  Action set_baker(const ChainState& s) {
    const auto& ex = any_exchange();
    Address caller = chance(60) ? pool(s, ex).manager : any_user();
    return user_call(caller, ex.main, Tez{}, cpmm::message(cpmm::SetBaker{chance(20)}));
  }

  Action set_manager(const ChainState& s) {
    const auto& ex = any_exchange();
    Address caller = chance(60) ? pool(s, ex).manager : any_user();
    return user_call(caller, ex.main, Tez{}, cpmm::message(cpmm::SetManager{any_user()}));
  }

  Action lqt_transfer(const ChainState& s) {
    const auto& ex = any_exchange();
    auto l = lqt(s, ex);
    const auto& u = any_user();
    std::uint64_t held = to_u64(fa12::balance(l, u));
    std::uint64_t value = bad() ? held + 1 : range(0, held);
    return user_call(u, ex.lqt, Tez{}, encode(fa12::Msg{fa12::Transfer{u, any_user(), value}}));
  }

  Action lqt_approve(const ChainState& s) {
    const auto& ex = any_exchange();
    auto l = lqt(s, ex);
    const auto& owner = any_user();
    const auto& spender = any_user();
    bool open = fa12::allowance(l, owner, spender).is_zero();
    std::uint64_t value = (open != bad()) ? range(1, 100'000) : 0;
    return user_call(owner, ex.lqt, Tez{}, encode(fa12::Msg{fa12::Approve{spender, value}}));
  }

  Action lqt_transfer_from(const ChainState& s) {
    const auto& ex = any_exchange();
    auto l = lqt(s, ex);
    if (l.allowances.empty()) return lqt_approve(s);
    auto it = l.allowances.begin();
    std::advance(it, below(l.allowances.size()));
    const auto& [key, allowed] = *it;
    const auto& [owner, spender] = key;
    std::uint64_t cap = std::min(to_u64(allowed), to_u64(fa12::balance(l, owner)));
    std::uint64_t value = bad() ? to_u64(allowed) + 1 : range(0, cap);
    return user_call(spender, ex.lqt, Tez{}, encode(fa12::Msg{fa12::Transfer{owner, any_user(), value}}));
  }

  Action token_transfer(const ChainState& s) {
    const auto& ex = any_exchange();
    const auto& u = any_user();
    std::uint64_t held = to_u64(tokens_of(s, ex, u));
    Address to = chance(30) ? ex.main : any_user();
    std::uint64_t value = range(0, std::min<std::uint64_t>(held, 50'000));
    Address from = u;
    if (bad()) {
      if (chance(50)) {
        value = held + 1;
      } else {
        from = any_user();
        if (from == u) value = held + 1;
      }
    }
    return user_call(u, ex.token, Tez{}, fa2_transfer_msg(from, to, value));
  }

  TraceConfig cfg_;
  Deployment d_;
  std::mt19937_64 rng_;
};

}  // namespace dexsim::harness
