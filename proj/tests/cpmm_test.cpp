#include "dexsim/contracts/cpmm.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace dexsim;
using namespace dexsim::cpmm;

namespace {

const Address alice = Address::user(0), bob = Address::user(1), token = Address::contract(1),
              self = Address::contract(2), lqt = Address::contract(3), other_dex = Address::contract(5);

const Chain kChain{5, 5, 4};  // current slot 5: deadlines must be >= 6

ContractCallContext ctx(const Address& sender, std::uint64_t amount = 0) {
  return {sender, sender, self, Tez{amount}, Tez{amount}};
}

State pool(std::uint64_t xp, std::uint64_t tp, std::uint64_t lqt_total) {
  State s;
  s.xtz_pool = xp;
  s.token_pool = tp;
  s.lqt_total = lqt_total;
  s.manager = alice;
  s.token_address = token;
  s.lqt_address = lqt;
  return s;
}

const CallBody& call_at(const std::vector<ActionBody>& ops, std::size_t i) { return std::get<CallBody>(ops.at(i)); }

using u128 = unsigned __int128;

}  // namespace

// Worked examples on pools (1000 mutez, 1000 tokens).

TEST(cpmm, xtz_to_token_worked_example) {
  auto r = xtz_to_token(kChain, ctx(bob, 100), pool(1000, 1000, 1000), {bob, Nat{90}, 10});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->first.xtz_pool, Nat{1100});
  EXPECT_EQ(r->first.token_pool, Nat{910});
  ASSERT_EQ(r->second.size(), 1u);
  EXPECT_EQ(render(call_at(r->second, 0).payload), "transfer([from(@c2), to(@u1), tokenId(0), value(90)])");
  EXPECT_EQ(call_at(r->second, 0).to, token);
}

TEST(cpmm, xtz_to_token_enforces_min_tokens_bought) {
  EXPECT_FALSE(xtz_to_token(kChain, ctx(bob, 100), pool(1000, 1000, 1000), {bob, Nat{91}, 10}));
  auto mutant = xtz_to_token(kChain, ctx(bob, 100), pool(1000, 1000, 1000), {bob, Nat{91}, 10},
                             Mutation::drop_min_tokens_bought_guard);
  EXPECT_TRUE(mutant);
}

TEST(cpmm, token_to_xtz_worked_example) {
  auto r = token_to_xtz(kChain, ctx(bob), pool(1000, 1000, 1000), {bob, Nat{100}, Tez{90}, 10});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->first.token_pool, Nat{1100});
  EXPECT_EQ(r->first.xtz_pool, Nat{910});
  ASSERT_EQ(r->second.size(), 2u);
  EXPECT_EQ(render(call_at(r->second, 0).payload), "transfer([from(@u1), to(@c2), tokenId(0), value(100)])");
  const auto& out = std::get<TransferBody>(r->second[1]);
  EXPECT_EQ(out.to, bob);
  EXPECT_EQ(out.amount, Tez{90});
  EXPECT_FALSE(token_to_xtz(kChain, ctx(bob), pool(1000, 1000, 1000), {bob, Nat{100}, Tez{91}, 10}));
}

TEST(cpmm, token_to_token_forwards_tez_to_the_output_exchange) {
  auto r = token_to_token(kChain, ctx(bob), pool(1000, 1000, 1000), {other_dex, alice, Nat{100}, Nat{82}, 10});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->first.xtz_pool, Nat{910});
  EXPECT_EQ(r->first.token_pool, Nat{1100});
  ASSERT_EQ(r->second.size(), 2u);
  const auto& fwd = call_at(r->second, 1);
  EXPECT_EQ(fwd.to, other_dex);
  EXPECT_EQ(fwd.amount, Tez{90});
  EXPECT_EQ(render(fwd.payload), "other_msg(xtz_to_token([to(@u0), minTokensBought(82), deadline(10)]))");
  // The output leg on an identical pool pays 82.
  auto leg = xtz_to_token(kChain, ContractCallContext{bob, self, other_dex, Tez{90}, Tez{90}}, pool(1000, 1000, 1000),
                          {alice, Nat{82}, 10});
  ASSERT_TRUE(leg);
  EXPECT_EQ(leg->first.token_pool, Nat{918});
}

TEST(cpmm, add_liquidity_rounds_in_the_pools_favour) {
  auto r = add_liquidity(kChain, ctx(bob, 100), pool(1000, 500, 10), {bob, Nat{1}, Nat{50}, 10});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->first.xtz_pool, Nat{1100});
  EXPECT_EQ(r->first.token_pool, Nat{550});
  EXPECT_EQ(r->first.lqt_total, Nat{11});
  ASSERT_EQ(r->second.size(), 2u);
  EXPECT_EQ(render(call_at(r->second, 0).payload), "transfer([from(@u1), to(@c2), tokenId(0), value(50)])");
  EXPECT_EQ(render(call_at(r->second, 1).payload), "mint_or_burn([quantity(+1), target(@u1)])");
  EXPECT_EQ(call_at(r->second, 1).to, lqt);

  // 33 * 500 / 1000 = 16.5: deposit 17, mint floor(33 * 10 / 1000) = 0.
  auto odd = add_liquidity(kChain, ctx(bob, 33), pool(1000, 500, 10), {bob, Nat{0}, Nat{17}, 10});
  ASSERT_TRUE(odd);
  EXPECT_EQ(odd->first.token_pool, Nat{517});
  EXPECT_FALSE(add_liquidity(kChain, ctx(bob, 33), pool(1000, 500, 10), {bob, Nat{0}, Nat{16}, 10}));
  auto floored = add_liquidity(kChain, ctx(bob, 33), pool(1000, 500, 10), {bob, Nat{0}, Nat{16}, 10},
                               Mutation::floor_tokens_deposited);
  ASSERT_TRUE(floored);
  EXPECT_EQ(floored->first.token_pool, Nat{516});
}

TEST(cpmm, add_liquidity_guards) {
  EXPECT_FALSE(add_liquidity(kChain, ctx(bob, 100), pool(1000, 500, 10), {bob, Nat{2}, Nat{50}, 10}));
  EXPECT_FALSE(add_liquidity(kChain, ctx(bob, 100), pool(1000, 500, 10), {bob, Nat{1}, Nat{49}, 10}));
  EXPECT_FALSE(add_liquidity(kChain, ctx(bob, 100), pool(0, 0, 10), {bob, Nat{0}, Nat{50}, 10}));
  State unlinked = pool(1000, 500, 10);
  unlinked.lqt_address = Address::null();
  EXPECT_FALSE(add_liquidity(kChain, ctx(bob, 100), unlinked, {bob, Nat{1}, Nat{50}, 10}));
}

TEST(cpmm, remove_liquidity_pays_pro_rata) {
  auto r = remove_liquidity(kChain, ctx(bob), pool(1000, 500, 10), {alice, Nat{2}, Tez{200}, Nat{100}, 10});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->first.xtz_pool, Nat{800});
  EXPECT_EQ(r->first.token_pool, Nat{400});
  EXPECT_EQ(r->first.lqt_total, Nat{8});
  ASSERT_EQ(r->second.size(), 3u);
  EXPECT_EQ(render(call_at(r->second, 0).payload), "mint_or_burn([quantity(-2), target(@u1)])");
  EXPECT_EQ(render(call_at(r->second, 1).payload), "transfer([from(@c2), to(@u0), tokenId(0), value(100)])");
  EXPECT_EQ(std::get<TransferBody>(r->second[2]).amount, Tez{200});
  EXPECT_FALSE(remove_liquidity(kChain, ctx(bob), pool(1000, 500, 10), {alice, Nat{2}, Tez{201}, Nat{100}, 10}));
  EXPECT_FALSE(remove_liquidity(kChain, ctx(bob), pool(1000, 500, 10), {alice, Nat{2}, Tez{200}, Nat{101}, 10}));
  EXPECT_FALSE(remove_liquidity(kChain, ctx(bob), pool(1000, 500, 10), {alice, Nat{11}, Tez{0}, Nat{0}, 10}));
  EXPECT_FALSE(remove_liquidity(kChain, ctx(bob, 1), pool(1000, 500, 10), {alice, Nat{2}, Tez{0}, Nat{0}, 10}));
}

TEST(cpmm, stale_deadlines_and_pending_updates_block_trading) {
  State busy = pool(1000, 1000, 1000);
  busy.self_is_updating_token_pool = true;
  EXPECT_FALSE(xtz_to_token(kChain, ctx(bob, 100), pool(1000, 1000, 1000), {bob, Nat{0}, 5}));
  EXPECT_TRUE(xtz_to_token(kChain, ctx(bob, 100), pool(1000, 1000, 1000), {bob, Nat{0}, 6}));
  EXPECT_FALSE(xtz_to_token(kChain, ctx(bob, 100), busy, {bob, Nat{0}, 10}));
  EXPECT_FALSE(token_to_xtz(kChain, ctx(bob), busy, {bob, Nat{1}, Tez{0}, 10}));
  EXPECT_FALSE(token_to_token(kChain, ctx(bob), busy, {other_dex, bob, Nat{1}, Nat{0}, 10}));
  EXPECT_FALSE(add_liquidity(kChain, ctx(bob, 10), busy, {bob, Nat{0}, Nat{100}, 10}));
  EXPECT_FALSE(remove_liquidity(kChain, ctx(bob), busy, {bob, Nat{1}, Tez{0}, Nat{0}, 10}));
  EXPECT_FALSE(default_(ctx(bob, 5), busy));
  EXPECT_FALSE(token_to_xtz(kChain, ctx(bob, 1), pool(1000, 1000, 1000), {bob, Nat{1}, Tez{0}, 10}));
}

TEST(cpmm, update_token_pool_round_trip) {
  auto start = update_token_pool(ctx(bob), pool(1000, 1000, 1000));
  ASSERT_TRUE(start);
  EXPECT_TRUE(start->first.self_is_updating_token_pool);
  EXPECT_EQ(render(call_at(start->second, 0).payload), "balance_of([requests([(@c2, 0)]), callback(@c2)])");
  EXPECT_FALSE(update_token_pool(ctx(bob), start->first));
  EXPECT_FALSE(update_token_pool(ContractCallContext{bob, other_dex, self, {}, {}}, pool(1000, 1000, 1000)));

  ContractCallContext from_token{bob, token, self, {}, {}};
  auto done = update_token_pool_internal(from_token, start->first, {{{{self, Nat{0}}, Nat{1234}}}});
  ASSERT_TRUE(done);
  EXPECT_EQ(done->first.token_pool, Nat{1234});
  EXPECT_FALSE(done->first.self_is_updating_token_pool);
  EXPECT_FALSE(update_token_pool_internal(ctx(bob), start->first, {{{{self, Nat{0}}, Nat{1}}}}));
  EXPECT_FALSE(update_token_pool_internal(from_token, start->first, {{{{bob, Nat{0}}, Nat{1}}}}));
  EXPECT_FALSE(update_token_pool_internal(from_token, start->first, {}));
  EXPECT_FALSE(update_token_pool_internal(from_token, pool(1000, 1000, 1000), {{{{self, Nat{0}}, Nat{1}}}}));
}

TEST(cpmm, manager_entrypoints) {
  auto s = pool(1, 1, 1);
  EXPECT_FALSE(set_manager(ctx(bob), s, {bob}));
  auto m = set_manager(ctx(alice), s, {bob});
  ASSERT_TRUE(m);
  EXPECT_EQ(m->first.manager, bob);

  auto frozen = set_baker(ctx(alice), s, {true});
  ASSERT_TRUE(frozen);
  EXPECT_FALSE(set_baker(ctx(alice), frozen->first, {false}));
  EXPECT_FALSE(set_baker(ctx(bob), s, {false}));

  EXPECT_FALSE(set_lqt_address(ctx(alice), s, {other_dex}));  // already set
  s.lqt_address = Address::null();
  EXPECT_FALSE(set_lqt_address(ctx(bob), s, {lqt}));
  EXPECT_FALSE(set_lqt_address(ctx(alice, 1), s, {lqt}));
  EXPECT_EQ(set_lqt_address(ctx(alice), s, {lqt})->first.lqt_address, lqt);
}

TEST(cpmm, default_credits_the_tez_pool) {
  EXPECT_EQ(default_(ctx(bob, 7), pool(10, 1, 1))->first.xtz_pool, Nat{17});
  EXPECT_EQ(default_(ctx(bob, 7), pool(10, 1, 1), Mutation::default_skips_xtz_credit)->first.xtz_pool, Nat{10});
  EXPECT_EQ(receive(kChain, ctx(bob, 7), pool(10, 1, 1), std::nullopt)->first.xtz_pool, Nat{17});
}

TEST(cpmm, tokens_bought_matches_wide_integer_oracle) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 5000; ++i) {
    std::uint64_t xp = 1 + rng() % 1'000'000'000'000ULL, tp = 1 + rng() % 1'000'000'000'000ULL;
    std::uint64_t a = rng() % 1'000'000'000'000ULL;
    u128 expected = static_cast<u128>(a) * 997 * tp / (static_cast<u128>(xp) * 1000 + static_cast<u128>(a) * 997);
    auto got = tokens_bought(a, xp, tp);
    ASSERT_TRUE(got);
    ASSERT_EQ(*got, Nat{static_cast<std::uint64_t>(expected)});
    u128 expected_x = static_cast<u128>(a) * 997 * xp / (static_cast<u128>(tp) * 1000 + static_cast<u128>(a) * 997);
    ASSERT_EQ(*xtz_bought(a, xp, tp), Nat{static_cast<std::uint64_t>(expected_x)});
  }
  EXPECT_FALSE(tokens_bought(0, 0, 5));
}

TEST(cpmm, swaps_never_shrink_the_product) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    std::uint64_t xp = 1 + rng() % 10'000'000, tp = 1 + rng() % 10'000'000, a = rng() % 10'000'000;
    auto r = xtz_to_token(kChain, ctx(bob, a), pool(xp, tp, 1), {bob, Nat{0}, 10});
    ASSERT_TRUE(r);
    EXPECT_GE(r->first.xtz_pool * r->first.token_pool, Nat{xp} * Nat{tp});
    auto s = token_to_xtz(kChain, ctx(bob), pool(xp, tp, 1), {bob, Nat{a}, Tez{0}, 10});
    ASSERT_TRUE(s);
    EXPECT_GE(s->first.xtz_pool * s->first.token_pool, Nat{xp} * Nat{tp});
  }
}

TEST(cpmm, messages_round_trip) {
  std::vector<Msg> msgs{AddLiquidity{bob, Nat{1}, Nat{2}, 3},
                        RemoveLiquidity{bob, Nat{1}, Tez{2}, Nat{3}, 4},
                        XtzToToken{bob, Nat{1}, 2},
                        TokenToXtz{bob, Nat{1}, Tez{2}, 3},
                        TokenToToken{other_dex, bob, Nat{1}, Nat{2}, 3},
                        UpdateTokenPool{},
                        SetBaker{true},
                        SetManager{alice},
                        SetLqtAddress{lqt},
                        Default{},
                        BalanceCallback{{{{self, Nat{0}}, Nat{9}}}}};
  for (const auto& m : msgs) {
    Payload p = message(m);
    auto back = decode<Msg>(parse_payload(render(p)));
    ASSERT_TRUE(back) << render(p);
    EXPECT_EQ(back->index(), m.index());
    EXPECT_EQ(render(message(*back)), render(p));
  }
  EXPECT_EQ(render(message(UpdateTokenPool{})), "other_msg(update_token_pool(unit))");
  EXPECT_EQ(render(message(BalanceCallback{{{{self, Nat{0}}, Nat{9}}}})), "receive_balance_of([((@c2, 0), 9)])");
  EXPECT_FALSE(decode<Msg>(parse_payload("xtz_to_token([to(@u1), minTokensBought(1), deadline(2)])")));
  EXPECT_FALSE(decode<Msg>(parse_payload("other_msg(receive_balance_of([]))")));
}

TEST(cpmm, state_codec_round_trips) {
  State s = pool(1, 2, 3);
  s.freeze_baker = true;
  EXPECT_EQ(decode<State>(encode(s)), s);
  EXPECT_EQ(render(encode(s)),
            "[tokenPool(2), xtzPool(1), lqtTotal(3), selfIsUpdatingTokenPool(false), freezeBaker(true), "
            "manager(@u0), tokenAddress(@c1), tokenId(0), lqtAddress(@c3)]");
}
