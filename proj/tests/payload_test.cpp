#include "dexsim/codec.hpp"
#include "dexsim/payload.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <string>
#include <vector>

using namespace dexsim;

namespace {

Payload random_payload(std::mt19937_64& rng, int depth) {
  int kinds = depth > 3 ? 5 : 9;
  switch (rng() % kinds) {
    case 0: return Payload::unit();
    case 1: return Payload::nat(Nat{rng() % 1000000});
    case 2: return Payload::integer(Int(static_cast<std::int64_t>(rng() % 2001) - 1000));
    case 3: return Payload::boolean(rng() % 2 == 0);
    case 4: return Payload::address(rng() % 2 ? Address::user(rng() % 10) : Address::contract(rng() % 10));
    case 5: return Payload::pair(random_payload(rng, depth + 1), random_payload(rng, depth + 1));
    case 6: {
      std::vector<Payload> items;
      for (std::size_t i = rng() % 4; i > 0; --i) items.push_back(random_payload(rng, depth + 1));
      return Payload::list(std::move(items));
    }
    case 7: {
      std::map<std::uint64_t, Payload> entries;
      for (std::size_t i = rng() % 4; i > 0; --i) entries.emplace(rng() % 50, random_payload(rng, depth + 1));
      std::vector<std::pair<Payload, Payload>> kv;
      for (auto& [k, v] : entries) kv.emplace_back(Payload::nat(Nat{k}), v);
      return Payload::map(std::move(kv));
    }
    default: {
      static const char* names[] = {"transfer", "other_msg", "x", "update_token_pool"};
      return Payload::tag(names[rng() % 4], random_payload(rng, depth + 1));
    }
  }
}

}  // namespace

TEST(payload, renders_canonical_text) {
  Payload p = Payload::list({Payload::nat(Nat{5}), Payload::integer(Int(-3)), Payload::integer(Int(4)),
                             Payload::boolean(true), Payload::address(Address::user(2)), Payload::unit()});
  EXPECT_EQ(render(p), "[5, -3, +4, true, @u2, unit]");
  EXPECT_EQ(render(Payload::pair(Payload::nat(Nat{1}), Payload::address(Address::contract(7)))), "(1, @c7)");
  EXPECT_EQ(render(Payload::tag("update_token_pool")), "update_token_pool(unit)");
}

TEST(payload, map_keys_are_sorted) {
  Payload m = Payload::map({{Payload::nat(Nat{9}), Payload::unit()}, {Payload::nat(Nat{2}), Payload::unit()}});
  EXPECT_EQ(render(m), "{2 => unit, 9 => unit}");
  EXPECT_EQ(parse_payload("{9 => unit, 2 => unit}"), m);
}

TEST(payload, duplicate_map_keys_are_rejected) {
  EXPECT_THROW(Payload::map({{Payload::nat(Nat{1}), Payload::unit()}, {Payload::nat(Nat{1}), Payload::unit()}}),
               std::invalid_argument);
  EXPECT_THROW(parse_payload("{1 => unit, 1 => true}"), PayloadParseError);
}

TEST(payload, parse_accepts_loose_whitespace) {
  EXPECT_EQ(parse_payload(" ( 1 ,[ @u0 , -2 ] ) "),
            Payload::pair(Payload::nat(Nat{1}),
                          Payload::list({Payload::address(Address::user(0)), Payload::integer(Int(-2))})));
}

TEST(payload, parse_errors) {
  for (const char* bad : {"", "(1, 2", "[1,]", "1 2", "@", "@alice", "+", "tag(", "{1 => }", "truex", "(1)"}) {
    EXPECT_THROW(parse_payload(bad), PayloadParseError) << bad;
  }
}

TEST(payload, nesting_depth_is_bounded) {
  std::string deep(300, '[');
  deep += std::string(300, ']');
  EXPECT_THROW(parse_payload(deep), PayloadParseError);
  std::string ok(100, '[');
  ok += std::string(100, ']');
  EXPECT_NO_THROW(parse_payload(ok));
}

TEST(payload, resolver_maps_aliases) {
  AddressResolver r = [](std::string_view n) -> std::optional<Address> {
    if (n == "alice") return Address::user(0);
    return std::nullopt;
  };
  EXPECT_EQ(parse_payload("@alice", r), Payload::address(Address::user(0)));
  EXPECT_THROW(parse_payload("@bob", r), PayloadParseError);
}

TEST(payload, random_trees_round_trip_through_text) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 2000; ++i) {
    Payload p = random_payload(rng, 0);
    std::string text = render(p);
    Payload back = parse_payload(text);
    ASSERT_EQ(back, p) << text;
    ASSERT_EQ(render(back), text);
  }
}

TEST(payload, ordering_is_total_and_consistent) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    Payload a = random_payload(rng, 1), b = random_payload(rng, 1);
    int ab = compare(a, b), ba = compare(b, a);
    EXPECT_EQ(ab < 0, ba > 0);
    EXPECT_EQ(ab == 0, a == b);
    EXPECT_EQ(compare(a, a), 0);
  }
}

TEST(codec, scalars_and_containers_round_trip) {
  std::map<std::pair<Address, Nat>, Nat> m{{{Address::user(1), Nat{0}}, Nat{5}}, {{Address::contract(2), Nat{1}}, Nat{7}}};
  EXPECT_EQ(decode<decltype(m)>(encode(m)), m);
  std::vector<Int> v{Int(-1), Int(0), Int(12)};
  EXPECT_EQ(decode<std::vector<Int>>(encode(v)), v);
  EXPECT_EQ(decode<std::uint64_t>(encode(std::uint64_t{99})), 99u);
  EXPECT_FALSE(decode<std::uint64_t>(Payload::nat(Nat::parse("18446744073709551616"))).has_value());
  EXPECT_FALSE(decode<Nat>(Payload::integer(Int(3))).has_value());
  EXPECT_FALSE(decode<bool>(Payload::unit()).has_value());
}

TEST(codec, records_are_strict) {
  Payload rec = RecordBuilder{}.field("a", Nat{1}).field("b", true).build();
  EXPECT_EQ(render(rec), "[a(1), b(true)]");
  {
    Nat a;
    bool b = false;
    RecordReader r(rec);
    r.field("a", a);
    r.field("b", b);
    EXPECT_TRUE(r.done());
    EXPECT_EQ(a, Nat{1});
    EXPECT_TRUE(b);
  }
  {
    Nat a;
    RecordReader r(rec);
    r.field("a", a);
    EXPECT_FALSE(r.done());  // a field left over
  }
  {
    bool b = false;
    Nat a;
    RecordReader r(rec);
    EXPECT_FALSE(r.field("b", b));  // wrong order
    EXPECT_FALSE(r.field("a", a));  // latched
  }
}
