// Deploys one token/exchange/liquidity-token triple by hand, trades tez for
// tokens under both execution orders and prints what moved.

#include "dexsim/chain.hpp"
#include "dexsim/contracts/cpmm.hpp"

#include <iostream>

using namespace dexsim;

int main() {
  const Address alice = Address::user(0), bob = Address::user(1);
  const Address token = Address::contract(1), dex = Address::contract(2), lqt = Address::contract(3);

  auto call = [](const Address& from, const Address& to, Tez amount, Payload msg) {
    return Action{from, from, CallBody{to, amount, std::move(msg)}};
  };

  ChainState s = empty_chain({{alice, Tez{1'000'000}}, {bob, Tez{1'000'000}}});
  std::vector<std::vector<Action>> setup{
      {Action{alice, alice, DeployBody{{}, fa2::contract(), encode(fa2::Setup{{{{alice, Nat{}}, Nat{5000}}}})}},
       Action{alice, alice, DeployBody{{}, cpmm::contract(), encode(cpmm::Setup{Nat{1000}, alice, token, Nat{}})}},
       Action{alice, alice, DeployBody{{}, fa12::contract(), encode(fa12::Setup{dex, alice, Nat{1000}})}}},
      {call(alice, dex, {}, cpmm::message(cpmm::SetLqtAddress{lqt})),
       call(alice, token, {}, encode(fa2::Msg{fa2::Transfer{alice, dex, Nat{}, Nat{1000}}})),
       Action{alice, alice, TransferBody{dex, Tez{1000}}},
       call(alice, dex, {}, cpmm::message(cpmm::UpdateTokenPool{}))}};
  for (const auto& block : setup) {
    auto r = add_block(s, block, ExecOrder::depth_first);
    if (!r.committed()) {
      std::cerr << "setup failed: " << to_string(r.error()->reason) << "\n";
      return 1;
    }
    s = r.state();
  }

  Action swap = call(bob, dex, Tez{100}, cpmm::message(cpmm::XtzToToken{bob, Nat{90}, 100}));
  for (auto order : {ExecOrder::depth_first, ExecOrder::breadth_first}) {
    auto r = add_block(s, {swap}, order);
    auto pool = decode<cpmm::State>(*contract_state(r.state(), dex));
    auto ledger = decode<fa2::State>(*contract_state(r.state(), token));
    std::cout << (order == ExecOrder::depth_first ? "dfs" : "bfs") << ": bob holds "
              << fa2::balance(*ledger, bob, Nat{}) << " tokens, pools " << pool->xtz_pool << " mutez / "
              << pool->token_pool << " tokens\n";
  }
}
