#pragma once

// Scripted scenarios: a JSON file naming users and listing blocks of root
// actions, with messages and setups written in the Payload text grammar.
//
//   {
//     "users": [{"name": "alice", "balance": 1000000}, ...],
//     "blocks": [
//       [{"type": "deploy", "from": "alice", "name": "token", "contract": "fa2",
//         "setup": "[initial([((@alice, 0), 5000)])]"}],
//       [{"type": "call", "from": "alice", "to": "token", "amount": 0,
//         "msg": "transfer([from(@alice), to(@bob), tokenId(0), value(10)])"},
//        {"type": "transfer", "from": "alice", "to": "bob", "amount": "25"}]
//     ]
//   }
//
// Names (users and deploy names) are usable as "@name" inside payload text
// and as plain strings in from/to. Deploy names bind when their block runs;
// a later reference to a deploy whose block was rejected is an error.

#include "dexsim/chain.hpp"
#include "dexsim/contracts/cpmm.hpp"
#include "dexsim/contracts/fa12.hpp"
#include "dexsim/contracts/fa2.hpp"
#include "dexsim/harness/runner.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dexsim::scenario {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RootType : std::uint8_t { deploy, call, transfer };

struct RootSpec {
  RootType type = RootType::call;
  std::string from;
  std::string to;        // call / transfer
  std::string name;      // deploy
  std::string contract;  // deploy: fa2 | cpmm | fa12, optionally ":mutation"
  Tez amount;
  std::string setup;  // deploy, payload text
  std::string msg;    // call, payload text; empty means unit
};

struct UserSpec {
  std::string name;
  Tez balance;
};

struct ScenarioFile {
  std::vector<UserSpec> users;
  std::vector<std::vector<RootSpec>> blocks;
};

/// Code for a contract spec such as "cpmm" or "fa12:skip_allowance_decrement".
inline ContractRef resolve_contract(const std::string& spec) {
  std::string kind = spec, variant;
  if (auto colon = spec.find(':'); colon != std::string::npos) {
    kind = spec.substr(0, colon);
    variant = spec.substr(colon + 1);
  }
  Mutation mut = Mutation::none;
  if (!variant.empty()) {
    auto m = parse_mutation(variant);
    if (!m) throw ScenarioError("unknown mutation: " + variant);
    mut = *m;
  }
  if (kind == "fa2") {
    if (mut != Mutation::none) throw ScenarioError("fa2 has no mutations");
    return fa2::contract();
  }
  if (kind == "cpmm") {
    if (mut != Mutation::none && is_lqt_mutation(mut)) throw ScenarioError("not a cpmm mutation: " + variant);
    return cpmm::contract(mut);
  }
  if (kind == "fa12") {
    if (mut != Mutation::none && !is_lqt_mutation(mut)) throw ScenarioError("not an fa12 mutation: " + variant);
    return fa12::contract(mut);
  }
  throw ScenarioError("unknown contract kind: " + kind);
}

namespace detail {

inline Tez json_amount(const nlohmann::json& j, const std::string& where) {
  if (j.is_number_unsigned()) return Tez{j.get<std::uint64_t>()};
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return Tez{static_cast<std::uint64_t>(j.get<std::int64_t>())};
  if (j.is_string()) {
    try {
      return Tez{Nat::parse(j.get<std::string>())};
    } catch (const std::invalid_argument&) {
    }
  }
  throw ScenarioError(where + ": amount must be a non-negative integer or decimal string");
}

inline std::string json_string(const nlohmann::json& obj, const char* key, const std::string& where,
                               bool required = true) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) throw ScenarioError(where + ": missing \"" + key + "\"");
    return {};
  }
  if (!it->is_string()) throw ScenarioError(where + ": \"" + key + "\" must be a string");
  return it->get<std::string>();
}

inline std::string strip_at(std::string s) {
  if (!s.empty() && s.front() == '@') s.erase(0, 1);
  return s;
}

}  // namespace detail

/// Parses and statically validates a scenario. Throws ScenarioError.
inline ScenarioFile parse_scenario(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "users" && key != "blocks") throw ScenarioError("unknown top-level key: " + key);
  }
  ScenarioFile f;
  std::set<std::string> names;
  auto claim = [&](const std::string& name, const std::string& where) {
    if (name.empty()) throw ScenarioError(where + ": empty name");
    if (Address::parse(name)) throw ScenarioError(where + ": name '" + name + "' looks like a raw address");
    for (char c : name) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) {
        throw ScenarioError(where + ": name '" + name + "' must be alphanumeric or '_'");
      }
    }
    if (!names.insert(name).second) throw ScenarioError(where + ": duplicate name '" + name + "'");
  };

  if (j.contains("users")) {
    if (!j["users"].is_array()) throw ScenarioError("\"users\" must be an array");
    for (std::size_t i = 0; i < j["users"].size(); ++i) {
      const auto& u = j["users"][i];
      std::string where = "users[" + std::to_string(i) + "]";
      if (!u.is_object()) throw ScenarioError(where + ": must be an object");
      UserSpec spec;
      spec.name = detail::json_string(u, "name", where);
      claim(spec.name, where);
      spec.balance = u.contains("balance") ? detail::json_amount(u["balance"], where) : Tez{};
      f.users.push_back(std::move(spec));
    }
  }
  if (!j.contains("blocks") || !j["blocks"].is_array()) throw ScenarioError("\"blocks\" must be an array");

  for (std::size_t b = 0; b < j["blocks"].size(); ++b) {
    const auto& block = j["blocks"][b];
    if (!block.is_array()) throw ScenarioError("blocks[" + std::to_string(b) + "] must be an array");
    std::vector<RootSpec> roots;
    for (std::size_t r = 0; r < block.size(); ++r) {
      const auto& a = block[r];
      std::string where = "blocks[" + std::to_string(b) + "][" + std::to_string(r) + "]";
      if (!a.is_object()) throw ScenarioError(where + ": must be an object");
      RootSpec spec;
      std::string type = detail::json_string(a, "type", where);
      spec.from = detail::strip_at(detail::json_string(a, "from", where));
      spec.amount = a.contains("amount") ? detail::json_amount(a["amount"], where) : Tez{};
      if (type == "deploy") {
        spec.type = RootType::deploy;
        spec.name = detail::json_string(a, "name", where);
        claim(spec.name, where);
        spec.contract = detail::json_string(a, "contract", where);
        spec.setup = detail::json_string(a, "setup", where);
        resolve_contract(spec.contract);
      } else if (type == "call" || type == "transfer") {
        spec.type = type == "call" ? RootType::call : RootType::transfer;
        spec.to = detail::strip_at(detail::json_string(a, "to", where));
        if (type == "call") spec.msg = detail::json_string(a, "msg", where, false);
        if (type == "transfer" && a.contains("msg")) throw ScenarioError(where + ": transfers carry no msg");
      } else {
        throw ScenarioError(where + ": unknown type '" + type + "'");
      }
      roots.push_back(std::move(spec));
    }
    f.blocks.push_back(std::move(roots));
  }

  // Every name used must be declared somewhere; payload text must parse.
  auto known = [&](std::string_view n) -> std::optional<Address> {
    if (names.count(std::string(n))) return Address::null();
    return Address::parse(n);
  };
  auto check_ref = [&](const std::string& ref, const std::string& where) {
    if (!Address::parse(ref) && !names.count(ref)) throw ScenarioError(where + ": unknown name '" + ref + "'");
  };
  for (std::size_t b = 0; b < f.blocks.size(); ++b) {
    for (std::size_t r = 0; r < f.blocks[b].size(); ++r) {
      const auto& spec = f.blocks[b][r];
      std::string where = "blocks[" + std::to_string(b) + "][" + std::to_string(r) + "]";
      check_ref(spec.from, where);
      if (spec.type != RootType::deploy) check_ref(spec.to, where);
      try {
        if (!spec.setup.empty()) parse_payload(spec.setup, known);
        if (!spec.msg.empty()) parse_payload(spec.msg, known);
      } catch (const PayloadParseError& e) {
        throw ScenarioError(where + ": " + e.what());
      }
    }
  }
  return f;
}

inline ScenarioFile load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

// ---------------------------------------------------------------------------
// Trace records

inline nlohmann::ordered_json event_record(const Event& e, std::uint64_t height, std::size_t block,
                                           const ChainState& s) {
  nlohmann::ordered_json j;
  if (auto* d = std::get_if<Deployed>(&e)) {
    auto code = contract_code(s, d->at);
    j["kind"] = "deployed";
    j["block"] = block;
    j["height"] = height;
    j["at"] = "@" + d->at.str();
    j["by"] = "@" + d->by.str();
    j["amount"] = d->amount.str();
    j["code"] = code ? code->display_name() : std::string("?");
    j["setup"] = render(d->setup);
    return j;
  }
  const auto& t = std::get<Tx>(e);
  j["kind"] = "tx";
  j["block"] = block;
  j["height"] = height;
  j["from"] = "@" + t.from.str();
  j["to"] = "@" + t.to.str();
  j["amount"] = t.amount.str();
  j["msg"] = t.payload ? nlohmann::ordered_json(render(*t.payload)) : nlohmann::ordered_json(nullptr);
  return j;
}

inline nlohmann::ordered_json rejection_record(const harness::Rejection& r, std::uint64_t height, std::size_t block) {
  nlohmann::ordered_json j;
  j["kind"] = "block_rejected";
  j["block"] = block;
  j["height"] = height;
  j["root"] = r.root_index;
  j["step"] = r.step;
  j["reason"] = to_string(r.reason);
  return j;
}

// ---------------------------------------------------------------------------
// Execution

struct BlockSummary {
  std::size_t block = 0;
  std::uint64_t height = 0;
  std::optional<harness::Rejection> rejection;
  std::size_t events = 0;
};

struct RunResult {
  ChainState final_state;
  std::vector<BlockSummary> blocks;
  harness::CheckReport report;

  bool all_committed() const {
    for (const auto& b : blocks) {
      if (b.rejection) return false;
    }
    return true;
  }
};

/// Executes a parsed scenario. Trace records go to `trace` when non-null.
/// Throws ScenarioError on a name that cannot be resolved at run time.
inline RunResult run_scenario(const ScenarioFile& f, ExecOrder order, bool check, std::ostream* trace = nullptr) {
  std::map<std::string, Address> bound;
  std::vector<std::pair<Address, Tez>> accounts;
  for (std::size_t i = 0; i < f.users.size(); ++i) {
    bound[f.users[i].name] = Address::user(i);
    accounts.emplace_back(Address::user(i), f.users[i].balance);
  }
  harness::TraceRunner runner(empty_chain(accounts), order, 0, harness::RunOptions{check, false});
  RunResult out;

  for (std::size_t b = 0; b < f.blocks.size(); ++b) {
    // Deploy roots are the only deployments in a block, so the k-th deploy
    // gets the k-th fresh contract index.
    std::map<std::string, Address> local = bound;
    std::uint64_t next = runner.state().next_contract_index;
    for (const auto& spec : f.blocks[b]) {
      if (spec.type == RootType::deploy) local[spec.name] = Address::contract(next++);
    }
    auto resolve = [&](std::string_view n) -> std::optional<Address> {
      if (auto it = local.find(std::string(n)); it != local.end()) return it->second;
      return Address::parse(n);
    };
    auto address_of = [&](const std::string& ref, const std::string& where) {
      if (auto a = Address::parse(ref)) return *a;
      if (auto a = resolve(ref)) return *a;
      throw ScenarioError(where + ": '" + ref + "' is not bound (its deploy block did not commit)");
    };
    auto payload_of = [&](const std::string& text, const std::string& where) {
      if (text.empty()) return Payload::unit();
      try {
        return parse_payload(text, resolve);
      } catch (const PayloadParseError& e) {
        throw ScenarioError(where + ": " + e.what());
      }
    };

    std::vector<Action> roots;
    for (std::size_t r = 0; r < f.blocks[b].size(); ++r) {
      const auto& spec = f.blocks[b][r];
      std::string where = "blocks[" + std::to_string(b) + "][" + std::to_string(r) + "]";
      Address from = address_of(spec.from, where);
      if (spec.type == RootType::deploy) {
        roots.push_back(Action{from, from, DeployBody{spec.amount, resolve_contract(spec.contract),
                                                      payload_of(spec.setup, where)}});
      } else if (spec.type == RootType::call) {
        roots.push_back(Action{from, from, CallBody{address_of(spec.to, where), spec.amount,
                                                    payload_of(spec.msg, where)}});
      } else {
        roots.push_back(Action{from, from, TransferBody{address_of(spec.to, where), spec.amount}});
      }
    }

    std::size_t log_before = runner.state().log.size();
    std::uint64_t height = runner.state().chain.chain_height + 1;
    BlockSummary summary{b, height, runner.add(roots, b), 0};
    if (!summary.rejection) {
      bound = std::move(local);
      const auto& s = runner.state();
      summary.events = s.log.size() - log_before;
      if (trace) {
        for (std::size_t i = log_before; i < s.log.size(); ++i) {
          *trace << event_record(s.log[i], height, b, s).dump() << '\n';
        }
      }
    } else if (trace) {
      *trace << rejection_record(*summary.rejection, height, b).dump() << '\n';
    }
    out.blocks.push_back(summary);
  }
  out.final_state = runner.state();
  out.report = runner.report();
  return out;
}

}  // namespace dexsim::scenario
