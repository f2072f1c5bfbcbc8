#pragma once

#include "dexsim/chain.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace dexsim::harness {

struct Violation {
  std::string detail;
  std::string expected;
  std::string actual;
};

/// Where a check ran. user_block is nullopt while the exchanges are being
/// wired; otherwise replaying `user_block + 1` generated blocks reproduces it.
struct Location {
  std::uint64_t seed = 0;
  ExecOrder order = ExecOrder::depth_first;
  std::uint64_t height = 0;
  std::optional<std::size_t> user_block;
  std::size_t step = 0;
  bool committed = false;
};

struct Counterexample {
  Location where;
  Violation violation;
};

struct InvariantStatus {
  std::uint64_t checks = 0;
  std::uint64_t failures = 0;
  std::optional<Counterexample> first_failure;
};

class CheckReport {
 public:
  void record(std::string_view name, const std::optional<Violation>& v, const Location& where) {
    auto& st = entries_[std::string(name)];
    ++st.checks;
    if (!v) return;
    ++st.failures;
    if (!st.first_failure) st.first_failure = Counterexample{where, *v};
  }

  /// Registers an invariant with zero checks so it shows up in renders.
  void touch(std::string_view name) { entries_[std::string(name)]; }

  void merge(const CheckReport& other) {
    for (const auto& [name, st] : other.entries_) {
      auto& mine = entries_[name];
      mine.checks += st.checks;
      mine.failures += st.failures;
      if (!mine.first_failure && st.first_failure) mine.first_failure = st.first_failure;
    }
  }

  bool passed() const {
    for (const auto& [_, st] : entries_) {
      if (st.failures != 0) return false;
    }
    return true;
  }

  bool passed(std::string_view name) const {
    auto* st = find(name);
    return !st || st->failures == 0;
  }

  const InvariantStatus* find(std::string_view name) const {
    auto it = entries_.find(std::string(name));
    return it == entries_.end() ? nullptr : &it->second;
  }

  const std::map<std::string, InvariantStatus>& entries() const { return entries_; }

  /// First failing counterexample across all invariants, if any.
  std::optional<std::pair<std::string, Counterexample>> first_failure() const {
    for (const auto& [name, st] : entries_) {
      if (st.first_failure) return std::pair{name, *st.first_failure};
    }
    return std::nullopt;
  }

  std::string render() const {
    std::ostringstream os;
    for (const auto& [name, st] : entries_) {
      os << (st.failures == 0 ? "PASS " : "FAIL ") << name << "  checks=" << st.checks
         << " failures=" << st.failures << '\n';
      if (st.first_failure) {
        const auto& [w, v] = *st.first_failure;
        os << "    seed=" << w.seed << " order=" << to_string(w.order) << " height=" << w.height
           << " block=" << (w.user_block ? std::to_string(*w.user_block) : std::string("wiring"))
           << " step=" << w.step << (w.committed ? " (committed)" : "") << '\n'
           << "    " << v.detail << '\n'
           << "    expected: " << v.expected << '\n'
           << "    actual:   " << v.actual << '\n';
      }
    }
    return os.str();
  }

 private:
  std::map<std::string, InvariantStatus> entries_;
};

}  // namespace dexsim::harness
