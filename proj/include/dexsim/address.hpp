#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

namespace dexsim {

enum class AddressKind : std::uint8_t { user = 0, contract = 1 };

/// Account identifier. Contract addresses are only minted by deployment;
/// contract index 0 is the null address and never hosts code.
struct Address {
  AddressKind kind = AddressKind::user;
  std::uint64_t index = 0;

  static constexpr Address user(std::uint64_t i) { return {AddressKind::user, i}; }
  static constexpr Address contract(std::uint64_t i) { return {AddressKind::contract, i}; }
  static constexpr Address null() { return {AddressKind::contract, 0}; }

  constexpr bool is_user() const { return kind == AddressKind::user; }
  constexpr bool is_contract() const { return kind == AddressKind::contract; }
  constexpr bool is_null() const { return *this == null(); }

  /// "u<index>" or "c<index>", without the leading '@' used in payload text.
  std::string str() const {
    return (is_user() ? "u" : "c") + std::to_string(index);
  }

  static std::optional<Address> parse(std::string_view text) {
    if (text.size() < 2 || (text[0] != 'u' && text[0] != 'c')) return std::nullopt;
    std::uint64_t idx = 0;
    auto body = text.substr(1);
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), idx);
    if (ec != std::errc{} || ptr != body.data() + body.size()) return std::nullopt;
    return text[0] == 'u' ? user(idx) : contract(idx);
  }

  friend constexpr bool operator==(const Address&, const Address&) = default;
  friend constexpr auto operator<=>(const Address&, const Address&) = default;
  friend std::ostream& operator<<(std::ostream& os, const Address& a) { return os << '@' << a.str(); }
};

}  // namespace dexsim
