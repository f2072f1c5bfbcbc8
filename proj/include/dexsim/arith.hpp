#pragma once

// Arbitrary-precision naturals and integers with explicit partiality.
//
// Contract code only ever uses the option-returning operations (sub_opt,
// div_opt, ceildiv_opt, int_add_nat). The total variants sub_trunc and
// mod_total mirror the extraction prelude and exist for differential tests.

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dexsim {

using Int = boost::multiprecision::cpp_int;

/// Non-negative arbitrary-precision integer. There is deliberately no
/// operator-; subtraction goes through sub_opt / sub_trunc.
class Nat {
 public:
  Nat() = default;
  Nat(std::uint64_t v) : v_(v) {}  // NOLINT(google-explicit-constructor)

  /// Throws std::domain_error on a negative value.
  static Nat from_int(const Int& v) {
    if (v < 0) throw std::domain_error("negative value for Nat");
    Nat n;
    n.v_ = v;
    return n;
  }

  /// Parses a plain decimal literal; throws std::invalid_argument otherwise.
  static Nat parse(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty natural literal");
    for (char c : text) {
      if (c < '0' || c > '9') {
        throw std::invalid_argument("bad natural literal: " + std::string(text));
      }
    }
    // cpp_int reads a leading 0 as octal.
    auto first = text.find_first_not_of('0');
    text = first == std::string_view::npos ? std::string_view("0") : text.substr(first);
    Nat n;
    n.v_ = Int(std::string(text));
    return n;
  }

  const Int& value() const noexcept { return v_; }
  bool is_zero() const noexcept { return v_.is_zero(); }
  std::string str() const { return v_.str(); }

  Nat& operator+=(const Nat& o) {
    v_ += o.v_;
    return *this;
  }
  Nat& operator*=(const Nat& o) {
    v_ *= o.v_;
    return *this;
  }
  friend Nat operator+(Nat a, const Nat& b) { return a += b; }
  friend Nat operator*(Nat a, const Nat& b) { return a *= b; }

  friend bool operator==(const Nat& a, const Nat& b) { return a.v_ == b.v_; }
  friend std::strong_ordering operator<=>(const Nat& a, const Nat& b) {
    int c = a.v_.compare(b.v_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  friend std::ostream& operator<<(std::ostream& os, const Nat& n) { return os << n.v_; }

 private:
  Int v_;
};

/// Native currency amount in mutez.
struct Tez {
  Nat mutez;

  Tez() = default;
  Tez(std::uint64_t v) : mutez(v) {}  // NOLINT(google-explicit-constructor)
  explicit Tez(Nat n) : mutez(std::move(n)) {}

  bool is_zero() const noexcept { return mutez.is_zero(); }
  std::string str() const { return mutez.str(); }

  Tez& operator+=(const Tez& o) {
    mutez += o.mutez;
    return *this;
  }
  friend Tez operator+(Tez a, const Tez& b) { return a += b; }
  friend bool operator==(const Tez&, const Tez&) = default;
  friend auto operator<=>(const Tez& a, const Tez& b) { return a.mutez <=> b.mutez; }
  friend std::ostream& operator<<(std::ostream& os, const Tez& t) { return os << t.mutez; }
};

inline std::optional<Nat> sub_opt(const Nat& n, const Nat& m) {
  if (n < m) return std::nullopt;
  return Nat::from_int(n.value() - m.value());
}

inline std::optional<Nat> div_opt(const Nat& n, const Nat& m) {
  if (m.is_zero()) return std::nullopt;
  return Nat::from_int(n.value() / m.value());
}

inline std::optional<Nat> ceildiv_opt(const Nat& n, const Nat& m) {
  if (m.is_zero()) return std::nullopt;
  Int q = n.value() / m.value();
  Int r = n.value() % m.value();
  if (!r.is_zero()) ++q;
  return Nat::from_int(q);
}

inline std::optional<Nat> mod_opt(const Nat& n, const Nat& m) {
  if (m.is_zero()) return std::nullopt;
  return Nat::from_int(n.value() % m.value());
}

/// Prelude subtraction: clamps at zero.
inline Nat sub_trunc(const Nat& n, const Nat& m) {
  if (n < m) return Nat{};
  return Nat::from_int(n.value() - m.value());
}

/// Prelude modulo: zero divisor yields 0.
inline Nat mod_total(const Nat& n, const Nat& m) { return mod_opt(n, m).value_or(Nat{}); }

/// n + q, absent when the result would be negative.
inline std::optional<Nat> int_add_nat(const Nat& n, const Int& q) {
  Int r = n.value() + q;
  if (r < 0) return std::nullopt;
  return Nat::from_int(r);
}

inline Nat amount_to_nat(const Tez& a) { return a.mutez; }
inline Tez nat_to_amount(const Nat& n) { return Tez{n}; }

inline std::optional<Tez> sub_opt(const Tez& a, const Tez& b) {
  auto r = sub_opt(a.mutez, b.mutez);
  if (!r) return std::nullopt;
  return Tez{std::move(*r)};
}

}  // namespace dexsim
