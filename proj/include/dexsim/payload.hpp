#pragma once

// Payload: the weakly-typed value every contract state, message and setup is
// serialized to, plus its canonical text form.
//
// Text grammar (whitespace between tokens is ignored):
//
//   payload := "unit" | "true" | "false"
//            | DIGITS                          natural
//            | ("+" | "-") DIGITS              integer (sign is mandatory)
//            | "@" NAME                        address: u<n>, c<n> or an alias
//            | "(" payload "," payload ")"     pair
//            | "[" [payload ("," payload)*] "]"
//            | "{" [payload "=>" payload ("," payload "=>" payload)*] "}"
//            | IDENT "(" payload ")"           tagged value
//
// Rendering is canonical: single ", " separators, " => " in maps, map keys in
// ascending Payload order, integers always signed. parse(render(p)) == p.

#include "dexsim/address.hpp"
#include "dexsim/arith.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace dexsim {

class Payload {
 public:
  enum class Kind : std::uint8_t { unit, nat, integer, boolean, address, pair, list, map, tag };

  Payload() = default;

  static Payload unit() { return {}; }
  static Payload nat(Nat n) { return Payload(Kind::nat, std::move(n)); }
  static Payload integer(Int i) { return Payload(Kind::integer, std::move(i)); }
  static Payload boolean(bool b) { return Payload(Kind::boolean, b); }
  static Payload address(Address a) { return Payload(Kind::address, a); }

  static Payload pair(Payload a, Payload b) {
    std::vector<Payload> c;
    c.reserve(2);
    c.push_back(std::move(a));
    c.push_back(std::move(b));
    return Payload(Kind::pair, {}, std::move(c));
  }

  static Payload list(std::vector<Payload> items) { return Payload(Kind::list, {}, std::move(items)); }

  /// Sorts entries by key; throws std::invalid_argument on a duplicate key.
  static Payload map(std::vector<std::pair<Payload, Payload>> entries);

  static Payload tag(std::string name);
  static Payload tag(std::string name, Payload arg) {
    std::vector<Payload> c;
    c.push_back(std::move(arg));
    return Payload(Kind::tag, std::move(name), std::move(c));
  }

  Kind kind() const noexcept { return kind_; }
  bool is_unit() const noexcept { return kind_ == Kind::unit; }

  const Nat* as_nat() const noexcept { return kind_ == Kind::nat ? &std::get<Nat>(scalar_) : nullptr; }
  const Int* as_int() const noexcept { return kind_ == Kind::integer ? &std::get<Int>(scalar_) : nullptr; }
  const bool* as_bool() const noexcept { return kind_ == Kind::boolean ? &std::get<bool>(scalar_) : nullptr; }
  const Address* as_address() const noexcept {
    return kind_ == Kind::address ? &std::get<Address>(scalar_) : nullptr;
  }

  /// Empty unless this is a tag.
  std::string_view tag_name() const noexcept {
    return kind_ == Kind::tag ? std::string_view(std::get<std::string>(scalar_)) : std::string_view{};
  }
  const Payload* tag_arg() const noexcept { return kind_ == Kind::tag ? &(*children_)[0] : nullptr; }
  bool is_tag(std::string_view name) const noexcept { return kind_ == Kind::tag && tag_name() == name; }

  const Payload* first() const noexcept { return kind_ == Kind::pair ? &(*children_)[0] : nullptr; }
  const Payload* second() const noexcept { return kind_ == Kind::pair ? &(*children_)[1] : nullptr; }

  /// List items; empty for every other kind.
  std::span<const Payload> items() const noexcept {
    if (kind_ != Kind::list || !children_) return {};
    return {children_->data(), children_->size()};
  }

  std::size_t map_size() const noexcept {
    return kind_ == Kind::map && children_ ? children_->size() / 2 : 0;
  }
  const Payload& map_key(std::size_t i) const { return (*children_)[2 * i]; }
  const Payload& map_value(std::size_t i) const { return (*children_)[2 * i + 1]; }

  /// Raw children: pair (2), list (n), map (2n, key/value interleaved), tag (1).
  std::span<const Payload> children() const noexcept {
    if (!children_) return {};
    return {children_->data(), children_->size()};
  }

  friend int compare(const Payload& a, const Payload& b);
  friend bool operator==(const Payload& a, const Payload& b) { return compare(a, b) == 0; }
  friend bool operator<(const Payload& a, const Payload& b) { return compare(a, b) < 0; }

 private:
  using Scalar = std::variant<std::monostate, Nat, Int, bool, Address, std::string>;

  Payload(Kind k, Scalar s, std::vector<Payload> children = {})
      : kind_(k), scalar_(std::move(s)) {
    if (!children.empty() || k == Kind::list || k == Kind::map) {
      children_ = std::make_shared<const std::vector<Payload>>(std::move(children));
    }
  }

  Kind kind_ = Kind::unit;
  Scalar scalar_;
  std::shared_ptr<const std::vector<Payload>> children_;
};

inline int compare(const Payload& a, const Payload& b) {
  if (a.kind_ != b.kind_) return a.kind_ < b.kind_ ? -1 : 1;
  if (a.children_ == b.children_ && a.scalar_.index() == 0 && b.scalar_.index() == 0) return 0;
  auto sgn = [](auto c) { return c < 0 ? -1 : (c > 0 ? 1 : 0); };
  switch (a.kind_) {
    case Payload::Kind::unit:
      return 0;
    case Payload::Kind::nat:
      return sgn(std::get<Nat>(a.scalar_).value().compare(std::get<Nat>(b.scalar_).value()));
    case Payload::Kind::integer:
      return sgn(std::get<Int>(a.scalar_).compare(std::get<Int>(b.scalar_)));
    case Payload::Kind::boolean:
      return sgn(int(std::get<bool>(a.scalar_)) - int(std::get<bool>(b.scalar_)));
    case Payload::Kind::address: {
      auto c = std::get<Address>(a.scalar_) <=> std::get<Address>(b.scalar_);
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case Payload::Kind::tag: {
      int c = sgn(std::get<std::string>(a.scalar_).compare(std::get<std::string>(b.scalar_)));
      if (c != 0) return c;
      break;
    }
    default:
      break;
  }
  auto ca = a.children();
  auto cb = b.children();
  std::size_t n = std::min(ca.size(), cb.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = compare(ca[i], cb[i]);
    if (c != 0) return c;
  }
  return sgn(static_cast<long long>(ca.size()) - static_cast<long long>(cb.size()));
}

inline Payload Payload::tag(std::string name) { return tag(std::move(name), Payload{}); }

inline Payload Payload::map(std::vector<std::pair<Payload, Payload>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& x, const auto& y) { return compare(x.first, y.first) < 0; });
  std::vector<Payload> flat;
  flat.reserve(entries.size() * 2);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i > 0 && compare(entries[i - 1].first, entries[i].first) == 0) {
      throw std::invalid_argument("duplicate map key");
    }
    flat.push_back(std::move(entries[i].first));
    flat.push_back(std::move(entries[i].second));
  }
  return Payload(Kind::map, {}, std::move(flat));
}

// ---------------------------------------------------------------------------
// Text form

namespace detail {

inline void render_into(std::string& out, const Payload& p) {
  switch (p.kind()) {
    case Payload::Kind::unit:
      out += "unit";
      return;
    case Payload::Kind::nat:
      out += p.as_nat()->str();
      return;
    case Payload::Kind::integer: {
      const Int& i = *p.as_int();
      if (i >= 0) out += '+';
      out += i.str();
      return;
    }
    case Payload::Kind::boolean:
      out += *p.as_bool() ? "true" : "false";
      return;
    case Payload::Kind::address:
      out += '@';
      out += p.as_address()->str();
      return;
    case Payload::Kind::pair:
      out += '(';
      render_into(out, *p.first());
      out += ", ";
      render_into(out, *p.second());
      out += ')';
      return;
    case Payload::Kind::list: {
      out += '[';
      bool sep = false;
      for (const auto& item : p.items()) {
        if (sep) out += ", ";
        render_into(out, item);
        sep = true;
      }
      out += ']';
      return;
    }
    case Payload::Kind::map:
      out += '{';
      for (std::size_t i = 0; i < p.map_size(); ++i) {
        if (i > 0) out += ", ";
        render_into(out, p.map_key(i));
        out += " => ";
        render_into(out, p.map_value(i));
      }
      out += '}';
      return;
    case Payload::Kind::tag:
      out += p.tag_name();
      out += '(';
      render_into(out, *p.tag_arg());
      out += ')';
      return;
  }
}

}  // namespace detail

inline std::string render(const Payload& p) {
  std::string out;
  detail::render_into(out, p);
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const Payload& p) { return os << render(p); }

class PayloadParseError : public std::runtime_error {
 public:
  PayloadParseError(const std::string& what, std::size_t pos)
      : std::runtime_error(what + " at offset " + std::to_string(pos)), pos_(pos) {}
  std::size_t position() const noexcept { return pos_; }

 private:
  std::size_t pos_;
};

/// Maps the NAME of an "@NAME" token to an address. The default resolver
/// accepts only u<n> / c<n>.
using AddressResolver = std::function<std::optional<Address>(std::string_view)>;

namespace detail {

class PayloadParser {
 public:
  PayloadParser(std::string_view text, const AddressResolver& resolve)
      : text_(text), resolve_(resolve) {}

  Payload parse_all() {
    Payload p = parse_value();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing input");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw PayloadParseError(what, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  bool eat_arrow() {
    skip_ws();
    if (text_.substr(pos_, 2) == "=>") {
      pos_ += 2;
      return true;
    }
    return false;
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  std::string_view take_while(bool (*pred)(char)) {
    std::size_t start = pos_;
    while (pos_ < text_.size() && pred(text_[pos_])) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  std::string_view take_digits() {
    return take_while([](char c) { return c >= '0' && c <= '9'; });
  }

  Payload parse_value() {
    if (++depth_ > kMaxDepth) fail("nesting too deep");
    Payload p = parse_value_inner();
    --depth_;
    return p;
  }

  Payload parse_value_inner() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c >= '0' && c <= '9') return Payload::nat(Nat::parse(take_digits()));
    if (c == '+' || c == '-') {
      ++pos_;
      auto digits = take_digits();
      if (digits.empty()) fail("expected digits after sign");
      Int v{std::string(digits)};
      return Payload::integer(c == '-' ? Int(-v) : v);
    }
    if (c == '@') {
      ++pos_;
      auto name = take_while(ident_char);
      if (name.empty()) fail("expected address after '@'");
      auto addr = resolve_(name);
      if (!addr) fail("unknown address '" + std::string(name) + "'");
      return Payload::address(*addr);
    }
    if (c == '(') {
      ++pos_;
      Payload a = parse_value();
      expect(',');
      Payload b = parse_value();
      expect(')');
      return Payload::pair(std::move(a), std::move(b));
    }
    if (c == '[') {
      ++pos_;
      std::vector<Payload> items;
      if (!eat(']')) {
        do {
          items.push_back(parse_value());
        } while (eat(','));
        expect(']');
      }
      return Payload::list(std::move(items));
    }
    if (c == '{') {
      ++pos_;
      std::vector<std::pair<Payload, Payload>> entries;
      if (!eat('}')) {
        do {
          Payload k = parse_value();
          if (!eat_arrow()) fail("expected '=>'");
          Payload v = parse_value();
          entries.emplace_back(std::move(k), std::move(v));
        } while (eat(','));
        expect('}');
      }
      std::size_t at = pos_;
      try {
        return Payload::map(std::move(entries));
      } catch (const std::invalid_argument&) {
        throw PayloadParseError("duplicate map key", at);
      }
    }
    if (ident_start(c)) {
      auto word = take_while(ident_char);
      if (word == "unit") return Payload::unit();
      if (word == "true") return Payload::boolean(true);
      if (word == "false") return Payload::boolean(false);
      std::string name(word);
      expect('(');
      Payload arg = parse_value();
      expect(')');
      return Payload::tag(std::move(name), std::move(arg));
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  static constexpr int kMaxDepth = 256;

  std::string_view text_;
  const AddressResolver& resolve_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace detail

/// Throws PayloadParseError on malformed text.
inline Payload parse_payload(std::string_view text, const AddressResolver& resolve) {
  return detail::PayloadParser(text, resolve).parse_all();
}

inline Payload parse_payload(std::string_view text) {
  AddressResolver plain = [](std::string_view name) { return Address::parse(name); };
  return parse_payload(text, plain);
}

}  // namespace dexsim
