#pragma once

// Typed <-> Payload conversion. Every contract state, setup and message type
// provides a Codec specialization; decode returns nullopt for any payload of
// the wrong shape, which a receiving contract treats as call failure.
//
// Records are encoded as a list of single-field tags in declaration order:
//   [to(@u1), minTokensBought(90), deadline(10)]
// Decoding is strict about field names, order and count.

#include "dexsim/payload.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dexsim {

template <typename T>
struct Codec;

template <typename T>
Payload encode(const T& value) {
  return Codec<T>::encode(value);
}

template <typename T>
std::optional<T> decode(const Payload& p) {
  return Codec<T>::decode(p);
}

template <>
struct Codec<Payload> {
  static Payload encode(const Payload& p) { return p; }
  static std::optional<Payload> decode(const Payload& p) { return p; }
};

template <>
struct Codec<Nat> {
  static Payload encode(const Nat& n) { return Payload::nat(n); }
  static std::optional<Nat> decode(const Payload& p) {
    if (auto* n = p.as_nat()) return *n;
    return std::nullopt;
  }
};

template <>
struct Codec<Int> {
  static Payload encode(const Int& i) { return Payload::integer(i); }
  static std::optional<Int> decode(const Payload& p) {
    if (auto* i = p.as_int()) return *i;
    return std::nullopt;
  }
};

template <>
struct Codec<Tez> {
  static Payload encode(const Tez& t) { return Payload::nat(t.mutez); }
  static std::optional<Tez> decode(const Payload& p) {
    if (auto* n = p.as_nat()) return Tez{*n};
    return std::nullopt;
  }
};

template <>
struct Codec<std::uint64_t> {
  static Payload encode(std::uint64_t v) { return Payload::nat(Nat(v)); }
  static std::optional<std::uint64_t> decode(const Payload& p) {
    auto* n = p.as_nat();
    if (!n || n->value() > std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
    return n->value().convert_to<std::uint64_t>();
  }
};

template <>
struct Codec<bool> {
  static Payload encode(bool b) { return Payload::boolean(b); }
  static std::optional<bool> decode(const Payload& p) {
    if (auto* b = p.as_bool()) return *b;
    return std::nullopt;
  }
};

template <>
struct Codec<Address> {
  static Payload encode(const Address& a) { return Payload::address(a); }
  static std::optional<Address> decode(const Payload& p) {
    if (auto* a = p.as_address()) return *a;
    return std::nullopt;
  }
};

template <typename A, typename B>
struct Codec<std::pair<A, B>> {
  static Payload encode(const std::pair<A, B>& v) {
    return Payload::pair(dexsim::encode(v.first), dexsim::encode(v.second));
  }
  static std::optional<std::pair<A, B>> decode(const Payload& p) {
    if (p.kind() != Payload::Kind::pair) return std::nullopt;
    auto a = dexsim::decode<A>(*p.first());
    auto b = dexsim::decode<B>(*p.second());
    if (!a || !b) return std::nullopt;
    return std::pair<A, B>{std::move(*a), std::move(*b)};
  }
};

template <typename T>
struct Codec<std::vector<T>> {
  static Payload encode(const std::vector<T>& v) {
    std::vector<Payload> items;
    items.reserve(v.size());
    for (const auto& x : v) items.push_back(dexsim::encode(x));
    return Payload::list(std::move(items));
  }
  static std::optional<std::vector<T>> decode(const Payload& p) {
    if (p.kind() != Payload::Kind::list) return std::nullopt;
    std::vector<T> out;
    out.reserve(p.items().size());
    for (const auto& item : p.items()) {
      auto x = dexsim::decode<T>(item);
      if (!x) return std::nullopt;
      out.push_back(std::move(*x));
    }
    return out;
  }
};

template <typename K, typename V>
struct Codec<std::map<K, V>> {
  static Payload encode(const std::map<K, V>& m) {
    std::vector<std::pair<Payload, Payload>> entries;
    entries.reserve(m.size());
    for (const auto& [k, v] : m) entries.emplace_back(dexsim::encode(k), dexsim::encode(v));
    return Payload::map(std::move(entries));
  }
  static std::optional<std::map<K, V>> decode(const Payload& p) {
    if (p.kind() != Payload::Kind::map) return std::nullopt;
    std::map<K, V> out;
    for (std::size_t i = 0; i < p.map_size(); ++i) {
      auto k = dexsim::decode<K>(p.map_key(i));
      auto v = dexsim::decode<V>(p.map_value(i));
      if (!k || !v) return std::nullopt;
      if (!out.emplace(std::move(*k), std::move(*v)).second) return std::nullopt;
    }
    return out;
  }
};

class RecordBuilder {
 public:
  template <typename T>
  RecordBuilder& field(std::string name, const T& value) {
    fields_.push_back(Payload::tag(std::move(name), dexsim::encode(value)));
    return *this;
  }
  Payload build() { return Payload::list(std::move(fields_)); }

 private:
  std::vector<Payload> fields_;
};

/// Sequential reader over a record payload. Any mismatch latches the reader
/// into the failed state; check ok() (or the return of field) at the end.
class RecordReader {
 public:
  explicit RecordReader(const Payload& p) : p_(p), ok_(p.kind() == Payload::Kind::list) {}

  template <typename T>
  bool field(std::string_view name, T& out) {
    if (!ok_) return false;
    auto items = p_.items();
    if (next_ >= items.size() || !items[next_].is_tag(name)) return ok_ = false;
    auto v = dexsim::decode<T>(*items[next_].tag_arg());
    if (!v) return ok_ = false;
    out = std::move(*v);
    ++next_;
    return true;
  }

  /// True when every field was read successfully and none are left over.
  bool done() const { return ok_ && next_ == p_.items().size(); }

 private:
  const Payload& p_;
  bool ok_;
  std::size_t next_ = 0;
};

}  // namespace dexsim
