#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>
#include <tuple>

#include "cosheaf/errors.hpp"
#include "cosheaf/integer.hpp"

namespace cosheaf {

enum class RingKind { kIntegers, kRationals, kPrimeField };

struct RingSpec {
  RingKind kind = RingKind::kIntegers;
  std::int64_t p = 0;

  static RingSpec parse(std::string_view tag);
  std::string to_string() const {
    switch (kind) {
      case RingKind::kIntegers:
        return "Z";
      case RingKind::kRationals:
        return "Q";
      case RingKind::kPrimeField:
        return "Fp:" + std::to_string(p);
    }
    return "?";
  }
  friend bool operator==(const RingSpec&, const RingSpec&) = default;
};

inline bool is_prime(std::int64_t p) {
  if (p < 2) return false;
  for (std::int64_t d = 2; d * d <= p; ++d) {
    if (p % d == 0) return false;
  }
  return true;
}

inline RingSpec RingSpec::parse(std::string_view tag) {
  if (tag == "Z") return {RingKind::kIntegers, 0};
  if (tag == "Q") return {RingKind::kRationals, 0};
  if (tag.substr(0, 3) == "Fp:") {
    std::string digits(tag.substr(3));
    if (digits.empty() || digits.size() > 10 || digits.find_first_not_of("0123456789") != std::string::npos) {
      throw ParseError("bad prime in ring tag '" + std::string(tag) + "'");
    }
    std::int64_t p = std::stoll(digits);
    if (!is_prime(p) || p >= (std::int64_t{1} << 31)) {
      throw ParseError("ring tag needs a prime below 2^31, got '" + std::string(tag) + "'");
    }
    return {RingKind::kPrimeField, p};
  }
  throw ParseError("unknown ring tag '" + std::string(tag) + "' (expected Z, Q or Fp:<p>)");
}

struct Integers {
  using Scalar = Integer;
  static constexpr bool kIsField = false;

  RingSpec spec() const { return {RingKind::kIntegers, 0}; }
  Scalar zero() const { return {}; }
  Scalar one() const { return Integer(1); }
  Scalar from_integer(const Integer& v) const { return v; }
  bool is_zero(const Scalar& a) const { return a.is_zero(); }
  Scalar add(const Scalar& a, const Scalar& b) const { return a + b; }
  Scalar sub(const Scalar& a, const Scalar& b) const { return a - b; }
  Scalar mul(const Scalar& a, const Scalar& b) const { return a * b; }
  Scalar neg(const Scalar& a) const { return -a; }
  void add_mul(Scalar& acc, const Scalar& a, const Scalar& b) const { acc.add_mul(a, b); }
  bool is_unit(const Scalar& a) const { return a == Integer(1) || a == Integer(-1); }
  Scalar unit_inverse(const Scalar& u) const { return u; }
  // Unit u such that u * a is the canonical associate of a.
  Scalar normalizer(const Scalar& a) const { return a.sign() < 0 ? Integer(-1) : Integer(1); }
  // q such that a - q*b lies in [0, |b|).
  Scalar euclid_quotient(const Scalar& a, const Scalar& b) const {
    return b.sign() > 0 ? floor_div(a, b) : -floor_div(a, -b);
  }
  Integer norm(const Scalar& a) const { return abs(a); }
  std::tuple<Scalar, Scalar, Scalar> gcdext(const Scalar& a, const Scalar& b) const {
    return cosheaf::gcdext(a, b);
  }
  bool divides(const Scalar& a, const Scalar& b) const {
    if (a.is_zero()) return b.is_zero();
    return (b % a).is_zero();
  }
  Scalar exact_quotient(const Scalar& a, const Scalar& b) const { return a / b; }
  Integer to_integer(const Scalar& a) const { return a; }
  std::string format(const Scalar& a) const { return a.to_string(); }
  Scalar parse(std::string_view s) const { return Integer::parse(s); }
  friend bool operator==(const Integers&, const Integers&) { return true; }
};

struct Rationals {
  using Scalar = mpq_class;
  static constexpr bool kIsField = true;

  RingSpec spec() const { return {RingKind::kRationals, 0}; }
  Scalar zero() const { return Scalar(0); }
  Scalar one() const { return Scalar(1); }
  Scalar from_integer(const Integer& v) const { return Scalar(v.to_mpz()); }
  bool is_zero(const Scalar& a) const { return sgn(a) == 0; }
  Scalar add(const Scalar& a, const Scalar& b) const { return Scalar(a + b); }
  Scalar sub(const Scalar& a, const Scalar& b) const { return Scalar(a - b); }
  Scalar mul(const Scalar& a, const Scalar& b) const { return Scalar(a * b); }
  Scalar neg(const Scalar& a) const { return Scalar(-a); }
  void add_mul(Scalar& acc, const Scalar& a, const Scalar& b) const { acc += a * b; }
  bool is_unit(const Scalar& a) const { return !is_zero(a); }
  Scalar unit_inverse(const Scalar& u) const { return Scalar(1 / u); }
  Scalar normalizer(const Scalar& a) const { return is_zero(a) ? one() : unit_inverse(a); }
  Scalar euclid_quotient(const Scalar& a, const Scalar& b) const { return Scalar(a / b); }
  Integer norm(const Scalar& a) const { return is_zero(a) ? Integer(0) : Integer(1); }
  std::tuple<Scalar, Scalar, Scalar> gcdext(const Scalar& a, const Scalar& b) const {
    if (!is_zero(a)) return {one(), unit_inverse(a), zero()};
    if (!is_zero(b)) return {one(), zero(), unit_inverse(b)};
    return {zero(), one(), zero()};
  }
  bool divides(const Scalar& a, const Scalar& b) const { return !is_zero(a) || is_zero(b); }
  Scalar exact_quotient(const Scalar& a, const Scalar& b) const { return Scalar(a / b); }
  Integer to_integer(const Scalar& a) const { return is_zero(a) ? Integer(0) : Integer(1); }
  std::string format(const Scalar& a) const { return a.get_str(); }
  Scalar parse(std::string_view s) const {
    Scalar q;
    if (q.set_str(std::string(s), 10) != 0) throw ParseError("bad rational literal '" + std::string(s) + "'");
    q.canonicalize();
    return q;
  }
  friend bool operator==(const Rationals&, const Rationals&) { return true; }
};

class PrimeField {
 public:
  using Scalar = std::int64_t;
  static constexpr bool kIsField = true;

  explicit PrimeField(std::int64_t p) : p_(p) {
    if (!is_prime(p) || p >= (std::int64_t{1} << 31)) {
      throw Error("PrimeField needs a prime below 2^31, got " + std::to_string(p));
    }
  }

  std::int64_t characteristic() const { return p_; }
  RingSpec spec() const { return {RingKind::kPrimeField, p_}; }
  Scalar zero() const { return 0; }
  Scalar one() const { return 1; }
  Scalar reduce(std::int64_t v) const {
    v %= p_;
    return v < 0 ? v + p_ : v;
  }
  Scalar from_integer(const Integer& v) const {
    if (v.fits_int64()) return reduce(v.to_int64());
    mpz_class r;
    mpz_fdiv_r_ui(r.get_mpz_t(), v.to_mpz().get_mpz_t(), static_cast<unsigned long>(p_));
    return static_cast<Scalar>(r.get_si());
  }
  bool is_zero(Scalar a) const { return a == 0; }
  Scalar add(Scalar a, Scalar b) const {
    Scalar s = a + b;
    return s >= p_ ? s - p_ : s;
  }
  Scalar sub(Scalar a, Scalar b) const {
    Scalar s = a - b;
    return s < 0 ? s + p_ : s;
  }
  Scalar mul(Scalar a, Scalar b) const { return static_cast<Scalar>((static_cast<__int128>(a) * b) % p_); }
  Scalar neg(Scalar a) const { return a == 0 ? 0 : p_ - a; }
  void add_mul(Scalar& acc, Scalar a, Scalar b) const { acc = add(acc, mul(a, b)); }
  bool is_unit(Scalar a) const { return a != 0; }
  Scalar unit_inverse(Scalar u) const {
    std::int64_t old_r = u, r = p_, old_s = 1, s = 0;
    while (r != 0) {
      std::int64_t q = old_r / r;
      std::int64_t t = old_r - q * r;
      old_r = r;
      r = t;
      t = old_s - q * s;
      old_s = s;
      s = t;
    }
    return reduce(old_s);
  }
  Scalar normalizer(Scalar a) const { return a == 0 ? 1 : unit_inverse(a); }
  Scalar euclid_quotient(Scalar a, Scalar b) const { return mul(a, unit_inverse(b)); }
  Integer norm(Scalar a) const { return a == 0 ? Integer(0) : Integer(1); }
  std::tuple<Scalar, Scalar, Scalar> gcdext(Scalar a, Scalar b) const {
    if (a != 0) return {1, unit_inverse(a), 0};
    if (b != 0) return {1, 0, unit_inverse(b)};
    return {0, 1, 0};
  }
  bool divides(Scalar a, Scalar b) const { return a != 0 || b == 0; }
  Scalar exact_quotient(Scalar a, Scalar b) const { return mul(a, unit_inverse(b)); }
  Integer to_integer(Scalar a) const { return Integer(a); }
  std::string format(Scalar a) const { return std::to_string(a); }
  Scalar parse(std::string_view s) const { return from_integer(Integer::parse(s)); }
  friend bool operator==(const PrimeField& a, const PrimeField& b) { return a.p_ == b.p_; }

 private:
  std::int64_t p_;
};

template <class R>
concept RingPolicy = requires(const R r, const typename R::Scalar a) {
  { r.spec() } -> std::same_as<RingSpec>;
  { r.zero() } -> std::same_as<typename R::Scalar>;
  { r.is_zero(a) } -> std::same_as<bool>;
  { R::kIsField } -> std::convertible_to<bool>;
};

// Calls f with the ring object named by spec.
template <class F>
decltype(auto) with_ring(const RingSpec& spec, F&& f) {
  switch (spec.kind) {
    case RingKind::kRationals:
      return f(Rationals{});
    case RingKind::kPrimeField:
      return f(PrimeField(spec.p));
    case RingKind::kIntegers:
    default:
      return f(Integers{});
  }
}

}  // namespace cosheaf
