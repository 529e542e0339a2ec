#pragma once

#include <gmpxx.h>

#include <compare>
#include <concepts>
#include <cstdint>
#include <limits>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>

namespace cosheaf {

// Arbitrary precision integer. Values that fit in 64 bits stay inline; anything
// larger lives in a GMP integer and is folded back as soon as it fits again.
class Integer {
 public:
  Integer() noexcept = default;

  template <std::signed_integral T>
  Integer(T v) noexcept : small_(static_cast<std::int64_t>(v)) {}

  template <std::unsigned_integral T>
  Integer(T v) {
    if (static_cast<std::uint64_t>(v) <= static_cast<std::uint64_t>(kMax)) {
      small_ = static_cast<std::int64_t>(v);
    } else {
      mpz_class z;
      mpz_import(z.get_mpz_t(), 1, 1, sizeof(std::uint64_t), 0, 0, &v);
      big_ = std::make_unique<mpz_class>(std::move(z));
    }
  }

  explicit Integer(const mpz_class& v) { assign(v); }

  Integer(const Integer& o) : small_(o.small_) {
    if (o.big_) big_ = std::make_unique<mpz_class>(*o.big_);
  }
  Integer(Integer&&) noexcept = default;
  Integer& operator=(const Integer& o) {
    if (this != &o) {
      small_ = o.small_;
      big_ = o.big_ ? std::make_unique<mpz_class>(*o.big_) : nullptr;
    }
    return *this;
  }
  Integer& operator=(Integer&&) noexcept = default;

  static Integer parse(std::string_view text) {
    std::string s(text);
    if (s.empty()) throw std::invalid_argument("empty integer literal");
    std::size_t start = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (start == s.size()) throw std::invalid_argument("bad integer literal: " + s);
    for (std::size_t i = start; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("bad integer literal: " + s);
    }
    if (s[0] == '+') s.erase(0, 1);
    return Integer(mpz_class(s, 10));
  }

  bool is_small() const noexcept { return !big_; }
  bool is_zero() const noexcept { return !big_ && small_ == 0; }
  bool is_one() const noexcept { return !big_ && small_ == 1; }
  int sign() const noexcept {
    if (big_) return sgn(*big_);
    return (small_ > 0) - (small_ < 0);
  }

  bool fits_int64() const noexcept { return !big_; }
  std::int64_t to_int64() const {
    if (big_) throw std::overflow_error("integer does not fit in 64 bits");
    return small_;
  }

  mpz_class to_mpz() const {
    if (big_) return *big_;
    mpz_class z;
    mpz_set_si(z.get_mpz_t(), small_);
    return z;
  }

  std::string to_string() const { return big_ ? big_->get_str() : std::to_string(small_); }

  Integer operator-() const {
    if (!big_ && small_ != kMin) return Integer(-small_);
    return Integer(mpz_class(-to_mpz()));
  }

  friend Integer operator+(const Integer& a, const Integer& b) {
    std::int64_t r;
    if (!a.big_ && !b.big_ && !__builtin_add_overflow(a.small_, b.small_, &r)) return Integer(r);
    return Integer(mpz_class(a.to_mpz() + b.to_mpz()));
  }
  friend Integer operator-(const Integer& a, const Integer& b) {
    std::int64_t r;
    if (!a.big_ && !b.big_ && !__builtin_sub_overflow(a.small_, b.small_, &r)) return Integer(r);
    return Integer(mpz_class(a.to_mpz() - b.to_mpz()));
  }
  friend Integer operator*(const Integer& a, const Integer& b) {
    std::int64_t r;
    if (!a.big_ && !b.big_ && !__builtin_mul_overflow(a.small_, b.small_, &r)) return Integer(r);
    return Integer(mpz_class(a.to_mpz() * b.to_mpz()));
  }
  // Truncating division, as for built-in integers.
  friend Integer operator/(const Integer& a, const Integer& b) {
    if (b.is_zero()) throw std::domain_error("integer division by zero");
    if (!a.big_ && !b.big_ && !(a.small_ == kMin && b.small_ == -1)) return Integer(a.small_ / b.small_);
    mpz_class q;
    mpz_tdiv_q(q.get_mpz_t(), a.to_mpz().get_mpz_t(), b.to_mpz().get_mpz_t());
    return Integer(q);
  }
  friend Integer operator%(const Integer& a, const Integer& b) {
    if (b.is_zero()) throw std::domain_error("integer division by zero");
    if (!a.big_ && !b.big_) {
      if (b.small_ == -1) return Integer(0);
      return Integer(a.small_ % b.small_);
    }
    mpz_class r;
    mpz_tdiv_r(r.get_mpz_t(), a.to_mpz().get_mpz_t(), b.to_mpz().get_mpz_t());
    return Integer(r);
  }

  Integer& operator+=(const Integer& o) { return *this = *this + o; }
  Integer& operator-=(const Integer& o) { return *this = *this - o; }
  Integer& operator*=(const Integer& o) { return *this = *this * o; }

  // this += a * b without a temporary in the common case.
  void add_mul(const Integer& a, const Integer& b) {
    std::int64_t p, r;
    if (!big_ && !a.big_ && !b.big_ && !__builtin_mul_overflow(a.small_, b.small_, &p) &&
        !__builtin_add_overflow(small_, p, &r)) {
      small_ = r;
      return;
    }
    assign(mpz_class(to_mpz() + a.to_mpz() * b.to_mpz()));
  }

  friend bool operator==(const Integer& a, const Integer& b) noexcept {
    if (!a.big_ && !b.big_) return a.small_ == b.small_;
    if (a.big_ && b.big_) return cmp(*a.big_, *b.big_) == 0;
    return false;  // normalized: a big value never fits in 64 bits
  }
  friend std::strong_ordering operator<=>(const Integer& a, const Integer& b) {
    if (!a.big_ && !b.big_) return a.small_ <=> b.small_;
    int c = cmp(a.to_mpz(), b.to_mpz());
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  friend Integer abs(const Integer& a) { return a.sign() < 0 ? -a : a; }

  // Floor division and the matching non-negative remainder for b > 0.
  friend Integer floor_div(const Integer& a, const Integer& b) {
    if (b.is_zero()) throw std::domain_error("integer division by zero");
    mpz_class q;
    if (!a.big_ && !b.big_ && !(a.small_ == kMin && b.small_ == -1)) {
      std::int64_t qq = a.small_ / b.small_;
      if ((a.small_ % b.small_ != 0) && ((a.small_ < 0) != (b.small_ < 0))) --qq;
      return Integer(qq);
    }
    mpz_fdiv_q(q.get_mpz_t(), a.to_mpz().get_mpz_t(), b.to_mpz().get_mpz_t());
    return Integer(q);
  }

  friend Integer gcd(const Integer& a, const Integer& b) {
    if (!a.big_ && !b.big_ && a.small_ != kMin && b.small_ != kMin) {
      std::int64_t x = a.small_ < 0 ? -a.small_ : a.small_;
      std::int64_t y = b.small_ < 0 ? -b.small_ : b.small_;
      while (y != 0) {
        std::int64_t t = x % y;
        x = y;
        y = t;
      }
      return Integer(x);
    }
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), a.to_mpz().get_mpz_t(), b.to_mpz().get_mpz_t());
    return Integer(g);
  }

  // Returns (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0.
  friend std::tuple<Integer, Integer, Integer> gcdext(const Integer& a, const Integer& b) {
    constexpr std::int64_t kSafe = std::int64_t{1} << 61;
    if (!a.big_ && !b.big_ && a.small_ > -kSafe && a.small_ < kSafe && b.small_ > -kSafe &&
        b.small_ < kSafe) {
      std::int64_t old_r = a.small_, r = b.small_, old_s = 1, s = 0, old_t = 0, t = 1;
      while (r != 0) {
        std::int64_t q = old_r / r;
        std::int64_t tmp = old_r - q * r;
        old_r = r;
        r = tmp;
        tmp = old_s - q * s;
        old_s = s;
        s = tmp;
        tmp = old_t - q * t;
        old_t = t;
        t = tmp;
      }
      if (old_r < 0) {
        old_r = -old_r;
        old_s = -old_s;
        old_t = -old_t;
      }
      return {Integer(old_r), Integer(old_s), Integer(old_t)};
    }
    mpz_class g, s, t;
    mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), a.to_mpz().get_mpz_t(),
               b.to_mpz().get_mpz_t());
    return {Integer(g), Integer(s), Integer(t)};
  }

  friend std::ostream& operator<<(std::ostream& os, const Integer& a) { return os << a.to_string(); }

 private:
  static constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();
  static constexpr std::int64_t kMin = std::numeric_limits<std::int64_t>::min();

  void assign(const mpz_class& v) {
    if (mpz_fits_slong_p(v.get_mpz_t()) && sizeof(long) == sizeof(std::int64_t)) {
      small_ = mpz_get_si(v.get_mpz_t());
      big_.reset();
    } else {
      small_ = 0;
      big_ = std::make_unique<mpz_class>(v);
    }
  }

  std::int64_t small_ = 0;
  std::unique_ptr<mpz_class> big_;
};

static_assert(sizeof(long) == sizeof(std::int64_t), "GMP fast path assumes 64-bit long");

Integer abs(const Integer& a);
Integer floor_div(const Integer& a, const Integer& b);
Integer gcd(const Integer& a, const Integer& b);
std::tuple<Integer, Integer, Integer> gcdext(const Integer& a, const Integer& b);

}  // namespace cosheaf
