#pragma once

// Small exact rationals for the LP hot path. Arithmetic runs on int64 with
// 128-bit intermediates and throws RationalOverflow instead of wrapping; the
// solver then retries with GMP rationals.

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

#include <gmpxx.h>

namespace cmcq {

using Rational = mpq_class;

std::string to_string(const Rational& q);  // "3/2", "2", "0"

struct RationalOverflow : std::overflow_error {
  RationalOverflow() : std::overflow_error("int64 rational overflow") {}
};

class FastRational {
 public:
  FastRational() = default;
  FastRational(std::int64_t n) : num_(n) {}  // NOLINT(google-explicit-constructor)

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }

  friend FastRational operator+(const FastRational& a, const FastRational& b) {
    if (a.den_ == b.den_) return make(static_cast<__int128>(a.num_) + b.num_, a.den_);
    return make(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                static_cast<__int128>(a.den_) * b.den_);
  }
  friend FastRational operator-(const FastRational& a, const FastRational& b) {
    if (a.den_ == b.den_) return make(static_cast<__int128>(a.num_) - b.num_, a.den_);
    return make(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
                static_cast<__int128>(a.den_) * b.den_);
  }
  friend FastRational operator*(const FastRational& a, const FastRational& b) {
    return make(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
  }
  friend FastRational operator/(const FastRational& a, const FastRational& b) {
    if (b.num_ == 0) throw std::domain_error("division by zero");
    return make(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
  }
  FastRational operator-() const { return make(-static_cast<__int128>(num_), den_); }

  friend bool operator==(const FastRational& a, const FastRational& b) = default;
  friend bool operator<(const FastRational& a, const FastRational& b) {
    return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
  }
  friend bool operator>(const FastRational& a, const FastRational& b) { return b < a; }
  friend bool operator<=(const FastRational& a, const FastRational& b) { return !(b < a); }

  int sign() const noexcept { return (num_ > 0) - (num_ < 0); }
  Rational to_mpq() const {
    static_assert(sizeof(long) == sizeof(std::int64_t), "GMP conversion assumes LP64");
    Rational q(mpz_class(static_cast<long>(num_)), mpz_class(static_cast<long>(den_)));
    q.canonicalize();
    return q;
  }

 private:
  static __int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  static FastRational make(__int128 n, __int128 d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    if (n == 0) return FastRational{};
    constexpr __int128 lim = INT64_MAX;
    if (d != 1) {
      if (n <= lim && n >= -lim && d <= lim) {
        // Most entries stay small; 64-bit gcd is far cheaper than 128-bit.
        const auto g = static_cast<__int128>(
            std::gcd(static_cast<std::uint64_t>(n < 0 ? -n : n), static_cast<std::uint64_t>(d)));
        n /= g;
        d /= g;
      } else {
        const __int128 g = gcd128(n, d);
        n /= g;
        d /= g;
      }
    }
    if (n > lim || n < -lim || d > lim) throw RationalOverflow();
    FastRational r;
    r.num_ = static_cast<std::int64_t>(n);
    r.den_ = static_cast<std::int64_t>(d);
    return r;
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace cmcq
