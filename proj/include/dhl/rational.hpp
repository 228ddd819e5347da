#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "dhl/error.hpp"

namespace dhl::sym {

/// Exact rational scalar for the exact-arithmetic mode of the symmetric
/// function algebra. Intermediate products run through 128-bit integers;
/// desk-scale spectra (small integer ratios, n <= 8) never overflow.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t value) : num_(value), den_(1) {}  // NOLINT: implicit by design
  Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) { normalize(); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.den_ - i128(b.num_) * a.den_, i128(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  Rational& operator+=(const Rational& other) { return *this = *this + other; }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  Rational pow(int e) const {
    Rational r(1);
    for (int i = 0; i < e; ++i) r = r * (*this);
    return r;
  }

 private:
  using i128 = __int128;

  static Rational make(i128 num, i128 den) {
    require(den != 0, ErrorKind::argument, "Rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    i128 g = gcd128(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    constexpr i128 lim = INT64_MAX;
    require(num <= lim && num >= -lim && den <= lim, ErrorKind::numeric,
            "Rational: overflow");
    Rational r;
    r.num_ = static_cast<std::int64_t>(num);
    r.den_ = static_cast<std::int64_t>(den);
    return r;
  }

  static i128 gcd128(i128 a, i128 b) {
    while (b != 0) {
      i128 t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }

  void normalize() { *this = make(num_, den_); }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace dhl::sym
