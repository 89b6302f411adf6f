#pragma once

#include <ostream>
#include <stdexcept>
#include <string>

#include "dbf/rational.hpp"

namespace dbf {

/// Element a + b*sqrt(5) of the quadratic field Q(sqrt 5), rational a and b.
class QSqrt5 {
 public:
  QSqrt5() = default;
  QSqrt5(Rational a, Rational b = Rational(0)) : a_(std::move(a)), b_(std::move(b)) {}  // NOLINT

  [[nodiscard]] const Rational& a() const { return a_; }
  [[nodiscard]] const Rational& b() const { return b_; }

  [[nodiscard]] QSqrt5 conjugate() const { return {a_, -b_}; }
  /// Field norm a^2 - 5 b^2.
  [[nodiscard]] Rational norm() const { return a_ * a_ - Rational(5) * b_ * b_; }

  [[nodiscard]] QSqrt5 inverse() const {
    const Rational n = norm();
    if (n.sign() == 0) throw std::domain_error("division by zero in Q(sqrt 5)");
    return {a_ / n, -b_ / n};
  }

  /// Exact sign under the real embedding sqrt 5 > 0.
  [[nodiscard]] int sign() const {
    const int sa = a_.sign(), sb = b_.sign();
    if (sa >= 0 && sb >= 0) return (sa > 0 || sb > 0) ? 1 : 0;
    if (sa <= 0 && sb <= 0) return -1;
    const int c = norm().sign();  // a^2 against 5 b^2
    return sa > 0 ? c : -c;
  }

  [[nodiscard]] double to_double() const { return a_.to_double() + b_.to_double() * 2.2360679774997896964; }

  [[nodiscard]] std::string to_string() const { return a_.to_string() + " + " + b_.to_string() + "*sqrt5"; }

  friend QSqrt5 operator+(const QSqrt5& x, const QSqrt5& y) { return {x.a_ + y.a_, x.b_ + y.b_}; }
  friend QSqrt5 operator-(const QSqrt5& x, const QSqrt5& y) { return {x.a_ - y.a_, x.b_ - y.b_}; }
  friend QSqrt5 operator-(const QSqrt5& x) { return {-x.a_, -x.b_}; }
  friend QSqrt5 operator*(const QSqrt5& x, const QSqrt5& y) {
    return {x.a_ * y.a_ + Rational(5) * x.b_ * y.b_, x.a_ * y.b_ + x.b_ * y.a_};
  }
  friend QSqrt5 operator/(const QSqrt5& x, const QSqrt5& y) { return x * y.inverse(); }
  QSqrt5& operator+=(const QSqrt5& y) { return *this = *this + y; }
  QSqrt5& operator-=(const QSqrt5& y) { return *this = *this - y; }
  QSqrt5& operator*=(const QSqrt5& y) { return *this = *this * y; }

  friend bool operator==(const QSqrt5&, const QSqrt5&) = default;
  friend bool operator<(const QSqrt5& x, const QSqrt5& y) { return (x - y).sign() < 0; }
  friend bool operator<=(const QSqrt5& x, const QSqrt5& y) { return (x - y).sign() <= 0; }
  friend bool operator>(const QSqrt5& x, const QSqrt5& y) { return (x - y).sign() > 0; }
  friend bool operator>=(const QSqrt5& x, const QSqrt5& y) { return (x - y).sign() >= 0; }

  friend std::ostream& operator<<(std::ostream& os, const QSqrt5& x) { return os << x.to_string(); }

 private:
  Rational a_{0};
  Rational b_{0};
};

/// The golden ratio (1 + sqrt 5) / 2.
inline QSqrt5 golden() { return {Rational(1, 2), Rational(1, 2)}; }

/// x^k for any integer k (x must be invertible when k < 0).
inline QSqrt5 power(const QSqrt5& x, long k) {
  QSqrt5 base = k < 0 ? x.inverse() : x;
  unsigned long e = k < 0 ? static_cast<unsigned long>(-k) : static_cast<unsigned long>(k);
  QSqrt5 out(Rational(1));
  while (e > 0) {
    if (e & 1UL) out *= base;
    base *= base;
    e >>= 1;
  }
  return out;
}

/// phi^k.
inline QSqrt5 golden_power(long k) { return power(golden(), k); }

}  // namespace dbf
