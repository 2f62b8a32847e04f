#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dynalloc {

// expression templates off: generic code needs std::max, auto, etc. to see plain values
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

template <class Real>
struct Num;

template <>
struct Num<Rational> {
  static constexpr bool exact = true;
  static constexpr double default_tol = 0.0;

  static bool eq(const Rational& a, const Rational& b, double = 0) { return a == b; }
  static bool le(const Rational& a, const Rational& b, double = 0) { return a <= b; }
  static bool lt(const Rational& a, const Rational& b, double = 0) { return a < b; }
  static double to_double(const Rational& a) { return a.convert_to<double>(); }
  static std::string str(const Rational& a) { return a.str(); }

  // accepts "3", "-3/4", "0.125"
  static Rational parse(std::string_view s) {
    std::string t(s);
    try {
      auto dot = t.find('.');
      if (dot == std::string::npos) return Rational(t);
      if (t.find_first_of("eE/") != std::string::npos) throw std::invalid_argument(t);
      bool neg = !t.empty() && t[0] == '-';
      std::string ip = t.substr(neg ? 1 : 0, dot - (neg ? 1 : 0));
      std::string fp = t.substr(dot + 1);
      if (ip.empty()) ip = "0";
      Rational den = 1;
      for (std::size_t i = 0; i < fp.size(); ++i) den *= 10;
      Rational v = Rational(ip) + (fp.empty() ? Rational(0) : Rational(fp) / den);
      return neg ? -v : v;
    } catch (const std::exception&) {
      throw std::invalid_argument("not a number: '" + t + "'");
    }
  }
};

template <>
struct Num<double> {
  static constexpr bool exact = false;
  static constexpr double default_tol = 1e-9;

  static bool eq(double a, double b, double tol = default_tol) { return std::fabs(a - b) <= tol; }
  static bool le(double a, double b, double tol = default_tol) { return a <= b + tol; }
  static bool lt(double a, double b, double tol = default_tol) { return a < b - tol; }
  static double to_double(double a) { return a; }
  static std::string str(double a) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", a);
    return buf;
  }
  static double parse(std::string_view s) { return Num<Rational>::parse(s).convert_to<double>(); }
};

template <class Real>
Real from_ratio(long p, long q) {
  if constexpr (Num<Real>::exact)
    return Real(p) / Real(q);
  else
    return static_cast<double>(p) / static_cast<double>(q);
}

// integer power, negative exponents allowed
template <class Real>
Real ipow(const Real& b, int n) {
  Real r = 1, x = b;
  bool inv = n < 0;
  unsigned k = inv ? static_cast<unsigned>(-n) : static_cast<unsigned>(n);
  while (k) {
    if (k & 1u) r *= x;
    x *= x;
    k >>= 1;
  }
  return inv ? Real(1) / r : r;
}

// symbolic +infinity for random times
inline constexpr int kNever = std::numeric_limits<int>::max();

// beta^n with beta^inf = 0
template <class Real>
Real discount(const Real& beta, int n) {
  return n == kNever ? Real(0) : ipow(beta, n);
}

template <class Real>
Real abs_val(const Real& a) {
  return a < 0 ? Real(-a) : a;
}

}  // namespace dynalloc
