#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lds {

/// Exact arbitrary-precision rational, always kept in lowest terms.
using Rational = mpq_class;

/// Computational failure (bad preconditions, singular data, ...).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Rational canonical(Rational q) {
  q.canonicalize();
  return q;
}

/// Parses "p", "p/q", or a finite decimal such as "0.25" or "-1.5e-3".
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  if (s.empty()) throw Error("empty rational literal");

  auto bad = [&] { return Error("malformed rational literal: '" + std::string(text) + "'"); };
  if (s.find_first_of(".eE") == std::string::npos) {
    Rational q;
    if (q.set_str(s, 10) != 0) throw bad();
    if (q.get_den() == 0) throw Error("zero denominator in rational literal");
    return canonical(q);
  }

  // Decimal notation: mantissa digits scaled by a power of ten.
  std::size_t epos = s.find_first_of("eE");
  std::string mant = s.substr(0, epos);
  long exp10 = 0;
  if (epos != std::string::npos) {
    try {
      std::size_t used = 0;
      exp10 = std::stol(s.substr(epos + 1), &used);
      if (used != s.size() - epos - 1) throw bad();
    } catch (const std::logic_error&) {
      throw bad();
    }
  }
  bool negative = false;
  if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
    negative = mant[0] == '-';
    mant.erase(mant.begin());
  }
  std::size_t dot = mant.find('.');
  std::string digits = mant;
  if (dot != std::string::npos) {
    digits = mant.substr(0, dot) + mant.substr(dot + 1);
    exp10 -= static_cast<long>(mant.size() - dot - 1);
  }
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) throw bad();
  mpz_class num(digits, 10);
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exp10)));
  Rational q = exp10 >= 0 ? Rational(num * scale) : Rational(num, scale);
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

/// "p" for integers, "p/q" otherwise.
inline std::string to_string(const Rational& q) { return q.get_str(10); }

inline double to_double(const Rational& q) { return q.get_d(); }

}  // namespace lds
