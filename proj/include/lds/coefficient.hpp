#pragma once

// Exact Laurent polynomials with rational coefficients in named coupling
// symbols. This is the scalar ring of every reduction.

#include <lds/rational.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace lds {

/// Product of symbols raised to (possibly negative) integer powers.
class Monomial {
 public:
  using Factor = std::pair<std::string, int>;

  Monomial() = default;

  static Monomial symbol(std::string name, int exponent = 1) {
    Monomial m;
    if (exponent != 0) m.factors_.emplace_back(std::move(name), exponent);
    return m;
  }

  /// Sorted by symbol name; zero exponents are never stored.
  const std::vector<Factor>& factors() const { return factors_; }

  bool is_one() const { return factors_.empty(); }

  int exponent(const std::string& name) const {
    auto it = std::lower_bound(factors_.begin(), factors_.end(), name,
                               [](const Factor& f, const std::string& n) { return f.first < n; });
    return (it != factors_.end() && it->first == name) ? it->second : 0;
  }

  Monomial operator*(const Monomial& other) const {
    Monomial out;
    out.factors_.reserve(factors_.size() + other.factors_.size());
    auto a = factors_.begin();
    auto b = other.factors_.begin();
    while (a != factors_.end() || b != other.factors_.end()) {
      if (b == other.factors_.end() || (a != factors_.end() && a->first < b->first)) {
        out.factors_.push_back(*a++);
      } else if (a == factors_.end() || b->first < a->first) {
        out.factors_.push_back(*b++);
      } else {
        int e = a->second + b->second;
        if (e != 0) out.factors_.emplace_back(a->first, e);
        ++a;
        ++b;
      }
    }
    return out;
  }

  Monomial inverse() const {
    Monomial out = *this;
    for (auto& f : out.factors_) f.second = -f.second;
    return out;
  }

  /// Same monomial with `name` removed.
  Monomial without(const std::string& name) const {
    Monomial out;
    for (const auto& f : factors_)
      if (f.first != name) out.factors_.push_back(f);
    return out;
  }

  std::string to_string() const {
    if (factors_.empty()) return "1";
    std::string s;
    for (const auto& [name, e] : factors_) {
      if (!s.empty()) s += "*";
      s += name;
      if (e != 1) s += "^" + std::to_string(e);
    }
    return s;
  }

  friend bool operator==(const Monomial&, const Monomial&) = default;
  friend auto operator<=>(const Monomial&, const Monomial&) = default;

 private:
  std::vector<Factor> factors_;
};

using Assignment = std::map<std::string, Rational>;

/// Finite sum of rational multiples of monomials.
class Coefficient {
 public:
  Coefficient() = default;
  Coefficient(const Rational& c) { add_term(Monomial{}, c); }  // NOLINT(google-explicit-constructor)
  Coefficient(long c) : Coefficient(Rational(c)) {}             // NOLINT
  Coefficient(int c) : Coefficient(Rational(c)) {}              // NOLINT

  static Coefficient symbol(const std::string& name, int exponent = 1) {
    Coefficient c;
    c.add_term(Monomial::symbol(name, exponent), Rational(1));
    return c;
  }

  static Coefficient term(const Monomial& m, const Rational& c) {
    Coefficient out;
    out.add_term(m, c);
    return out;
  }

  const std::map<Monomial, Rational>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_one()); }

  /// Value of a constant coefficient; throws if symbols are present.
  Rational constant_value() const {
    if (!is_constant()) throw Error("coefficient is not a constant: " + to_string());
    return terms_.empty() ? Rational(0) : terms_.begin()->second;
  }

  /// A single nonzero term is a unit of the Laurent ring.
  bool is_unit() const { return terms_.size() == 1; }

  Coefficient inverse() const {
    if (!is_unit()) throw Error("coefficient is not invertible in the Laurent ring: " + to_string());
    const auto& [m, c] = *terms_.begin();
    return term(m.inverse(), Rational(1) / c);
  }

  void add_term(const Monomial& m, const Rational& c_in) {
    if (c_in == 0) return;
    Rational c = c_in;
    c.canonicalize();  // mpq_class(p, q) does not reduce
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  Coefficient& operator+=(const Coefficient& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Coefficient& operator-=(const Coefficient& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  Coefficient& operator*=(const Coefficient& o) { return *this = *this * o; }

  friend Coefficient operator+(Coefficient a, const Coefficient& b) { return a += b; }
  friend Coefficient operator-(Coefficient a, const Coefficient& b) { return a -= b; }
  friend Coefficient operator-(const Coefficient& a) {
    Coefficient out;
    for (const auto& [m, c] : a.terms_) out.terms_.emplace(m, -c);
    return out;
  }
  friend Coefficient operator*(const Coefficient& a, const Coefficient& b) {
    Coefficient out;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) out.add_term(ma * mb, ca * cb);
    return out;
  }
  friend bool operator==(const Coefficient&, const Coefficient&) = default;

  std::set<std::string> symbols() const {
    std::set<std::string> out;
    for (const auto& [m, c] : terms_)
      for (const auto& f : m.factors()) out.insert(f.first);
    return out;
  }

  /// Formal partial derivative with respect to one symbol.
  Coefficient derivative(const std::string& name) const {
    Coefficient out;
    for (const auto& [m, c] : terms_) {
      int e = m.exponent(name);
      if (e == 0) continue;
      out.add_term(m.without(name) * Monomial::symbol(name, e - 1), c * e);
    }
    return out;
  }

  /// Substitutes the assigned symbols; unassigned ones stay symbolic.
  Coefficient substitute(const Assignment& values) const {
    Coefficient out;
    for (const auto& [m, c] : terms_) {
      Rational factor = c;
      Monomial rest;
      for (const auto& [name, e] : m.factors()) {
        auto it = values.find(name);
        if (it == values.end()) {
          rest = rest * Monomial::symbol(name, e);
          continue;
        }
        if (it->second == 0 && e < 0) throw Error("division by zero coupling");
        factor *= rational_power(it->second, e);
      }
      out.add_term(rest, factor);
    }
    return out;
  }

  /// Exact value; every symbol must be assigned.
  Rational evaluate(const Assignment& values) const {
    Rational total = 0;
    for (const auto& [m, c] : terms_) {
      Rational factor = c;
      for (const auto& [name, e] : m.factors()) {
        auto it = values.find(name);
        if (it == values.end()) throw Error("unassigned symbol: " + name);
        if (it->second == 0 && e < 0) throw Error("division by zero coupling");
        factor *= rational_power(it->second, e);
      }
      total += factor;
    }
    total.canonicalize();
    return total;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (const auto& [m, c] : terms_) {
      if (!s.empty()) s += (c < 0) ? " - " : " + ";
      else if (c < 0) s += "-";
      Rational mag = abs(c);
      if (m.is_one()) {
        s += lds::to_string(mag);
      } else {
        if (mag != 1) s += lds::to_string(mag) + "*";
        s += m.to_string();
      }
    }
    return s;
  }

  static Rational rational_power(const Rational& base, int e) {
    Rational out = 1;
    Rational b = e >= 0 ? base : Rational(1) / base;
    for (int i = 0; i < std::abs(e); ++i) out *= b;
    return out;
  }

 private:
  std::map<Monomial, Rational> terms_;
};

inline Coefficient coeff_add(const Coefficient& a, const Coefficient& b) { return a + b; }
inline Coefficient coeff_mul(const Coefficient& a, const Coefficient& b) { return a * b; }
inline Rational coeff_eval(const Coefficient& a, const Assignment& values) { return a.evaluate(values); }

}  // namespace lds
