#pragma once

#include <lds/coefficient.hpp>

#include <map>
#include <string>

namespace lds {

/// Finite formal sum  sum_key c_key * [key]  with Coefficient weights.
template <class Key>
class LinearCombination {
 public:
  LinearCombination() = default;
  explicit LinearCombination(const Key& k, Coefficient c = Coefficient(1)) { add_term(k, std::move(c)); }

  const std::map<Key, Coefficient>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  Coefficient coefficient(const Key& k) const {
    auto it = terms_.find(k);
    return it == terms_.end() ? Coefficient() : it->second;
  }

  void add_term(const Key& k, const Coefficient& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(k, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  /// this += factor * other
  void add_scaled(const LinearCombination& other, const Coefficient& factor) {
    if (factor.is_zero()) return;
    for (const auto& [k, c] : other.terms_) add_term(k, c * factor);
  }

  LinearCombination& operator+=(const LinearCombination& o) {
    for (const auto& [k, c] : o.terms_) add_term(k, c);
    return *this;
  }
  LinearCombination& operator-=(const LinearCombination& o) {
    for (const auto& [k, c] : o.terms_) add_term(k, -c);
    return *this;
  }
  friend LinearCombination operator+(LinearCombination a, const LinearCombination& b) { return a += b; }
  friend LinearCombination operator-(LinearCombination a, const LinearCombination& b) { return a -= b; }

  LinearCombination scaled(const Coefficient& factor) const {
    LinearCombination out;
    out.add_scaled(*this, factor);
    return out;
  }

  /// Applies a key-to-key map, merging coefficients of coinciding images.
  template <class F>
  LinearCombination mapped(F&& f) const {
    LinearCombination out;
    for (const auto& [k, c] : terms_) out.add_term(f(k), c);
    return out;
  }

  friend bool operator==(const LinearCombination&, const LinearCombination&) = default;

 private:
  std::map<Key, Coefficient> terms_;
};

}  // namespace lds
