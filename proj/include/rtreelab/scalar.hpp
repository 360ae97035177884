#pragma once

#include <cstdlib>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace rtreelab {

// A Scalar is an exact element of a finite-dimensional Q-vector space of real
// numbers, spanned by a declared basis of generators.  Generator tags:
//   "1"     : the rational unit (must be generator 0 of every basis)
//   "sqrtN" : the positive square root of the nonnegative integer N
// Independence of the generators over Q is a declared assumption; arithmetic
// is exact on coefficient vectors and sign questions are settled by interval
// refinement, which terminates whenever the represented real is nonzero.

class ScalarBasis {
 public:
  static std::shared_ptr<const ScalarBasis> from_tags(std::vector<std::string> tags) {
    if (tags.empty() || tags[0] != "1")
      throw InputError("scalar basis must start with generator \"1\"");
    for (size_t i = 1; i < tags.size(); ++i) {
      const std::string& t = tags[i];
      if (t.rfind("sqrt", 0) != 0 || t.size() == 4)
        throw InputError("unknown basis generator tag: '" + t + "'");
      for (size_t j = 4; j < t.size(); ++j)
        if (!std::isdigit(static_cast<unsigned char>(t[j])))
          throw InputError("unknown basis generator tag: '" + t + "'");
      for (size_t j = 0; j < i; ++j)
        if (tags[j] == t) throw InputError("duplicate basis generator tag: '" + t + "'");
    }
    return std::shared_ptr<const ScalarBasis>(new ScalarBasis(std::move(tags)));
  }

  static const std::shared_ptr<const ScalarBasis>& rationals() {
    static std::shared_ptr<const ScalarBasis> b = from_tags({"1"});
    return b;
  }

  static std::shared_ptr<const ScalarBasis> with_sqrt(unsigned long n) {
    return from_tags({"1", "sqrt" + std::to_string(n)});
  }

  size_t rank() const { return tags_.size(); }
  const std::vector<std::string>& tags() const { return tags_; }
  bool same(const ScalarBasis& o) const { return tags_ == o.tags_; }

  // Enclosure [lo, hi] of generator i with hi - lo <= 2^-bits.
  std::pair<Rational, Rational> enclosure(size_t i, unsigned bits) const {
    if (i == 0) return {Rational(1), Rational(1)};
    Int n(tags_[i].substr(4));
    Int scale = Int(1) << bits;
    Int f = isqrt(n * scale * scale);
    Rational lo(f, scale);
    if (f * f == n * scale * scale) return {lo, lo};
    return {lo, Rational(f + 1, scale)};
  }

 private:
  explicit ScalarBasis(std::vector<std::string> tags) : tags_(std::move(tags)) {}
  std::vector<std::string> tags_;
};

using BasisPtr = std::shared_ptr<const ScalarBasis>;

inline unsigned& default_precision_bits() {
  static unsigned bits = [] {
    if (const char* env = std::getenv("RTREELAB_PRECISION_BITS")) {
      long v = std::atol(env);
      if (v >= 8) return static_cast<unsigned>(v);
    }
    return 256u;
  }();
  return bits;
}

class Scalar {
 public:
  Scalar() : basis_(ScalarBasis::rationals()), c_(1, Rational(0)) {}

  Scalar(const Rational& q)  // implicit: rationals embed
      : basis_(ScalarBasis::rationals()), c_(1, q) {}
  Scalar(long n) : Scalar(Rational(n)) {}

  static Scalar from_coeffs(std::vector<Rational> coeffs, BasisPtr basis) {
    if (coeffs.size() != basis->rank())
      throw InputError("coefficient count does not match basis rank");
    Scalar s;
    s.basis_ = std::move(basis);
    s.c_ = std::move(coeffs);
    return s;
  }

  static Scalar generator(size_t i, BasisPtr basis) {
    std::vector<Rational> c(basis->rank(), Rational(0));
    c.at(i) = 1;
    return from_coeffs(std::move(c), std::move(basis));
  }

  const BasisPtr& basis() const { return basis_; }
  const std::vector<Rational>& coeffs() const { return c_; }

  bool is_zero() const {
    for (const auto& q : c_)
      if (q != 0) return false;
    return true;
  }
  bool is_rational() const {
    for (size_t i = 1; i < c_.size(); ++i)
      if (c_[i] != 0) return false;
    return true;
  }
  Rational as_rational() const {
    if (!is_rational()) throw InputError("scalar is not rational: " + str());
    return c_[0];
  }

  friend Scalar operator+(const Scalar& a, const Scalar& b) {
    auto [x, y] = unify(a, b);
    for (size_t i = 0; i < x.c_.size(); ++i) x.c_[i] += y.c_[i];
    return x;
  }
  friend Scalar operator-(const Scalar& a, const Scalar& b) {
    auto [x, y] = unify(a, b);
    for (size_t i = 0; i < x.c_.size(); ++i) x.c_[i] -= y.c_[i];
    return x;
  }
  Scalar operator-() const {
    Scalar s = *this;
    for (auto& q : s.c_) q = -q;
    return s;
  }
  // Products exist only against rationals: Scalars form a Q-vector space.
  friend Scalar operator*(const Rational& q, const Scalar& a) {
    Scalar s = a;
    for (auto& c : s.c_) c *= q;
    return s;
  }
  friend Scalar operator*(const Scalar& a, const Rational& q) { return q * a; }
  friend Scalar operator/(const Scalar& a, const Rational& q) {
    if (q == 0) throw InputError("division by zero");
    return (Rational(1) / q) * a;
  }
  Scalar& operator+=(const Scalar& b) { return *this = *this + b; }
  Scalar& operator-=(const Scalar& b) { return *this = *this - b; }

  // Exact sign by interval refinement; doubles working precision each round
  // up to `cap` bits (default from RTREELAB_PRECISION_BITS or 256).
  int sign(unsigned cap = 0) const {
    if (cap == 0) cap = default_precision_bits();
    if (is_zero()) return 0;
    if (is_rational()) return c_[0] > 0 ? 1 : (c_[0] < 0 ? -1 : 0);
    for (unsigned bits = 16;; bits *= 2) {
      if (bits > cap)
        throw PrecisionBudgetExceeded("sign undecided at " + std::to_string(cap) +
                                      " bits for " + str());
      Rational lo(0), hi(0);
      for (size_t i = 0; i < c_.size(); ++i) {
        if (c_[i] == 0) continue;
        auto [gl, gh] = basis_->enclosure(i, bits);
        if (c_[i] > 0) {
          lo += c_[i] * gl;
          hi += c_[i] * gh;
        } else {
          lo += c_[i] * gh;
          hi += c_[i] * gl;
        }
      }
      if (lo > 0) return 1;
      if (hi < 0) return -1;
    }
  }

  friend int compare(const Scalar& a, const Scalar& b) { return (a - b).sign(); }
  friend bool operator==(const Scalar& a, const Scalar& b) { return compare(a, b) == 0; }
  friend bool operator!=(const Scalar& a, const Scalar& b) { return compare(a, b) != 0; }
  friend bool operator<(const Scalar& a, const Scalar& b) { return compare(a, b) < 0; }
  friend bool operator<=(const Scalar& a, const Scalar& b) { return compare(a, b) <= 0; }
  friend bool operator>(const Scalar& a, const Scalar& b) { return compare(a, b) > 0; }
  friend bool operator>=(const Scalar& a, const Scalar& b) { return compare(a, b) >= 0; }

  std::string str() const {
    if (is_rational()) return rational_str(c_[0]);
    std::string out;
    for (size_t i = 0; i < c_.size(); ++i) {
      if (i) out += ",";
      out += rational_str(c_[i]);
    }
    return out;
  }

  // Parse "p/q" (rational) or a comma-separated coefficient vector over
  // `basis`; the one-component form is accepted for every basis.
  static Scalar parse(const std::string& s, const BasisPtr& basis) {
    std::vector<Rational> coeffs;
    size_t pos = 0;
    while (true) {
      size_t comma = s.find(',', pos);
      coeffs.push_back(parse_rational(
          s.substr(pos, comma == std::string::npos ? comma : comma - pos)));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (coeffs.size() == 1) {
      std::vector<Rational> full(basis->rank(), Rational(0));
      full[0] = coeffs[0];
      return from_coeffs(std::move(full), basis);
    }
    return from_coeffs(std::move(coeffs), basis);
  }

 private:
  static std::pair<Scalar, Scalar> unify(const Scalar& a, const Scalar& b) {
    if (a.basis_->same(*b.basis_)) return {a, b};
    if (a.basis_->rank() == 1 && a.is_rational())
      return {promote(a.c_[0], b.basis_), b};
    if (b.basis_->rank() == 1 && b.is_rational())
      return {a, promote(b.c_[0], a.basis_)};
    throw InputError("scalar basis mismatch");
  }
  static Scalar promote(const Rational& q, const BasisPtr& basis) {
    std::vector<Rational> c(basis->rank(), Rational(0));
    c[0] = q;
    return from_coeffs(std::move(c), basis);
  }

  BasisPtr basis_;
  std::vector<Rational> c_;
};

// Strict weak order for use in ordered containers (exact compare).
struct ScalarLess {
  bool operator()(const Scalar& a, const Scalar& b) const { return compare(a, b) < 0; }
};

}  // namespace rtreelab
