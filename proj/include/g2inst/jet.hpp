#pragma once
// Truncated Laurent series in one variable with double coefficients.  Jets
// are the scalar type used to push formal power-series data through the
// same templated right-hand sides that are evaluated in doubles, so the
// series recursion of the singular initial value engine never needs a
// second transcription of the equations.
//
// A jet stores coefficients c[0..] for the exponents lead, lead+1, ... and
// an absolute truncation order K: coefficients of t^e with e >= K are
// unknown.  Arithmetic propagates the weakest truncation of the operands:
//   add:  K = min(Ka, Kb)
//   mul:  K = min(Ka + lead_b, Kb + lead_a)
//   inv:  K = Ka - 2*lead_a   (after trimming exact leading zeros)
// Division only trims coefficients that are exactly 0.0; structural zeros
// written as literals survive arithmetic exactly, so the trim never eats a
// rounding residue by accident.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace g2inst {

class Jet {
 public:
  Jet() : lead_(0), trunc_(0) {}

  Jet(int lead, int trunc)
      : lead_(lead), trunc_(trunc),
        c_(static_cast<size_t>(std::max(0, trunc - lead)), 0.0) {}

  // The constant v, known up to order trunc.
  static Jet constant(double v, int trunc) {
    Jet j(0, trunc);
    if (trunc > 0) j.c_[0] = v;
    return j;
  }

  // The identity monomial t, known up to order trunc.
  static Jet variable(int trunc) {
    Jet j(1, trunc);
    if (trunc > 1) j.c_[0] = 1.0;
    return j;
  }

  // Power series sum_k coef[k] t^k truncated at order trunc.
  static Jet series(const std::vector<double>& coef, int trunc) {
    Jet j(0, trunc);
    const size_t nc = std::min(coef.size(), j.c_.size());
    std::copy(coef.begin(), coef.begin() + nc, j.c_.begin());
    return j;
  }

  int lead() const { return lead_; }
  int trunc() const { return trunc_; }
  size_t size() const { return c_.size(); }

  // Coefficient of t^e.  Reading at or beyond the truncation order is a
  // logic error: that coefficient was never computed.
  double coeff(int e) const {
    if (e >= trunc_)
      throw std::logic_error("jet: coefficient read beyond truncation order");
    if (e < lead_) return 0.0;
    return c_[static_cast<size_t>(e - lead_)];
  }

  double& at(int e) {
    if (e < lead_ || e >= trunc_)
      throw std::logic_error("jet: coefficient write outside stored range");
    return c_[static_cast<size_t>(e - lead_)];
  }

  // Multiplication by the exact monomial t^k.
  Jet shifted(int k) const {
    Jet r = *this;
    r.lead_ += k;
    r.trunc_ += k;
    return r;
  }

  Jet derivative() const {
    Jet r(lead_ - 1, trunc_ - 1);
    for (size_t i = 0; i < c_.size(); ++i)
      r.c_[i] = static_cast<double>(lead_ + static_cast<int>(i)) * c_[i];
    return r;
  }

  double eval(double t) const {
    double acc = 0.0;
    for (size_t i = c_.size(); i-- > 0;) acc = acc * t + c_[i];
    return acc * std::pow(t, lead_);
  }

  Jet operator-() const {
    Jet r = *this;
    for (double& v : r.c_) v = -v;
    return r;
  }

  friend Jet operator+(const Jet& x, const Jet& y) {
    Jet r(std::min(x.lead_, y.lead_), std::min(x.trunc_, y.trunc_));
    for (int e = r.lead_; e < r.trunc_; ++e)
      r.c_[static_cast<size_t>(e - r.lead_)] = x.stored(e) + y.stored(e);
    return r;
  }

  friend Jet operator-(const Jet& x, const Jet& y) { return x + (-y); }

  friend Jet operator*(const Jet& x, const Jet& y) {
    Jet r(x.lead_ + y.lead_,
          std::min(sat_add(x.trunc_, y.lead_), sat_add(y.trunc_, x.lead_)));
    // straightforward convolution (jets are short)
    for (size_t i = 0; i < x.c_.size(); ++i) {
      if (x.c_[i] == 0.0) continue;
      const int ei = x.lead_ + static_cast<int>(i);
      for (size_t j = 0; j < y.c_.size(); ++j) {
        const int e = ei + y.lead_ + static_cast<int>(j);
        if (e >= r.trunc_) break;
        r.c_[static_cast<size_t>(e - r.lead_)] += x.c_[i] * y.c_[j];
      }
    }
    return r;
  }

  // Reciprocal.  Requires a nonzero leading coefficient after trimming
  // exact zeros; throws std::domain_error otherwise.
  Jet inverse() const {
    int ld = lead_;
    size_t off = 0;
    while (off < c_.size() && c_[off] == 0.0) {
      ++off;
      ++ld;
    }
    if (off == c_.size())
      throw std::domain_error("jet: division by an identically zero jet");
    const int krel = trunc_ - ld;  // relative orders known
    const double c0 = c_[off];
    std::vector<double> u(static_cast<size_t>(krel), 0.0);  // relative series of *this
    for (int k = 0; k < krel; ++k)
      u[static_cast<size_t>(k)] =
          (off + static_cast<size_t>(k) < c_.size()) ? c_[off + static_cast<size_t>(k)] : 0.0;
    std::vector<double> v(static_cast<size_t>(krel), 0.0);
    v[0] = 1.0 / c0;
    for (int k = 1; k < krel; ++k) {
      double s = 0.0;
      for (int j = 1; j <= k; ++j) s += u[static_cast<size_t>(j)] * v[static_cast<size_t>(k - j)];
      v[static_cast<size_t>(k)] = -s / c0;
    }
    Jet r(-ld, trunc_ - 2 * ld);
    for (size_t i = 0; i < r.c_.size() && i < v.size(); ++i) r.c_[i] = v[i];
    return r;
  }

  friend Jet operator/(const Jet& x, const Jet& y) { return x * y.inverse(); }

  // Scalar mixes preserve the jet's truncation.
  friend Jet operator+(const Jet& x, double s) {
    Jet r = x;
    if (r.lead_ > 0) {  // extend storage down to exponent 0
      Jet e(0, r.trunc_);
      for (int k = r.lead_; k < r.trunc_; ++k)
        e.c_[static_cast<size_t>(k)] = r.stored(k);
      r = e;
    }
    if (r.trunc_ > 0 && r.lead_ <= 0) r.at(0) += s;
    return r;
  }
  friend Jet operator+(double s, const Jet& x) { return x + s; }
  friend Jet operator-(const Jet& x, double s) { return x + (-s); }
  friend Jet operator-(double s, const Jet& x) { return (-x) + s; }
  friend Jet operator*(const Jet& x, double s) {
    Jet r = x;
    for (double& v : r.c_) v *= s;
    return r;
  }
  friend Jet operator*(double s, const Jet& x) { return x * s; }
  friend Jet operator/(const Jet& x, double s) { return x * (1.0 / s); }
  friend Jet operator/(double s, const Jet& x) { return x.inverse() * s; }

 private:
  static int sat_add(int k, int d) {
    // truncation orders stay small; plain addition suffices
    return k + d;
  }
  // Stored coefficient of t^e, treating exponents below lead as exact zeros
  // and never reading beyond the truncation order.
  double stored(int e) const {
    if (e < lead_ || e >= trunc_) return 0.0;
    const size_t i = static_cast<size_t>(e - lead_);
    return i < c_.size() ? c_[i] : 0.0;
  }

  int lead_;
  int trunc_;
  std::vector<double> c_;
};

// x * t^k for both scalar families used by the templated right-hand sides.
inline double mul_tpow(double x, double t, int k) { return x * std::pow(t, k); }
inline Jet mul_tpow(const Jet& x, const Jet& /*t*/, int k) { return x.shifted(k); }

}  // namespace g2inst
