#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>

namespace solab {

/// Largest torus dimension the library supports.
inline constexpr int kMaxDim = 4;

/// Fixed-capacity real n-vector (n <= kMaxDim). Used for lift points in R^n
/// and as the storage of HomologyVector. Value type, no heap.
class Vec {
 public:
  Vec() = default;
  explicit Vec(int n) : n_(n) {
    if (n < 1 || n > kMaxDim) throw std::invalid_argument("Vec: dimension out of range");
  }
  Vec(std::initializer_list<double> xs) : Vec(static_cast<int>(xs.size())) {
    int i = 0;
    for (double x : xs) c_[i++] = x;
  }
  static Vec from_span(std::span<const double> xs) {
    Vec v(static_cast<int>(xs.size()));
    for (int i = 0; i < v.n_; ++i) v.c_[i] = xs[i];
    return v;
  }
  static Vec unit(int n, int axis) {
    Vec v(n);
    v[axis] = 1.0;
    return v;
  }

  int dim() const { return n_; }
  double& operator[](int i) { return c_[i]; }
  double operator[](int i) const { return c_[i]; }
  std::span<const double> values() const { return {c_.data(), static_cast<std::size_t>(n_)}; }

  Vec& operator+=(const Vec& o) {
    assert(o.n_ == n_);
    for (int i = 0; i < n_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    assert(o.n_ == n_);
    for (int i = 0; i < n_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < n_; ++i) c_[i] *= s;
    return *this;
  }
  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend Vec operator/(Vec a, double s) { return a *= (1.0 / s); }
  friend Vec operator-(Vec a) { return a *= -1.0; }
  friend bool operator==(const Vec& a, const Vec& b) {
    if (a.n_ != b.n_) return false;
    for (int i = 0; i < a.n_; ++i)
      if (a.c_[i] != b.c_[i]) return false;
    return true;
  }

  double dot(const Vec& o) const {
    double s = 0;
    for (int i = 0; i < n_; ++i) s += c_[i] * o.c_[i];
    return s;
  }
  double norm() const { return std::sqrt(dot(*this)); }
  double max_abs() const {
    double m = 0;
    for (int i = 0; i < n_; ++i) m = std::max(m, std::abs(c_[i]));
    return m;
  }
  bool finite() const {
    for (int i = 0; i < n_; ++i)
      if (!std::isfinite(c_[i])) return false;
    return true;
  }

  std::string str() const;

 private:
  std::array<double, kMaxDim> c_{};
  int n_ = 0;
};

inline double distance(const Vec& a, const Vec& b) { return (a - b).norm(); }

/// Component-wise reduction of a lift point to the fundamental domain [0,1)^n.
inline Vec wrap_unit(Vec p) {
  for (int i = 0; i < p.dim(); ++i) p[i] -= std::floor(p[i]);
  return p;
}

/// Element of H_1(T^n, R) = R^n in the lattice basis e_1..e_n.
class HomologyVector {
 public:
  HomologyVector() = default;
  explicit HomologyVector(int n) : v_(n) {}
  explicit HomologyVector(const Vec& v) : v_(v) {
    if (!v.finite()) throw std::invalid_argument("HomologyVector: non-finite entry");
  }
  HomologyVector(std::initializer_list<double> xs) : HomologyVector(Vec(xs)) {}

  int dim() const { return v_.dim(); }
  double operator[](int i) const { return v_[i]; }
  double& operator[](int i) { return v_[i]; }
  const Vec& vec() const { return v_; }

  /// All entries within tol of integers.
  bool is_integral(double tol = 1e-9) const {
    for (int i = 0; i < dim(); ++i)
      if (std::abs(v_[i] - std::round(v_[i])) > tol) return false;
    return true;
  }
  HomologyVector rounded() const {
    Vec r(dim());
    for (int i = 0; i < dim(); ++i) r[i] = std::round(v_[i]);
    return HomologyVector(r);
  }

  HomologyVector& operator+=(const HomologyVector& o) { v_ += o.v_; return *this; }
  HomologyVector& operator-=(const HomologyVector& o) { v_ -= o.v_; return *this; }
  HomologyVector& operator*=(double s) { v_ *= s; return *this; }
  friend HomologyVector operator+(HomologyVector a, const HomologyVector& b) { return a += b; }
  friend HomologyVector operator-(HomologyVector a, const HomologyVector& b) { return a -= b; }
  friend HomologyVector operator*(HomologyVector a, double s) { return a *= s; }
  friend HomologyVector operator*(double s, HomologyVector a) { return a *= s; }
  friend HomologyVector operator/(HomologyVector a, double s) { return a *= (1.0 / s); }
  friend bool operator==(const HomologyVector& a, const HomologyVector& b) { return a.v_ == b.v_; }

  double norm() const { return v_.norm(); }
  double dist(const HomologyVector& o) const { return (v_ - o.v_).norm(); }
  std::string str() const { return v_.str(); }

 private:
  Vec v_;
};

/// Algebraic intersection number of two classes on T^2 (the cup-product
/// evaluation a_1 b_2 - a_2 b_1).
inline double torus_cup(const HomologyVector& a, const HomologyVector& b) {
  if (a.dim() != 2 || b.dim() != 2) throw std::invalid_argument("torus_cup: needs n = 2");
  return a[0] * b[1] - a[1] * b[0];
}

}  // namespace solab
