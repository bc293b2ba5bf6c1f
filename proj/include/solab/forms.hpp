#pragma once

// Closed 1-forms on T^n of the shape a.dx + d(phi), phi a real
// trigonometric polynomial, with an optional cutoff term that makes the form
// vanish near the base box of an immersed solenoid.

#include <cstdint>
#include <optional>
#include <vector>

#include "solab/vec.hpp"

namespace solab {

/// phi(x) = sum_k (c_k cos(2 pi m_k.x) + s_k sin(2 pi m_k.x)).
struct TrigTerm {
  Vec frequency;  // integer entries
  double cos_coefficient = 0.0;
  double sin_coefficient = 0.0;
};

class TrigPolynomial {
 public:
  TrigPolynomial() = default;
  explicit TrigPolynomial(std::vector<TrigTerm> terms);

  /// `terms` random terms with frequencies in [-max_frequency, max_frequency]^n
  /// (never all zero) and coefficients in [-1, 1].
  static TrigPolynomial random(int n, int terms, int max_frequency, std::uint64_t seed);

  const std::vector<TrigTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  double operator()(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  /// sum of |c_k| + |s_k|, a bound for sup |phi|.
  double sup_bound() const;

 private:
  std::vector<TrigTerm> terms_;
};

/// Smooth cutoff chi equal to 1 on the cube of half-width `inner` around
/// `center` and 0 outside half-width `outer` (product of C^1 ramps).
struct BoxCutoff {
  Vec center;
  double inner = 0.0;
  double outer = 0.0;

  double operator()(const Vec& x) const;
  Vec gradient(const Vec& x) const;
};

/// omega = a.dx + d(phi) - d(chi * a.(x - anchor)) when a cutoff is present.
/// The last term vanishes outside the cutoff support and turns omega into
/// d(phi) where chi = 1.
struct TestForm {
  Vec constant;
  TrigPolynomial exact;
  std::optional<BoxCutoff> cutoff;
  Vec anchor;  // lift point the cutoff potential is measured from

  static TestForm basis(int n, int j);
  static TestForm constant_form(const Vec& a);
  static TestForm exact_form(int n, TrigPolynomial phi);

  int dim() const { return constant.dim(); }
  /// omega at x as a covector.
  Vec operator()(const Vec& x) const;
  /// Potential of the exact part: phi(x) - chi(x) a.(x - anchor) on the lift
  /// nearest to the anchor.
  double potential(const Vec& x) const;
  /// Cohomology class (the constant part).
  const Vec& cohomology_class() const { return constant; }
};

/// Line integral of omega along the PL lift (composite Gauss-Legendre).
double integrate_along(const TestForm& form, const std::vector<Vec>& vertices);

}  // namespace solab
