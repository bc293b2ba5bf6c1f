#include "solab/forms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "solab/error.hpp"

namespace solab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double centered(double x) { return x - std::round(x); }

// quintic ramp: 1 on [0, inner], 0 beyond outer, C^2
double ramp(double d, double inner, double outer, double* slope) {
  if (d <= inner) {
    *slope = 0.0;
    return 1.0;
  }
  if (d >= outer) {
    *slope = 0.0;
    return 0.0;
  }
  const double w = outer - inner;
  const double t = (d - inner) / w;
  const double s = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
  *slope = -30.0 * t * t * (1.0 - t) * (1.0 - t) / w;
  return 1.0 - s;
}

}  // namespace

TrigPolynomial::TrigPolynomial(std::vector<TrigTerm> terms) : terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    for (int j = 0; j < t.frequency.dim(); ++j)
      if (t.frequency[j] != std::round(t.frequency[j])) throw ValidationError("trig term frequency must be integral");
  }
}

TrigPolynomial TrigPolynomial::random(int n, int terms, int max_frequency, std::uint64_t seed) {
  if (n < 1 || n > kMaxDim || terms < 1 || max_frequency < 1) throw ValidationError("random trig polynomial: bad shape");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> freq(-max_frequency, max_frequency);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::vector<TrigTerm> out;
  while (static_cast<int>(out.size()) < terms) {
    TrigTerm t{Vec(n), coef(rng), coef(rng)};
    for (int j = 0; j < n; ++j) t.frequency[j] = freq(rng);
    if (t.frequency.max_abs() == 0.0) continue;
    out.push_back(t);
  }
  return TrigPolynomial(std::move(out));
}

double TrigPolynomial::operator()(const Vec& x) const {
  double acc = 0.0;
  for (const auto& t : terms_) {
    double th = kTwoPi * t.frequency.dot(x);
    acc += t.cos_coefficient * std::cos(th) + t.sin_coefficient * std::sin(th);
  }
  return acc;
}

Vec TrigPolynomial::gradient(const Vec& x) const {
  Vec g(x.dim());
  for (const auto& t : terms_) {
    double th = kTwoPi * t.frequency.dot(x);
    double d = kTwoPi * (-t.cos_coefficient * std::sin(th) + t.sin_coefficient * std::cos(th));
    g += t.frequency * d;
  }
  return g;
}

double TrigPolynomial::sup_bound() const {
  double s = 0.0;
  for (const auto& t : terms_) s += std::abs(t.cos_coefficient) + std::abs(t.sin_coefficient);
  return s;
}

double BoxCutoff::operator()(const Vec& x) const {
  double v = 1.0, slope;
  for (int j = 0; j < x.dim() && v > 0.0; ++j) v *= ramp(std::abs(centered(x[j] - center[j])), inner, outer, &slope);
  return v;
}

Vec BoxCutoff::gradient(const Vec& x) const {
  const int n = x.dim();
  Vec val(n), der(n);
  for (int j = 0; j < n; ++j) {
    double d = centered(x[j] - center[j]);
    double slope;
    val[j] = ramp(std::abs(d), inner, outer, &slope);
    der[j] = d < 0 ? -slope : slope;
  }
  Vec g(n);
  for (int j = 0; j < n; ++j) {
    double p = der[j];
    for (int k = 0; k < n; ++k)
      if (k != j) p *= val[k];
    g[j] = p;
  }
  return g;
}

TestForm TestForm::basis(int n, int j) { return constant_form(Vec::unit(n, j)); }

TestForm TestForm::constant_form(const Vec& a) {
  TestForm f;
  f.constant = a;
  f.anchor = Vec(a.dim());
  return f;
}

TestForm TestForm::exact_form(int n, TrigPolynomial phi) {
  TestForm f = constant_form(Vec(n));
  f.exact = std::move(phi);
  return f;
}

namespace {

// x - anchor on the lift nearest to the cutoff center
Vec cutoff_relative(const TestForm& f, const Vec& x) {
  Vec r(x.dim());
  for (int j = 0; j < x.dim(); ++j) r[j] = centered(x[j] - f.cutoff->center[j]) + f.cutoff->center[j] - f.anchor[j];
  return r;
}

}  // namespace

Vec TestForm::operator()(const Vec& x) const {
  Vec w = constant;
  if (!exact.empty()) w += exact.gradient(x);
  if (cutoff) {
    double chi = (*cutoff)(x);
    Vec g = cutoff->gradient(x);
    if (chi != 0.0 || g.max_abs() != 0.0) w -= g * constant.dot(cutoff_relative(*this, x)) + constant * chi;
  }
  return w;
}

double TestForm::potential(const Vec& x) const {
  double p = exact.empty() ? 0.0 : exact(x);
  if (cutoff) {
    double chi = (*cutoff)(x);
    if (chi != 0.0) p -= chi * constant.dot(cutoff_relative(*this, x));
  }
  return p;
}

double integrate_along(const TestForm& form, const std::vector<Vec>& vertices) {
  static const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
  static const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
  static const double wa = (18.0 + std::sqrt(30.0)) / 36.0, wb = (18.0 - std::sqrt(30.0)) / 36.0;
  static const double xs[4] = {-b, -a, a, b};
  static const double ws[4] = {wb, wa, wa, wb};
  double max_freq = 0.0;
  for (const auto& t : form.exact.terms()) max_freq = std::max(max_freq, t.frequency.norm());
  const double h = max_freq > 0.0 ? std::min(0.05, 0.05 / max_freq) : 0.05;
  double acc = 0.0;
  std::vector<double> cuts;
  for (std::size_t k = 0; k + 1 < vertices.size(); ++k) {
    const Vec& p = vertices[k];
    const Vec d = vertices[k + 1] - p;
    cuts.assign({0.0, 1.0});
    if (form.cutoff) {
      // split where a coordinate crosses a ramp break
      for (int j = 0; j < d.dim(); ++j) {
        if (d[j] == 0.0) continue;
        for (double edge : {-form.cutoff->outer, -form.cutoff->inner, form.cutoff->inner, form.cutoff->outer}) {
          double lo = std::min(p[j], p[j] + d[j]), hi = std::max(p[j], p[j] + d[j]);
          double target = form.cutoff->center[j] + edge;
          for (double m = std::ceil(lo - target); target + m <= hi; m += 1.0) {
            double u = (target + m - p[j]) / d[j];
            if (u > 0.0 && u < 1.0) cuts.push_back(u);
          }
        }
      }
      std::sort(cuts.begin(), cuts.end());
    }
    const double len = d.norm();
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      double u0 = cuts[c], u1 = cuts[c + 1];
      if (!(u1 > u0)) continue;
      int pieces = std::max(1, static_cast<int>(std::ceil(len * (u1 - u0) / h)));
      double du = (u1 - u0) / pieces;
      for (int q = 0; q < pieces; ++q) {
        double mid = u0 + (q + 0.5) * du;
        double part = 0.0;
        for (int g = 0; g < 4; ++g) part += ws[g] * form(p + d * (mid + 0.5 * du * xs[g])).dot(d);
        acc += part * 0.5 * du;
      }
    }
  }
  return acc;
}

}  // namespace solab
