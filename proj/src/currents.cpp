#include "solab/currents.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "solab/error.hpp"

namespace solab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double frac(double x) {
  double f = x - std::floor(x);
  return f >= 1.0 ? 0.0 : f;
}

// Base coordinates where the image of a point crosses the partition start,
// so the pushed fiber coordinate is continuous between breaks.
std::vector<double> pushed_breaks(const ImmersedSolenoid& s) {
  const double c1 = s.partition().base_bounds.front();
  if (const DenjoyMap* d = s.base().denjoy()) return {frac(c1 - d->alpha())};
  if (const auto* r = std::get_if<RigidRotation>(&s.base().variant())) return {frac(c1 - r->alpha())};
  return {};
}

double cutoff_endpoint_integral(const ImmersedSolenoid& s, const TestForm& only_cutoff, const Vec& p, std::size_t i,
                                bool pushed, const std::vector<double>& breaks) {
  const auto& part = s.partition();
  return s.measure().integrate(
      [&](const CirclePoint& x) {
        double v = s.fiber(pushed ? s.base().step(x) : x);
        return only_cutoff.potential(p + s.offset(v));
      },
      part.base_bounds[i], part.base_bounds[i + 1], breaks);
}

// Per-branch transversal data of the flow-box cover.
struct BranchMoments {
  double mass = 0.0;
  double fiber = 0.0;         // integral of v over K_i
  double pushed_fiber = 0.0;  // integral of v(f x) over K_i
};

BranchMoments branch_moments(const ImmersedSolenoid& s, std::size_t i) {
  const auto& part = s.partition();
  const double origin = part.start_position();
  const double y0 = part.base_bounds[i], y1 = part.base_bounds[i + 1];
  return {s.branch_measure(i), s.measure().integrate_fiber(origin, y0, y1, false),
          s.measure().integrate_fiber(origin, y0, y1, true)};
}

}  // namespace

double pair_current_form(const ImmersedSolenoid& s, const TestForm& form) {
  const int n = s.dim();
  if (form.dim() != n) throw ValidationError("form dimension differs from the torus", "form");
  const auto& lay = s.layout();
  const auto& part = s.partition();
  const Vec& p0 = lay.base_point;
  const Vec be1 = Vec::unit(n, 0) * lay.box_length;
  const Vec& a = form.constant;
  const double delta = lay.ribbon_width;
  const std::vector<double> breaks = pushed_breaks(s);
  TestForm only_cutoff = form;
  only_cutoff.exact = TrigPolynomial();

  double total = 0.0;
  for (std::size_t i = 0; i < s.branches().size(); ++i) {
    const Branch& br = s.branches()[i];
    const BranchMoments m = branch_moments(s, i);
    // loop box: A + off(v) -> p0 + C_i + off(v)
    double loop = m.mass * a.dot(br.cls.vec() - be1);
    // window box: p0 + C_i + off(v) -> A + C_i + off(v(f x))
    double window = m.mass * a.dot(be1) + delta * a.dot(s.normal()) * (m.pushed_fiber - m.fiber);

    const Vec loop_start = p0 + be1, loop_end = p0 + br.cls.vec();
    const Vec window_end = p0 + br.cls.vec() + be1;
    const double y0 = part.base_bounds[i], y1 = part.base_bounds[i + 1];
    for (const auto& t : form.exact.terms()) {
      // phi(P + off(v)) = Re(coef e^{i 2 pi m.P} e^{i freq v})
      const std::complex<double> coef(t.cos_coefficient, -t.sin_coefficient);
      const double freq = kTwoPi * delta * t.frequency.dot(s.normal());
      const auto e0 = s.measure().integrate_exp(part.start_position(), 0.0, freq, y0, y1, false);
      const auto e1 = s.measure().integrate_exp(part.start_position(), 0.0, freq, y0, y1, true);
      auto at = [&](const Vec& p) { return std::polar(1.0, kTwoPi * t.frequency.dot(p)); };
      loop += (coef * (at(loop_end) - at(loop_start)) * e0).real();
      window += (coef * (at(window_end) * e1 - at(loop_end) * e0)).real();
    }
    if (form.cutoff) {
      const double g_end = cutoff_endpoint_integral(s, only_cutoff, loop_end, i, false, breaks);
      loop += g_end - cutoff_endpoint_integral(s, only_cutoff, loop_start, i, false, breaks);
      window += cutoff_endpoint_integral(s, only_cutoff, window_end, i, true, breaks) - g_end;
    }
    total += loop + window;
  }
  return total;
}

HomologyVector generalized_current(const ImmersedSolenoid& s) {
  // pair_current_form with dx_j for every j, sharing the transversal moments
  Vec c(s.dim());
  const double delta = s.layout().ribbon_width;
  for (std::size_t i = 0; i < s.branches().size(); ++i) {
    const BranchMoments m = branch_moments(s, i);
    c += s.branches()[i].cls.vec() * m.mass + s.normal() * (delta * (m.pushed_fiber - m.fiber));
  }
  return HomologyVector(c);
}

TestForm cutoff_form(const ImmersedSolenoid& s, const Vec& a, TrigPolynomial phi) {
  const auto& lay = s.layout();
  TestForm f = TestForm::constant_form(a);
  f.exact = std::move(phi);
  BoxCutoff chi;
  chi.center = lay.base_point + Vec::unit(s.dim(), 0) * (lay.box_length / 2.0);
  chi.inner = lay.box_length / 2.0 + 2.0 * lay.ribbon_width + 0.01;
  chi.outer = chi.inner + 0.1;
  f.cutoff = chi;
  f.anchor = lay.base_point;
  return f;
}

namespace {

double fundamental_impl(const ImmersedSolenoid& s, const TestForm& form, bool parallel) {
  if (form.dim() != s.dim()) throw ValidationError("form dimension differs from the torus", "form");
  const std::vector<double> breaks = pushed_breaks(s);
  const auto& part = s.partition();
  const auto line = [&](const CirclePoint& x) { return integrate_along(form, return_path(s, x).vertices); };
  if (s.measure().kind() == TransversalMeasure::Kind::kAtomic)
    return s.measure().integrate(line, part.base_bounds.front(), part.base_bounds.back());

  constexpr int kChunks = 64;
  const std::size_t r = part.size();
  std::vector<double> partial(r * kChunks, 0.0);
  const long total = static_cast<long>(r * kChunks);
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
  for (long t = 0; t < total; ++t) {
    const std::size_t i = static_cast<std::size_t>(t) / kChunks;
    const int c = static_cast<int>(t % kChunks);
    const double y0 = part.base_bounds[i], y1 = part.base_bounds[i + 1];
    const double a = y0 + (y1 - y0) * c / kChunks;
    const double b = c + 1 == kChunks ? y1 : y0 + (y1 - y0) * (c + 1) / kChunks;
    partial[static_cast<std::size_t>(t)] = s.measure().integrate(line, a, b, breaks);
  }
  double acc = 0.0;
  for (double p : partial) acc += p;
  return acc;
}

}  // namespace

double fundamental_class_integral(const ImmersedSolenoid& s, const TestForm& form) {
  return fundamental_impl(s, form, true);
}

double fundamental_class_integral_serial(const ImmersedSolenoid& s, const TestForm& form) {
  return fundamental_impl(s, form, false);
}

HomologyVector ruelle_sullivan_map(const ImmersedSolenoid& s, const std::vector<WeightedMeasure>& combination) {
  if (combination.empty()) throw ValidationError("empty measure combination", "measures");
  Vec acc(s.dim());
  for (std::size_t k = 0; k < combination.size(); ++k) {
    const auto& m = combination[k].measure;
    if (std::string(m.base().name()) != s.base().name())
      throw ValidationError("measure is not invariant for this base map", "measures[" + std::to_string(k) + "]");
    acc += generalized_current(s.with_measure(m)).vec() * combination[k].coefficient;
  }
  return HomologyVector(acc);
}

// ---------------------------------------------------------------- raster

double GridForm::integral1() const {
  double s = 0.0;
  for (double v : eta1) s += v;
  return s * spacing * spacing;
}

double GridForm::integral2() const {
  double s = 0.0;
  for (double v : eta2) s += v;
  return s * spacing * spacing;
}

HomologyVector GridForm::dual_components() const { return HomologyVector{integral2(), -integral1()}; }

double GridForm::wedge_with(int j) const { return -dual_components()[j]; }

double biweight(double t, double eps) {
  double u = t / eps;
  if (u <= -1.0 || u >= 1.0) return 0.0;
  double w = 1.0 - u * u;
  return 15.0 / (16.0 * eps) * w * w;
}

double biweight_cdf(double t, double eps) {
  double u = t / eps;
  if (u <= -1.0) return 0.0;
  if (u >= 1.0) return 1.0;
  double u2 = u * u;
  return 15.0 / 16.0 * u * (1.0 - 2.0 * u2 / 3.0 + u2 * u2 / 5.0) + 0.5;
}

namespace {

struct RasterSegment {
  Vec p, d;
  double w;
  int kind;  // 0 horizontal, 1 vertical, 2 general
};

struct RowEntry {
  std::uint32_t segment;
  std::int64_t lifted_row;
};

std::int64_t wrap_index(std::int64_t k, std::int64_t n) {
  std::int64_t r = k % n;
  return r < 0 ? r + n : r;
}

std::vector<RasterSegment> raster_segments(const ImmersedSolenoid& s, const RasterOptions& opt) {
  std::vector<RasterSegment> segs;
  const auto& part = s.partition();
  const auto& mu = s.measure();
  auto add_leaf = [&](const CirclePoint& x, double w) {
    ReturnPath rp = return_path(s, x);
    for (std::size_t k = 0; k + 1 < rp.vertices.size(); ++k) {
      Vec d = rp.vertices[k + 1] - rp.vertices[k];
      double scale = d.max_abs();
      int kind = std::abs(d[1]) <= 1e-14 * scale ? 0 : std::abs(d[0]) <= 1e-14 * scale ? 1 : 2;
      segs.push_back({rp.vertices[k], d, w, kind});
    }
  };
  for (std::size_t i = 0; i < part.size(); ++i) {
    const double y0 = part.base_bounds[i], y1 = part.base_bounds[i + 1];
    if (mu.kind() == TransversalMeasure::Kind::kAtomic) {
      for (std::size_t a = 0; a < mu.atom_points().size(); ++a) {
        double pt = mu.atom_points()[a];
        if (frac(pt - y0) < y1 - y0) add_leaf(s.base().locate(pt), mu.total() * mu.atom_weights()[a]);
      }
    } else {
      const double w = s.branch_measure(i) / opt.leaf_samples;
      for (int k = 0; k < opt.leaf_samples; ++k) {
        double y = y0 + (y1 - y0) * (k + 0.5) / opt.leaf_samples;
        add_leaf(CirclePoint{frac(y), std::nullopt, 0.0}, w);
      }
    }
  }
  return segs;
}

GridForm raster_impl(const ImmersedSolenoid& s, const RasterOptions& opt, bool parallel) {
  if (s.dim() != 2) throw ValidationError("dual raster needs the 2-torus");
  if (opt.n < 16) throw ValidationError("grid size must be >= 16", "raster.n");
  if (!(opt.epsilon > 0.0)) throw ValidationError("tube radius must be positive", "raster.epsilon");
  if (opt.n * opt.epsilon < 8.0) throw ValidationError("need N * eps >= 8 to resolve the tube", "raster.epsilon");
  if (opt.epsilon > s.layout().lane_spacing / 2.0)
    throw ValidationError("tube radius exceeds half the lane spacing (tubes of distinct ribbons overlap)",
                          "raster.epsilon");
  if (opt.leaf_samples < 1) throw ValidationError("leaf_samples must be >= 1", "raster.leaf_samples");

  const std::int64_t n = opt.n;
  const double h = 1.0 / static_cast<double>(n);
  const double eps = opt.epsilon;
  const std::vector<RasterSegment> segs = raster_segments(s, opt);

  std::vector<std::vector<RowEntry>> rows(static_cast<std::size_t>(n));
  for (std::uint32_t k = 0; k < segs.size(); ++k) {
    const auto& sg = segs[k];
    double lo = std::min(sg.p[1], sg.p[1] + sg.d[1]) - eps, hi = std::max(sg.p[1], sg.p[1] + sg.d[1]) + eps;
    for (auto r = static_cast<std::int64_t>(std::ceil(lo / h)); static_cast<double>(r) * h <= hi; ++r)
      rows[static_cast<std::size_t>(wrap_index(r, n))].push_back({k, r});
  }

  GridForm g;
  g.n = opt.n;
  g.spacing = h;
  g.eta1.assign(static_cast<std::size_t>(n * n), 0.0);
  g.eta2.assign(static_cast<std::size_t>(n * n), 0.0);

  static const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

#pragma omp parallel for schedule(dynamic, 4) if (parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    double* e1 = g.eta1.data() + i * n;
    double* e2 = g.eta2.data() + i * n;
    for (const RowEntry& re : rows[static_cast<std::size_t>(i)]) {
      const auto& sg = segs[re.segment];
      const double y = static_cast<double>(re.lifted_row) * h;
      double lo = std::min(sg.p[0], sg.p[0] + sg.d[0]) - eps, hi = std::max(sg.p[0], sg.p[0] + sg.d[0]) + eps;
      const auto c0 = static_cast<std::int64_t>(std::ceil(lo / h));
      if (sg.kind == 0) {
        const double by = sg.w * sg.d[0] / std::abs(sg.d[0]) * biweight(y - sg.p[1], eps);
        if (by == 0.0) continue;
        for (std::int64_t c = c0; static_cast<double>(c) * h <= hi; ++c) {
          const double x = static_cast<double>(c) * h;
          double lo_x = std::min(sg.p[0], sg.p[0] + sg.d[0]), hi_x = std::max(sg.p[0], sg.p[0] + sg.d[0]);
          double mass = biweight_cdf(x - lo_x, eps) - biweight_cdf(x - hi_x, eps);
          e2[wrap_index(c, n)] += by * mass;
        }
      } else if (sg.kind == 1) {
        double lo_y = std::min(sg.p[1], sg.p[1] + sg.d[1]), hi_y = std::max(sg.p[1], sg.p[1] + sg.d[1]);
        const double mass = sg.w * sg.d[1] / std::abs(sg.d[1]) * (biweight_cdf(y - lo_y, eps) - biweight_cdf(y - hi_y, eps));
        if (mass == 0.0) continue;
        for (std::int64_t c = c0; static_cast<double>(c) * h <= hi; ++c) {
          const double x = static_cast<double>(c) * h;
          e1[wrap_index(c, n)] -= mass * biweight(x - sg.p[0], eps);
        }
      } else {
        const double len = sg.d.norm();
        const int pieces = std::max(1, static_cast<int>(std::ceil(len / (eps / 8.0))));
        const double du = 1.0 / pieces;
        for (std::int64_t c = c0; static_cast<double>(c) * h <= hi; ++c) {
          const double x = static_cast<double>(c) * h;
          double acc = 0.0;
          for (int q = 0; q < pieces; ++q) {
            const double mid = (q + 0.5) * du;
            for (int k = 0; k < 3; ++k) {
              double u = mid + 0.5 * du * gx[k];
              acc += gw[k] * biweight(x - sg.p[0] - u * sg.d[0], eps) * biweight(y - sg.p[1] - u * sg.d[1], eps);
            }
          }
          acc *= 0.5 * du * sg.w;
          e1[wrap_index(c, n)] -= acc * sg.d[1];
          e2[wrap_index(c, n)] += acc * sg.d[0];
        }
      }
    }
  }
  return g;
}

}  // namespace

GridForm dual_form_raster(const ImmersedSolenoid& s, const RasterOptions& opt) { return raster_impl(s, opt, true); }

GridForm dual_form_raster_serial(const ImmersedSolenoid& s, const RasterOptions& opt) {
  return raster_impl(s, opt, false);
}

void write_grid_file(const std::string& path, const GridForm& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open grid file for writing: " + path, "out");
  std::ostringstream hdr;
  hdr.precision(17);
  hdr << "GRIDFORM v1\n"
      << "n " << g.n << "\n"
      << "spacing " << g.spacing << "\n"
      << "components eta1 eta2\n"
      << "order row-major y x\n"
      << "encoding float64 little-endian\n"
      << "end\n";
  out << hdr.str();
  auto put = [&](const std::vector<double>& v) {
    for (double d : v) {
      auto bits = std::bit_cast<std::uint64_t>(d);
      unsigned char b[8];
      for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(bits >> (8 * k));
      out.write(reinterpret_cast<const char*>(b), 8);
    }
  };
  put(g.eta1);
  put(g.eta2);
}

GridForm read_grid_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open grid file: " + path);
  std::string line;
  GridForm g;
  std::getline(in, line);
  if (line != "GRIDFORM v1") throw ValidationError("not a GRIDFORM v1 file: " + path);
  while (std::getline(in, line) && line != "end") {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "n") ls >> g.n;
    if (key == "spacing") ls >> g.spacing;
  }
  if (g.n <= 0) throw ValidationError("grid file header lacks n");
  auto get = [&](std::vector<double>& v) {
    v.resize(static_cast<std::size_t>(g.n) * static_cast<std::size_t>(g.n));
    for (double& d : v) {
      unsigned char b[8];
      in.read(reinterpret_cast<char*>(b), 8);
      std::uint64_t bits = 0;
      for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
      d = std::bit_cast<double>(bits);
    }
  };
  get(g.eta1);
  get(g.eta2);
  if (!in) throw ValidationError("grid file truncated: " + path);
  return g;
}

}  // namespace solab
