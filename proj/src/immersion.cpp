#include "solab/immersion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "solab/error.hpp"
#include "solab/segments.hpp"

namespace solab {

namespace {

double frac(double x) {
  double f = x - std::floor(x);
  return f >= 1.0 ? 0.0 : f;
}

double smoothstep(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * (3.0 - 2.0 * s);
}

double sgn(double x) { return x < 0 ? -1.0 : 1.0; }

double lane_fraction(int lane, int lanes, double lo, double width) {
  return lo + width * (static_cast<double>(lane) + 0.5) / static_cast<double>(lanes);
}

}  // namespace

CycleLibrary CycleLibrary::standard(int n) {
  CycleLibrary lib;
  for (int i = 0; i < n; ++i) lib.classes.emplace_back(Vec::unit(n, i));
  return lib;
}

void ImmersionLayout::validate(int branches) const {
  const int n = base_point.dim();
  if (n < 2) throw ValidationError("immersion needs a torus of dimension >= 2", "layout.base_point");
  if (!base_point.finite()) throw ValidationError("base point must be finite", "layout.base_point");
  if (!(box_length > 0.0 && box_length < 0.25)) throw ValidationError("box length must lie in (0, 0.25)", "layout.box_length");
  if (!(window > 0.0 && window < 1.0)) throw ValidationError("window must lie in (0, 1)", "layout.window");
  if (!(lane_spacing > 0.0)) throw ValidationError("lane spacing must be positive", "layout.lane_spacing");
  if (!(ribbon_width > 0.0 && ribbon_width <= lane_spacing / 4.0))
    throw ValidationError("ribbon width must lie in (0, lane_spacing/4]", "layout.ribbon_width");
  if (window_samples < 1) throw ValidationError("window_samples must be >= 1", "layout.window_samples");
  if (branches < 1) throw ValidationError("at least one branch is required");
  if (box_length + 2.0 * lane_spacing * branches + lane_spacing >= 0.9)
    throw ValidationError("lanes do not fit in one period: reduce lane spacing or branch count", "layout.lane_spacing");
}

Decomposition decompose(const HomologyVector& a, const CycleLibrary& library) {
  if (library.classes.empty()) throw ValidationError("empty cycle library", "library");
  const int n = a.dim();
  const std::size_t r = library.classes.size();
  if (a.vec().max_abs() == 0.0) throw ValidationError("cannot realize the zero class", "target");
  for (const auto& c : library.classes) {
    if (c.dim() != n) throw ValidationError("library class dimension differs from target", "library");
    if (!c.is_integral(0.0)) throw ValidationError("library classes must be integral", "library");
  }
  // Normal equations G c = M^T a, solved by Gaussian elimination with pivoting.
  std::vector<std::vector<double>> g(r, std::vector<double>(r + 1, 0.0));
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) g[i][j] = library.classes[i].vec().dot(library.classes[j].vec());
    g[i][r] = library.classes[i].vec().dot(a.vec());
  }
  for (std::size_t col = 0; col < r; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < r; ++i)
      if (std::abs(g[i][col]) > std::abs(g[piv][col])) piv = i;
    if (std::abs(g[piv][col]) < 1e-12) throw ConstructionError("library classes are linearly dependent");
    std::swap(g[col], g[piv]);
    for (std::size_t i = 0; i < r; ++i) {
      if (i == col) continue;
      double f = g[i][col] / g[col][col];
      for (std::size_t j = col; j <= r; ++j) g[i][j] -= f * g[col][j];
    }
  }
  Decomposition d;
  d.coefficients.resize(r);
  for (std::size_t i = 0; i < r; ++i) d.coefficients[i] = g[i][r] / g[i][i];
  Vec residual = a.vec();
  for (std::size_t i = 0; i < r; ++i) residual -= library.classes[i].vec() * d.coefficients[i];
  if (residual.max_abs() > 1e-12 * std::max(1.0, a.vec().max_abs()))
    throw ConstructionError("target class has no positive decomposition over the library");

  double total = 0.0;
  for (double c : d.coefficients) total += std::abs(c);
  for (std::size_t i = 0; i < r; ++i) {
    double c = d.coefficients[i];
    if (std::abs(c) <= 1e-15 * total) continue;
    d.weights.push_back(std::abs(c) / total);
    d.branch_library_index.push_back(static_cast<int>(i));
    d.orientation.push_back(c < 0 ? -1 : 1);
  }
  d.scale = total;
  return d;
}

std::vector<Vec> staircase_loop(const HomologyVector& c, int lane, int lanes, const ImmersionLayout& layout) {
  const int n = c.dim();
  const double b = layout.box_length;
  const double exit = layout.lane_spacing * (lane + 1);
  const double entry = layout.lane_spacing * (lane + 1);
  std::vector<Vec> v;
  Vec cur = Vec::unit(n, 0) * b;
  v.push_back(cur);

  bool straight = n == 2 && c[1] == 0.0 && c[0] >= 1.0;
  if (straight) {
    v.push_back(c.vec());
    return v;
  }
  cur[0] = b + exit;
  v.push_back(cur);
  std::vector<double> split(n, 0.0);
  for (int j = n - 1; j >= 1; --j) {
    double f = j == 1 ? lane_fraction(lane, lanes, 0.3, 0.4) : lane_fraction(lane, lanes, 0.25, 0.5);
    double cj = c[j];
    split[j] = cj == 0.0 ? f : sgn(cj) * (std::floor(std::abs(cj) / 2.0) + f);
    cur[j] = split[j];
    v.push_back(cur);
  }
  cur[0] = c[0] - entry;
  v.push_back(cur);
  for (int j = 1; j < n; ++j) {
    cur[j] = c[j];
    v.push_back(cur);
  }
  v.push_back(c.vec());
  return v;
}

std::vector<Branch> build_branches(const std::vector<HomologyVector>& classes, const ImmersionLayout& layout) {
  layout.validate(static_cast<int>(classes.size()));
  std::vector<Branch> out;
  const int lanes = static_cast<int>(classes.size());
  for (int i = 0; i < lanes; ++i) {
    if (classes[i].dim() != layout.base_point.dim()) throw ValidationError("branch class dimension mismatch");
    if (!classes[i].is_integral(0.0)) throw ValidationError("branch classes must be integral");
    Branch br;
    br.cls = classes[i];
    br.library_index = i;
    br.core = staircase_loop(classes[i], i, lanes, layout);
    for (std::size_t k = 0; k + 1 < br.core.size(); ++k) br.core_length += distance(br.core[k], br.core[k + 1]);
    out.push_back(std::move(br));
  }
  return out;
}

ImmersedSolenoid::ImmersedSolenoid(BaseMap base, TransversalMeasure measure, CantorPartition partition,
                                   std::vector<Branch> branches, ImmersionLayout layout)
    : base_(base), suspension_(base), measure_(std::move(measure)), partition_(std::move(partition)),
      branches_(std::move(branches)), layout_(std::move(layout)) {
  layout_.validate(static_cast<int>(branches_.size()));
  if (partition_.size() != branches_.size()) throw ValidationError("partition and branch counts differ");
  const int n = dim();
  for (const auto& br : branches_)
    if (br.cls.dim() != n) throw ValidationError("branch class dimension mismatch");
  const double r2 = 1.0 / std::numbers::sqrt2;
  nu_ = Vec(n);
  mu_ = Vec(n);
  if (n == 2) {
    nu_[0] = r2, nu_[1] = r2;
  } else {
    nu_[1] = r2, nu_[2] = r2;
    mu_[1] = r2, mu_[2] = -r2;
  }
  if (embedded() && branches_.size() > 1) {
    double sep = branch_separation();
    if (sep < 3.0 * layout_.ribbon_width) {
      std::ostringstream os;
      os << "embed mode: branch separation " << sep << " below 3 * ribbon width";
      throw ConstructionError(os.str());
    }
  }
}

ImmersedSolenoid ImmersedSolenoid::with_measure(TransversalMeasure mu) const {
  if (std::string(mu.base().name()) != base_.name()) throw ValidationError("measure belongs to another base map");
  ImmersedSolenoid s = *this;
  s.measure_ = std::move(mu);
  return s;
}

ImmersedSolenoid ImmersedSolenoid::translated(const Vec& v) const {
  ImmersedSolenoid s = *this;
  s.layout_.base_point += v;
  return s;
}

std::size_t ImmersedSolenoid::branch_of(const CirclePoint& x) const { return partition_.branch_of_base(x.base); }

double ImmersedSolenoid::fiber(const CirclePoint& x) const { return partition_.fiber_coordinate(base_.position(x)); }

Vec ImmersedSolenoid::offset(double v) const { return nu_ * (layout_.ribbon_width * v); }

double ImmersedSolenoid::branch_measure(std::size_t i) const { return measure_.arc(partition_.branch_arc(i)).value; }

Vec ImmersedSolenoid::loop_start() const { return layout_.base_point + Vec::unit(dim(), 0) * layout_.box_length; }

Vec ImmersedSolenoid::window_point(double tau, double v_from, double v_to) const {
  const double c = layout_.window;
  const double rho = 1.0 - smoothstep(tau / c);
  const double v = v_from * rho + v_to * (1.0 - rho);
  Vec p = Vec::unit(dim(), 0) * (layout_.box_length * tau / c) + offset(v);
  if (embedded()) p += mu_ * (layout_.ribbon_width * v_from * std::sin(std::numbers::pi * tau / c));
  return p;
}

HomologyVector ImmersedSolenoid::predicted_current() const {
  Vec acc(dim());
  for (std::size_t i = 0; i < branches_.size(); ++i) acc += branches_[i].cls.vec() * branch_measure(i);
  return HomologyVector(acc);
}

bool ImmersedSolenoid::in_trapping_box(const Vec& rel) const {
  const double half = layout_.lane_spacing / 2.0;
  const double reach = layout_.lane_spacing * static_cast<double>(branches_.size());
  double x = frac(rel[0] + 0.5) - 0.5;
  if (x < -reach - half || x > layout_.box_length + reach + half) return false;
  for (int j = 1; j < dim(); ++j)
    if (std::abs(frac(rel[j] + 0.5) - 0.5) > half) return false;
  return true;
}

double ImmersedSolenoid::branch_separation() const {
  const double h = 0.005;
  std::vector<std::vector<Vec>> samples(branches_.size());
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    const auto& core = branches_[i].core;
    for (std::size_t k = 0; k + 1 < core.size(); ++k) {
      int steps = std::max(1, static_cast<int>(std::ceil(distance(core[k], core[k + 1]) / h)));
      for (int s = 0; s <= steps; ++s) {
        Vec p = core[k] + (core[k + 1] - core[k]) * (static_cast<double>(s) / steps);
        if (!in_trapping_box(p)) samples[i].push_back(wrap_unit(p));
      }
    }
  }
  double best = 1e300;
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i + 1; j < samples.size(); ++j)
      for (const auto& p : samples[i])
        for (const auto& q : samples[j]) {
          Vec d = p - q;
          for (int k = 0; k < d.dim(); ++k) d[k] -= std::round(d[k]);
          best = std::min(best, d.norm());
        }
  return best;
}

ImmersedSolenoid realize(const HomologyVector& a, const CycleLibrary& library, const DenjoyRef& map,
                         const ImmersionLayout& layout) {
  if (!map) throw ValidationError("realize: missing Denjoy map");
  if (a.dim() != layout.base_point.dim()) throw ValidationError("target dimension differs from layout", "target");
  Decomposition d = decompose(a, library);
  std::vector<HomologyVector> classes;
  for (std::size_t i = 0; i < d.weights.size(); ++i)
    classes.emplace_back(library.classes[static_cast<std::size_t>(d.branch_library_index[i])].vec() * d.orientation[i]);
  auto branches = build_branches(classes, layout);
  for (std::size_t i = 0; i < branches.size(); ++i) {
    branches[i].library_index = d.branch_library_index[i];
    branches[i].orientation = d.orientation[i];
  }
  CantorPartition part = partition_by_weights(*map, d.weights);
  BaseMap base(map);
  TransversalMeasure mu = TransversalMeasure::canonical(base).scaled(d.scale);
  ImmersedSolenoid s(base, mu, std::move(part), std::move(branches), layout);
  s.set_decomposition(std::move(d));
  return s;
}

CantorPartition partition_at(const TransversalMeasure& mu, std::vector<double> bounds) {
  if (mu.base().denjoy()) throw ValidationError("partition_at: use partition_by_weights for Denjoy bases");
  if (bounds.empty()) throw ValidationError("partition_at: no boundaries");
  for (std::size_t i = 1; i < bounds.size(); ++i)
    if (!(bounds[i] > bounds[i - 1])) throw ValidationError("partition_at: boundaries must increase");
  if (bounds.back() - bounds.front() >= 1.0) throw ValidationError("partition_at: boundaries span a full turn");
  CantorPartition p;
  bounds.push_back(bounds.front() + 1.0);
  p.base_bounds = bounds;
  p.position_bounds = bounds;
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i)
    p.weights.push_back(mu.arc({frac(bounds[i]), bounds[i + 1] - bounds[i]}).value);
  return p;
}

ReturnPath return_path(const ImmersedSolenoid& s, const CirclePoint& x) {
  const auto& lay = s.layout();
  ReturnPath r;
  r.branch = s.branch_of(x);
  r.fiber = s.fiber(x);
  r.next_fiber = s.fiber(s.base().step(x));
  const Branch& br = s.branches()[r.branch];
  const Vec off = s.offset(r.fiber);
  const double c = lay.window;
  double run = 0.0;
  for (std::size_t j = 0; j + 1 < br.core.size(); ++j) {
    if (j > 0) run += distance(br.core[j - 1], br.core[j]);
    r.vertices.push_back(lay.base_point + br.core[j] + off);
    r.times.push_back((1.0 - c) * run / br.core_length);
  }
  const Vec wbase = lay.base_point + br.cls.vec();
  for (int j = 0; j < lay.window_samples; ++j) {
    double tau = c * static_cast<double>(j) / lay.window_samples;
    r.vertices.push_back(wbase + s.window_point(tau, r.fiber, r.next_fiber));
    r.times.push_back(1.0 - c + tau);
  }
  r.vertices.push_back(wbase + s.window_point(c, r.fiber, r.next_fiber));
  r.times.push_back(1.0);
  return r;
}

HomologyVector LeafTrace::increment_sum() const {
  Vec acc(classes.front().dim());
  for (auto b : branch) acc += classes[b].vec();
  return HomologyVector(acc);
}

LeafTrace trace_leaf(const ImmersedSolenoid& s, double x0, std::int64_t k0, std::int64_t k1, Parametrization mode) {
  if (!(k1 > k0)) throw ValidationError("trace_leaf: empty return range");
  const BaseMap& f = s.base();
  CirclePoint p = f.locate(x0);
  if (p.gap) throw ValidationError("trace_leaf: starting point lies in a gap of the Cantor set");

  const int n = s.dim();
  const auto& branches = s.branches();
  const auto& lay = s.layout();
  // move to return k0 and find the lattice shift there, so return 0 starts at shift 0
  Vec shift(n);
  for (std::int64_t k = 0; k > k0; --k) {
    p = f.step_back(p);
    shift -= branches[s.branch_of(p)].cls.vec();
  }
  for (std::int64_t k = 0; k < k0; ++k) {
    shift += branches[s.branch_of(p)].cls.vec();
    p = f.step(p);
  }

  LeafTrace tr;
  tr.first_return = k0;
  for (const auto& br : branches) tr.classes.push_back(br.cls);
  const std::size_t count = static_cast<std::size_t>(k1 - k0);
  tr.branch.reserve(count);
  tr.fiber.reserve(count);
  std::vector<Vec> verts;
  std::vector<double> times;
  verts.reserve(count * (2 * static_cast<std::size_t>(n) + 3 + static_cast<std::size_t>(lay.window_samples)));
  times.reserve(verts.capacity());

  const double c = lay.window;
  const Vec& p0 = lay.base_point;
  CirclePoint cur = p;
  double v_cur = s.fiber(cur);
  for (std::int64_t k = k0; k < k1; ++k) {
    const std::size_t bi = s.branch_of(cur);
    const Branch& br = branches[bi];
    CirclePoint next = f.step(cur);
    const double v_next = s.fiber(next);
    tr.branch.push_back(static_cast<std::uint8_t>(bi));
    tr.fiber.push_back(v_cur);

    const Vec base = p0 + shift;
    const Vec off = s.offset(v_cur);
    const double kt = static_cast<double>(k);
    double run = 0.0;
    for (std::size_t j = 0; j + 1 < br.core.size(); ++j) {
      if (j > 0) run += distance(br.core[j - 1], br.core[j]);
      verts.push_back(base + br.core[j] + off);
      times.push_back(kt + (1.0 - c) * run / br.core_length);
    }
    const Vec wbase = base + br.cls.vec();
    for (int j = 0; j < lay.window_samples; ++j) {
      double tau = c * static_cast<double>(j) / lay.window_samples;
      verts.push_back(wbase + s.window_point(tau, v_cur, v_next));
      times.push_back(kt + 1.0 - c + tau);
    }
    shift += br.cls.vec();
    cur = next;
    v_cur = v_next;
  }
  verts.push_back(p0 + shift + Vec::unit(n, 0) * lay.box_length + s.offset(v_cur));
  times.push_back(static_cast<double>(k1));

  if (mode == Parametrization::kTime) {
    tr.path = PLPath::timed(std::move(verts), std::move(times));
  } else {
    // arc length measured from the start of return 0
    double before = 0.0;
    for (std::size_t j = 0; j + 1 < verts.size() && times[j + 1] <= 0.0; ++j) before += distance(verts[j], verts[j + 1]);
    tr.path = PLPath::arc_length(std::move(verts), -before);
  }
  return tr;
}

int CrossingInventory::signed_total(std::size_t a, std::size_t b) const {
  int t = 0;
  for (const auto& f : families)
    if ((f.branch_a == a && f.branch_b == b) || (f.branch_a == b && f.branch_b == a)) t += f.sign;
  return t;
}

CrossingInventory crossing_inventory(const ImmersedSolenoid& s) {
  CrossingInventory inv;
  if (s.dim() != 2) return inv;
  const auto& part = s.partition();
  const auto& branches = s.branches();
  std::vector<std::vector<Vec>> center(branches.size());
  for (std::size_t i = 0; i < branches.size(); ++i) {
    double v_mid = 0.5 * (part.position_bounds[i] + part.position_bounds[i + 1]) - part.position_bounds.front();
    for (const auto& v : branches[i].core) center[i].push_back(s.layout().base_point + v + s.offset(v_mid));
  }
  std::ostringstream diag;
  for (std::size_t a = 0; a < branches.size(); ++a) {
    for (std::size_t b = a; b < branches.size(); ++b) {
      const auto& ca = center[a];
      const auto& cb = center[b];
      for (std::size_t i = 0; i + 1 < ca.size(); ++i) {
        for (std::size_t j = (a == b ? i + 2 : 0); j + 1 < cb.size(); ++j) {
          CrossingScan scan;
          torus_segment_crossings(ca[i], ca[i + 1], cb[j], cb[j + 1], 1e-6, scan);
          if (scan.parallel_overlap || scan.shallow) {
            inv.transverse = false;
            diag << "branches " << a << "," << b << " segments " << i << "," << j
                 << (scan.parallel_overlap ? " overlap" : " shallow") << "; ";
          }
          for (const auto& h : scan.hits)
            inv.families.push_back({a, b, h.point, h.sign, s.branch_measure(a) * s.branch_measure(b)});
        }
      }
    }
  }
  inv.diagnostics = diag.str();
  return inv;
}

}  // namespace solab
