#include "solab/intersection.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "solab/error.hpp"
#include "solab/segments.hpp"

namespace solab {

namespace {

double frac(double x) {
  double f = x - std::floor(x);
  return f >= 1.0 ? 0.0 : f;
}

double cross2(const Vec& a, const Vec& b) { return a[0] * b[1] - a[1] * b[0]; }

void require_t2(const ImmersedSolenoid& s, const char* what) {
  if (s.dim() != 2) throw ValidationError(std::string(what) + ": intersection pairing needs the 2-torus");
}

bool record_less(const CrossingRecord& a, const CrossingRecord& b) {
  if (a.branch1 != b.branch1) return a.branch1 < b.branch1;
  if (a.branch2 != b.branch2) return a.branch2 < b.branch2;
  if (a.point[0] != b.point[0]) return a.point[0] < b.point[0];
  if (a.point[1] != b.point[1]) return a.point[1] < b.point[1];
  return a.sign < b.sign;
}

struct SegmentPair {
  std::size_t i, j, a, b;  // branches and segment indices
};

CrossingSet enumerate_impl(const ImmersedSolenoid& s1, const ImmersedSolenoid& s2, const CrossingOptions& opt,
                           bool parallel) {
  require_t2(s1, "first solenoid");
  require_t2(s2, "second solenoid");
  std::vector<std::vector<Vec>> c1, c2;
  for (std::size_t i = 0; i < s1.branches().size(); ++i) c1.push_back(core_cycle(s1, i));
  for (std::size_t j = 0; j < s2.branches().size(); ++j) c2.push_back(core_cycle(s2, j));
  std::vector<SegmentPair> pairs;
  for (std::size_t i = 0; i < c1.size(); ++i)
    for (std::size_t j = 0; j < c2.size(); ++j)
      for (std::size_t a = 0; a + 1 < c1[i].size(); ++a)
        for (std::size_t b = 0; b + 1 < c2[j].size(); ++b) pairs.push_back({i, j, a, b});

  std::vector<double> m1, m2;
  for (std::size_t i = 0; i < c1.size(); ++i) m1.push_back(s1.branch_measure(i));
  for (std::size_t j = 0; j < c2.size(); ++j) m2.push_back(s2.branch_measure(j));

  std::vector<CrossingScan> scans(pairs.size());
  const long count = static_cast<long>(pairs.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (long k = 0; k < count; ++k) {
    const auto& p = pairs[static_cast<std::size_t>(k)];
    const auto& u = c1[p.i];
    const auto& v = c2[p.j];
    torus_segment_crossings(u[p.a], u[p.a + 1], v[p.b], v[p.b + 1], opt.sin_min, scans[static_cast<std::size_t>(k)]);
  }

  CrossingSet out;
  std::ostringstream diag;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& p = pairs[k];
    const auto& sc = scans[k];
    if (sc.parallel_overlap) {
      out.status = Transversality::kDegenerate;
      diag << "overlap: branches " << p.i << "," << p.j << " segments " << p.a << "," << p.b << "; ";
    }
    for (const auto& h : sc.hits) {
      const bool near_vertex = h.s < opt.vertex_margin || h.s > 1.0 - opt.vertex_margin ||
                               h.u < opt.vertex_margin || h.u > 1.0 - opt.vertex_margin;
      if (std::abs(h.sin_angle) < opt.sin_min || near_vertex) {
        out.status = Transversality::kDegenerate;
        diag << (near_vertex ? "vertex" : "shallow") << ": branches " << p.i << "," << p.j << " segments " << p.a << ","
             << p.b << " at " << h.point.str() << "; ";
      }
      CrossingRecord r;
      r.branch1 = p.i;
      r.branch2 = p.j;
      r.point = h.point;
      r.sign = h.sign;
      r.sin_angle = h.sin_angle;
      r.arc1 = s1.partition().branch_arc(p.i);
      r.arc2 = s2.partition().branch_arc(p.j);
      r.measure1 = m1[p.i];
      r.measure2 = m2[p.j];
      out.records.push_back(r);
    }
  }
  std::sort(out.records.begin(), out.records.end(), record_less);
  out.diagnostics = diag.str();
  return out;
}

}  // namespace

const char* to_string(Transversality t) {
  switch (t) {
    case Transversality::kTransverse: return "transverse";
    case Transversality::kPerturbed: return "perturbed";
    case Transversality::kDegenerate: return "degenerate";
  }
  return "?";
}

std::vector<Vec> core_cycle(const ImmersedSolenoid& s, std::size_t i) {
  const auto& part = s.partition();
  const double v_mid = 0.5 * (part.position_bounds[i] + part.position_bounds[i + 1]) - part.position_bounds.front();
  const Vec base = s.layout().base_point + s.offset(v_mid);
  std::vector<Vec> out{base};
  for (const auto& v : s.branches()[i].core) out.push_back(base + v);
  return out;
}

CrossingSet enumerate_crossings(const ImmersedSolenoid& s1, const ImmersedSolenoid& s2, const CrossingOptions& opt) {
  return enumerate_impl(s1, s2, opt, true);
}

CrossingSet enumerate_crossings_serial(const ImmersedSolenoid& s1, const ImmersedSolenoid& s2,
                                       const CrossingOptions& opt) {
  return enumerate_impl(s1, s2, opt, false);
}

PairingReport intersection_pairing(const ImmersedSolenoid& s1, const ImmersedSolenoid& s2, const CrossingOptions& opt) {
  CrossingSet cs = enumerate_crossings(s1, s2, opt);
  PairingReport rep;
  rep.status = cs.status;
  rep.diagnostics = cs.diagnostics;
  std::vector<double> pos, neg;
  for (const auto& r : cs.records) {
    double w = r.measure1 * r.measure2;
    (r.sign > 0 ? pos : neg).push_back(w);
  }
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  for (double w : pos) rep.positive += w;
  for (double w : neg) rep.negative += w;
  rep.total = rep.positive - rep.negative;
  rep.records = std::move(cs.records);
  return rep;
}

ImmersedSolenoid transverse_placement(const ImmersedSolenoid& moving, const ImmersedSolenoid& fixed, int max_candidates,
                                      const CrossingOptions& opt) {
  // R2 sequence (plastic-number Kronecker points), starting offset 0.5
  const double g = 1.32471795724474602596;
  const double a1 = 1.0 / g, a2 = 1.0 / (g * g);
  std::ostringstream diag;
  for (int k = 0; k < max_candidates; ++k) {
    Vec t = k == 0 ? Vec{0.0, 0.0} : Vec{frac(0.5 + a1 * k), frac(0.5 + a2 * k)};
    ImmersedSolenoid cand = moving.translated(t);
    CrossingSet cs = enumerate_crossings(cand, fixed, opt);
    if (cs.status == Transversality::kTransverse) return cand;
    diag << "candidate " << k << ": " << cs.diagnostics;
  }
  throw ConstructionError("no transverse placement among the candidates: " + diag.str());
}

PerturbResult perturb_transverse(const ImmersedSolenoid& s1, const ImmersedSolenoid& s2, std::uint64_t seed,
                                 int max_retries, const CrossingOptions& opt) {
  PerturbResult res{s1, Vec(2), 0, false, {}};
  CrossingSet cs = enumerate_crossings(s1, s2, opt);
  if (cs.status == Transversality::kTransverse) {
    res.transverse = true;
    return res;
  }
  std::ostringstream diag;
  diag << "initial: " << cs.diagnostics;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.14159265358979323846);
  std::uniform_real_distribution<double> radius(0.0, 1.0);
  double eps = 1e-4;
  for (int k = 1; k <= max_retries; ++k) {
    double th = angle(rng), r = eps * std::sqrt(radius(rng));
    Vec shift{r * std::cos(th), r * std::sin(th)};
    ImmersedSolenoid cand = s1.translated(shift);
    cs = enumerate_crossings(cand, s2, opt);
    if (cs.status == Transversality::kTransverse) {
      res.shifted = std::move(cand);
      res.shift = shift;
      res.retries = k;
      res.transverse = true;
      res.diagnostics = diag.str();
      return res;
    }
    diag << "retry " << k << " (eps " << eps << "): " << cs.diagnostics;
    eps = std::min(2.0 * eps, 1e-2);
  }
  res.retries = max_retries;
  res.diagnostics = diag.str();
  return res;
}

namespace {

std::vector<Vec> closed_leaf_cycle(const ImmersedSolenoid& s, const CirclePoint& x) {
  ReturnPath rp = return_path(s, x);
  const Vec shift = s.branches()[rp.branch].cls.vec();
  std::vector<Vec> v = std::move(rp.vertices);
  v.push_back(v.front() + shift);
  return v;
}

int closed_cycle_crossings(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  CrossingScan scan;
  for (std::size_t i = 0; i + 1 < a.size(); ++i)
    for (std::size_t j = 0; j + 1 < b.size(); ++j) torus_segment_crossings(a[i], a[i + 1], b[j], b[j + 1], 0.0, scan);
  int t = 0;
  for (const auto& h : scan.hits) t += h.sign;
  return t;
}

// transversal point drawn from the normalized measure of s
CirclePoint sample_point(const ImmersedSolenoid& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto& mu = s.measure();
  if (mu.kind() == TransversalMeasure::Kind::kAtomic) {
    double total = 0.0;
    for (double w : mu.atom_weights()) total += w;
    double r = u(rng) * total;
    for (std::size_t k = 0; k < mu.atom_points().size(); ++k) {
      r -= mu.atom_weights()[k];
      if (r <= 0.0 || k + 1 == mu.atom_points().size()) return s.base().locate(mu.atom_points()[k]);
    }
  }
  return CirclePoint{u(rng), std::nullopt, 0.0};  // base coordinate: mu_K and Lebesgue are uniform there
}

}  // namespace

double sampled_leaf_pairing(const ImmersedSolenoid& s1, const ImmersedSolenoid& s2, int samples, std::uint64_t seed) {
  require_t2(s1, "first solenoid");
  require_t2(s2, "second solenoid");
  if (samples < 1) throw ValidationError("samples must be >= 1", "samples");
  std::mt19937_64 rng(seed);
  std::int64_t acc = 0;
  for (int k = 0; k < samples; ++k) {
    auto a = closed_leaf_cycle(s1, sample_point(s1, rng));
    auto b = closed_leaf_cycle(s2, sample_point(s2, rng));
    acc += closed_cycle_crossings(a, b);
  }
  return s1.measure().arc({0.0, 1.0}).value * s2.measure().arc({0.0, 1.0}).value * static_cast<double>(acc) / samples;
}

// ---------------------------------------------------------------- leafwise crossings

namespace {

struct CellEntry {
  std::uint32_t segment;
  std::int32_t shift_x, shift_y;  // lattice shift bringing the segment next to cell
};

struct CellIndex {
  int g = 0;
  std::vector<std::uint32_t> offsets;  // CSR, g*g + 1
  std::vector<CellEntry> entries;
};

// Cells visited by a segment (lifted cell coordinates), by a DDA walk.
template <class Visit>
void walk_cells(const Vec& p, const Vec& q, int g, Visit&& visit) {
  const double gx = static_cast<double>(g);
  double x0 = p[0] * gx, y0 = p[1] * gx, x1 = q[0] * gx, y1 = q[1] * gx;
  auto cx = static_cast<std::int64_t>(std::floor(x0)), cy = static_cast<std::int64_t>(std::floor(y0));
  const auto ex = static_cast<std::int64_t>(std::floor(x1)), ey = static_cast<std::int64_t>(std::floor(y1));
  const double dx = x1 - x0, dy = y1 - y0;
  const int sx = dx > 0 ? 1 : -1, sy = dy > 0 ? 1 : -1;
  const double inf = 1e300;
  double tdx = dx != 0 ? std::abs(1.0 / dx) : inf, tdy = dy != 0 ? std::abs(1.0 / dy) : inf;
  double tx = dx != 0 ? (dx > 0 ? (std::floor(x0) + 1.0 - x0) : (x0 - std::floor(x0))) * tdx : inf;
  double ty = dy != 0 ? (dy > 0 ? (std::floor(y0) + 1.0 - y0) : (y0 - std::floor(y0))) * tdy : inf;
  visit(cx, cy);
  int guard = 0;
  while ((cx != ex || cy != ey) && guard++ < 1 << 22) {
    if (tx < ty) {
      cx += sx;
      tx += tdx;
    } else {
      cy += sy;
      ty += tdy;
    }
    if (tx > 1.0 && ty > 1.0 && (cx != ex || cy != ey)) {
      // rounding left the walk short of the end cell; finish by visiting it
      visit(ex, ey);
      break;
    }
    visit(cx, cy);
  }
}

CellIndex build_index(const std::vector<Vec>& path, int g) {
  CellIndex idx;
  idx.g = g;
  std::vector<std::vector<CellEntry>> cells(static_cast<std::size_t>(g) * g);
  for (std::uint32_t k = 0; k + 1 < path.size(); ++k) {
    std::int64_t last_x = INT64_MIN, last_y = INT64_MIN;
    walk_cells(path[k], path[k + 1], g, [&](std::int64_t cx, std::int64_t cy) {
      if (cx == last_x && cy == last_y) return;
      last_x = cx, last_y = cy;
      std::int64_t wx = ((cx % g) + g) % g, wy = ((cy % g) + g) % g;
      auto sx = static_cast<std::int32_t>((cx - wx) / g), sy = static_cast<std::int32_t>((cy - wy) / g);
      cells[static_cast<std::size_t>(wy * g + wx)].push_back({k, sx, sy});
    });
  }
  idx.offsets.assign(static_cast<std::size_t>(g) * g + 1, 0);
  for (std::size_t c = 0; c < cells.size(); ++c) idx.offsets[c + 1] = idx.offsets[c] + static_cast<std::uint32_t>(cells[c].size());
  idx.entries.reserve(idx.offsets.back());
  for (auto& c : cells) idx.entries.insert(idx.entries.end(), c.begin(), c.end());
  return idx;
}

PathCrossingCount count_impl(const std::vector<Vec>& a, const std::vector<Vec>& b, int g, bool parallel) {
  if (g < 1) throw ValidationError("grid must be >= 1", "grid");
  if (a.size() < 2 || b.size() < 2) return {};
  if (a.front().dim() != 2 || b.front().dim() != 2) throw ValidationError("path crossings need the 2-torus");
  const CellIndex ia = build_index(a, g), ib = build_index(b, g);
  const double h = 1.0 / g;
  const long cells = static_cast<long>(g) * g;
  std::vector<std::int64_t> pos(static_cast<std::size_t>(cells), 0), neg(static_cast<std::size_t>(cells), 0);
#pragma omp parallel for schedule(dynamic, 16) if (parallel)
  for (long c = 0; c < cells; ++c) {
    const double cx0 = static_cast<double>(c % g) * h, cy0 = static_cast<double>(c / g) * h;
    std::int64_t np = 0, nn = 0;
    for (std::uint32_t ea = ia.offsets[c]; ea < ia.offsets[c + 1]; ++ea) {
      const CellEntry& A = ia.entries[ea];
      const Vec sa{static_cast<double>(A.shift_x), static_cast<double>(A.shift_y)};
      const Vec p0 = a[A.segment] - sa, d1 = a[A.segment + 1] - a[A.segment];
      for (std::uint32_t eb = ib.offsets[c]; eb < ib.offsets[c + 1]; ++eb) {
        const CellEntry& B = ib.entries[eb];
        const Vec sb{static_cast<double>(B.shift_x), static_cast<double>(B.shift_y)};
        const Vec q0 = b[B.segment] - sb, d2 = b[B.segment + 1] - b[B.segment];
        const double cr = cross2(d1, d2);
        if (cr == 0.0) continue;
        const Vec w = q0 - p0;
        const double s = cross2(w, d2) / cr, u = cross2(w, d1) / cr;
        if (s < 0.0 || s >= 1.0 || u < 0.0 || u >= 1.0) continue;
        const Vec x = p0 + d1 * s;
        if (x[0] < cx0 || x[0] >= cx0 + h || x[1] < cy0 || x[1] >= cy0 + h) continue;
        (cr > 0 ? np : nn) += 1;
      }
    }
    pos[static_cast<std::size_t>(c)] = np;
    neg[static_cast<std::size_t>(c)] = nn;
  }
  PathCrossingCount out;
  for (long c = 0; c < cells; ++c) out.positive += pos[static_cast<std::size_t>(c)], out.negative += neg[static_cast<std::size_t>(c)];
  return out;
}

}  // namespace

PathCrossingCount count_path_crossings(const std::vector<Vec>& a, const std::vector<Vec>& b, int grid) {
  return count_impl(a, b, grid, true);
}

PathCrossingCount count_path_crossings_serial(const std::vector<Vec>& a, const std::vector<Vec>& b, int grid) {
  return count_impl(a, b, grid, false);
}

std::vector<LeafwiseEstimate> leafwise_pairing_limit(const ImmersedSolenoid& s1, const ImmersedSolenoid& s2, double x1,
                                                     double x2, const std::vector<std::int64_t>& horizons, int grid) {
  require_t2(s1, "first solenoid");
  require_t2(s2, "second solenoid");
  if (horizons.empty()) throw ValidationError("no horizons", "horizons");
  std::vector<LeafwiseEstimate> out;
  for (std::int64_t n : horizons) {
    if (n < 1) throw ValidationError("horizons must be >= 1", "horizons");
    LeafTrace t1 = trace_leaf(s1, x1, 0, n);
    LeafTrace t2 = trace_leaf(s2, x2, 0, n);
    PathCrossingCount c = count_path_crossings(t1.path.vertices(), t2.path.vertices(), grid);
    LeafwiseEstimate e;
    e.returns = n;
    e.signed_crossings = c.signed_total();
    e.length1 = t1.path.length();
    e.length2 = t2.path.length();
    e.value = static_cast<double>(e.signed_crossings) / (e.length1 * e.length2);
    out.push_back(e);
  }
  return out;
}

}  // namespace solab
