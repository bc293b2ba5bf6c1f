#include "solab/manifest.hpp"

#include <random>
#include <sstream>

#include "solab/error.hpp"

namespace solab {

const Json* ManifestReader::find(const std::string& path) const {
  const Json* node = &root_;
  std::stringstream ss(path);
  std::string key;
  while (std::getline(ss, key, '.')) {
    if (!node->is_object()) return nullptr;
    auto it = node->find(key);
    if (it == node->end()) return nullptr;
    node = &*it;
  }
  return node;
}

void ManifestReader::fail(const std::string& path, const std::string& why) { errors_.push_back(path + ": " + why); }

void ManifestReader::finish() const {
  if (errors_.empty()) return;
  std::string all;
  for (const auto& e : errors_) all += (all.empty() ? "" : "; ") + e;
  std::string first = errors_.front().substr(0, errors_.front().find(':'));
  throw ValidationError("manifest invalid: " + all, first);
}

double ManifestReader::number(const std::string& path, std::optional<double> fallback) {
  const Json* n = find(path);
  if (!n) {
    if (fallback) return *fallback;
    fail(path, "missing");
    return 0.0;
  }
  if (!n->is_number()) {
    fail(path, "expected a number");
    return fallback.value_or(0.0);
  }
  return n->get<double>();
}

std::int64_t ManifestReader::integer(const std::string& path, std::optional<std::int64_t> fallback) {
  const Json* n = find(path);
  if (!n) {
    if (fallback) return *fallback;
    fail(path, "missing");
    return 0;
  }
  if (n->is_number_integer()) return n->get<std::int64_t>();
  // 1e5 style literals parse as floating point
  if (n->is_number_float()) {
    double v = n->get<double>();
    if (v == std::floor(v) && std::abs(v) < 9e15) return static_cast<std::int64_t>(v);
  }
  fail(path, "expected an integer");
  return fallback.value_or(0);
}

bool ManifestReader::boolean(const std::string& path, std::optional<bool> fallback) {
  const Json* n = find(path);
  if (!n) {
    if (fallback) return *fallback;
    fail(path, "missing");
    return false;
  }
  if (!n->is_boolean()) {
    fail(path, "expected true or false");
    return fallback.value_or(false);
  }
  return n->get<bool>();
}

std::vector<double> ManifestReader::numbers(const std::string& path, std::optional<std::vector<double>> fallback) {
  const Json* n = find(path);
  if (!n) {
    if (fallback) return *fallback;
    fail(path, "missing");
    return {};
  }
  std::vector<double> out;
  if (!n->is_array()) {
    fail(path, "expected an array of numbers");
    return fallback.value_or(out);
  }
  for (std::size_t i = 0; i < n->size(); ++i) {
    if (!(*n)[i].is_number()) {
      fail(path + "[" + std::to_string(i) + "]", "expected a number");
      continue;
    }
    out.push_back((*n)[i].get<double>());
  }
  return out;
}

std::vector<Vec> ManifestReader::vectors(const std::string& path, std::optional<std::vector<Vec>> fallback) {
  const Json* n = find(path);
  if (!n) {
    if (fallback) return *fallback;
    fail(path, "missing");
    return {};
  }
  std::vector<Vec> out;
  if (!n->is_array()) {
    fail(path, "expected an array of vectors");
    return out;
  }
  for (std::size_t i = 0; i < n->size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const Json& v = (*n)[i];
    if (!v.is_array() || v.empty() || v.size() > static_cast<std::size_t>(kMaxDim)) {
      fail(p, "expected a vector of 1.." + std::to_string(kMaxDim) + " numbers");
      continue;
    }
    Vec x(static_cast<int>(v.size()));
    bool ok = true;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (!v[j].is_number()) {
        fail(p + "[" + std::to_string(j) + "]", "expected a number");
        ok = false;
        break;
      }
      x[static_cast<int>(j)] = v[j].get<double>();
    }
    if (!ok) continue;
    if (!out.empty() && out.front().dim() != x.dim()) {
      fail(p, "dimension differs from the first entry");
      continue;
    }
    out.push_back(x);
  }
  return out;
}

double ManifestReader::positive(const std::string& path, std::optional<double> fallback) {
  double v = number(path, fallback);
  if (has(path) && find(path)->is_number() && !(v > 0.0)) fail(path, "must be positive");
  return v;
}

std::int64_t ManifestReader::positive_integer(const std::string& path, std::optional<std::int64_t> fallback) {
  std::int64_t v = integer(path, fallback);
  if (has(path) && find(path)->is_number() && v < 1) fail(path, "must be >= 1");
  return v;
}

BaseSpec read_base(ManifestReader& r, const std::string& prefix) {
  BaseSpec spec;
  const std::string a = prefix + ".alpha";
  if (!r.has(a)) {
    r.fail(a, "missing");
  } else if (r.has(a + ".golden")) {
    if (!r.boolean(a + ".golden")) r.fail(a + ".golden", "only true is meaningful");
  } else if (r.has(a + ".decimal")) {
    double v = r.number(a + ".decimal");
    if (!(v > 0.0 && v < 1.0)) r.fail(a + ".decimal", "must lie in (0, 1)");
    else spec.alpha = RotationNumber(v);
  } else if (r.has(a + ".continued_fraction")) {
    std::vector<double> t = r.numbers(a + ".continued_fraction");
    std::vector<int> terms;
    for (double x : t) {
      if (x < 1 || x != std::floor(x)) {
        r.fail(a + ".continued_fraction", "terms must be integers >= 1");
        terms.clear();
        break;
      }
      terms.push_back(static_cast<int>(x));
    }
    if (t.empty()) r.fail(a + ".continued_fraction", "must not be empty");
    if (!terms.empty()) spec.alpha = RotationNumber::from_continued_fraction(terms);
  } else {
    r.fail(a, "expected one of golden, decimal, continued_fraction");
  }
  const std::string g = prefix + ".gaps";
  spec.gaps.constant = r.positive(g + ".constant", GapSchedule::default_constant());
  spec.gaps.n_max = r.positive_integer(g + ".n_max", spec.gaps.n_max);
  spec.gaps.tolerance = r.positive(g + ".tolerance", spec.gaps.tolerance);
  return spec;
}

CycleLibrary read_library(ManifestReader& r) {
  std::int64_t n = r.integer("library.dim", 2);
  if (n < 2 || n > kMaxDim) {
    r.fail("library.dim", "must be between 2 and " + std::to_string(kMaxDim));
    n = 2;
  }
  return CycleLibrary::standard(static_cast<int>(n));
}

ImmersionLayout read_layout(ManifestReader& r, int n) {
  ImmersionLayout l;
  Vec p0(n);
  for (int j = 0; j < n; ++j) p0[j] = 0.1;
  std::vector<double> base = r.numbers("layout.base_point", std::vector<double>(p0.values().begin(), p0.values().end()));
  if (static_cast<int>(base.size()) != n) r.fail("layout.base_point", "dimension must match library.dim");
  else l.base_point = Vec::from_span(base);
  l.box_length = r.positive("layout.box_length", l.box_length);
  l.ribbon_width = r.positive("layout.ribbon_width", l.ribbon_width);
  l.window = r.positive("layout.window", l.window);
  l.lane_spacing = r.positive("layout.lane_spacing", l.lane_spacing);
  l.window_samples = static_cast<int>(r.positive_integer("layout.window_samples", l.window_samples));
  return l;
}

std::vector<HomologyVector> read_classes(ManifestReader& r, const std::string& path, int n, std::uint64_t seed) {
  std::vector<HomologyVector> out;
  if (r.has(path + ".list")) {
    for (const Vec& v : r.vectors(path + ".list")) {
      if (v.dim() != n) {
        r.fail(path + ".list", "dimension must match library.dim");
        break;
      }
      out.emplace_back(v);
    }
    if (out.empty()) r.fail(path + ".list", "must not be empty");
    return out;
  }
  if (r.has(path + ".random")) {
    std::int64_t count = r.positive_integer(path + ".random.count");
    std::vector<double> range = r.numbers(path + ".random.range", std::vector<double>{-2.0, 2.0});
    if (range.size() != 2 || !(range[0] < range[1])) {
      r.fail(path + ".random.range", "expected [lo, hi] with lo < hi");
      return out;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(range[0], range[1]);
    for (std::int64_t k = 0; k < count; ++k) {
      Vec v(n);
      for (int j = 0; j < n; ++j) v[j] = u(rng);
      out.emplace_back(v);
    }
    return out;
  }
  r.fail(path, "expected list or random");
  return out;
}

}  // namespace solab
