#pragma once

// Experiment manifests: JSON documents read through a reader that records
// every missing or invalid field by its dotted path, so one validation error
// can list all problems at once.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "solab/circle_dynamics.hpp"
#include "solab/immersion.hpp"

namespace solab {

using Json = nlohmann::json;

class ManifestReader {
 public:
  explicit ManifestReader(const Json& root) : root_(root) {}

  /// Node at a dotted path, or nullptr.
  const Json* find(const std::string& path) const;
  bool has(const std::string& path) const { return find(path) != nullptr; }

  double number(const std::string& path, std::optional<double> fallback = std::nullopt);
  std::int64_t integer(const std::string& path, std::optional<std::int64_t> fallback = std::nullopt);
  bool boolean(const std::string& path, std::optional<bool> fallback = std::nullopt);
  std::vector<double> numbers(const std::string& path, std::optional<std::vector<double>> fallback = std::nullopt);
  /// List of equal-length numeric vectors.
  std::vector<Vec> vectors(const std::string& path, std::optional<std::vector<Vec>> fallback = std::nullopt);

  double positive(const std::string& path, std::optional<double> fallback = std::nullopt);
  std::int64_t positive_integer(const std::string& path, std::optional<std::int64_t> fallback = std::nullopt);

  void fail(const std::string& path, const std::string& why);
  const std::vector<std::string>& errors() const { return errors_; }
  /// Throws ValidationError naming every recorded field when there are any.
  void finish() const;

 private:
  const Json& root_;
  std::vector<std::string> errors_;
};

/// base.alpha: {"golden": true} | {"decimal": x} | {"continued_fraction": [a1, ...]}
/// base.gaps: {"constant", "n_max", "tolerance"} (all optional).
struct BaseSpec {
  RotationNumber alpha = RotationNumber::golden();
  GapSchedule gaps;
};
BaseSpec read_base(ManifestReader& r, const std::string& prefix = "base");

/// library.dim (default 2) and layout.* overrides of ImmersionLayout.
CycleLibrary read_library(ManifestReader& r);
ImmersionLayout read_layout(ManifestReader& r, int n);

/// Either `<path>.list` or `<path>.random` {count, range [lo, hi]} drawn
/// from the seed.
std::vector<HomologyVector> read_classes(ManifestReader& r, const std::string& path, int n, std::uint64_t seed);

}  // namespace solab
