// Acceptance gate: runs each criterion from its shipped manifest and prints
// one PASS/FAIL line per criterion. Thresholds and problem sizes are pinned
// here, so a manifest edit cannot loosen a criterion.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "solab/experiments.hpp"

using namespace solab;

namespace {

struct Required {
  std::string check;
  double threshold;
};

struct Pinned {
  std::string pointer;  // JSON pointer into the manifest
  Json value;
};

struct Criterion {
  int id;
  std::string manifest;
  std::string subcommand;
  std::vector<Required> checks;
  std::vector<Pinned> sizes;
};

std::vector<Criterion> criteria() {
  return {
      {1, "c1_realize.json", "realize", {{"current_max_error", 1e-6}, {"runtime_s", 10}},
       {{"/classes/random/count", 20}}},
      {2, "c2_birkhoff.json", "schwartzman",
       {{"leaf_time_class_error", 0.01}, {"leaf_arc_class_error", 0.01}, {"runtime_s", 120}},
       {{"/leaf_classes/count", 100}, {"/leaf_classes/returns", 100000}, {"/leaf_classes/class", {0.3, 0.7}}}},
      {3, "c3_estimators.json", "schwartzman",
       {{"estimator_agreement", 0.01}, {"estimators_converged", 1}, {"runtime_s", 60}},
       {{"/horizon/t_max", 10000}, {"/flows/0", {1.0, 0.6180339887498949}}}},
      {4, "c4_exactness.json", "realize", {{"exact_pairing_max", 1e-6}}, {{"/exact_forms/count", 20}}},
      {5, "c5_intersect.json", "intersect",
       {{"pairing_error", 1e-4}, {"antisymmetry", 0.0}, {"self_pairing", 1e-4}, {"runtime_s", 30}},
       {{"/pairs/random/count", 10}}},
      {6, "c6_dualform.json", "dualform", {{"raster_components", 0.01}, {"raster_stability", 0.01}},
       {{"/raster/n", 512}, {"/raster/epsilon", 0.02}, {"/refined/epsilon", 0.01}}},
      {7, "c7_denjoy.json", "denjoy", {{"rotation_bound", 1.0}, {"gap_measure", 0.0}, {"partition_weights", 1e-10}},
       {{"/rotation/n_max", 1000000}}},
      {8, "c8_norm.json", "norm", {{"homogeneity", 1e-12}, {"reference_norm", 1e-12}, {"subadditivity", 0.0}},
       {{"/homogeneity/multiples", 50}, {"/reference/class", {3, 4}}, {"/reference/value", 5.0},
        {"/subadditivity/count", 100}}},
      {9, "c9_cluster.json", "cluster",
       {{"singleton_clusters", 1}, {"cluster_diameter", 0.02}, {"two_ray_angle_e1", 0.05}, {"two_ray_angle_e2", 0.05}},
       {{"/grid/t_max", 10000}}},
  };
}

bool same_number(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) return a.get<double>() == b.get<double>();
  if (a.is_array() && b.is_array() && a.size() == b.size()) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!same_number(a[i], b[i])) return false;
    return true;
  }
  return a == b;
}

}  // namespace

int main() {
  int failures = 0;
  for (const auto& c : criteria()) {
    std::string why;
    bool ok = true;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      std::ifstream in(std::string(SOLAB_MANIFESTS) + "/" + c.manifest);
      Json m = Json::parse(in);
      for (const auto& p : c.sizes) {
        Json::json_pointer ptr(p.pointer);
        if (!m.contains(ptr) || !same_number(m[ptr], p.value)) {
          ok = false;
          why += " manifest " + p.pointer + " is not " + p.value.dump() + ";";
        }
      }
      RunReport rep = run_experiment(c.subcommand, m);
      std::map<std::string, const Check*> by_name;
      for (const auto& k : rep.checks) by_name[k.name] = &k;
      for (const auto& req : c.checks) {
        auto it = by_name.find(req.check);
        if (it == by_name.end()) {
          ok = false;
          why += " " + req.check + " missing;";
          continue;
        }
        const Check& k = *it->second;
        if (k.threshold != req.threshold) {
          ok = false;
          why += " " + req.check + " threshold " + format_number(k.threshold) + " != " + format_number(req.threshold) + ";";
        }
        if (!k.pass) ok = false;
        why += " " + req.check + "=" + format_number(k.value) + (k.pass ? "" : " (FAIL)") + ";";
      }
      for (const auto& k : rep.checks)
        if (!k.pass) ok = false;
    } catch (const std::exception& e) {
      ok = false;
      why += std::string(" error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s [%.2f s]%s\n", c.id, ok ? "PASS" : "FAIL", secs, why.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  std::printf("%d of 9 criteria pass\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
