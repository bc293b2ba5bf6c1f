#pragma once

// Generalized currents of immersed measured solenoids: pairing with closed
// 1-forms by a flow-box sum, the Ruelle-Sullivan map on combinations of
// invariant measures, and a rasterized dual 1-form on T^2.
//
// Flow-box cover: for branch i, the box over K_i of loop time [0, 1-c) and
// the window box of time [1-c, 1). Leaves in one box are parallel, so
// integrals of a.dx are exact and exact parts reduce to endpoint values.

#include <cstdint>
#include <string>
#include <vector>

#include "solab/forms.hpp"
#include "solab/immersion.hpp"

namespace solab {

/// <[f, S_mu], omega> via the flow-box sum.
double pair_current_form(const ImmersedSolenoid& s, const TestForm& form);

/// Components <[f, S_mu], dx_j>.
HomologyVector generalized_current(const ImmersedSolenoid& s);

/// Cutoff form cohomologous to a.dx that vanishes on the trapping box.
TestForm cutoff_form(const ImmersedSolenoid& s, const Vec& a, TrigPolynomial phi = {});

/// Integration map: integral over the transversal of the line integral of
/// omega along each leaf's return. Independent of the flow-box code path
/// (quadrature along leaves and across the transversal). OpenMP over
/// transversal pieces, with a serial reference using the same reduction order.
double fundamental_class_integral(const ImmersedSolenoid& s, const TestForm& form);
double fundamental_class_integral_serial(const ImmersedSolenoid& s, const TestForm& form);

struct WeightedMeasure {
  double coefficient = 1.0;
  TransversalMeasure measure;
};

/// sum_k c_k [f, S_{mu_k}]. Measures must be invariant measures of the
/// solenoid's base map.
HomologyVector ruelle_sullivan_map(const ImmersedSolenoid& s, const std::vector<WeightedMeasure>& combination);

/// Samples of a 1-form eta = eta1 dx1 + eta2 dx2 on an N x N grid of T^2.
/// Row-major: value at (x, y) = (j h, i h) is index i N + j.
struct GridForm {
  int n = 0;
  double spacing = 0.0;
  std::vector<double> eta1, eta2;

  /// Trapezoidal integrals of eta1 and eta2.
  double integral1() const;
  double integral2() const;
  /// (integral of dx1 ^ eta, integral of dx2 ^ eta) = (int eta2, -int eta1).
  /// With this convention the components reproduce the current.
  HomologyVector dual_components() const;
  /// integral of eta ^ dx_j = -(dual component j).
  double wedge_with(int j) const;
};

struct RasterOptions {
  double epsilon = 0.02;    // tube radius
  int n = 512;              // grid size
  int leaf_samples = 96;    // transversal samples per branch (continuous measures)
};

/// eta = sum over sampled leaves of w * (K_eps convolved along the return)
/// applied to the rotated tangent (-T2, T1); K_eps is the product biweight
/// kernel with unit integral. Rejects N eps < 8 and tubes wider than half
/// the lane spacing. OpenMP over grid rows; the serial reference produces
/// bitwise identical samples.
GridForm dual_form_raster(const ImmersedSolenoid& s, const RasterOptions& opt);
GridForm dual_form_raster_serial(const ImmersedSolenoid& s, const RasterOptions& opt);

/// Biweight profile (15/16 eps)(1 - (t/eps)^2)^2 and its distribution function.
double biweight(double t, double eps);
double biweight_cdf(double t, double eps);

/// Dense binary grid: text header lines, then eta1 and eta2 as little-endian
/// float64, row-major.
void write_grid_file(const std::string& path, const GridForm& g);
GridForm read_grid_file(const std::string& path);

}  // namespace solab
