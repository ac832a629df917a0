#pragma once

// Bounded-geometry covers of flat periodic model manifolds, smooth partitions
// of unity, and the localization (F) / gluing (G) operators that realize the
// patchwise norm
//
//   ||u||_{H^phi(X)}^2 = sum_j ||(h_j u) o gamma_j||_{H^phi(R^n)}^2.
//
// Charts on the shipped models are translations; every patch lives on its own
// periodic grid with the model's spacing, wide enough to hold the chart ball
// with zero extension outside it.

#include <array>
#include <functional>
#include <vector>

#include "sobscale/spectral.hpp"
#include "sobscale/weights.hpp"

namespace sobscale {

class Rng;

using Point = std::array<double, 3>;

struct Model {
  enum class Kind { line, cylinder };
  Kind kind = Kind::line;
  double period_x = 2 * M_PI;
  double circumference = 2 * M_PI;  // cylinder only
  int N = 256;                      // points per axis

  static Model line(double period, int N);
  static Model cylinder(double period_x, double circumference, int N);

  int dim() const { return kind == Kind::line ? 1 : 2; }
  Grid grid() const;
  double period(int axis) const { return axis == 0 ? period_x : circumference; }
  /// Minimal periodic displacement a - b per axis.
  Point displacement(const Point& a, const Point& b) const;
  double distance(const Point& a, const Point& b) const;
};

struct Chart {
  int id = 0;
  Point center{};
  double radius = 0.0;
  std::function<Point(const Point&)> kappa;  // manifold -> local coordinates
  std::function<Point(const Point&)> gamma;  // local coordinates -> manifold
};

/// Flat chart: gamma(y) = center + y (mod period), kappa its minimal-image inverse.
Chart translation_chart(const Model& model, int id, const Point& center, double radius);
/// Test fixture: gamma(y) = center + y + amplitude * radius * sin(y / radius)
/// per axis (amplitude < 1 keeps it a diffeomorphism); kappa by Newton.
Chart warped_chart(const Model& model, const Chart& base, double amplitude);
/// max |kappa(gamma(y)) - y| over a sample of the chart ball.
double chart_roundtrip_error(const Model& model, const Chart& chart, int samples_per_axis = 33);

// One grid point of a chart ball.
struct PatchPoint {
  std::size_t global = 0;  // flat index on the model grid
  std::size_t local = 0;   // flat index on the patch grid
  double h = 0.0;          // h_j
  double overlap_sum = 0.0;  // H_j = sum_{k in A(j)} h_k
};

class Atlas {
 public:
  const Model& model() const { return model_; }
  const Grid& grid() const { return grid_; }
  const Grid& patch_grid() const { return patch_grid_; }
  double epsilon() const { return epsilon_; }
  double spacing() const { return spacing_; }
  double sharpness() const { return sharpness_; }
  bool global() const { return global_; }

  const std::vector<Chart>& charts() const { return charts_; }
  const std::vector<std::vector<PatchPoint>>& patches() const { return patches_; }
  /// A(j) = {k : V_j and V_k intersect}, including j.
  const std::vector<std::vector<int>>& overlaps() const { return overlaps_; }
  int cover_order() const { return cover_order_; }
  /// Largest |D^alpha (h_j o gamma_j)| over j and |alpha| = 0..4 (finite differences).
  const std::array<double, 5>& derivative_bounds() const { return derivative_bounds_; }
  /// True when the balls of radius epsilon/2 already cover every grid point.
  bool covered_by_half_balls() const { return half_cover_; }

  /// h_j sampled on the whole model grid (zero outside the ball).
  std::vector<double> bump(int j) const;
  /// max_x |sum_j h_j(x) - 1|
  double partition_defect() const;

  /// Same atlas with replaced chart maps (test fixtures for transition checks).
  Atlas with_charts(std::vector<Chart> charts) const;

 private:
  friend Atlas build_atlas(const Model&, double, double, double);
  friend Atlas build_global_atlas(const Model&);

  Model model_;
  Grid grid_;
  Grid patch_grid_;
  double epsilon_ = 0.0;
  double spacing_ = 0.0;
  double sharpness_ = 1.0;
  bool global_ = false;
  bool half_cover_ = false;
  std::vector<Chart> charts_;
  std::vector<std::vector<PatchPoint>> patches_;
  std::vector<std::vector<int>> overlaps_;
  int cover_order_ = 0;
  std::array<double, 5> derivative_bounds_{};
};

/// Lattice centers with the given spacing (rounded down to divide the
/// period), bumps exp(-sharpness / (1 - |y/eps|^2)) normalized to sum to 1.
/// Throws CoverGapError when spacing > epsilon or a grid point is uncovered,
/// std::invalid_argument when epsilon exceeds half a period.
Atlas build_atlas(const Model& model, double epsilon, double spacing, double sharpness = 1.0);

/// Single chart covering the model by the identity trivialization (h = 1,
/// patch grid = model grid). Its patch norm is the global Fourier norm.
Atlas build_global_atlas(const Model& model);

struct TransitionCertificate {
  int order = 0;
  int pairs_checked = 0;
  /// Max over pairs of the largest |D^alpha T| with |alpha| = m, m = 0..order.
  std::array<double, 5> max_by_order{};
  /// Min over pairs of the same per-pair constants.
  std::array<double, 5> min_by_order{};
  /// Max over pairs of |DT - I| (flat charts: translations).
  double jacobian_identity_error = 0.0;
};

/// Bounds derivatives of every transition kappa_i o gamma_j over the overlap.
TransitionCertificate certify_bounded_geometry(const Atlas& atlas, int order);

struct PatchVector {
  std::vector<int> chart_ids;
  std::vector<GridFunction> entries;
};

struct Localized {
  PatchVector patches;
  double norm = 0.0;  // (sum_j ||patch_j||_phi^2)^{1/2}
};

Localized localize_F(const Atlas& atlas, const GridFunction& u, const Weight& phi);
/// sum_j (H_j v_j) o kappa_j, zero-extended; G(F(u)) = u.
GridFunction glue_G(const Atlas& atlas, const PatchVector& v);
double patch_norm(const Atlas& atlas, const GridFunction& u, const Weight& phi);

struct NormRatios {
  double c_low = 0.0;
  double c_high = 0.0;
  int trials = 0;
};

/// Extreme ratios ||u||_atlas / ||u||_reference over band-limited trials
/// (integer frequencies |k| <= kmax on the model grid).
NormRatios patch_norm_equivalence(const Atlas& atlas, const Atlas& reference, const Weight& phi,
                                  int trials, int kmax, Rng& rng);

/// sup over trials of ||chi u||_phi / ||u||_phi.
double multiplier_bound(const GridFunction& chi, const Weight& phi, int trials, int kmax,
                        Rng& rng);

struct L2Sandwich {
  double lower = 0.0;  // min_x (sum_j h_j(x)^2)^{1/2}
  double upper = 0.0;  // max_x (sum_j h_j(x)^2)^{1/2}
};

/// lower ||u||_{L2} <= patch norm (phi = 1) <= upper ||u||_{L2}.
L2Sandwich l2_sandwich(const Atlas& atlas);

}  // namespace sobscale
