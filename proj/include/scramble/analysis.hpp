#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "scramble/curves.hpp"

namespace scramble {

struct MeanSem {
  double mean = 0.0;
  double sem = 0.0;
  int count = 0;
};

MeanSem aggregate(std::span<const double> samples);

struct LinFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  int points = 0;
  bool ok = false;
};

LinFit fit_linear(std::span<const double> x, std::span<const double> y);

// Intersection of two piecewise-linear curves sampled on one grid; the
// first sign change of (a - b) counts.
struct CrossingEstimate {
  double w = 0.0;
  double sigma = 0.0;
  bool found = false;
};

CrossingEstimate crossing_point(std::span<const double> grid,
                                std::span<const double> a,
                                std::span<const double> b);

// Same, with the uncertainty from resampling the per-point realization sets
// (bootstrap over disorder, deterministic in seed).
CrossingEstimate crossing_with_bootstrap(
    std::span<const double> grid,
    const std::vector<std::vector<double>>& samples_a,
    const std::vector<std::vector<double>>& samples_b, int n_boot,
    std::uint64_t seed);

// Finite-size collapse of y(w, n) onto y = f((w - wc) n^{1/nu}). The cost of
// a candidate (wc, nu) is the leave-one-size-out dispersion: each size's
// points are compared against the master curve interpolated through the
// remaining sizes. Fitted by a refining grid search; errors by bootstrap
// over the per-point samples.
struct SizeSeries {
  int n = 0;
  std::vector<double> w;
  std::vector<double> y;                         // aggregated values
  std::vector<std::vector<double>> samples;      // per w, raw realizations
};

struct CollapseWindow {
  double wc_lo = 0.0, wc_hi = 0.0;
  double nu_lo = 0.0, nu_hi = 0.0;
};

struct CollapseResult {
  double wc = 0.0, nu = 0.0;
  double wc_err = 0.0, nu_err = 0.0;
  double cost = 0.0;
  bool ok = false;
};

CollapseResult data_collapse(const std::vector<SizeSeries>& series,
                             const CollapseWindow& window, int n_boot,
                             std::uint64_t seed);

// Largest pointwise deviation between curve a and curve b replayed at
// rescaled times t * n^(alpha_b - alpha_a), interpolating b linearly.
double rescaling_max_deviation(const OtocCurve& a, const OtocCurve& b);

// Normalization used to compare scrambling times across interaction
// exponents: t_s(alpha, n) / n^(alpha - 1/2).
double normalized_scrambling_time(double t_s, int n, double alpha);

}  // namespace scramble
