#include "scramble/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scramble/linalg.hpp"
#include "scramble/prng.hpp"

namespace scramble {

MeanSem aggregate(std::span<const double> samples) {
  MeanSem out;
  out.count = static_cast<int>(samples.size());
  if (out.count == 0) return out;
  out.mean = pairwise_sum(samples.data(), samples.size()) /
             static_cast<double>(out.count);
  if (out.count < 2) return out;
  double ss = 0.0;
  for (double v : samples) ss += (v - out.mean) * (v - out.mean);
  out.sem = std::sqrt(ss / (out.count - 1) / out.count);
  return out;
}

LinFit fit_linear(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("fit_linear: length mismatch");
  LinFit fit;
  const int m = static_cast<int>(x.size());
  fit.points = m;
  if (m < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (int k = 0; k < m; ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
    syy += y[k] * y[k];
  }
  const double det = m * sxx - sx * sx;
  if (std::abs(det) < 1e-30) return fit;
  fit.slope = (m * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / m;
  double ss_res = 0.0;
  for (int k = 0; k < m; ++k) {
    const double e = y[k] - (fit.intercept + fit.slope * x[k]);
    ss_res += e * e;
  }
  const double ss_tot = syy - sy * sy / m;
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  if (m > 2) {
    const double var = ss_res / (m - 2);
    fit.slope_se = std::sqrt(var * m / det);
    fit.intercept_se = std::sqrt(var * sxx / det);
  }
  fit.ok = true;
  return fit;
}

CrossingEstimate crossing_point(std::span<const double> grid,
                                std::span<const double> a,
                                std::span<const double> b) {
  if (grid.size() != a.size() || grid.size() != b.size())
    throw std::invalid_argument("crossing_point: length mismatch");
  CrossingEstimate est;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double d0 = a[k - 1] - b[k - 1];
    const double d1 = a[k] - b[k];
    if (d0 == 0.0) {
      est.w = grid[k - 1];
      est.found = true;
      return est;
    }
    if (d0 * d1 < 0.0) {
      const double f = d0 / (d0 - d1);
      est.w = grid[k - 1] + f * (grid[k] - grid[k - 1]);
      est.found = true;
      return est;
    }
  }
  return est;
}

namespace {

// Deterministic bootstrap resampling: mean of `samples` drawn with
// replacement under the given key.
double resampled_mean(const std::vector<double>& samples, std::uint64_t key) {
  const std::size_t m = samples.size();
  double acc = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const std::uint64_t draw = stream_word(key, static_cast<std::uint64_t>(k));
    acc += samples[draw % m];
  }
  return acc / static_cast<double>(m);
}

}  // namespace

CrossingEstimate crossing_with_bootstrap(
    std::span<const double> grid,
    const std::vector<std::vector<double>>& samples_a,
    const std::vector<std::vector<double>>& samples_b, int n_boot,
    std::uint64_t seed) {
  if (samples_a.size() != grid.size() || samples_b.size() != grid.size())
    throw std::invalid_argument("crossing_with_bootstrap: length mismatch");
  std::vector<double> mean_a(grid.size()), mean_b(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (samples_a[k].empty() || samples_b[k].empty())
      throw std::invalid_argument("crossing_with_bootstrap: empty sample set");
    mean_a[k] = aggregate(samples_a[k]).mean;
    mean_b[k] = aggregate(samples_b[k]).mean;
  }
  CrossingEstimate est = crossing_point(grid, mean_a, mean_b);
  if (!est.found || n_boot < 2) return est;

  std::vector<double> hits;
  hits.reserve(static_cast<std::size_t>(n_boot));
  std::vector<double> ra(grid.size()), rb(grid.size());
  for (int boot = 0; boot < n_boot; ++boot) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      ra[k] = resampled_mean(samples_a[k],
                             stream_word(seed, 2 * boot, static_cast<std::uint64_t>(k)));
      rb[k] = resampled_mean(samples_b[k],
                             stream_word(seed, 2 * boot + 1, static_cast<std::uint64_t>(k)));
    }
    const CrossingEstimate r = crossing_point(grid, ra, rb);
    if (r.found) hits.push_back(r.w);
  }
  if (hits.size() >= 2) {
    double mean = 0.0;
    for (double v : hits) mean += v;
    mean /= static_cast<double>(hits.size());
    double ss = 0.0;
    for (double v : hits) ss += (v - mean) * (v - mean);
    est.sigma = std::sqrt(ss / (static_cast<double>(hits.size()) - 1.0));
  }
  return est;
}

namespace {

struct ScaledPoint {
  double x;
  double y;
};

double collapse_cost(const std::vector<SizeSeries>& series,
                     const std::vector<std::vector<double>>& values, double wc,
                     double nu) {
  // values[s][k] mirrors series[s].y, possibly bootstrap-resampled.
  const double inv_nu = 1.0 / nu;
  std::vector<std::vector<ScaledPoint>> scaled(series.size());
  for (std::size_t s = 0; s < series.size(); ++s) {
    const double f = std::pow(static_cast<double>(series[s].n), inv_nu);
    for (std::size_t k = 0; k < series[s].w.size(); ++k)
      scaled[s].push_back({(series[s].w[k] - wc) * f, values[s][k]});
  }
  double cost = 0.0;
  int used = 0;
  std::vector<ScaledPoint> master;
  for (std::size_t s = 0; s < series.size(); ++s) {
    master.clear();
    for (std::size_t o = 0; o < series.size(); ++o) {
      if (o == s) continue;
      master.insert(master.end(), scaled[o].begin(), scaled[o].end());
    }
    std::sort(master.begin(), master.end(),
              [](const ScaledPoint& a, const ScaledPoint& b) { return a.x < b.x; });
    if (master.size() < 2) continue;
    for (const ScaledPoint& p : scaled[s]) {
      if (p.x < master.front().x || p.x > master.back().x) continue;
      auto it = std::lower_bound(
          master.begin(), master.end(), p.x,
          [](const ScaledPoint& m, double x) { return m.x < x; });
      double y_hat;
      if (it == master.begin()) {
        y_hat = it->y;
      } else {
        const ScaledPoint& hi = *it;
        const ScaledPoint& lo = *(it - 1);
        const double span = hi.x - lo.x;
        y_hat = span > 0.0 ? lo.y + (hi.y - lo.y) * (p.x - lo.x) / span
                           : 0.5 * (lo.y + hi.y);
      }
      cost += (p.y - y_hat) * (p.y - y_hat);
      ++used;
    }
  }
  return used > 0 ? cost / used : 1e300;
}

struct GridBest {
  double wc = 0.0, nu = 0.0, cost = 1e300;
};

GridBest refine_search(const std::vector<SizeSeries>& series,
                       const std::vector<std::vector<double>>& values,
                       CollapseWindow win) {
  GridBest best;
  constexpr int kStages = 4;
  constexpr int kPoints = 17;
  for (int stage = 0; stage < kStages; ++stage) {
    GridBest stage_best;
    for (int a = 0; a < kPoints; ++a) {
      const double wc =
          win.wc_lo + (win.wc_hi - win.wc_lo) * a / (kPoints - 1.0);
      for (int b = 0; b < kPoints; ++b) {
        const double nu =
            win.nu_lo + (win.nu_hi - win.nu_lo) * b / (kPoints - 1.0);
        const double c = collapse_cost(series, values, wc, nu);
        if (c < stage_best.cost) stage_best = {wc, nu, c};
      }
    }
    best = stage_best;
    const double wc_span = (win.wc_hi - win.wc_lo) / 4.0;
    const double nu_span = (win.nu_hi - win.nu_lo) / 4.0;
    win = {best.wc - wc_span, best.wc + wc_span, best.nu - nu_span,
           best.nu + nu_span};
    if (win.nu_lo < 0.05) win.nu_lo = 0.05;
  }
  return best;
}

}  // namespace

CollapseResult data_collapse(const std::vector<SizeSeries>& series,
                             const CollapseWindow& window, int n_boot,
                             std::uint64_t seed) {
  if (series.size() < 3)
    throw std::invalid_argument("data_collapse: need at least 3 sizes");
  for (const SizeSeries& s : series)
    if (s.w.size() != s.y.size() || s.w.size() < 3)
      throw std::invalid_argument("data_collapse: bad series");

  std::vector<std::vector<double>> values(series.size());
  for (std::size_t s = 0; s < series.size(); ++s) values[s] = series[s].y;

  const GridBest best = refine_search(series, values, window);
  CollapseResult res;
  res.wc = best.wc;
  res.nu = best.nu;
  res.cost = best.cost;
  res.ok = best.cost < 1e299;
  if (!res.ok || n_boot < 2) return res;

  std::vector<double> wcs, nus;
  for (int boot = 0; boot < n_boot; ++boot) {
    std::vector<std::vector<double>> resampled(series.size());
    for (std::size_t s = 0; s < series.size(); ++s) {
      resampled[s].resize(series[s].y.size());
      for (std::size_t k = 0; k < series[s].y.size(); ++k) {
        if (!series[s].samples.empty() && !series[s].samples[k].empty()) {
          resampled[s][k] = resampled_mean(
              series[s].samples[k],
              stream_word(seed, static_cast<std::uint64_t>(boot),
                          static_cast<std::uint64_t>(s),
                          static_cast<std::uint64_t>(k)));
        } else {
          resampled[s][k] = series[s].y[k];
        }
      }
    }
    const GridBest b = refine_search(series, resampled, window);
    if (b.cost < 1e299) {
      wcs.push_back(b.wc);
      nus.push_back(b.nu);
    }
  }
  if (wcs.size() >= 2) {
    const MeanSem mw = aggregate(wcs);
    const MeanSem mn = aggregate(nus);
    res.wc_err = mw.sem * std::sqrt(static_cast<double>(mw.count));
    res.nu_err = mn.sem * std::sqrt(static_cast<double>(mn.count));
  }
  return res;
}

double rescaling_max_deviation(const OtocCurve& a, const OtocCurve& b) {
  a.check();
  b.check();
  if (a.params.n != b.params.n)
    throw std::invalid_argument("rescaling_max_deviation: size mismatch");
  const double factor =
      rescaled_time_factor(b.params.alpha, a.params.alpha, a.params.n);
  double worst = 0.0;
  int compared = 0;
  for (std::size_t k = 0; k < a.times.size(); ++k) {
    const double tb = a.times[k] * factor;
    if (tb < b.times.front() - 1e-12 || tb > b.times.back() + 1e-12) continue;
    // locate tb in b.times
    const auto it = std::lower_bound(b.times.begin(), b.times.end(), tb);
    double val;
    if (it == b.times.begin()) {
      val = b.c_mean[0];
    } else if (it == b.times.end()) {
      val = b.c_mean[b.c_mean.size() - 1];
    } else {
      const std::size_t hi = static_cast<std::size_t>(it - b.times.begin());
      const std::size_t lo = hi - 1;
      const double span = b.times[hi] - b.times[lo];
      const double f = span > 0.0 ? (tb - b.times[lo]) / span : 0.0;
      val = (1.0 - f) * b.c_mean[static_cast<Eigen::Index>(lo)] +
            f * b.c_mean[static_cast<Eigen::Index>(hi)];
    }
    worst = std::max(
        worst, std::abs(val - a.c_mean[static_cast<Eigen::Index>(k)]));
    ++compared;
  }
  if (compared == 0)
    throw std::invalid_argument("rescaling_max_deviation: disjoint windows");
  return worst;
}

double normalized_scrambling_time(double t_s, int n, double alpha) {
  return t_s / std::pow(static_cast<double>(n), alpha - 0.5);
}

}  // namespace scramble
