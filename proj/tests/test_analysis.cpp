#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "scramble/analysis.hpp"
#include "scramble/curves.hpp"
#include "scramble/model.hpp"
#include "support.hpp"

using namespace scramble;

namespace {

OtocCurve synthetic_curve(int n, double alpha, double t_max, double dt,
                          const std::function<double(double)>& f) {
  OtocCurve c;
  c.engine = "exact";
  c.params.n = n;
  c.params.alpha = alpha;
  c.params.w = 2.0;
  c.params.alpha_tilde = 0.5;
  for (double t = 0.0; t <= t_max + 1e-12; t += dt) {
    c.times.push_back(t);
    c.c_mean.conservativeResize(static_cast<Eigen::Index>(c.times.size()));
    c.c_mean[c.c_mean.size() - 1] = f(t);
  }
  c.c_r = c.c_mean.transpose().replicate(n - 1, 1);
  c.check();
  return c;
}

}  // namespace

TEST_CASE("aggregate reproduces hand-computed moments") {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  const MeanSem m = aggregate(x);
  CHECK(m.count == 4);
  CHECK(m.mean == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(m.sem == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-13));

  const std::vector<double> one{7.0};
  CHECK(aggregate(one).mean == 7.0);
  CHECK(aggregate(one).sem == 0.0);
  CHECK(aggregate({}).count == 0);
}

TEST_CASE("linear fit is exact on its own model class") {
  std::vector<double> x, y;
  for (int k = 0; k < 9; ++k) {
    x.push_back(0.3 * k - 1.0);
    y.push_back(3.0 * x.back() - 2.0);
  }
  const LinFit fit = fit_linear(x, y);
  REQUIRE(fit.ok);
  CHECK(fit.slope == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(fit.intercept == doctest::Approx(-2.0).epsilon(1e-13));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(fit.slope_se < 1e-10);
}

TEST_CASE("linear fit matches a hand-solved least squares") {
  const std::vector<double> x{0.0, 1.0, 2.0};
  const std::vector<double> y{0.0, 1.0, 1.0};
  const LinFit fit = fit_linear(x, y);
  REQUIRE(fit.ok);
  CHECK(fit.slope == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(fit.intercept == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
  CHECK(fit.r2 == doctest::Approx(0.75).epsilon(1e-13));
}

TEST_CASE("crossing point interpolates the first sign change") {
  const std::vector<double> grid{0.0, 1.0, 2.0};
  const std::vector<double> a{0.0, 0.5, 2.0};
  const std::vector<double> b{1.0, 1.0, 1.0};
  const CrossingEstimate est = crossing_point(grid, a, b);
  REQUIRE(est.found);
  CHECK(est.w == doctest::Approx(4.0 / 3.0).epsilon(1e-13));

  const std::vector<double> low{0.0, 0.1, 0.2};
  CHECK(!crossing_point(grid, low, b).found);
}

TEST_CASE("bootstrap crossing is deterministic and sized by the scatter") {
  const std::vector<double> grid{0.0, 0.5, 1.0, 1.5, 2.0};
  std::vector<std::vector<double>> sa(grid.size()), sb(grid.size());
  testing::NormalStream noise(12);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (int r = 0; r < 12; ++r) {
      sa[k].push_back(grid[k] - 1.0 + 0.05 * noise.next());
      sb[k].push_back(0.0 + 0.05 * noise.next());
    }
  }
  const CrossingEstimate e1 = crossing_with_bootstrap(grid, sa, sb, 64, 5);
  const CrossingEstimate e2 = crossing_with_bootstrap(grid, sa, sb, 64, 5);
  REQUIRE(e1.found);
  CHECK(e1.w == e2.w);
  CHECK(e1.sigma == e2.sigma);
  CHECK(e1.w == doctest::Approx(1.0).epsilon(0.1));
  CHECK(e1.sigma > 0.0);
  CHECK(e1.sigma < 0.2);
}

TEST_CASE("collapse recovers planted critical parameters") {
  const double wc = 0.15, nu = 0.9;
  auto master = [](double x) { return 0.53 - 0.145 * (std::tanh(x) + 1.0); };
  std::vector<SizeSeries> series;
  testing::NormalStream noise(9);
  for (int n : {8, 10, 12, 14}) {
    SizeSeries s;
    s.n = n;
    for (double w = 0.05; w <= 0.2501; w += 0.025) {
      const double y = master((w - wc) * std::pow(n, 1.0 / nu));
      s.w.push_back(w);
      s.y.push_back(y);
      std::vector<double> reps;
      for (int r = 0; r < 6; ++r) reps.push_back(y + 2e-4 * noise.next());
      s.samples.push_back(reps);
    }
    series.push_back(std::move(s));
  }
  CollapseWindow window;
  window.wc_lo = 0.08;
  window.wc_hi = 0.22;
  window.nu_lo = 0.5;
  window.nu_hi = 1.5;
  const CollapseResult res = data_collapse(series, window, 16, 3);
  REQUIRE(res.ok);
  CHECK(res.wc == doctest::Approx(wc).epsilon(0.05));
  CHECK(res.nu == doctest::Approx(nu).epsilon(0.12));
  CHECK(res.wc_err < 0.02);
  CHECK(res.nu_err < 0.2);
}

TEST_CASE("rescaled family members overlay within interpolation error") {
  const int n = 8;
  const double factor = std::pow(8.0, 0.5);  // alpha 1.0 against 0.5
  auto shape = [](double t) { return 1.0 - std::exp(-0.3 * t * t); };
  const OtocCurve a = synthetic_curve(n, 0.5, 3.0, 0.05, shape);
  const OtocCurve b = synthetic_curve(
      n, 1.0, 3.0 * factor + 0.1, 0.02,
      [&](double t) { return shape(t / factor); });
  CHECK(rescaling_max_deviation(a, b) < 2e-4);

  const OtocCurve off = synthetic_curve(
      n, 1.0, 3.0 * factor + 0.1, 0.02,
      [&](double t) { return shape(t / factor) + 0.05 * std::sin(t); });
  CHECK(rescaling_max_deviation(a, off) > 0.03);
}

TEST_CASE("scrambling-time normalization divides the size power") {
  CHECK(normalized_scrambling_time(10.0, 16, 1.0) ==
        doctest::Approx(2.5).epsilon(1e-14));
  CHECK(normalized_scrambling_time(3.7, 12, 0.5) ==
        doctest::Approx(3.7).epsilon(1e-14));
}

TEST_CASE("threshold crossings interpolate the sampled curve") {
  const std::vector<double> times{0.0, 1.0, 2.0};
  Eigen::VectorXd values(3);
  values << 0.0, 0.2, 0.4;
  const std::optional<double> t = first_crossing(times, values, 0.3);
  REQUIRE(t.has_value());
  CHECK(*t == doctest::Approx(1.5).epsilon(1e-13));
  CHECK(!first_crossing(times, values, 0.5).has_value());

  const OtocCurve c = synthetic_curve(
      4, 0.5, 2.0, 0.1, [](double t) { return 0.25 * t; });
  const std::optional<double> ts = scrambling_time(c);
  REQUIRE(ts.has_value());
  CHECK(*ts == doctest::Approx(kQuantumThreshold / 0.25).epsilon(1e-12));
}

TEST_CASE("curve averaging is pointwise and guards the grid") {
  auto up = [](double t) { return 0.1 * t; };
  auto down = [](double t) { return 0.3 * t; };
  const OtocCurve a = synthetic_curve(5, 0.5, 1.0, 0.25, up);
  OtocCurve b = synthetic_curve(5, 0.5, 1.0, 0.25, down);
  b.converged = false;
  const OtocCurve avg = average_curves({a, b});
  CHECK(!avg.converged);
  for (Eigen::Index k = 0; k < avg.c_mean.size(); ++k)
    CHECK(avg.c_mean[k] ==
          doctest::Approx(0.5 * (a.c_mean[k] + b.c_mean[k])).epsilon(1e-14));
  CHECK((avg.c_r.row(0).transpose() - avg.c_mean).cwiseAbs().maxCoeff() <
        1e-14);

  const OtocCurve other = synthetic_curve(5, 0.5, 1.5, 0.25, up);
  CHECK_THROWS_AS(average_curves({a, other}), std::invalid_argument);
}
