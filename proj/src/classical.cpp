#include "scramble/classical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scramble/prng.hpp"

namespace scramble {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

inline Eigen::Vector3d cross(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return a.cross(b);
}

}  // namespace

Eigen::Matrix3Xd classical_rhs(const ModelParams& params,
                               const Eigen::VectorXd& h,
                               const Eigen::Matrix3Xd& n) {
  const int sites = params.n;
  const double g = params.pair_coupling();
  const double c = params.disorder_coeff();
  const double sx = n.row(0).sum();
  const double sy = n.row(1).sum();
  Eigen::Matrix3Xd out(3, sites);
  for (int i = 0; i < sites; ++i) {
    const Eigen::Vector3d b(g * (sx - n(0, i)) + c * h[i], g * (sy - n(1, i)),
                            0.0);
    out.col(i) = cross(b, n.col(i));
  }
  return out;
}

Eigen::Matrix3Xd classical_tangent_rhs(const ModelParams& params,
                                       const Eigen::VectorXd& h,
                                       const Eigen::Matrix3Xd& n,
                                       const Eigen::Matrix3Xd& dn) {
  const int sites = params.n;
  const double g = params.pair_coupling();
  const double c = params.disorder_coeff();
  const double sx = n.row(0).sum();
  const double sy = n.row(1).sum();
  const double dsx = dn.row(0).sum();
  const double dsy = dn.row(1).sum();
  Eigen::Matrix3Xd out(3, sites);
  for (int i = 0; i < sites; ++i) {
    const Eigen::Vector3d b(g * (sx - n(0, i)) + c * h[i], g * (sy - n(1, i)),
                            0.0);
    const Eigen::Vector3d db(g * (dsx - dn(0, i)), g * (dsy - dn(1, i)), 0.0);
    out.col(i) = cross(db, n.col(i)) + cross(b, dn.col(i));
  }
  return out;
}

namespace {

struct FlowState {
  Eigen::Matrix3Xd n;
  Eigen::Matrix3Xd dn;  // unused columns stay zero for finite_diff runs
  bool with_tangent = false;
};

FlowState rhs(const ModelParams& params, const Eigen::VectorXd& h,
              const FlowState& s) {
  FlowState d;
  d.with_tangent = s.with_tangent;
  d.n = classical_rhs(params, h, s.n);
  if (s.with_tangent)
    d.dn = classical_tangent_rhs(params, h, s.n, s.dn);
  else
    d.dn.setZero(3, s.n.cols());
  return d;
}

void axpy(FlowState& y, double a, const FlowState& x) {
  y.n += a * x.n;
  if (y.with_tangent) y.dn += a * x.dn;
}

// One classic fourth-order step, then projective cleanup: spins back to
// unit length, tangent vectors back to the tangent plane (the exact flow
// conserves both).
void rk4_step(const ModelParams& params, const Eigen::VectorXd& h, double dt,
              FlowState& s) {
  const FlowState k1 = rhs(params, h, s);
  FlowState s2 = s;
  axpy(s2, 0.5 * dt, k1);
  const FlowState k2 = rhs(params, h, s2);
  FlowState s3 = s;
  axpy(s3, 0.5 * dt, k2);
  const FlowState k3 = rhs(params, h, s3);
  FlowState s4 = s;
  axpy(s4, dt, k3);
  const FlowState k4 = rhs(params, h, s4);
  axpy(s, dt / 6.0, k1);
  axpy(s, dt / 3.0, k2);
  axpy(s, dt / 3.0, k3);
  axpy(s, dt / 6.0, k4);
  for (Eigen::Index i = 0; i < s.n.cols(); ++i) {
    s.n.col(i).normalize();
    if (s.with_tangent)
      s.dn.col(i) -= s.dn.col(i).dot(s.n.col(i)) * s.n.col(i);
  }
}

Eigen::Matrix3Xd initial_spins(const ModelParams& params, std::uint64_t seed,
                               int index, int member) {
  const std::uint64_t key =
      stream_word(seed, kStreamAngles, static_cast<std::uint64_t>(index),
                  static_cast<std::uint64_t>(member));
  Eigen::Matrix3Xd n(3, params.n);
  for (int i = 0; i < params.n; ++i) {
    const double phi =
        kTwoPi * unit_double(stream_word(key, static_cast<std::uint64_t>(i)));
    n.col(i) = Eigen::Vector3d(std::cos(phi), std::sin(phi), 0.0);
  }
  return n;
}

void check_grid(const std::vector<double>& times, double dt) {
  if (times.empty())
    throw std::invalid_argument("classical_sensitivity: empty time grid");
  for (double t : times) {
    const double steps = t / dt;
    if (std::abs(steps - std::round(steps)) > 1e-6)
      throw std::invalid_argument(
          "classical_sensitivity: snapshot times must sit on the integrator grid");
  }
  for (std::size_t k = 1; k < times.size(); ++k)
    if (times[k] <= times[k - 1])
      throw std::invalid_argument("classical_sensitivity: times must increase");
}

}  // namespace

OtocCurve classical_sensitivity(const ModelParams& params,
                                const DisorderRealization& dis,
                                const std::vector<double>& times,
                                const ClassicalOptions& opts) {
  params.validate();
  if (params.n < 2)
    throw std::invalid_argument("classical_sensitivity: need at least 2 sites");
  if (opts.ensemble < 1)
    throw std::invalid_argument("classical_sensitivity: empty ensemble");
  check_grid(times, opts.dt);

  const int sites = params.n;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(sites - 1, static_cast<Eigen::Index>(times.size()));

  for (int member = 0; member < opts.ensemble; ++member) {
    const Eigen::Matrix3Xd n0 = initial_spins(params, dis.seed, dis.index, member);

    auto record = [&](Eigen::Index snap, const Eigen::VectorXd& dz) {
      acc.col(snap) += dz.cwiseAbs2();
    };

    if (opts.method == DerivMethod::tangent) {
      FlowState s;
      s.with_tangent = true;
      s.n = n0;
      s.dn.setZero(3, sites);
      // d n_0 / d phi for a rotation about z.
      s.dn.col(0) = Eigen::Vector3d(-n0(1, 0), n0(0, 0), 0.0);
      double t = 0.0;
      for (std::size_t snap = 0; snap < times.size(); ++snap) {
        while (t < times[snap] - 0.5 * opts.dt) {
          rk4_step(params, dis.h, opts.dt, s);
          t += opts.dt;
        }
        record(static_cast<Eigen::Index>(snap),
               s.dn.row(2).segment(1, sites - 1).transpose());
      }
    } else {
      FlowState plus, minus;
      plus.with_tangent = minus.with_tangent = false;
      plus.n = minus.n = n0;
      const double cp = std::cos(opts.dphi), sp = std::sin(opts.dphi);
      plus.n(0, 0) = cp * n0(0, 0) - sp * n0(1, 0);
      plus.n(1, 0) = sp * n0(0, 0) + cp * n0(1, 0);
      minus.n(0, 0) = cp * n0(0, 0) + sp * n0(1, 0);
      minus.n(1, 0) = -sp * n0(0, 0) + cp * n0(1, 0);
      plus.dn.setZero(3, sites);
      minus.dn.setZero(3, sites);
      double t = 0.0;
      for (std::size_t snap = 0; snap < times.size(); ++snap) {
        while (t < times[snap] - 0.5 * opts.dt) {
          rk4_step(params, dis.h, opts.dt, plus);
          rk4_step(params, dis.h, opts.dt, minus);
          t += opts.dt;
        }
        const Eigen::VectorXd dz =
            (plus.n.row(2).segment(1, sites - 1) -
             minus.n.row(2).segment(1, sites - 1))
                .transpose() /
            (2.0 * opts.dphi);
        record(static_cast<Eigen::Index>(snap), dz);
      }
    }
  }

  OtocCurve curve;
  curve.engine = "classical";
  curve.params = params;
  curve.seed = dis.seed;
  curve.index = dis.index;
  curve.ensemble = opts.ensemble;
  curve.times = times;
  curve.c_r = acc / static_cast<double>(opts.ensemble);
  curve.c_mean = curve.c_r.colwise().mean();
  curve.check();

  if (opts.stop_above > 0.0) {
    Eigen::Index keep = curve.c_mean.size();
    for (Eigen::Index k = 0; k < curve.c_mean.size(); ++k) {
      if (curve.c_mean[k] > opts.stop_above) {
        keep = k + 1;
        break;
      }
    }
    if (keep < curve.c_mean.size()) {
      curve.times.resize(static_cast<std::size_t>(keep));
      curve.c_r = curve.c_r.leftCols(keep).eval();
      curve.c_mean = curve.c_mean.head(keep).eval();
    }
  }
  return curve;
}

LyapunovFit lyapunov_fit(const std::vector<double>& times,
                         const Eigen::VectorXd& c, double t0, double t1) {
  if (c.size() != static_cast<Eigen::Index>(times.size()))
    throw std::invalid_argument("lyapunov_fit: length mismatch");
  LyapunovFit fit;
  fit.t0 = t0;
  fit.t1 = t1;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int m = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t0 || times[k] > t1 || c[static_cast<Eigen::Index>(k)] <= 0.0)
      continue;
    const double x = times[k];
    const double y = std::log(c[static_cast<Eigen::Index>(k)]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++m;
  }
  fit.points = m;
  if (m < 3) return fit;
  const double det = m * sxx - sx * sx;
  if (std::abs(det) < 1e-30) return fit;
  fit.rate = (m * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.rate * sx) / m;
  const double ss_tot = syy - sy * sy / m;
  double ss_res = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t0 || times[k] > t1 || c[static_cast<Eigen::Index>(k)] <= 0.0)
      continue;
    const double e = std::log(c[static_cast<Eigen::Index>(k)]) -
                     (fit.intercept + fit.rate * times[k]);
    ss_res += e * e;
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  fit.ok = true;
  return fit;
}

LyapunovFit lyapunov_fit_auto(const std::vector<double>& times,
                              const Eigen::VectorXd& c) {
  // Local slopes of ln C on interior points with positive values.
  std::vector<double> ts, slope;
  for (std::size_t k = 1; k + 1 < times.size(); ++k) {
    const double cm = c[static_cast<Eigen::Index>(k - 1)];
    const double cp = c[static_cast<Eigen::Index>(k + 1)];
    if (cm <= 0.0 || cp <= 0.0) continue;
    ts.push_back(times[k]);
    slope.push_back(std::log(cp / cm) / (times[k + 1] - times[k - 1]));
  }
  LyapunovFit best;
  if (ts.size() < 5) return best;

  // Longest run where the slope stays within 10 percent of its median.
  std::size_t best_lo = 0, best_len = 0;
  for (std::size_t lo = 0; lo < ts.size(); ++lo) {
    std::vector<double> window;
    for (std::size_t hi = lo; hi < ts.size(); ++hi) {
      window.push_back(slope[hi]);
      std::vector<double> sorted = window;
      std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                       sorted.end());
      const double med = sorted[sorted.size() / 2];
      if (med <= 0.0) break;
      bool ok = true;
      for (double s : window)
        if (std::abs(s - med) > 0.1 * std::abs(med)) {
          ok = false;
          break;
        }
      if (!ok) break;
      if (hi - lo + 1 > best_len) {
        best_len = hi - lo + 1;
        best_lo = lo;
      }
    }
  }
  if (best_len >= 5)
    return lyapunov_fit(times, c, ts[best_lo], ts[best_lo + best_len - 1]);

  // Fallback for noisy data: the decades around the unit-sensitivity
  // crossing bracket the exponential stage.
  double lo = times.front(), hi = times.back();
  for (std::size_t k = 0; k < times.size(); ++k)
    if (c[static_cast<Eigen::Index>(k)] > 1e-2) {
      lo = times[k];
      break;
    }
  for (std::size_t k = 0; k < times.size(); ++k)
    if (c[static_cast<Eigen::Index>(k)] > 1e2) {
      hi = times[k];
      break;
    }
  if (hi > lo) return lyapunov_fit(times, c, lo, hi);
  return best;
}

}  // namespace scramble
