#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "scramble/curves.hpp"
#include "scramble/model.hpp"

namespace scramble {

// Classical limit: unit vectors n_i precessing as dn_i/dt = B_i x n_i with
// the local field
//   B_i = J/(2 N^alpha) (Sx - nx_i, Sy - ny_i, 0) + (h_i, 0, 0),
// S = sum_j n_j. Collective sums keep one derivative evaluation at O(N).
Eigen::Matrix3Xd classical_rhs(const ModelParams& params,
                               const Eigen::VectorXd& h,
                               const Eigen::Matrix3Xd& n);

// Linearized flow along a trajectory: d(dn)/dt = dB x n + B x dn.
Eigen::Matrix3Xd classical_tangent_rhs(const ModelParams& params,
                                       const Eigen::VectorXd& h,
                                       const Eigen::Matrix3Xd& n,
                                       const Eigen::Matrix3Xd& dn);

enum class DerivMethod { tangent, finite_diff };

struct ClassicalOptions {
  int ensemble = 100;
  double dt = 0.01;  // fixed step of the fourth-order integrator
  DerivMethod method = DerivMethod::tangent;
  double dphi = 1e-5;      // finite-difference rotation angle
  double stop_above = 0.0;  // early stop once mean sensitivity exceeds this
};

// Ensemble-averaged sensitivity C_cl(r, t) = < (d nz_r / d phi)^2 > for a
// rotation of spin 0 about z. Initial spins lie in the x-y plane at angles
// drawn per (seed, index, member, site); the rotation makes dn_0 = z x n_0.
// Snapshot times must sit on the integrator grid.
OtocCurve classical_sensitivity(const ModelParams& params,
                                const DisorderRealization& dis,
                                const std::vector<double>& times,
                                const ClassicalOptions& opts);

struct LyapunovFit {
  double rate = 0.0;       // growth exponent of C_cl, i.e. 2 lambda
  double intercept = 0.0;  // ln C at t = 0 extrapolation
  double r2 = 0.0;
  double t0 = 0.0, t1 = 0.0;
  int points = 0;
  bool ok = false;
};

// Least squares of ln C against t over [t0, t1].
LyapunovFit lyapunov_fit(const std::vector<double>& times,
                         const Eigen::VectorXd& c, double t0, double t1);

// Window selection: the longest stretch where the local log-slope stays
// within 10 percent of its running median, between the initial transient
// and saturation.
LyapunovFit lyapunov_fit_auto(const std::vector<double>& times,
                              const Eigen::VectorXd& c);

}  // namespace scramble
