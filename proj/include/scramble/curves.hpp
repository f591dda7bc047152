#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scramble/model.hpp"

namespace scramble {

inline constexpr double kQuantumThreshold = 0.3;
inline constexpr double kClassicalThreshold = 1.0;

// Commutator growth C(r, t) for one disorder realization, produced by any of
// the dynamical engines. Row r-1 of c_r holds C(r, t) for site distance r
// from the probe at site 0; c_mean averages rows.
struct OtocCurve {
  std::string engine;  // "exact", "tdvp-mpo", "classical"
  ModelParams params;
  std::uint64_t seed = 0;
  int index = 0;
  int chi = 0;          // bond cap, 0 for dense engines
  int ensemble = 0;     // trajectory count, classical engine only
  bool converged = true;
  std::vector<double> times;
  Eigen::MatrixXd c_r;     // (n-1) x times
  Eigen::VectorXd c_mean;  // times

  void check() const;  // shape consistency, throws std::invalid_argument
};

// First upward crossing of the threshold, linearly interpolated. Returns
// nullopt when the curve never reaches it inside the sampled window.
std::optional<double> first_crossing(const std::vector<double>& times,
                                     const Eigen::VectorXd& values,
                                     double threshold);

std::optional<double> scrambling_time(const OtocCurve& curve,
                                      double threshold = kQuantumThreshold);

// Pointwise average of per-realization curves sharing one time grid.
OtocCurve average_curves(const std::vector<OtocCurve>& curves);

}  // namespace scramble
