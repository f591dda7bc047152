#include "scramble/curves.hpp"

#include <cmath>
#include <stdexcept>

namespace scramble {

void OtocCurve::check() const {
  const Eigen::Index nt = static_cast<Eigen::Index>(times.size());
  if (nt == 0) throw std::invalid_argument("OtocCurve: empty time grid");
  if (c_mean.size() != nt || c_r.cols() != nt || c_r.rows() != params.n - 1)
    throw std::invalid_argument("OtocCurve: shape mismatch");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (times[k] <= times[k - 1])
      throw std::invalid_argument("OtocCurve: times must increase");
}

std::optional<double> first_crossing(const std::vector<double>& times,
                                     const Eigen::VectorXd& values,
                                     double threshold) {
  if (values.size() != static_cast<Eigen::Index>(times.size()))
    throw std::invalid_argument("first_crossing: length mismatch");
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (values[k] < threshold) continue;
    if (k == 0) return times[0];
    const double f = (threshold - values[k - 1]) / (values[k] - values[k - 1]);
    return times[k - 1] + f * (times[k] - times[k - 1]);
  }
  return std::nullopt;
}

std::optional<double> scrambling_time(const OtocCurve& curve, double threshold) {
  curve.check();
  return first_crossing(curve.times, curve.c_mean, threshold);
}

OtocCurve average_curves(const std::vector<OtocCurve>& curves) {
  if (curves.empty()) throw std::invalid_argument("average_curves: no input");
  OtocCurve avg = curves.front();
  avg.check();
  for (std::size_t k = 1; k < curves.size(); ++k) {
    const OtocCurve& c = curves[k];
    c.check();
    if (c.times.size() != avg.times.size() || c.params.n != avg.params.n)
      throw std::invalid_argument("average_curves: mismatched grids");
    for (std::size_t t = 0; t < avg.times.size(); ++t)
      if (std::abs(c.times[t] - avg.times[t]) > 1e-12)
        throw std::invalid_argument("average_curves: mismatched grids");
    avg.c_r += c.c_r;
    avg.c_mean += c.c_mean;
    avg.converged = avg.converged && c.converged;
  }
  const double inv = 1.0 / static_cast<double>(curves.size());
  avg.c_r *= inv;
  avg.c_mean *= inv;
  avg.index = -1;
  return avg;
}

}  // namespace scramble
