#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "scramble/prng.hpp"

namespace scramble::testing {

// Independent Kronecker assembly for small-system oracles.
inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Eigen::MatrixXcd chain_operator(const Eigen::Matrix2cd& op, int site, int n) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  const Eigen::Matrix2cd eye = Eigen::Matrix2cd::Identity();
  for (int i = 0; i < n; ++i) out = kron(out, i == site ? op : eye);
  return out;
}

// Deterministic standard normals (Box-Muller over the toolkit key chain).
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : key_(seed) {}
  double next() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = unit_double(stream_word(key_, counter_++));
    } while (u1 <= 1e-300);
    const double u2 = unit_double(stream_word(key_, counter_++));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool have_ = false;
  double spare_ = 0.0;
};

}  // namespace scramble::testing
