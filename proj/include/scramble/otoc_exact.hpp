#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "scramble/curves.hpp"
#include "scramble/model.hpp"

namespace scramble {

// Out-of-time-order correlator of sz probes under the normalized full-space
// trace, F(r, t) = Tr[sz_0(t) sz_r sz_0(t) sz_r] / 2^N, and the commutator
// growth C(r, t) = 1 - Re F(r, t).

// Dense full-space route: one eigendecomposition per instance, reused for
// every (operator, time) query. Oracle-grade, small n.
class HeisenbergPropagator {
 public:
  explicit HeisenbergPropagator(const DenseHamiltonian& full);

  // O(t) = e^{iHt} O e^{-iHt} in the z basis.
  Eigen::MatrixXcd evolve(const LocalOperator& op, double t) const;
  std::complex<double> otoc_f(int r, double t) const;

 private:
  int sites_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXd vectors_;
};

Eigen::MatrixXcd heisenberg_operator(const DenseHamiltonian& full,
                                     const LocalOperator& op, double t);
std::complex<double> otoc_f(const DenseHamiltonian& full, int r, double t);

// Production route. sz_r maps the even parity sector to the odd one by a
// bit flip, so in the sector-split eigenbasis every F(r, t) reduces to
// phase-dressed products of one real matrix w = V_e^T C_0 V_o; a time point
// costs four real matrix products shared across all r.
class ExactOtocEngine {
 public:
  ExactOtocEngine(const ModelParams& params, const DisorderRealization& dis);

  double otoc_f(int r, double t) const;
  Eigen::VectorXd otoc_f_all(double t) const;  // F(r, t), r = 1..n-1
  OtocCurve commutator_curve(const std::vector<double>& times,
                             double stop_above = 0.0) const;

  const Eigen::VectorXd& even_energies() const { return e_even_; }
  const Eigen::VectorXd& odd_energies() const { return e_odd_; }

 private:
  void assemble_a(double t, Eigen::MatrixXd& a_re, Eigen::MatrixXd& a_im) const;
  double f_from_a(const Eigen::MatrixXd& a_re, const Eigen::MatrixXd& a_im,
                  int r) const;

  ModelParams params_;
  Eigen::VectorXd e_even_, e_odd_;
  Eigen::MatrixXd v_even_, v_odd_;
  Eigen::MatrixXd w_hat_;
  // perm_[r][e] = odd-sector index of even state e with x-bit r flipped.
  std::vector<std::vector<std::int32_t>> perm_;
};

}  // namespace scramble
