#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "scramble/model.hpp"

namespace scramble {

// Operator dynamics in matrix-product form. Operators are vectorized in the
// per-site orthonormal basis P_a / sqrt(2), a in {I, X, Y, Z}, so that
// <<A|B>> = Tr[A^T B] / 2^n. In this basis vec(sz_0) is a unit vector, the
// Heisenberg generator v' = vec(i[H, v]) is a real skew-symmetric matrix,
// and the evolution is orthogonal: every tensor below stays real.

inline constexpr int kPauliDim = 4;

struct SiteTensor {
  std::array<Eigen::MatrixXd, kPauliDim> m;  // (chi_l x chi_r) per basis label

  Eigen::Index left() const { return m[0].rows(); }
  Eigen::Index right() const { return m[0].cols(); }
};

struct OperatorMps {
  std::vector<SiteTensor> site;

  int sites() const { return static_cast<int>(site.size()); }
  Eigen::Index max_bond() const;
  double norm() const;  // sqrt(Tr[O^T O] / 2^n)
};

// sz at `where`, identity elsewhere; unit norm, all bonds dimension 1.
OperatorMps pauli_z_product(int n, int where);

// Coefficients on the product basis, site 0 slowest. Small-n oracles only.
Eigen::VectorXd contract_dense(const OperatorMps& mps);

// F(r) = Tr[O sz_r O sz_r] / 2^n for every site r, normalized by the squared
// state norm. Conjugation by sz is the diagonal map diag(1, -1, -1, 1) on
// the local basis label, so one transfer sweep covers all r.
Eigen::VectorXd pauli_z_overlaps(const OperatorMps& mps);

// Super-operator MPO for the generator G = vec(i[H, .]). Bond dimension 6
// with states {idle, X/Y commutator or anticommutator open, done}; a pair
// coupling g(XX + YY) enters as (g/2)(Gx Sx + Sx Gx + Gy Sy + Sy Gy) where
// G_a = i[P_a, .] and S_a = {P_a, .} are both real on the Pauli labels.
struct MpoEntry {
  int row = 0;
  int col = 0;
  Eigen::Matrix4d op;
};

struct SuperOperatorMpo {
  int n = 0;
  int bond = 6;
  std::vector<std::vector<MpoEntry>> site;
};

SuperOperatorMpo commutator_mpo(const ModelParams& params,
                                const DisorderRealization& dis);

// Dense matrix of the MPO on the product basis (small-n oracle).
Eigen::MatrixXd mpo_dense(const SuperOperatorMpo& mpo);

// y = exp(tau G) v for a real skew-symmetric operator given as a matvec.
// Lanczos with full reorthogonalization; the projected tridiagonal matrix is
// skew, so the small exponential is solved through the Hermitian form i T.
Eigen::VectorXd krylov_exp_skew(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
    const Eigen::VectorXd& v, double tau, int m_max, double tol);

struct TdvpConfig {
  double dt = 0.05;
  int chi_max = 100;
  double trunc_cut = 1e-5;
  int krylov_max = 40;
  double krylov_tol = 1e-12;
};

struct TdvpDiagnostics {
  double time = 0.0;
  double discarded = 0.0;  // cumulative squared weight dropped by splits
  int max_bond = 1;
  bool capped = false;  // chi_max forced a truncation past trunc_cut
};

// Hybrid two-site TDVP integrator: symmetric left/right half sweeps of
// exp(+dt/2 G_eff) bond evolutions with exp(-dt/2 G_eff) one-site back
// steps. Splits truncate at trunc_cut relative discarded weight, capped at
// chi_max, and the state is rescaled to preserve its norm exactly.
class TdvpEngine {
 public:
  TdvpEngine(OperatorMps state, SuperOperatorMpo mpo, TdvpConfig cfg);

  void step();  // advance by cfg.dt

  const OperatorMps& state() const { return state_; }
  const TdvpDiagnostics& diagnostics() const { return diag_; }

 private:
  using Env = std::vector<Eigen::MatrixXd>;  // indexed by MPO bond state

  void sweep_right(double tau);
  void sweep_left(double tau);
  void evolve_bond(int s, double tau, bool keep_left);
  void back_evolve_site(int s, double tau);

  OperatorMps state_;
  SuperOperatorMpo mpo_;
  TdvpConfig cfg_;
  std::vector<Env> env_l_;  // env_l_[s] contracts sites [0, s)
  std::vector<Env> env_r_;  // env_r_[s] contracts sites [s, n)
  TdvpDiagnostics diag_;
};

}  // namespace scramble
