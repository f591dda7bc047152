#include "scramble/otoc_exact.hpp"

#include <cmath>
#include <stdexcept>

#include "scramble/linalg.hpp"

namespace scramble {

HeisenbergPropagator::HeisenbergPropagator(const DenseHamiltonian& full)
    : sites_(full.sites) {
  if (full.basis != Basis::z_full)
    throw std::invalid_argument("HeisenbergPropagator: z-basis input required");
  vectors_ = full.matrix;
  sym_eigendecompose(vectors_, energies_);
}

Eigen::MatrixXcd HeisenbergPropagator::evolve(const LocalOperator& op,
                                              double t) const {
  const Eigen::MatrixXcd o = site_operator_dense(op, sites_);
  const Eigen::VectorXcd phase =
      (std::complex<double>(0.0, t) * energies_.cast<std::complex<double>>())
          .array()
          .exp();
  const Eigen::MatrixXcd vc = vectors_.cast<std::complex<double>>();
  return vc * phase.asDiagonal() * vc.adjoint() * o * vc *
         phase.conjugate().asDiagonal() * vc.adjoint();
}

std::complex<double> HeisenbergPropagator::otoc_f(int r, double t) const {
  if (r < 1 || r >= sites_)
    throw std::out_of_range("otoc_f: r must lie in [1, n)");
  const Eigen::MatrixXcd z0t = evolve({PauliKind::z, 0}, t);
  const Eigen::MatrixXcd zr = site_operator_dense({PauliKind::z, r}, sites_);
  const Eigen::MatrixXcd m = z0t * zr;
  const double dim = std::pow(2.0, sites_);
  return (m * m).trace() / dim;
}

Eigen::MatrixXcd heisenberg_operator(const DenseHamiltonian& full,
                                     const LocalOperator& op, double t) {
  return HeisenbergPropagator(full).evolve(op, t);
}

std::complex<double> otoc_f(const DenseHamiltonian& full, int r, double t) {
  return HeisenbergPropagator(full).otoc_f(r, t);
}

ExactOtocEngine::ExactOtocEngine(const ModelParams& params,
                                 const DisorderRealization& dis)
    : params_(params) {
  params_.validate();
  if (params_.n < 2)
    throw std::invalid_argument("ExactOtocEngine: need at least 2 sites");

  const ParityBasis even = parity_sector_basis(params_.n, Sector::even);
  const ParityBasis odd = parity_sector_basis(params_.n, Sector::odd);
  const Eigen::Index dim = even.dimension();

  {
    DenseHamiltonian he = build_sector_hamiltonian(params_, dis, Sector::even);
    v_even_ = std::move(he.matrix);
    sym_eigendecompose(v_even_, e_even_);
    DenseHamiltonian ho = build_sector_hamiltonian(params_, dis, Sector::odd);
    v_odd_ = std::move(ho.matrix);
    sym_eigendecompose(v_odd_, e_odd_);
  }

  perm_.resize(static_cast<std::size_t>(params_.n));
  for (int r = 0; r < params_.n; ++r) {
    const std::uint32_t bit = 1u << (params_.n - 1 - r);
    auto& p = perm_[static_cast<std::size_t>(r)];
    p.resize(static_cast<std::size_t>(dim));
    for (Eigen::Index e = 0; e < dim; ++e)
      p[static_cast<std::size_t>(e)] =
          odd.index_of_state[even.states[static_cast<std::size_t>(e)] ^ bit];
  }

  // w = V_e^T C_0 V_o, where C_0 V_o is V_o with rows gathered by the
  // sz_0 bit-flip permutation.
  Eigen::MatrixXd c0_vo(dim, dim);
  const auto& p0 = perm_[0];
  for (Eigen::Index e = 0; e < dim; ++e)
    c0_vo.row(e) = v_odd_.row(p0[static_cast<std::size_t>(e)]);
  w_hat_.noalias() = v_even_.transpose() * c0_vo;
}

void ExactOtocEngine::assemble_a(double t, Eigen::MatrixXd& a_re,
                                 Eigen::MatrixXd& a_im) const {
  const Eigen::Index dim = w_hat_.rows();
  const Eigen::ArrayXd ue_re = (e_even_.array() * t).cos();
  const Eigen::ArrayXd ue_im = (e_even_.array() * t).sin();
  const Eigen::ArrayXd vo_re = (e_odd_.array() * t).cos();
  const Eigen::ArrayXd vo_im = (-e_odd_.array() * t).sin();

  Eigen::MatrixXd m(dim, dim), tmp(dim, dim);
  // Real part of diag(e^{iE_e t}) w diag(e^{-iE_o t}).
  for (Eigen::Index c = 0; c < dim; ++c)
    m.col(c) = ((ue_re * vo_re[c] - ue_im * vo_im[c]) *
                w_hat_.col(c).array())
                   .matrix();
  tmp.noalias() = v_even_ * m;
  a_re.noalias() = tmp * v_odd_.transpose();
  for (Eigen::Index c = 0; c < dim; ++c)
    m.col(c) = ((ue_im * vo_re[c] + ue_re * vo_im[c]) *
                w_hat_.col(c).array())
                   .matrix();
  tmp.noalias() = v_even_ * m;
  a_im.noalias() = tmp * v_odd_.transpose();
}

double ExactOtocEngine::f_from_a(const Eigen::MatrixXd& a_re,
                                 const Eigen::MatrixXd& a_im, int r) const {
  const Eigen::Index dim = a_re.rows();
  const auto& p = perm_[static_cast<std::size_t>(r)];
  // F = 2 Re tr[(a c_r^T)^2] / 2^n with (a c_r^T)[e1, e2] = a[e1, p(e2)]:
  // accumulate sum over e1 <= e2 of B[e1,e2] B[e2,e1] on tile-local copies
  // so every memory touch is a contiguous column segment.
  constexpr Eigen::Index kTile = 64;
  Eigen::Matrix<double, kTile, kTile> t1re, t1im, t2re, t2im;
  double acc = 0.0;
  for (Eigen::Index jb = 0; jb < dim; jb += kTile) {
    const Eigen::Index jn = std::min(kTile, dim - jb);
    for (Eigen::Index ib = 0; ib <= jb; ib += kTile) {
      const Eigen::Index in = std::min(kTile, dim - ib);
      for (Eigen::Index jj = 0; jj < jn; ++jj) {
        const Eigen::Index pj = p[static_cast<std::size_t>(jb + jj)];
        t1re.col(jj).head(in) = a_re.col(pj).segment(ib, in);
        t1im.col(jj).head(in) = a_im.col(pj).segment(ib, in);
      }
      for (Eigen::Index ii = 0; ii < in; ++ii) {
        const Eigen::Index pi = p[static_cast<std::size_t>(ib + ii)];
        t2re.col(ii).head(jn) = a_re.col(pi).segment(jb, jn);
        t2im.col(ii).head(jn) = a_im.col(pi).segment(jb, jn);
      }
      for (Eigen::Index jj = 0; jj < jn; ++jj) {
        const Eigen::Index ilim = ib == jb ? jj + 1 : in;
        for (Eigen::Index ii = 0; ii < ilim; ++ii) {
          const double re =
              t1re(ii, jj) * t2re(jj, ii) - t1im(ii, jj) * t2im(jj, ii);
          acc += (ib + ii == jb + jj) ? re : 2.0 * re;
        }
      }
    }
  }
  return 2.0 * acc / std::pow(2.0, params_.n);
}

double ExactOtocEngine::otoc_f(int r, double t) const {
  if (r < 1 || r >= params_.n)
    throw std::out_of_range("otoc_f: r must lie in [1, n)");
  Eigen::MatrixXd a_re, a_im;
  assemble_a(t, a_re, a_im);
  return f_from_a(a_re, a_im, r);
}

Eigen::VectorXd ExactOtocEngine::otoc_f_all(double t) const {
  Eigen::MatrixXd a_re, a_im;
  assemble_a(t, a_re, a_im);
  Eigen::VectorXd f(params_.n - 1);
  for (int r = 1; r < params_.n; ++r) f[r - 1] = f_from_a(a_re, a_im, r);
  return f;
}

OtocCurve ExactOtocEngine::commutator_curve(const std::vector<double>& times,
                                            double stop_above) const {
  OtocCurve curve;
  curve.engine = "exact";
  curve.params = params_;
  curve.times.reserve(times.size());
  std::vector<Eigen::VectorXd> cols;
  Eigen::MatrixXd a_re, a_im;
  for (double t : times) {
    assemble_a(t, a_re, a_im);
    Eigen::VectorXd c(params_.n - 1);
    for (int r = 1; r < params_.n; ++r)
      c[r - 1] = 1.0 - f_from_a(a_re, a_im, r);
    curve.times.push_back(t);
    cols.push_back(std::move(c));
    if (stop_above > 0.0 && cols.back().mean() > stop_above) break;
  }
  const Eigen::Index nt = static_cast<Eigen::Index>(cols.size());
  curve.c_r.resize(params_.n - 1, nt);
  for (Eigen::Index k = 0; k < nt; ++k) curve.c_r.col(k) = cols[static_cast<std::size_t>(k)];
  curve.c_mean = curve.c_r.colwise().mean();
  curve.check();
  return curve;
}

}  // namespace scramble
