#include "scramble/tn.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace scramble {

namespace {

// Action of i[P_a, .] and {P_a, .} on the labels (I, X, Y, Z); both real.
Eigen::Matrix4d comm_x() {
  Eigen::Matrix4d g = Eigen::Matrix4d::Zero();
  g(3, 2) = -2.0;
  g(2, 3) = 2.0;
  return g;
}

Eigen::Matrix4d comm_y() {
  Eigen::Matrix4d g = Eigen::Matrix4d::Zero();
  g(3, 1) = 2.0;
  g(1, 3) = -2.0;
  return g;
}

Eigen::Matrix4d anti_x() {
  Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
  s(1, 0) = 2.0;
  s(0, 1) = 2.0;
  return s;
}

Eigen::Matrix4d anti_y() {
  Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
  s(2, 0) = 2.0;
  s(0, 2) = 2.0;
  return s;
}

}  // namespace

Eigen::Index OperatorMps::max_bond() const {
  Eigen::Index chi = 1;
  for (std::size_t s = 0; s + 1 < site.size(); ++s)
    chi = std::max(chi, site[s].right());
  return chi;
}

double OperatorMps::norm() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Ones(1, 1);
  for (const SiteTensor& t : site) {
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(t.right(), t.right());
    for (const Eigen::MatrixXd& a : t.m) next.noalias() += a.transpose() * m * a;
    m = std::move(next);
  }
  return std::sqrt(m(0, 0));
}

OperatorMps pauli_z_product(int n, int where) {
  if (n < 1 || where < 0 || where >= n)
    throw std::invalid_argument("pauli_z_product: bad site");
  OperatorMps mps;
  mps.site.resize(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    SiteTensor& t = mps.site[static_cast<std::size_t>(s)];
    for (Eigen::MatrixXd& a : t.m) a = Eigen::MatrixXd::Zero(1, 1);
    t.m[s == where ? 3 : 0](0, 0) = 1.0;
  }
  return mps;
}

Eigen::VectorXd contract_dense(const OperatorMps& mps) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Ones(1, 1);
  for (const SiteTensor& t : mps.site) {
    Eigen::MatrixXd next(acc.rows() * kPauliDim, t.right());
    for (Eigen::Index row = 0; row < acc.rows(); ++row)
      for (int a = 0; a < kPauliDim; ++a)
        next.row(row * kPauliDim + a).noalias() = acc.row(row) * t.m[a];
    acc = std::move(next);
  }
  return Eigen::VectorXd(acc.col(0));
}

Eigen::VectorXd pauli_z_overlaps(const OperatorMps& mps) {
  const int n = mps.sites();
  if (n == 0) throw std::invalid_argument("pauli_z_overlaps: empty state");
  static const double kSign[kPauliDim] = {1.0, -1.0, -1.0, 1.0};
  std::vector<Eigen::MatrixXd> suffix(static_cast<std::size_t>(n) + 1);
  suffix[static_cast<std::size_t>(n)] = Eigen::MatrixXd::Ones(1, 1);
  for (int s = n - 1; s >= 0; --s) {
    const SiteTensor& t = mps.site[static_cast<std::size_t>(s)];
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(t.left(), t.left());
    for (const Eigen::MatrixXd& a : t.m)
      acc.noalias() += a * suffix[static_cast<std::size_t>(s) + 1] * a.transpose();
    suffix[static_cast<std::size_t>(s)] = std::move(acc);
  }
  Eigen::VectorXd f(n);
  Eigen::MatrixXd prefix = Eigen::MatrixXd::Ones(1, 1);
  const double norm2 = suffix[0](0, 0);
  for (int s = 0; s < n; ++s) {
    const SiteTensor& t = mps.site[static_cast<std::size_t>(s)];
    double val = 0.0;
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(t.right(), t.right());
    for (int a = 0; a < kPauliDim; ++a) {
      Eigen::MatrixXd hop = t.m[a].transpose() * prefix * t.m[a];
      val += kSign[a] * (hop * suffix[static_cast<std::size_t>(s) + 1]).trace();
      next.noalias() += hop;
    }
    f[s] = val / norm2;
    prefix = std::move(next);
  }
  return f;
}

SuperOperatorMpo commutator_mpo(const ModelParams& params,
                                const DisorderRealization& dis) {
  params.validate();
  if (dis.h.size() != params.n)
    throw std::invalid_argument("commutator_mpo: disorder size mismatch");
  const double g = params.pair_coupling();
  const double c = params.disorder_coeff();
  const Eigen::Matrix4d id = Eigen::Matrix4d::Identity();
  const Eigen::Matrix4d gx = comm_x(), gy = comm_y();
  const Eigen::Matrix4d sx = anti_x(), sy = anti_y();

  SuperOperatorMpo mpo;
  mpo.n = params.n;
  mpo.site.resize(static_cast<std::size_t>(params.n));
  for (int s = 0; s < params.n; ++s) {
    std::vector<MpoEntry>& w = mpo.site[static_cast<std::size_t>(s)];
    w.push_back({0, 0, id});
    w.push_back({5, 5, id});
    // Open half-pairs pass through unchanged: every site pair couples.
    for (int k = 1; k <= 4; ++k) w.push_back({k, k, id});
    w.push_back({0, 1, gx});
    w.push_back({1, 5, 0.5 * g * sx});
    w.push_back({0, 2, sx});
    w.push_back({2, 5, 0.5 * g * gx});
    w.push_back({0, 3, gy});
    w.push_back({3, 5, 0.5 * g * sy});
    w.push_back({0, 4, sy});
    w.push_back({4, 5, 0.5 * g * gy});
    w.push_back({0, 5, c * dis.h[s] * gx});
  }
  return mpo;
}

Eigen::MatrixXd mpo_dense(const SuperOperatorMpo& mpo) {
  if (mpo.n < 1 || mpo.n > 5)
    throw std::invalid_argument("mpo_dense: oracle limited to n <= 5");
  const Eigen::Index dim = Eigen::Index(1) << (2 * mpo.n);
  // Chain from the right edge so the label added per step (the slow kron
  // axis) belongs to the earlier site, matching contract_dense ordering.
  std::vector<Eigen::MatrixXd> acc(static_cast<std::size_t>(mpo.bond));
  acc[5] = Eigen::MatrixXd::Ones(1, 1);
  for (auto it = mpo.site.rbegin(); it != mpo.site.rend(); ++it) {
    std::vector<Eigen::MatrixXd> next(static_cast<std::size_t>(mpo.bond));
    for (const MpoEntry& e : *it) {
      const Eigen::MatrixXd& m = acc[static_cast<std::size_t>(e.col)];
      if (m.size() == 0) continue;
      Eigen::MatrixXd& out = next[static_cast<std::size_t>(e.row)];
      if (out.size() == 0)
        out = Eigen::MatrixXd::Zero(m.rows() * kPauliDim, m.cols() * kPauliDim);
      for (int a = 0; a < kPauliDim; ++a)
        for (int b = 0; b < kPauliDim; ++b)
          if (e.op(a, b) != 0.0)
            out.block(a * m.rows(), b * m.cols(), m.rows(), m.cols()) +=
                e.op(a, b) * m;
    }
    acc = std::move(next);
  }
  if (acc[0].size() == 0 || acc[0].rows() != dim)
    throw std::logic_error("mpo_dense: boundary state never reached");
  return acc[0];
}

Eigen::VectorXd krylov_exp_skew(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
    const Eigen::VectorXd& v, double tau, int m_max, double tol) {
  const double vnorm = v.norm();
  if (vnorm == 0.0 || tau == 0.0) return v;
  const int cap = static_cast<int>(
      std::min<Eigen::Index>(std::max(m_max, 2), v.size()));
  std::vector<Eigen::VectorXd> basis;
  basis.reserve(static_cast<std::size_t>(cap));
  basis.push_back(v / vnorm);
  std::vector<double> beta;

  Eigen::VectorXd coeff;
  for (;;) {
    const int m = static_cast<int>(basis.size());
    Eigen::VectorXd w = apply(basis.back());
    for (int pass = 0; pass < 2; ++pass)
      for (const Eigen::VectorXd& b : basis) w.noalias() -= b.dot(w) * b;
    const double b = w.norm();

    // exp(tau T) e1 through the Hermitian form iT.
    Eigen::MatrixXcd it = Eigen::MatrixXcd::Zero(m, m);
    for (int k = 0; k + 1 < m; ++k) {
      it(k + 1, k) = std::complex<double>(0.0, beta[static_cast<std::size_t>(k)]);
      it(k, k + 1) = std::complex<double>(0.0, -beta[static_cast<std::size_t>(k)]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(it);
    Eigen::VectorXcd u = eig.eigenvectors() *
                         ((-std::complex<double>(0.0, tau) *
                           eig.eigenvalues().array().cast<std::complex<double>>())
                              .exp() *
                          eig.eigenvectors().row(0).adjoint().array())
                             .matrix();
    coeff = u.real();

    if (b * std::abs(coeff[m - 1]) * std::abs(tau) < tol || b < 1e-300 ||
        m >= cap)
      break;
    beta.push_back(b);
    basis.push_back(w / b);
  }

  Eigen::VectorXd y = Eigen::VectorXd::Zero(v.size());
  for (std::size_t k = 0; k < basis.size(); ++k)
    y.noalias() += coeff[static_cast<Eigen::Index>(k)] * basis[k];
  return vnorm * y;
}

}  // namespace scramble
