#include "scramble/model.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "scramble/prng.hpp"

namespace scramble {

double ModelParams::pair_coupling() const {
  return j / (2.0 * std::pow(static_cast<double>(n), alpha));
}

double ModelParams::disorder_coeff() const {
  if (!alpha_tilde) return 1.0;
  return std::pow(static_cast<double>(n), -(alpha - *alpha_tilde));
}

void ModelParams::validate() const {
  if (n < 1) throw std::invalid_argument("ModelParams: n must be positive");
  if (w < 0.0) throw std::invalid_argument("ModelParams: w must be >= 0");
  if (!std::isfinite(alpha) || !std::isfinite(w) || !std::isfinite(j))
    throw std::invalid_argument("ModelParams: non-finite parameter");
  if (alpha_tilde && !std::isfinite(*alpha_tilde))
    throw std::invalid_argument("ModelParams: non-finite alpha_tilde");
}

DisorderRealization sample_disorder(const ModelParams& params,
                                    std::uint64_t seed, int index) {
  params.validate();
  DisorderRealization dis;
  dis.seed = seed;
  dis.index = index;
  dis.h.resize(params.n);
  const std::uint64_t key =
      stream_word(seed, kStreamDisorder, static_cast<std::uint64_t>(index));
  for (int i = 0; i < params.n; ++i) {
    const double u = unit_double(stream_word(key, static_cast<std::uint64_t>(i)));
    dis.h[i] = params.w * (2.0 * u - 1.0);
  }
  return dis;
}

Eigen::Matrix2cd local_matrix(PauliKind kind) {
  using namespace std::complex_literals;
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  switch (kind) {
    case PauliKind::identity:
      m(0, 0) = 1.0;
      m(1, 1) = 1.0;
      break;
    case PauliKind::x:
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      break;
    case PauliKind::y:
      m(0, 1) = -1.0i;
      m(1, 0) = 1.0i;
      break;
    case PauliKind::z:
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
    case PauliKind::plus:
      m(0, 1) = 1.0;
      break;
    case PauliKind::minus:
      m(1, 0) = 1.0;
      break;
  }
  return m;
}

namespace {

void check_dense_sites(int n, const char* what) {
  if (n < 1 || n > kMaxDenseSites)
    throw std::length_error(std::string(what) + ": dense build limited to 1.." +
                            std::to_string(kMaxDenseSites) + " sites, got " +
                            std::to_string(n));
}

// Site i occupies bit n-1-i.
inline std::uint32_t site_bit(int n, int i) {
  return 1u << (n - 1 - i);
}

}  // namespace

Eigen::MatrixXcd site_operator_dense(const LocalOperator& op, int n) {
  check_dense_sites(n, "site_operator_dense");
  if (op.site < 0 || op.site >= n)
    throw std::out_of_range("site_operator_dense: site out of range");
  const Eigen::Index dim = Eigen::Index(1) << n;
  const Eigen::Matrix2cd m = local_matrix(op.kind);
  const std::uint32_t bit = site_bit(n, op.site);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    // bit clear = |0> (sz = +1), bit set = |1>.
    const int b = (static_cast<std::uint32_t>(col) & bit) ? 1 : 0;
    for (int a = 0; a < 2; ++a) {
      const std::complex<double> amp = m(a, b);
      if (amp == 0.0) continue;
      const Eigen::Index row =
          a == b ? col : static_cast<Eigen::Index>(static_cast<std::uint32_t>(col) ^ bit);
      out(row, col) += amp;
    }
  }
  return out;
}

DenseHamiltonian build_hamiltonian(const ModelParams& params,
                                   const DisorderRealization& dis) {
  params.validate();
  check_dense_sites(params.n, "build_hamiltonian");
  if (dis.h.size() != params.n)
    throw std::invalid_argument("build_hamiltonian: field count mismatch");
  const int n = params.n;
  const Eigen::Index dim = Eigen::Index(1) << n;
  const double g = params.pair_coupling();
  const double c = params.disorder_coeff();

  DenseHamiltonian ham;
  ham.sites = n;
  ham.basis = Basis::z_full;
  ham.matrix = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const std::uint32_t s = static_cast<std::uint32_t>(col);
    // Flip-flop: (sx sx + sy sy)|01> = 2|10>, zero on aligned pairs.
    for (int i = 0; i < n; ++i) {
      const std::uint32_t bi = site_bit(n, i);
      for (int k = i + 1; k < n; ++k) {
        const std::uint32_t bk = site_bit(n, k);
        const bool vi = (s & bi) != 0;
        const bool vk = (s & bk) != 0;
        if (vi != vk)
          ham.matrix(static_cast<Eigen::Index>(s ^ bi ^ bk), col) += 2.0 * g;
      }
    }
    for (int i = 0; i < n; ++i)
      ham.matrix(static_cast<Eigen::Index>(s ^ site_bit(n, i)), col) += c * dis.h[i];
  }
  return ham;
}

ParityBasis parity_sector_basis(int n, Sector sector) {
  check_dense_sites(n, "parity_sector_basis");
  ParityBasis basis;
  basis.sites = n;
  basis.sector = sector;
  const std::uint32_t full = 1u << n;
  basis.index_of_state.assign(full, -1);
  basis.states.reserve(full / 2);
  const int want = sector == Sector::even ? 0 : 1;
  for (std::uint32_t m = 0; m < full; ++m) {
    if ((std::popcount(m) & 1) == want) {
      basis.index_of_state[m] = static_cast<std::int32_t>(basis.states.size());
      basis.states.push_back(m);
    }
  }
  return basis;
}

void fwht(Eigen::VectorXd& v) {
  const Eigen::Index dim = v.size();
  if (dim == 0 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument("fwht: length must be a power of two");
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (Eigen::Index len = 1; len < dim; len <<= 1) {
    for (Eigen::Index block = 0; block < dim; block += 2 * len) {
      for (Eigen::Index k = block; k < block + len; ++k) {
        const double a = v[k];
        const double b = v[k + len];
        v[k] = (a + b) * inv_sqrt2;
        v[k + len] = (a - b) * inv_sqrt2;
      }
    }
  }
}

Eigen::VectorXd ParityBasis::to_full_z(const Eigen::VectorXd& sector_vec) const {
  if (sector_vec.size() != dimension())
    throw std::invalid_argument("to_full_z: dimension mismatch");
  Eigen::VectorXd full = Eigen::VectorXd::Zero(Eigen::Index(1) << sites);
  for (std::size_t k = 0; k < states.size(); ++k)
    full[states[k]] = sector_vec[static_cast<Eigen::Index>(k)];
  fwht(full);
  return full;
}

Eigen::MatrixXd ParityBasis::isometry() const {
  Eigen::MatrixXd q(Eigen::Index(1) << sites, dimension());
  for (Eigen::Index k = 0; k < dimension(); ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dimension());
    e[k] = 1.0;
    q.col(k) = to_full_z(e);
  }
  return q;
}

DenseHamiltonian build_sector_hamiltonian(const ModelParams& params,
                                          const DisorderRealization& dis,
                                          Sector sector) {
  params.validate();
  check_dense_sites(params.n, "build_sector_hamiltonian");
  if (dis.h.size() != params.n)
    throw std::invalid_argument("build_sector_hamiltonian: field count mismatch");
  const int n = params.n;
  const double g = params.pair_coupling();
  const double c = params.disorder_coeff();
  const ParityBasis basis = parity_sector_basis(n, sector);
  const Eigen::Index dim = basis.dimension();

  DenseHamiltonian ham;
  ham.sites = n;
  ham.basis = sector == Sector::even ? Basis::x_even : Basis::x_odd;
  ham.matrix = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const std::uint32_t m = basis.states[static_cast<std::size_t>(col)];
    // x_i = +1 for a plus factor (bit clear), -1 for minus (bit set).
    const int minus = std::popcount(m);
    const double sum_x = static_cast<double>(n - 2 * minus);
    double diag = g * 0.5 * (sum_x * sum_x - n);
    for (int i = 0; i < n; ++i)
      diag += c * dis.h[i] * ((m & site_bit(n, i)) ? -1.0 : 1.0);
    ham.matrix(col, col) = diag;
    for (int i = 0; i < n; ++i) {
      const std::uint32_t bi = site_bit(n, i);
      const double xi = (m & bi) ? -1.0 : 1.0;
      for (int k = i + 1; k < n; ++k) {
        const std::uint32_t bk = site_bit(n, k);
        const double xk = (m & bk) ? -1.0 : 1.0;
        const std::int32_t row = basis.index_of_state[m ^ bi ^ bk];
        ham.matrix(row, col) += -g * xi * xk;
      }
    }
  }
  return ham;
}

double parity_commutator_norm(const DenseHamiltonian& full) {
  if (full.basis != Basis::z_full)
    throw std::invalid_argument("parity_commutator_norm: z-basis input required");
  const Eigen::Index dim = full.dimension();
  const std::uint32_t mask = static_cast<std::uint32_t>(dim - 1);
  double worst = 0.0;
  // P permutes z states by flipping every bit, so [H, P] vanishes iff
  // H[~s, t] == H[s, ~t] for all s, t.
  for (Eigen::Index t = 0; t < dim; ++t) {
    const Eigen::Index tf = static_cast<Eigen::Index>(static_cast<std::uint32_t>(t) ^ mask);
    for (Eigen::Index s = 0; s < dim; ++s) {
      const Eigen::Index sf = static_cast<Eigen::Index>(static_cast<std::uint32_t>(s) ^ mask);
      worst = std::max(worst, std::abs(full.matrix(sf, t) - full.matrix(s, tf)));
    }
  }
  return worst;
}

DenseHamiltonian project_to_sector(const DenseHamiltonian& full, Sector sector,
                                   double tol) {
  if (full.basis != Basis::z_full)
    throw std::invalid_argument("project_to_sector: z-basis input required");
  const double scale = std::max(1.0, full.matrix.cwiseAbs().maxCoeff());
  const double violation = parity_commutator_norm(full);
  if (violation > tol * scale)
    throw std::domain_error("project_to_sector: input does not commute with parity, |[H,P]| = " +
                            std::to_string(violation));
  Eigen::MatrixXd hx = full.matrix;
  for (Eigen::Index colidx = 0; colidx < hx.cols(); ++colidx) {
    Eigen::VectorXd col = hx.col(colidx);
    fwht(col);
    hx.col(colidx) = col;
  }
  for (Eigen::Index rowidx = 0; rowidx < hx.rows(); ++rowidx) {
    Eigen::VectorXd row = hx.row(rowidx);
    fwht(row);
    hx.row(rowidx) = row;
  }
  const ParityBasis basis = parity_sector_basis(full.sites, sector);
  DenseHamiltonian block;
  block.sites = full.sites;
  block.basis = sector == Sector::even ? Basis::x_even : Basis::x_odd;
  block.matrix.resize(basis.dimension(), basis.dimension());
  for (Eigen::Index cc = 0; cc < basis.dimension(); ++cc)
    for (Eigen::Index rr = 0; rr < basis.dimension(); ++rr)
      block.matrix(rr, cc) =
          hx(static_cast<Eigen::Index>(basis.states[static_cast<std::size_t>(rr)]),
             static_cast<Eigen::Index>(basis.states[static_cast<std::size_t>(cc)]));
  return block;
}

double rescaled_time_factor(double alpha1, double alpha2, int n) {
  if (n < 1) throw std::invalid_argument("rescaled_time_factor: n must be positive");
  return std::pow(static_cast<double>(n), alpha1 - alpha2);
}

}  // namespace scramble
