#include "scramble/ed.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scramble/linalg.hpp"

namespace scramble {

namespace {

void fix_phases(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index imax = 0;
    vectors.col(c).cwiseAbs().maxCoeff(&imax);
    if (vectors(imax, c) < 0.0) vectors.col(c) = -vectors.col(c);
  }
}

Sector sector_of(const DenseHamiltonian& block) {
  switch (block.basis) {
    case Basis::x_even:
      return Sector::even;
    case Basis::x_odd:
      return Sector::odd;
    default:
      throw std::invalid_argument("diagonalize: sector-basis block required");
  }
}

}  // namespace

SpectrumResult diagonalize(const DenseHamiltonian& block, bool want_vectors) {
  SpectrumResult res;
  res.sector = sector_of(block);
  if (want_vectors) {
    Eigen::MatrixXd a = block.matrix;
    sym_eigendecompose(a, res.energies);
    fix_phases(a);
    res.eigenvectors = std::move(a);
  } else {
    res.energies = sym_eigenvalues(block.matrix);
  }
  return res;
}

LevelStatistics adjacent_gap_ratio(const Eigen::VectorXd& energies,
                                   double window) {
  if (window <= 0.0 || window > 1.0)
    throw std::invalid_argument("adjacent_gap_ratio: window in (0, 1] required");
  const Eigen::Index total = energies.size();
  Eigen::VectorXd sorted = energies;
  std::sort(sorted.data(), sorted.data() + sorted.size());

  const Eigen::Index keep =
      std::max<Eigen::Index>(static_cast<Eigen::Index>(std::round(window * total)), 0);
  const Eigen::Index first = (total - keep) / 2;
  if (keep < 4)
    throw std::invalid_argument("adjacent_gap_ratio: need at least 4 levels in window");
  const double width = sorted[total - 1] - sorted[0];
  const double degeneracy_floor = 1e-12 * std::max(width, 1.0);

  LevelStatistics stats;
  stats.r_values.reserve(static_cast<std::size_t>(keep));
  double prev_gap = -1.0;
  for (Eigen::Index k = first; k + 1 < first + keep; ++k) {
    const double gap = sorted[k + 1] - sorted[k];
    if (gap < degeneracy_floor) continue;  // exact degeneracy, drop
    if (prev_gap >= 0.0) {
      const double r = std::min(prev_gap, gap) / std::max(prev_gap, gap);
      stats.r_values.push_back(r);
    }
    prev_gap = gap;
  }
  if (stats.r_values.empty())
    throw std::runtime_error("adjacent_gap_ratio: no usable gaps in window");
  stats.mean_r = pairwise_sum(stats.r_values.data(), stats.r_values.size()) /
                 static_cast<double>(stats.r_values.size());
  return stats;
}

namespace {

int sites_of_state(Eigen::Index dim, const char* what) {
  int n = 0;
  while ((Eigen::Index(1) << n) < dim) ++n;
  if ((Eigen::Index(1) << n) != dim)
    throw std::invalid_argument(std::string(what) + ": length must be a power of two");
  return n;
}

template <typename Scalar>
double entropy_impl(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& state, int cut) {
  const int n = sites_of_state(state.size(), "entanglement_entropy");
  if (cut < 1 || cut >= n)
    throw std::invalid_argument("entanglement_entropy: cut must split the chain");
  if (std::abs(state.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("entanglement_entropy: state must be normalized");
  const Eigen::Index rows = Eigen::Index(1) << (n - cut);  // subsystem B, low bits
  const Eigen::Index cols = Eigen::Index(1) << cut;        // subsystem A, high bits
  // z index = a * 2^(n-cut) + b, so a column-major view has one column per
  // A configuration.
  Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> psi(
      state.data(), rows, cols);
  Eigen::JacobiSVD<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> svd(psi);
  const Eigen::VectorXd sv = svd.singularValues();
  double s = 0.0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    const double p = sv[k] * sv[k];
    if (p > 1e-15) s -= p * std::log(p);
  }
  return s;
}

}  // namespace

double entanglement_entropy(const Eigen::VectorXd& state_z, int cut) {
  return entropy_impl<double>(state_z, cut);
}

double entanglement_entropy(const Eigen::VectorXcd& state_z, int cut) {
  return entropy_impl<std::complex<double>>(state_z, cut);
}

double page_entropy(int n) {
  return 0.5 * n * std::log(2.0) - 0.5;
}

namespace {

double midspectrum_entropy_of_block(const DenseHamiltonian& block,
                                    const ParityBasis& basis, int n_states) {
  Eigen::VectorXd w;
  Eigen::MatrixXd z;
  sym_eigen_central(block.matrix, n_states, w, z);
  const int cut = basis.sites / 2;
  double acc = 0.0;
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    const Eigen::VectorXd full = basis.to_full_z(z.col(c));
    acc += entanglement_entropy(full, cut);
  }
  return acc / static_cast<double>(n_states);
}

}  // namespace

double midspectrum_entropy(const ModelParams& params,
                           const DisorderRealization& dis, int n_states) {
  if (params.n < 2)
    throw std::invalid_argument("midspectrum_entropy: need at least 2 sites");
  const DenseHamiltonian block =
      build_sector_hamiltonian(params, dis, Sector::even);
  const ParityBasis basis = parity_sector_basis(params.n, Sector::even);
  return midspectrum_entropy_of_block(block, basis, n_states);
}

EdObservables ed_observables(const ModelParams& params,
                             const DisorderRealization& dis, int n_states,
                             double window) {
  if (params.n < 4)
    throw std::invalid_argument("ed_observables: need at least 4 sites");
  const DenseHamiltonian block =
      build_sector_hamiltonian(params, dis, Sector::even);
  const ParityBasis basis = parity_sector_basis(params.n, Sector::even);

  EdObservables obs;
  const LevelStatistics stats =
      adjacent_gap_ratio(sym_eigenvalues(block.matrix), window);
  obs.mean_r = stats.mean_r;
  obs.levels = static_cast<int>(stats.r_values.size());
  if (n_states > 0)  // n_states == 0 requests a spectrum-only pass
    obs.s_mid = midspectrum_entropy_of_block(block, basis, n_states);
  obs.entropy_states = n_states;
  return obs;
}

}  // namespace scramble
