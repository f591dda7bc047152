#pragma once

#include <Eigen/Dense>

#include <vector>

#include "scramble/model.hpp"

namespace scramble {

inline constexpr double kSpectrumWindow = 1.0 / 3.0;
inline constexpr int kMidspectrumStates = 20;

struct SpectrumResult {
  Sector sector = Sector::even;
  Eigen::VectorXd energies;      // ascending
  Eigen::MatrixXd eigenvectors;  // sector-basis columns, 0x0 unless requested
};

// LAPACK-backed solve of one parity block. Eigenvector sign convention:
// the largest-magnitude component of each column is real positive.
SpectrumResult diagonalize(const DenseHamiltonian& block, bool want_vectors);

struct LevelStatistics {
  std::vector<double> r_values;
  double mean_r = 0.0;
};

// r_k = min(g_k, g_{k+1}) / max(g_k, g_{k+1}) over consecutive gaps inside
// the central `window` fraction of levels (by count). Gaps below
// 1e-12 * spectral width are treated as exact degeneracies and dropped.
LevelStatistics adjacent_gap_ratio(const Eigen::VectorXd& energies,
                                   double window = kSpectrumWindow);

// Half-cut von Neumann entropy in nats of a normalized pure state given in
// the full z basis; subsystem A is sites [0, cut).
double entanglement_entropy(const Eigen::VectorXd& state_z, int cut);
double entanglement_entropy(const Eigen::VectorXcd& state_z, int cut);

// (N/2) ln 2 - 1/2, the random-state plateau the ergodic phase approaches.
double page_entropy(int n);

// Mean half-cut entropy of the n_states even-sector eigenstates nearest the
// spectrum median.
double midspectrum_entropy(const ModelParams& params,
                           const DisorderRealization& dis,
                           int n_states = kMidspectrumStates);

struct EdObservables {
  double mean_r = 0.0;
  double s_mid = 0.0;
  int levels = 0;
  int entropy_states = 0;
};

// One realization, one even-sector block, both headline observables.
EdObservables ed_observables(const ModelParams& params,
                             const DisorderRealization& dis,
                             int n_states = kMidspectrumStates,
                             double window = kSpectrumWindow);

}  // namespace scramble
