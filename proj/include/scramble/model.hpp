#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace scramble {

// One instance of the disordered all-to-all XX family
//
//   H = J/(2 N^alpha) sum_{i<j} (sx_i sx_j + sy_i sy_j) + c sum_i h_i sx_i
//
// with h_i drawn uniformly from [-W, W]. The disorder coefficient c is 1
// unless alpha_tilde is set, in which case c = N^{-(alpha - alpha_tilde)}
// and the whole spectrum of one family member maps onto another by a global
// rescaling (see rescaled_time_factor).
struct ModelParams {
  int n = 2;
  double alpha = 0.5;
  double w = 0.0;
  double j = 1.0;
  std::optional<double> alpha_tilde{};

  double pair_coupling() const;   // J / (2 N^alpha)
  double disorder_coeff() const;  // 1 or N^{-(alpha - alpha_tilde)}
  void validate() const;          // throws std::invalid_argument
};

struct DisorderRealization {
  std::uint64_t seed = 0;
  int index = 0;
  Eigen::VectorXd h;  // one field per site, |h_i| <= W
};

// Pure function of (seed, index, site, W): replaying any realization never
// depends on how many others were drawn before it.
DisorderRealization sample_disorder(const ModelParams& params,
                                    std::uint64_t seed, int index);

enum class PauliKind { identity, x, y, z, plus, minus };

struct LocalOperator {
  PauliKind kind = PauliKind::z;
  int site = 0;
};

Eigen::Matrix2cd local_matrix(PauliKind kind);

// Dense 2^n embedding of a single-site operator. Basis ordering throughout:
// computational z basis, site 0 is the most significant bit, bit value 0
// means sz = +1.
Eigen::MatrixXcd site_operator_dense(const LocalOperator& op, int n);

enum class Sector { even, odd };
enum class Basis { z_full, x_even, x_odd };

struct DenseHamiltonian {
  int sites = 0;
  Basis basis = Basis::z_full;
  Eigen::MatrixXd matrix;

  Eigen::Index dimension() const { return matrix.rows(); }
};

inline constexpr int kMaxDenseSites = 16;

// Full matrix in the z basis. Guarded at kMaxDenseSites.
DenseHamiltonian build_hamiltonian(const ModelParams& params,
                                   const DisorderRealization& dis);

// The parity P = prod_i sx_i commutes with H for every W. P is diagonal in
// the x product basis; a sector state is an x product state with an even or
// odd number of sx = -1 factors, encoded as a "minus bitmask" with site i at
// bit n-1-i.
struct ParityBasis {
  int sites = 0;
  Sector sector = Sector::even;
  std::vector<std::uint32_t> states;         // ascending minus-bitmasks
  std::vector<std::int32_t> index_of_state;  // size 2^n, -1 outside sector

  Eigen::Index dimension() const {
    return static_cast<Eigen::Index>(states.size());
  }
  // Embed a sector vector into the full z basis (scatter + Hadamard layer).
  Eigen::VectorXd to_full_z(const Eigen::VectorXd& sector_vec) const;
  // Dense 2^n x dim isometry, small n only (tests, projections).
  Eigen::MatrixXd isometry() const;
};

ParityBasis parity_sector_basis(int n, Sector sector);

// Sector block assembled directly in the x product basis: the field term is
// diagonal, sx_i sx_j contributes diagonally and sy_i sy_j flips two minus
// bits with sign -x_i x_j.
DenseHamiltonian build_sector_hamiltonian(const ModelParams& params,
                                          const DisorderRealization& dis,
                                          Sector sector);

// Sector block of an explicit z-basis matrix via the Hadamard transform.
// Refuses input that does not commute with P.
DenseHamiltonian project_to_sector(const DenseHamiltonian& full, Sector sector,
                                   double tol = 1e-10);

// max |[H, P]| over matrix elements, z-basis input.
double parity_commutator_norm(const DenseHamiltonian& full);

// Spectra of family members at matched disorder differ by this global
// factor: H(alpha2) = factor * H(alpha1) when alpha_tilde is shared, so a
// time t under H(alpha1) maps to t * factor under H(alpha2).
double rescaled_time_factor(double alpha1, double alpha2, int n);

// In-place orthonormal Walsh-Hadamard transform over all site bits of a
// 2^n vector (self-inverse).
void fwht(Eigen::VectorXd& v);

}  // namespace scramble
