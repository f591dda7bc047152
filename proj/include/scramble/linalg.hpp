#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace scramble {

// Thin wrappers over the LAPACK symmetric drivers. All other dense algebra
// in the toolkit goes through Eigen expressions; these exist because full
// spectra of 10^4-dimensional blocks dominate the runtime budget.

// Eigenvalues only, ascending. The argument is consumed.
Eigen::VectorXd sym_eigenvalues(Eigen::MatrixXd a);

// Full decomposition: on return `a` holds orthonormal eigenvector columns
// and `w` the ascending eigenvalues.
void sym_eigendecompose(Eigen::MatrixXd& a, Eigen::VectorXd& w);

// The `count` eigenpairs centered on the spectrum median by index.
void sym_eigen_central(Eigen::MatrixXd a, int count, Eigen::VectorXd& w,
                       Eigen::MatrixXd& z);

// Thin SVD a = u diag(s) vt with k = min(rows, cols) columns in u and rows
// in vt, singular values descending. The argument is consumed.
void svd_thin(Eigen::MatrixXd a, Eigen::MatrixXd& u, Eigen::VectorXd& s,
              Eigen::MatrixXd& vt);

// Deterministic pairwise reduction, stable for long accumulations.
double pairwise_sum(const double* x, std::size_t n);

// Call first thing in main(). OpenBLAS picks its kernels in a library
// constructor, and on hypervisors that mask the CPU model string the probe
// can fall back to a pre-AVX path several times slower than the hardware;
// when that would happen this re-execs the process once with the core type
// pinned. A preexisting OPENBLAS_CORETYPE always wins. No-op on success.
void pin_blas_kernels(char** argv);

}  // namespace scramble
