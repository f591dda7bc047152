#include "scramble/linalg.hpp"

#include <lapacke.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace scramble {

namespace {

void check_square(const Eigen::MatrixXd& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw std::invalid_argument(std::string(what) + ": square matrix required");
}

void check_info(lapack_int info, const char* what) {
  if (info != 0)
    throw std::runtime_error(std::string(what) + " failed, info = " +
                             std::to_string(info));
}

}  // namespace

Eigen::VectorXd sym_eigenvalues(Eigen::MatrixXd a) {
  check_square(a, "sym_eigenvalues");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigen::VectorXd w(n);
  check_info(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data()),
             "dsyevd");
  return w;
}

void sym_eigendecompose(Eigen::MatrixXd& a, Eigen::VectorXd& w) {
  check_square(a, "sym_eigendecompose");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  w.resize(n);
  check_info(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, w.data()),
             "dsyevd");
}

void sym_eigen_central(Eigen::MatrixXd a, int count, Eigen::VectorXd& w,
                       Eigen::MatrixXd& z) {
  check_square(a, "sym_eigen_central");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  if (count < 1 || count > n)
    throw std::invalid_argument("sym_eigen_central: bad count");
  // 1-based inclusive index window centered on the median level.
  const lapack_int il = static_cast<lapack_int>((n - count) / 2 + 1);
  const lapack_int iu = il + count - 1;
  w.resize(count);
  z.resize(n, count);
  Eigen::VectorX<lapack_int> isuppz(2 * count);
  lapack_int found = 0;
  check_info(LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, a.data(), n,
                            0.0, 0.0, il, iu, 0.0, &found, w.data(), z.data(),
                            n, isuppz.data()),
             "dsyevr");
  if (found != count)
    throw std::runtime_error("sym_eigen_central: driver returned " +
                             std::to_string(found) + " of " +
                             std::to_string(count) + " pairs");
}

void svd_thin(Eigen::MatrixXd a, Eigen::MatrixXd& u, Eigen::VectorXd& s,
              Eigen::MatrixXd& vt) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  if (m == 0 || n == 0) throw std::invalid_argument("svd_thin: empty matrix");
  const lapack_int k = std::min(m, n);
  u.resize(m, k);
  s.resize(k);
  vt.resize(k, n);
  check_info(LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', m, n, a.data(), m, s.data(),
                            u.data(), m, vt.data(), k),
             "dgesdd");
}

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

void pin_blas_kernels(char** argv) {
  if (std::getenv("OPENBLAS_CORETYPE")) return;
  if (!__builtin_cpu_supports("avx512f")) return;
  ::setenv("OPENBLAS_CORETYPE", "SKYLAKEX", 1);
  ::execv("/proc/self/exe", argv);
  // exec failed; the generic kernels are slower but correct.
}

}  // namespace scramble
