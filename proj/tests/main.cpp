#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "scramble/linalg.hpp"

int main(int argc, char** argv) {
  scramble::pin_blas_kernels(argv);
  return doctest::Context(argc, argv).run();
}
