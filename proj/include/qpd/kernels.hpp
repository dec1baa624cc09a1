#pragma once

#include <cstddef>

// Dense real kernels used by the splitting solver. Every variant must agree with the scalar
// reference up to floating-point reassociation.
namespace qpd::kernels {

struct Table {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = A x, A row-major rows × cols
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  // y = Aᵀ x
  void (*gemv_t)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
};

const Table& scalar();
// nullptr when not built for this target or the CPU lacks AVX2+FMA.
const Table* avx2();
// Picked once per process. QPDISC_KERNELS=scalar forces the reference kernels.
const Table& active();

}  // namespace qpd::kernels
