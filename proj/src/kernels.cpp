#include "qpd/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace qpd::kernels {

#if defined(QPD_HAVE_AVX2)
const Table& avx2_table();
#endif

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x,
                 double* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = dot_scalar(a + i * cols, x, cols);
}

void gemv_t_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x,
                   double* y) {
  for (std::size_t j = 0; j < cols; ++j) y[j] = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    if (x[i] != 0.0) axpy_scalar(x[i], a + i * cols, y, cols);
}

const Table kScalar = {"scalar", dot_scalar, axpy_scalar, gemv_scalar, gemv_t_scalar};

}  // namespace

const Table& scalar() { return kScalar; }

const Table* avx2() {
#if defined(QPD_HAVE_AVX2)
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const Table& active() {
  static const Table* chosen = [] {
    const char* env = std::getenv("QPDISC_KERNELS");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return &kScalar;
    const Table* t = avx2();
    return t != nullptr ? t : &kScalar;
  }();
  return *chosen;
}

}  // namespace qpd::kernels
