#include "walker/kernels.hpp"

namespace walker::kernels {

namespace {

void axpy(std::size_t n, double a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpy2(std::size_t n, double a, const double* x, double b, const double* w, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i] + b * w[i];
}

double dot(std::size_t n, const double* x, const double* y) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void advect(std::size_t n, const double* u1, const double* fx, const double* u2, const double* fz,
            double s, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = s * (u1[i] * fx[i] + u2[i] * fz[i]);
}

void mul_acc(std::size_t n, const double* a, const double* b, double s, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] += s * a[i] * b[i];
}

constexpr Table kScalar{Isa::Scalar, axpy, axpy2, dot, advect, mul_acc};

}  // namespace

const Table& scalar_table() { return kScalar; }

}  // namespace walker::kernels
