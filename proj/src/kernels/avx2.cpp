// Compiled with -mavx2 -mfma; only reached after a CPUID check.
#include <immintrin.h>

#include "walker/kernels.hpp"

namespace walker::kernels {

namespace {

void axpy(std::size_t n, double a, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void axpy2(std::size_t n, double a, const double* x, double b, const double* w, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    vy = _mm256_fmadd_pd(vb, _mm256_loadu_pd(w + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i] + b * w[i];
}

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(std::size_t n, const double* x, const double* y) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void advect(std::size_t n, const double* u1, const double* fx, const double* u2, const double* fz,
            double s, double* out) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_mul_pd(_mm256_loadu_pd(u2 + i), _mm256_loadu_pd(fz + i));
    t = _mm256_fmadd_pd(_mm256_loadu_pd(u1 + i), _mm256_loadu_pd(fx + i), t);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(vs, t));
  }
  for (; i < n; ++i) out[i] = s * (u1[i] * fx[i] + u2[i] * fz[i]);
}

void mul_acc(std::size_t n, const double* a, const double* b, double s, double* out) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(vs, ab, _mm256_loadu_pd(out + i)));
  }
  for (; i < n; ++i) out[i] += s * a[i] * b[i];
}

constexpr Table kAvx2{Isa::Avx2, axpy, axpy2, dot, advect, mul_acc};

}  // namespace

const Table* avx2_table() { return &kAvx2; }

}  // namespace walker::kernels
