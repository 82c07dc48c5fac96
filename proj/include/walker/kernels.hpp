#pragma once

// Data-parallel inner loops of the spectral transforms. Every kernel has a
// scalar reference implementation and, on x86-64, an AVX2+FMA variant; the
// variant is picked once at runtime from CPUID and can be overridden with
// WALKER_SIMD=scalar|avx2 or kernels::select().

#include <cstddef>
#include <string_view>

namespace walker::kernels {

enum class Isa { Scalar, Avx2 };

struct Table {
  Isa isa;
  /// y += a*x
  void (*axpy)(std::size_t n, double a, const double* x, double* y);
  /// y += a*x + b*w
  void (*axpy2)(std::size_t n, double a, const double* x, double b, const double* w, double* y);
  /// sum x*y
  double (*dot)(std::size_t n, const double* x, const double* y);
  /// out = s*(u1*fx + u2*fz)
  void (*advect)(std::size_t n, const double* u1, const double* fx, const double* u2,
                 const double* fz, double s, double* out);
  /// out += s*a*b
  void (*mul_acc)(std::size_t n, const double* a, const double* b, double s, double* out);
};

const Table& scalar_table();
/// Null when the variant was not compiled in.
const Table* avx2_table();

bool available(Isa isa);
/// Forces a variant; throws std::invalid_argument if unavailable.
void select(Isa isa);
const Table& active();
Isa active_isa();
std::string_view name(Isa isa);

/// Scoped override, restoring the previous selection on destruction.
class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa);
  ~ScopedIsa();
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  Isa previous_;
};

}  // namespace walker::kernels
