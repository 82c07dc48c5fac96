#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "walker/kernels.hpp"

namespace walker::kernels {

#ifndef WALKER_HAVE_AVX2
const Table* avx2_table() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(WALKER_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("WALKER_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Isa::Scalar;
    if (v == "avx2" && available(Isa::Avx2)) return Isa::Avx2;
  }
  return available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<const Table*>& current() {
  static std::atomic<const Table*> t{detect() == Isa::Avx2 ? avx2_table() : &scalar_table()};
  return t;
}

}  // namespace

bool available(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
      return avx2_table() != nullptr && cpu_has_avx2();
  }
  return false;
}

void select(Isa isa) {
  if (!available(isa)) {
    throw std::invalid_argument("SIMD variant '" + std::string(name(isa)) + "' is not available");
  }
  current().store(isa == Isa::Avx2 ? avx2_table() : &scalar_table());
}

const Table& active() { return *current().load(std::memory_order_relaxed); }

Isa active_isa() { return active().isa; }

std::string_view name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

ScopedIsa::ScopedIsa(Isa isa) : previous_(active_isa()) { select(isa); }
ScopedIsa::~ScopedIsa() { select(previous_); }

}  // namespace walker::kernels
