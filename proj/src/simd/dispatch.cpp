#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "capa/simd/kernels.hpp"

namespace capa::simd {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("CAPA_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && isa_available(Isa::avx2)) return Isa::avx2;
  }
  return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

void check_sizes(std::size_t a, std::size_t b, std::size_t w) {
  if (a != b || a != w) throw std::invalid_argument("kernel operands have mismatched lengths");
}

}  // namespace

bool isa_available(Isa isa) {
  if (isa == Isa::scalar) return true;
  static const bool ok = avx2::compiled() && cpu_has_avx2();
  return ok;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void force_isa(Isa isa) {
  if (!isa_available(isa)) throw std::runtime_error("requested ISA is not available on this machine");
  current().store(isa, std::memory_order_relaxed);
}

cplx weighted_inner(std::span<const cplx> a, std::span<const cplx> b, std::span<const double> w) {
  check_sizes(a.size(), b.size(), w.size());
  return active_isa() == Isa::avx2 ? avx2::weighted_inner(a.data(), b.data(), w.data(), a.size())
                                   : scalar::weighted_inner(a.data(), b.data(), w.data(), a.size());
}

cplx weighted_bilinear(std::span<const cplx> a, std::span<const cplx> b, std::span<const double> w) {
  check_sizes(a.size(), b.size(), w.size());
  return active_isa() == Isa::avx2 ? avx2::weighted_bilinear(a.data(), b.data(), w.data(), a.size())
                                   : scalar::weighted_bilinear(a.data(), b.data(), w.data(), a.size());
}

double weighted_norm2(std::span<const cplx> a, std::span<const double> w) {
  check_sizes(a.size(), a.size(), w.size());
  return active_isa() == Isa::avx2 ? avx2::weighted_norm2(a.data(), w.data(), a.size())
                                   : scalar::weighted_norm2(a.data(), w.data(), a.size());
}

void axpy_conj(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
  check_sizes(x.size(), y.size(), x.size());
  if (active_isa() == Isa::avx2)
    avx2::axpy_conj(alpha, x.data(), y.data(), x.size());
  else
    scalar::axpy_conj(alpha, x.data(), y.data(), x.size());
}

}  // namespace capa::simd
