#include <atomic>
#include <stdexcept>

#include "sobscale/simd/kernels.hpp"

namespace sobscale::simd {
namespace {

Isa detect() {
#ifdef SOBSCALE_HAVE_AVX2_KERNELS
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return Isa::avx2;
  }
#endif
  return Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

Isa best_available_isa() {
  static const Isa best = detect();
  return best;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (isa == Isa::avx2 && best_available_isa() != Isa::avx2) isa = Isa::scalar;
  current().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

#ifdef SOBSCALE_HAVE_AVX2_KERNELS
#define SOBSCALE_DISPATCH(fn, ...) \
  (active_isa() == Isa::avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define SOBSCALE_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

namespace {
void require_same_length(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("simd kernel: span lengths differ");
}
}  // namespace

double weighted_energy(std::span<const double> w, std::span<const cplx> c) {
  require_same_length(w.size(), c.size());
  return SOBSCALE_DISPATCH(weighted_energy, w, c);
}

void scale(std::span<const double> w, std::span<cplx> c) {
  require_same_length(w.size(), c.size());
  SOBSCALE_DISPATCH(scale, w, c);
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  require_same_length(a.size(), b.size());
  return SOBSCALE_DISPATCH(dot, a, b);
}

double max_abs(std::span<const cplx> c) { return SOBSCALE_DISPATCH(max_abs, c); }

}  // namespace sobscale::simd
