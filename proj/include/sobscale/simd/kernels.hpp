#pragma once

// Data-parallel inner loops of the Fourier-side calculus.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant. The active variant is chosen once at first use from the
// CPU feature bits; `force_isa` overrides it (tests use this to compare the
// two paths on identical inputs).

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace sobscale::simd {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

Isa active_isa();
Isa best_available_isa();
void force_isa(Isa isa);
std::string_view isa_name(Isa isa);

/// Sum of w[i]^2 * |c[i]|^2.
double weighted_energy(std::span<const double> w, std::span<const cplx> c);

/// c[i] *= w[i] (real weights, complex data).
void scale(std::span<const double> w, std::span<cplx> c);

/// Sum of a[i] * b[i] (no conjugation).
cplx dot(std::span<const cplx> a, std::span<const cplx> b);

/// max_i |c[i]|.
double max_abs(std::span<const cplx> c);

namespace scalar {
double weighted_energy(std::span<const double> w, std::span<const cplx> c);
void scale(std::span<const double> w, std::span<cplx> c);
cplx dot(std::span<const cplx> a, std::span<const cplx> b);
double max_abs(std::span<const cplx> c);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define SOBSCALE_HAVE_AVX2_KERNELS 1
namespace avx2 {
double weighted_energy(std::span<const double> w, std::span<const cplx> c);
void scale(std::span<const double> w, std::span<cplx> c);
cplx dot(std::span<const cplx> a, std::span<const cplx> b);
double max_abs(std::span<const cplx> c);
}  // namespace avx2
#endif

}  // namespace sobscale::simd
