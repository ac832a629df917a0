// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include "sobscale/simd/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace sobscale::simd::avx2 {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// (w0, w1) -> (w0, w0, w1, w1)
inline __m256d spread_pair(const double* w) {
  __m128d p = _mm_loadu_pd(w);
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(p), 0x50);
}

}  // namespace

double weighted_energy(std::span<const double> w, std::span<const cplx> c) {
  const std::size_t n = c.size();
  const double* cd = reinterpret_cast<const double*>(c.data());
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d w0 = spread_pair(w.data() + i);
    __m256d w1 = spread_pair(w.data() + i + 2);
    __m256d c0 = _mm256_loadu_pd(cd + 2 * i);
    __m256d c1 = _mm256_loadu_pd(cd + 2 * i + 4);
    acc0 = _mm256_fmadd_pd(_mm256_mul_pd(w0, w0), _mm256_mul_pd(c0, c0), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_mul_pd(w1, w1), _mm256_mul_pd(c1, c1), acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += w[i] * w[i] * std::norm(c[i]);
  return acc;
}

void scale(std::span<const double> w, std::span<cplx> c) {
  const std::size_t n = c.size();
  double* cd = reinterpret_cast<double*>(c.data());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d ww = spread_pair(w.data() + i);
    __m256d cc = _mm256_loadu_pd(cd + 2 * i);
    _mm256_storeu_pd(cd + 2 * i, _mm256_mul_pd(ww, cc));
  }
  for (; i < n; ++i) c[i] *= w[i];
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  const std::size_t n = a.size();
  const double* ad = reinterpret_cast<const double*>(a.data());
  const double* bd = reinterpret_cast<const double*>(b.data());
  // direct: (ar*br, ai*bi, ...), cross: (ar*bi, ai*br, ...)
  __m256d direct = _mm256_setzero_pd();
  __m256d cross = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d av = _mm256_loadu_pd(ad + 2 * i);
    __m256d bv = _mm256_loadu_pd(bd + 2 * i);
    direct = _mm256_fmadd_pd(av, bv, direct);
    cross = _mm256_fmadd_pd(av, _mm256_permute_pd(bv, 0x5), cross);
  }
  alignas(32) double d[4];
  _mm256_store_pd(d, direct);
  double re = (d[0] + d[2]) - (d[1] + d[3]);
  double im = hsum(cross);
  for (; i < n; ++i) {
    re += a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
  }
  return {re, im};
}

double max_abs(std::span<const cplx> c) {
  const std::size_t n = c.size();
  const double* cd = reinterpret_cast<const double*>(c.data());
  __m256d best = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d v = _mm256_loadu_pd(cd + 2 * i);
    __m256d sq = _mm256_mul_pd(v, v);
    // (re^2 + im^2) in both lanes of each complex
    __m256d mag = _mm256_add_pd(sq, _mm256_permute_pd(sq, 0x5));
    best = _mm256_max_pd(best, mag);
  }
  alignas(32) double m[4];
  _mm256_store_pd(m, best);
  double out = std::sqrt(std::max(std::max(m[0], m[1]), std::max(m[2], m[3])));
  for (; i < n; ++i) out = std::max(out, std::abs(c[i]));
  return out;
}

}  // namespace sobscale::simd::avx2
