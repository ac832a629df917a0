#include "sobscale/simd/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace sobscale::simd::scalar {

double weighted_energy(std::span<const double> w, std::span<const cplx> c) {
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    acc += w[i] * w[i] * std::norm(c[i]);
  }
  return acc;
}

void scale(std::span<const double> w, std::span<cplx> c) {
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= w[i];
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    re += a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
  }
  return {re, im};
}

double max_abs(std::span<const cplx> c) {
  double m = 0.0;
  for (const auto& z : c) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace sobscale::simd::scalar
