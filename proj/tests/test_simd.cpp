#include <doctest.h>

#include <cmath>
#include <vector>

#include "sobscale/rng.hpp"
#include "sobscale/simd/kernels.hpp"

using namespace sobscale;
using simd::cplx;

namespace {

struct Data {
  std::vector<double> w;
  std::vector<cplx> a;
  std::vector<cplx> b;
};

Data make(std::size_t len, std::uint64_t seed) {
  Rng rng(seed);
  Data d;
  for (std::size_t i = 0; i < len; ++i) {
    d.w.push_back(rng.uniform(0.1, 10.0));
    d.a.push_back(rng.complex_normal());
    d.b.push_back(rng.complex_normal());
  }
  return d;
}

bool have_avx2() { return simd::best_available_isa() == simd::Isa::avx2; }

}  // namespace

TEST_CASE("scalar kernels match long-double references") {
  const Data d = make(37, 1);
  long double e = 0;
  std::complex<long double> s = 0;
  long double m = 0;
  for (std::size_t i = 0; i < d.w.size(); ++i) {
    e += static_cast<long double>(d.w[i]) * d.w[i] * std::norm(d.a[i]);
    s += std::complex<long double>(d.a[i]) * std::complex<long double>(d.b[i]);
    m = std::max<long double>(m, std::abs(d.a[i]));
  }
  CHECK(simd::scalar::weighted_energy(d.w, d.a) == doctest::Approx(static_cast<double>(e)).epsilon(1e-14));
  const cplx got = simd::scalar::dot(d.a, d.b);
  CHECK(std::abs(got - cplx(static_cast<double>(s.real()), static_cast<double>(s.imag()))) < 1e-13);
  CHECK(simd::scalar::max_abs(d.a) == doctest::Approx(static_cast<double>(m)).epsilon(1e-15));
}

TEST_CASE("avx2 kernels agree with the scalar path on every tail length") {
  if (!have_avx2()) {
    MESSAGE("AVX2/FMA not available; equivalence not exercised");
    return;
  }
#ifdef SOBSCALE_HAVE_AVX2_KERNELS
  for (std::size_t len = 0; len <= 67; ++len) {
    CAPTURE(len);
    const Data d = make(len, 100 + len);
    const double es = simd::scalar::weighted_energy(d.w, d.a);
    const double ev = simd::avx2::weighted_energy(d.w, d.a);
    CHECK(std::abs(es - ev) <= 1e-13 * std::max(1.0, es));

    const cplx ds = simd::scalar::dot(d.a, d.b);
    const cplx dv = simd::avx2::dot(d.a, d.b);
    CHECK(std::abs(ds - dv) <= 1e-13 * std::max(1.0, std::abs(ds)));

    const double ms = simd::scalar::max_abs(d.a);
    CHECK(std::abs(ms - simd::avx2::max_abs(d.a)) <= 1e-15 * std::max(1.0, ms));

    std::vector<cplx> xs = d.a;
    std::vector<cplx> xv = d.a;
    simd::scalar::scale(d.w, xs);
    simd::avx2::scale(d.w, xv);
    for (std::size_t i = 0; i < len; ++i) CHECK(xs[i] == xv[i]);
  }
#endif
}

TEST_CASE("forced isa routes the dispatched entry points") {
  const Data d = make(19, 7);
  simd::force_isa(simd::Isa::scalar);
  CHECK(simd::active_isa() == simd::Isa::scalar);
  const double es = simd::weighted_energy(d.w, d.a);
  CHECK(es == simd::scalar::weighted_energy(d.w, d.a));
  if (have_avx2()) {
    simd::force_isa(simd::Isa::avx2);
    CHECK(simd::active_isa() == simd::Isa::avx2);
    CHECK(std::abs(simd::weighted_energy(d.w, d.a) - es) <= 1e-13 * es);
  }
  simd::force_isa(simd::best_available_isa());
  CHECK(simd::isa_name(simd::Isa::scalar) == "scalar");
}

TEST_CASE("mismatched spans are rejected") {
  std::vector<double> w(3, 1.0);
  std::vector<cplx> c(4);
  CHECK_THROWS_AS(simd::weighted_energy(w, c), std::invalid_argument);
  CHECK_THROWS_AS(simd::scale(w, c), std::invalid_argument);
}
