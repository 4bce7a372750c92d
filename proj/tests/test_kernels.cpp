#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "vitalfuse/kernels.hpp"

using namespace vf::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// Plain loops, written independently of the scalar backend.
double ref_dot(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

}  // namespace

TEST_CASE("scalar backend matches naive reference") {
  const Ops& s = ops(Backend::Scalar);
  std::mt19937_64 rng(7);
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 13u, 64u, 100u}) {
    auto x = random_vec(rng, n);
    auto y = random_vec(rng, n);
    CHECK(s.dot(x.data(), y.data(), n) ==
          doctest::Approx(ref_dot(x, y)).epsilon(1e-12));

    auto y2 = y;
    s.axpy(0.5, x.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(y2[i] == doctest::Approx(y[i] + 0.5 * x[i]).epsilon(1e-12));
  }
}

TEST_CASE("matvec and outer accumulate against hand loops") {
  const Ops& s = ops(Backend::Scalar);
  std::mt19937_64 rng(9);
  for (std::size_t rows : {1u, 2u, 5u, 8u, 17u}) {
    for (std::size_t cols : {1u, 3u, 4u, 9u, 16u}) {
      auto a = random_vec(rng, rows * cols);
      auto x = random_vec(rng, cols);
      auto xr = random_vec(rng, rows);
      std::vector<double> y(rows, 0.25), yt(cols, -0.5);

      auto y_ref = y;
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) y_ref[r] += a[r * cols + c] * x[c];
      s.matvec_acc(a.data(), rows, cols, x.data(), y.data());
      for (std::size_t r = 0; r < rows; ++r)
        CHECK(y[r] == doctest::Approx(y_ref[r]).epsilon(1e-12));

      auto yt_ref = yt;
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
          yt_ref[c] += a[r * cols + c] * xr[r];
      s.matvec_t_acc(a.data(), rows, cols, xr.data(), yt.data());
      for (std::size_t c = 0; c < cols; ++c)
        CHECK(yt[c] == doctest::Approx(yt_ref[c]).epsilon(1e-12));

      auto a2 = a;
      auto a_ref = a;
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
          a_ref[r * cols + c] += xr[r] * x[c];
      s.outer_acc(xr.data(), rows, x.data(), cols, a2.data());
      for (std::size_t i = 0; i < rows * cols; ++i)
        CHECK(a2[i] == doctest::Approx(a_ref[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("vector backend agrees with scalar on random shapes") {
  if (!backend_available(Backend::Avx2)) {
    MESSAGE("AVX2 unavailable on this host; equivalence pair skipped");
    return;
  }
  const Ops& sc = ops(Backend::Scalar);
  const Ops& vx = ops(Backend::Avx2);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<std::size_t> dim(0, 97);
    const std::size_t n = dim(rng);
    auto x = random_vec(rng, n);
    auto y = random_vec(rng, n);
    CHECK(vx.dot(x.data(), y.data(), n) ==
          doctest::Approx(sc.dot(x.data(), y.data(), n)).epsilon(1e-10));

    auto ys = y, yv = y;
    sc.axpy(1.75, x.data(), ys.data(), n);
    vx.axpy(1.75, x.data(), yv.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(yv[i] == doctest::Approx(ys[i]).epsilon(1e-12));

    const std::size_t rows = 1 + dim(rng) % 31, cols = 1 + dim(rng) % 31;
    auto a = random_vec(rng, rows * cols);
    auto xc = random_vec(rng, cols);
    auto xr = random_vec(rng, rows);

    std::vector<double> m1(rows, 0.0), m2(rows, 0.0);
    sc.matvec_acc(a.data(), rows, cols, xc.data(), m1.data());
    vx.matvec_acc(a.data(), rows, cols, xc.data(), m2.data());
    for (std::size_t r = 0; r < rows; ++r)
      CHECK(m2[r] == doctest::Approx(m1[r]).epsilon(1e-10));

    std::vector<double> t1(cols, 0.0), t2(cols, 0.0);
    sc.matvec_t_acc(a.data(), rows, cols, xr.data(), t1.data());
    vx.matvec_t_acc(a.data(), rows, cols, xr.data(), t2.data());
    for (std::size_t c = 0; c < cols; ++c)
      CHECK(t2[c] == doctest::Approx(t1[c]).epsilon(1e-10));

    auto o1 = a, o2 = a;
    sc.outer_acc(xr.data(), rows, xc.data(), cols, o1.data());
    vx.outer_acc(xr.data(), rows, xc.data(), cols, o2.data());
    for (std::size_t i = 0; i < rows * cols; ++i)
      CHECK(o2[i] == doctest::Approx(o1[i]).epsilon(1e-12));
  }
}

TEST_CASE("backend selection is explicit and reversible") {
  const Backend before = active_backend();
  set_backend(Backend::Scalar);
  CHECK(active_backend() == Backend::Scalar);
  CHECK(backend_name(Backend::Scalar) == std::string("scalar"));
  CHECK(backend_name(Backend::Avx2) == std::string("avx2"));
  CHECK(backend_available(Backend::Scalar));
  if (backend_available(Backend::Avx2)) {
    set_backend(Backend::Avx2);
    CHECK(active_backend() == Backend::Avx2);
  } else {
    CHECK_THROWS(set_backend(Backend::Avx2));
  }
  set_backend(before);
}
