#include "detail.hpp"

namespace vf::kernels::detail {

namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void matvec_acc_scalar(const double* a, std::size_t rows, std::size_t cols,
                       const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = a + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] += acc;
  }
}

void matvec_t_acc_scalar(const double* a, std::size_t rows, std::size_t cols,
                         const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = a + r * cols;
    const double xr = x[r];
    for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * xr;
  }
}

void outer_acc_scalar(const double* u, std::size_t m, const double* v,
                      std::size_t n, double* a) {
  for (std::size_t i = 0; i < m; ++i) {
    double* row = a + i * n;
    const double ui = u[i];
    for (std::size_t j = 0; j < n; ++j) row[j] += ui * v[j];
  }
}

}  // namespace

const Ops kScalarOps = {
    dot_scalar, axpy_scalar, matvec_acc_scalar, matvec_t_acc_scalar,
    outer_acc_scalar,
};

}  // namespace vf::kernels::detail
