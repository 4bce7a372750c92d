#pragma once

#include <cstddef>

// Dense double-precision primitives used by the forecaster's inner loops.
// A scalar reference implementation always exists; on x86-64 an AVX2+FMA
// variant is selected at runtime when the CPU supports it. The env var
// VITALFUSE_KERNEL=scalar|avx2|auto overrides autodetection.

namespace vf::kernels {

enum class Backend { Scalar, Avx2 };

struct Ops {
  // sum_i x[i]*y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += a*x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y[r] += sum_c A[r*cols+c]*x[c]   (A is rows x cols, row major)
  void (*matvec_acc)(const double* a, std::size_t rows, std::size_t cols,
                     const double* x, double* y);
  // y[c] += sum_r A[r*cols+c]*x[r]   (transposed product)
  void (*matvec_t_acc)(const double* a, std::size_t rows, std::size_t cols,
                       const double* x, double* y);
  // A[i*n+j] += u[i]*v[j]
  void (*outer_acc)(const double* u, std::size_t m, const double* v,
                    std::size_t n, double* a);
};

const char* backend_name(Backend b);
bool backend_available(Backend b);

// Active backend, resolved once from env + cpuid on first use.
Backend active_backend();
void set_backend(Backend b);  // explicit override, throws if unavailable

const Ops& ops();           // table for the active backend
const Ops& ops(Backend b);  // table for a specific backend (equivalence tests)

}  // namespace vf::kernels
