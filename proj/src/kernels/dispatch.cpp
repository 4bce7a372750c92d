#include "detail.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string_view>

namespace vf::kernels {

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
  }
  return "?";
}

bool backend_available(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#ifdef VITALFUSE_HAVE_AVX2_KERNELS
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

namespace {

Backend resolve_initial() {
  if (const char* env = std::getenv("VITALFUSE_KERNEL")) {
    std::string_view v(env);
    if (v == "scalar") return Backend::Scalar;
    if (v == "avx2") {
      if (!backend_available(Backend::Avx2))
        throw std::runtime_error("VITALFUSE_KERNEL=avx2 but cpu lacks avx2/fma");
      return Backend::Avx2;
    }
    // anything else (incl. "auto") falls through to autodetect
  }
  return backend_available(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar;
}

Backend& current() {
  static Backend b = resolve_initial();
  return b;
}

}  // namespace

Backend active_backend() { return current(); }

void set_backend(Backend b) {
  if (!backend_available(b))
    throw std::runtime_error(std::string("kernel backend unavailable: ") +
                             backend_name(b));
  current() = b;
}

const Ops& ops(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return detail::kScalarOps;
    case Backend::Avx2:
#ifdef VITALFUSE_HAVE_AVX2_KERNELS
      return detail::kAvx2Ops;
#else
      break;
#endif
  }
  throw std::runtime_error("kernel backend not compiled in");
}

const Ops& ops() { return ops(current()); }

}  // namespace vf::kernels
