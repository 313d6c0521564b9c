#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "pweight/kernels.hpp"

namespace pweight::kernels {

#if defined(PWEIGHT_HAVE_AVX2)
const Backend* avx2_backend_impl();  // defined in kernels_avx2.cpp
#endif

bool avx2_available() {
#if defined(PWEIGHT_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const Backend* resolve(std::string_view name) {
  if (name == "auto") {
#if defined(PWEIGHT_HAVE_AVX2)
    if (avx2_available()) return avx2_backend_impl();
#endif
    return &scalar_backend();
  }
  if (name == "scalar") return &scalar_backend();
  if (name == "avx2") {
#if defined(PWEIGHT_HAVE_AVX2)
    if (avx2_available()) return avx2_backend_impl();
#endif
    throw std::runtime_error("kernel backend 'avx2' is unavailable on this machine");
  }
  throw std::invalid_argument("unknown kernel backend '" + std::string(name) + "' (expected scalar, avx2, or auto)");
}

std::atomic<const Backend*>& active_slot() {
  static std::atomic<const Backend*> slot{[] {
    const char* env = std::getenv("PWEIGHT_KERNELS");
    return resolve(env ? std::string_view(env) : std::string_view("auto"));
  }()};
  return slot;
}

}  // namespace

const Backend& active() { return *active_slot().load(std::memory_order_relaxed); }

void select(std::string_view name) { active_slot().store(resolve(name), std::memory_order_relaxed); }

std::vector<const Backend*> available_backends() {
  std::vector<const Backend*> out{&scalar_backend()};
#if defined(PWEIGHT_HAVE_AVX2)
  if (avx2_available()) out.push_back(avx2_backend_impl());
#endif
  return out;
}

}  // namespace pweight::kernels
