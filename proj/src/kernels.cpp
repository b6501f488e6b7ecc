#include "oedpm/kernels.hpp"

#include <cstdlib>

namespace oedpm::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(OEDPM_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Kernels* lookup(std::string_view name) {
  if (name == "scalar") return &scalar();
#if defined(OEDPM_BUILD_AVX2)
  if (name == "avx2" && cpu_has_avx2()) return &avx2();
#endif
#if defined(OEDPM_BUILD_NEON)
  if (name == "neon") return &neon();
#endif
  return nullptr;
}

const Kernels& pick_best() {
  if (const char* env = std::getenv("OEDPM_KERNEL")) {
    if (const Kernels* k = lookup(env)) return *k;
  }
#if defined(OEDPM_BUILD_AVX2)
  if (cpu_has_avx2()) return avx2();
#endif
#if defined(OEDPM_BUILD_NEON)
  return neon();
#endif
  return scalar();
}

} // namespace

const Kernels& active() {
  static const Kernels& k = pick_best();
  return k;
}

const Kernels* by_name(std::string_view name) { return lookup(name); }

std::vector<std::string_view> available() {
  std::vector<std::string_view> names = {"scalar"};
#if defined(OEDPM_BUILD_AVX2)
  if (cpu_has_avx2()) names.push_back("avx2");
#endif
#if defined(OEDPM_BUILD_NEON)
  names.push_back("neon");
#endif
  return names;
}

} // namespace oedpm::kernels
