#include <cstdlib>
#include <string_view>

#include "backends.hpp"
#include "skelfreq/error.hpp"

namespace skelfreq::kernels {

const KernelTable& scalar() { return detail::scalar_table(); }

const KernelTable* avx2() {
#if defined(SKELFREQ_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? detail::avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon() {
#if defined(SKELFREQ_HAVE_NEON)
  // Advanced SIMD is mandatory on AArch64.
  return detail::neon_table();
#else
  return nullptr;
#endif
}

std::vector<const KernelTable*> available() {
  std::vector<const KernelTable*> out{&scalar()};
  if (const auto* t = avx2()) out.push_back(t);
  if (const auto* t = neon()) out.push_back(t);
  return out;
}

namespace {

const KernelTable& select() {
  const auto backends = available();
  if (const char* forced = std::getenv("SKELFREQ_SIMD"); forced != nullptr && *forced != '\0') {
    for (const auto* t : backends) {
      if (t->name == std::string_view(forced)) return *t;
    }
    fail(ErrorKind::parameter, "SKELFREQ_SIMD names an unavailable backend: " + std::string(forced));
  }
  return *backends.back();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace skelfreq::kernels
