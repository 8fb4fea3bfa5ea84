#include <atomic>
#include <cstdlib>
#include <string_view>

#include "crop/kernels.hpp"

namespace crop::kernels {
namespace {

Isa best_isa() noexcept {
  if (const char* env = std::getenv("CROP_SIMD")) {
    std::string_view v(env);
    if (v == "scalar") return Isa::kScalar;
    if (v == "avx2" && isa_available(Isa::kAvx2)) return Isa::kAvx2;
  }
  return isa_available(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<Isa>& active() noexcept {
  static std::atomic<Isa> isa{best_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::kAvx2:
      return "avx2";
    case Isa::kScalar:
      break;
  }
  return "scalar";
}

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(CROP_HAVE_AVX2_KERNELS)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) noexcept {
  active().store(isa_available(isa) ? isa : Isa::kScalar,
                 std::memory_order_relaxed);
}

void hash_indices(std::span<const Index> indices, const IndexHashFn& fn,
                  std::span<std::uint32_t> out) noexcept {
#if defined(CROP_HAVE_AVX2_KERNELS)
  if (active_isa() == Isa::kAvx2) return avx2::hash_indices(indices, fn, out);
#endif
  scalar::hash_indices(indices, fn, out);
}

void sign_entries(std::span<const Index> rows, std::span<const Index> cols,
                  const SignHashFn& fn, std::span<std::int8_t> out) noexcept {
#if defined(CROP_HAVE_AVX2_KERNELS)
  if (active_isa() == Isa::kAvx2) return avx2::sign_entries(rows, cols, fn, out);
#endif
  scalar::sign_entries(rows, cols, fn, out);
}

}  // namespace crop::kernels
