#pragma once

// Batch hash evaluation. Every kernel has a portable scalar reference and,
// on x86-64, an AVX2 variant; dispatch picks one at runtime. All variants
// produce bit-identical results.

#include <cstdint>
#include <span>
#include <string_view>

#include "crop/hashing.hpp"

namespace crop::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa) noexcept;

/// True when the running CPU and the build both support `isa`.
bool isa_available(Isa isa) noexcept;

/// The ISA used by the dispatching entry points. Defaults to the best
/// available one; the CROP_SIMD environment variable (`scalar`/`avx2`)
/// overrides it at first use.
Isa active_isa() noexcept;

/// Forces the dispatch target (falls back to scalar when unavailable).
void set_active_isa(Isa isa) noexcept;

namespace scalar {
void hash_indices(std::span<const Index> indices, const IndexHashFn& fn,
                  std::span<std::uint32_t> out) noexcept;
void sign_entries(std::span<const Index> rows, std::span<const Index> cols,
                  const SignHashFn& fn, std::span<std::int8_t> out) noexcept;
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define CROP_HAVE_AVX2_KERNELS 1
namespace avx2 {
void hash_indices(std::span<const Index> indices, const IndexHashFn& fn,
                  std::span<std::uint32_t> out) noexcept;
void sign_entries(std::span<const Index> rows, std::span<const Index> cols,
                  const SignHashFn& fn, std::span<std::int8_t> out) noexcept;
}  // namespace avx2
#endif

/// out[k] = fn(indices[k]). `out` must be at least as long as `indices`.
void hash_indices(std::span<const Index> indices, const IndexHashFn& fn,
                  std::span<std::uint32_t> out) noexcept;

/// out[k] = fn({rows[k], cols[k]}) as +1 / -1.
void sign_entries(std::span<const Index> rows, std::span<const Index> cols,
                  const SignHashFn& fn, std::span<std::int8_t> out) noexcept;

}  // namespace crop::kernels
