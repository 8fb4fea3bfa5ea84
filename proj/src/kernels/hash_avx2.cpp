#include "crop/kernels.hpp"

#if defined(CROP_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#include <bit>

namespace crop::kernels::avx2 {
namespace {

#define CROP_AVX2 __attribute__((target("avx2")))

constexpr std::uint64_t kLow29 = (std::uint64_t{1} << 29) - 1;
constexpr std::uint64_t kLow26 = (std::uint64_t{1} << 26) - 1;
constexpr std::uint32_t kMaxFloatKappa = std::uint32_t{1} << 26;
// Bit pattern of 2^52; OR-ing an integer < 2^52 into it yields 2^52 + v.
constexpr std::int64_t kMagic52 = 0x4330000000000000LL;

// Lanes of x hold values < 2^32. Returns (alpha * x) mod p, not fully
// reduced: result < 2^62 + 2^33.
CROP_AVX2 inline __m256i mul_mod_partial(__m256i x, __m256i alpha_lo,
                                         __m256i alpha_hi) {
  const __m256i p = _mm256_set1_epi64x(static_cast<std::int64_t>(kMersenne61));
  const __m256i low29 = _mm256_set1_epi64x(static_cast<std::int64_t>(kLow29));
  // alpha = hi * 2^32 + lo, hi < 2^29.
  __m256i p_lo = _mm256_mul_epu32(x, alpha_lo);  // < 2^64
  __m256i p_hi = _mm256_mul_epu32(x, alpha_hi);  // < 2^61
  // p_hi * 2^32 = (p_hi >> 29) * 2^61 + (p_hi & low29) * 2^32.
  __m256i t1 = _mm256_add_epi64(_mm256_srli_epi64(p_hi, 29),
                                _mm256_slli_epi64(_mm256_and_si256(p_hi, low29), 32));
  __m256i t2 = _mm256_add_epi64(_mm256_srli_epi64(p_lo, 61),
                                _mm256_and_si256(p_lo, p));
  return _mm256_add_epi64(t1, t2);
}

// Full reduction of lanes < 2^63.
CROP_AVX2 inline __m256i reduce_mod_p(__m256i s) {
  const __m256i p = _mm256_set1_epi64x(static_cast<std::int64_t>(kMersenne61));
  const __m256i pm1 = _mm256_set1_epi64x(static_cast<std::int64_t>(kMersenne61 - 1));
  s = _mm256_add_epi64(_mm256_and_si256(s, p), _mm256_srli_epi64(s, 61));
  __m256i ge = _mm256_cmpgt_epi64(s, pm1);
  return _mm256_sub_epi64(s, _mm256_and_si256(ge, p));
}

CROP_AVX2 inline __m256d u52_to_double(__m256i v) {
  const __m256i magic_bits = _mm256_set1_epi64x(kMagic52);
  const __m256d magic = _mm256_castsi256_pd(magic_bits);
  return _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(v, magic_bits)),
                       magic);
}

CROP_AVX2 inline __m256i double_to_u52(__m256d v) {
  const __m256i magic_bits = _mm256_set1_epi64x(kMagic52);
  const __m256d magic = _mm256_castsi256_pd(magic_bits);
  return _mm256_xor_si256(_mm256_castpd_si256(_mm256_add_pd(v, magic)),
                          magic_bits);
}

// v mod kappa for exact integer doubles 0 <= v < 2^52. The reciprocal
// product is off by at most one, which the two corrections absorb.
CROP_AVX2 inline __m256d mod_step(__m256d v, __m256d kappa, __m256d inv) {
  __m256d q = _mm256_floor_pd(_mm256_mul_pd(v, inv));
  __m256d r = _mm256_sub_pd(v, _mm256_mul_pd(q, kappa));
  const __m256d zero = _mm256_setzero_pd();
  r = _mm256_add_pd(r, _mm256_and_pd(_mm256_cmp_pd(r, zero, _CMP_LT_OQ), kappa));
  r = _mm256_sub_pd(r, _mm256_and_pd(_mm256_cmp_pd(r, kappa, _CMP_GE_OQ), kappa));
  return r;
}

// y mod kappa for y < 2^61 and kappa <= 2^26, by Horner over 26-bit limbs.
CROP_AVX2 inline __m256i mod_kappa_float(__m256i y, __m256d kappa, __m256d inv) {
  const __m256i low26 = _mm256_set1_epi64x(static_cast<std::int64_t>(kLow26));
  const __m256d radix = _mm256_set1_pd(static_cast<double>(std::uint64_t{1} << 26));
  __m256d y2 = u52_to_double(_mm256_srli_epi64(y, 52));
  __m256d y1 = u52_to_double(_mm256_and_si256(_mm256_srli_epi64(y, 26), low26));
  __m256d y0 = u52_to_double(_mm256_and_si256(y, low26));
  __m256d r = mod_step(y2, kappa, inv);
  r = mod_step(_mm256_add_pd(_mm256_mul_pd(r, radix), y1), kappa, inv);
  r = mod_step(_mm256_add_pd(_mm256_mul_pd(r, radix), y0), kappa, inv);
  return double_to_u52(r);
}

CROP_AVX2 inline __m128i narrow_to_u32(__m256i v) {
  const __m256i even = _mm256_setr_epi32(0, 2, 4, 6, 0, 2, 4, 6);
  return _mm256_castsi256_si128(_mm256_permutevar8x32_epi32(v, even));
}

CROP_AVX2 inline __m256i load_u32x4(const Index* p) {
  return _mm256_cvtepu32_epi64(
      _mm_loadu_si128(reinterpret_cast<const __m128i*>(p)));
}

enum class Reduce { kMask, kFloat, kScalar };

template <Reduce mode>
CROP_AVX2 void hash_indices_impl(std::span<const Index> indices,
                                 const IndexHashFn& fn,
                                 std::span<std::uint32_t> out) noexcept {
  const __m256i alpha_lo =
      _mm256_set1_epi64x(static_cast<std::int64_t>(fn.alpha & 0xffffffffULL));
  const __m256i alpha_hi =
      _mm256_set1_epi64x(static_cast<std::int64_t>(fn.alpha >> 32));
  const __m256i beta = _mm256_set1_epi64x(static_cast<std::int64_t>(fn.beta));
  const __m256i mask = _mm256_set1_epi64x(static_cast<std::int64_t>(fn.kappa - 1));
  const __m256d kappa = _mm256_set1_pd(static_cast<double>(fn.kappa));
  const __m256d inv = _mm256_set1_pd(1.0 / static_cast<double>(fn.kappa));

  const std::size_t n = indices.size();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    __m256i x = load_u32x4(indices.data() + k);
    __m256i y = reduce_mod_p(
        _mm256_add_epi64(mul_mod_partial(x, alpha_lo, alpha_hi), beta));
    if constexpr (mode == Reduce::kMask) {
      _mm_storeu_si128(reinterpret_cast<__m128i*>(out.data() + k),
                       narrow_to_u32(_mm256_and_si256(y, mask)));
    } else if constexpr (mode == Reduce::kFloat) {
      _mm_storeu_si128(reinterpret_cast<__m128i*>(out.data() + k),
                       narrow_to_u32(mod_kappa_float(y, kappa, inv)));
    } else {
      alignas(32) std::uint64_t lanes[4];
      _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), y);
      for (int l = 0; l < 4; ++l) {
        out[k + l] = static_cast<std::uint32_t>(lanes[l] % fn.kappa);
      }
    }
  }
  for (; k < n; ++k) out[k] = fn(indices[k]);
}

}  // namespace

void hash_indices(std::span<const Index> indices, const IndexHashFn& fn,
                  std::span<std::uint32_t> out) noexcept {
  if (std::has_single_bit(fn.kappa)) {
    hash_indices_impl<Reduce::kMask>(indices, fn, out);
  } else if (fn.kappa <= kMaxFloatKappa) {
    hash_indices_impl<Reduce::kFloat>(indices, fn, out);
  } else {
    hash_indices_impl<Reduce::kScalar>(indices, fn, out);
  }
}

CROP_AVX2 void sign_entries(std::span<const Index> rows,
                            std::span<const Index> cols, const SignHashFn& fn,
                            std::span<std::int8_t> out) noexcept {
  const __m256i ar_lo =
      _mm256_set1_epi64x(static_cast<std::int64_t>(fn.alpha_row & 0xffffffffULL));
  const __m256i ar_hi =
      _mm256_set1_epi64x(static_cast<std::int64_t>(fn.alpha_row >> 32));
  const __m256i ac_lo =
      _mm256_set1_epi64x(static_cast<std::int64_t>(fn.alpha_col & 0xffffffffULL));
  const __m256i ac_hi =
      _mm256_set1_epi64x(static_cast<std::int64_t>(fn.alpha_col >> 32));
  const __m256i beta = _mm256_set1_epi64x(static_cast<std::int64_t>(fn.beta));
  const __m256i one = _mm256_set1_epi64x(1);

  const std::size_t n = rows.size();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    // Each partial is < 2^62 + 2^33; fold each once so the sum stays < 2^63.
    __m256i r = reduce_mod_p(mul_mod_partial(load_u32x4(rows.data() + k), ar_lo, ar_hi));
    __m256i c = reduce_mod_p(mul_mod_partial(load_u32x4(cols.data() + k), ac_lo, ac_hi));
    __m256i y = reduce_mod_p(_mm256_add_epi64(_mm256_add_epi64(r, c), beta));
    // parity 0 -> +1, parity 1 -> -1: 1 - 2 * parity.
    __m256i parity = _mm256_and_si256(y, one);
    __m256i sign = _mm256_sub_epi64(one, _mm256_add_epi64(parity, parity));
    alignas(32) std::int64_t lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), sign);
    for (int l = 0; l < 4; ++l) out[k + l] = static_cast<std::int8_t>(lanes[l]);
  }
  for (; k < n; ++k) {
    out[k] = static_cast<std::int8_t>(fn(Entry{rows[k], cols[k]}));
  }
}

}  // namespace crop::kernels::avx2

#endif  // CROP_HAVE_AVX2_KERNELS
