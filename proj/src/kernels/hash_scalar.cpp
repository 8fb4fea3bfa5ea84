#include "crop/kernels.hpp"

namespace crop::kernels::scalar {

void hash_indices(std::span<const Index> indices, const IndexHashFn& fn,
                  std::span<std::uint32_t> out) noexcept {
  for (std::size_t k = 0; k < indices.size(); ++k) out[k] = fn(indices[k]);
}

void sign_entries(std::span<const Index> rows, std::span<const Index> cols,
                  const SignHashFn& fn, std::span<std::int8_t> out) noexcept {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out[k] = static_cast<std::int8_t>(fn(Entry{rows[k], cols[k]}));
  }
}

}  // namespace crop::kernels::scalar
