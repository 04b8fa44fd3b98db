#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pathret {

// Suffix array over an arbitrary int32 sequence, prefix-doubling
// (Manber-Myers), O(n log^2 n). Positions past the end compare smaller than
// any symbol, so no terminator is required for well-defined order.
std::vector<std::uint32_t> build_suffix_array(std::span<const std::int32_t> text);

}  // namespace pathret
