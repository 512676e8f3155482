#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fastcox {

// Event indicators, one byte per sample: nonzero = event observed
// (uncensored), zero = right-censored. Bytes rather than bool so the data
// can be viewed through std::span.
using EventFlags = std::vector<std::uint8_t>;
using EventView = std::span<const std::uint8_t>;

}  // namespace fastcox
