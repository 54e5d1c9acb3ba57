#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace lvs {

/// Calls fn(i) for i in [0, n) on up to `jobs` threads. The first exception thrown
/// by any call is rethrown after all workers finish.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

/// SplitMix64 step; derives independent per-item seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace lvs
