#pragma once

#include <cstddef>
#include <functional>

namespace subdetect {

/// Number of threads to use for a `workers` knob; 0 means all hardware threads.
[[nodiscard]] unsigned resolve_workers(unsigned workers) noexcept;

/// Calls body(i) for every i in [0, count) on up to `workers` threads.
/// Results must be written to per-index slots; work order is unspecified.
/// The exception thrown for the lowest index, if any, is rethrown.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

}  // namespace subdetect
