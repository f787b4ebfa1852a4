#pragma once

#include <cstddef>
#include <functional>

namespace moderate {

/// Worker count used by parallel_for. Defaults to MC_THREADS when set, else 1.
int num_threads();
void set_num_threads(int n);

/// Runs body(begin, end) over a static partition of [0, n). Results must not
/// depend on the partition; callers write to disjoint slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace moderate
