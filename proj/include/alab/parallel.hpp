#pragma once

#include <cstddef>
#include <functional>

namespace alab {

// Worker cap: AUCTION_LAB_THREADS if set, else hardware concurrency.
int thread_cap();

// Static-partition parallel map over [0, count). Each index writes only its
// own output slot, so results are identical for any worker count; reductions
// happen serially in the caller.
void parallel_for(size_t count, const std::function<void(size_t)>& fn);

}  // namespace alab
