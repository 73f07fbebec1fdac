#pragma once

#include <cstddef>
#include <functional>

namespace qpdl {

/// Worker cap from QPDL_THREADS, defaulting to the hardware count.
int worker_count();

/// Index-parallel loop over [0, n) with a shared atomic cursor.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace qpdl
