#ifndef QHARM_PARALLEL_HPP
#define QHARM_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace qharm {

// Worker count: QH_THREADS if set and positive, else hardware concurrency.
unsigned worker_count();

// Runs body(i) for i in [0,n) split into contiguous blocks, one per worker.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qharm

#endif
