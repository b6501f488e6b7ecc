#pragma once

#include <cstddef>
#include <functional>

namespace oedpm {

// Worker count for parallel sections: OEDPM_THREADS when set (0 = auto),
// otherwise the hardware concurrency.
unsigned worker_count();

// Runs fn(i) for i in [begin, end) across workers in fixed blocks. Joins all
// workers before returning; if any invocation throws, rethrows the exception
// with the smallest index. Results must not depend on execution order.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& fn);

} // namespace oedpm
