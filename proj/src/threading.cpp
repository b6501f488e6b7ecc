#include "oedpm/threading.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace oedpm {

unsigned worker_count() {
  unsigned n = 0;
  if (const char* env = std::getenv("OEDPM_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && parsed > 0) n = static_cast<unsigned>(parsed);
  }
  if (n == 0) n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t total = end > begin ? end - begin : 0;
  if (total == 0) return;

  const unsigned workers = std::min<std::size_t>(worker_count(), total);
  if (workers <= 1) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
    return;
  }

  // Work is claimed through a shared counter; exceptions are kept per index
  // and the smallest-index failure is rethrown after the join.
  std::atomic<std::size_t> next(begin);
  std::vector<std::pair<std::size_t, std::exception_ptr>> failures;
  std::mutex failures_mutex;

  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= end) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failures_mutex);
        failures.emplace_back(i, std::current_exception());
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();

  if (!failures.empty()) {
    auto first = failures.front();
    for (const auto& f : failures)
      if (f.first < first.first) first = f;
    std::rethrow_exception(first.second);
  }
}

} // namespace oedpm
