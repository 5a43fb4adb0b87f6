#include "codim/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace codim {
namespace {
std::atomic<unsigned> g_max_threads{0};

unsigned worker_count(size_t chunks) {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  unsigned cap = g_max_threads.load();
  unsigned n = cap == 0 ? hw : std::min(cap, hw);
  return static_cast<unsigned>(std::min<size_t>(n, chunks));
}
}  // namespace

void set_max_threads(unsigned threads) { g_max_threads.store(threads); }

unsigned max_threads() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  unsigned cap = g_max_threads.load();
  return cap == 0 ? hw : std::min(cap, hw);
}

void parallel_for(size_t count, size_t chunk, const std::function<void(size_t, size_t)>& body) {
  if (count == 0) return;
  chunk = std::max<size_t>(chunk, 1);
  const size_t chunks = (count + chunk - 1) / chunk;
  const unsigned workers = worker_count(chunks);
  if (workers <= 1) {
    for (size_t c = 0; c < chunks; ++c) body(c * chunk, std::min(count, (c + 1) * chunk));
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (;;) {
      size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        body(c * chunk, std::min(count, (c + 1) * chunk));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(chunks);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

double parallel_sum(size_t count, size_t chunk, const std::function<double(size_t, size_t)>& partial) {
  if (count == 0) return 0.0;
  chunk = std::max<size_t>(chunk, 1);
  const size_t chunks = (count + chunk - 1) / chunk;
  std::vector<double> sums(chunks, 0.0);
  parallel_for(count, chunk, [&](size_t b, size_t e) { sums[b / chunk] = partial(b, e); });
  double total = 0.0;
  for (double s : sums) total += s;
  return total;
}

}  // namespace codim
