#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sseplab {

unsigned resolve_jobs(unsigned jobs);

// Splits [0, total) into fixed blocks, evaluates fn(begin, end) -> Acc on up
// to `jobs` threads and returns the per-block results in block order. Block
// boundaries depend only on `total` and `block`, never on the job count.
template <class Acc, class Fn>
std::vector<Acc> run_blocks(std::size_t total, std::size_t block, unsigned jobs, Fn&& fn) {
  block = std::max<std::size_t>(block, 1);
  const std::size_t nblocks = (total + block - 1) / block;
  std::vector<Acc> results(nblocks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= nblocks) return;
      try {
        results[b] = fn(b * block, std::min(total, (b + 1) * block));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(nblocks);
        return;
      }
    }
  };
  const unsigned nthreads = static_cast<unsigned>(std::min<std::size_t>(resolve_jobs(jobs), nblocks));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace sseplab
