#include "gclab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace gclab {

namespace {

int initial_limit() {
  if (const char* env = std::getenv("GCLAB_THREADS")) {
    try {
      const int value = std::stoi(env);
      if (value > 0) return value;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::atomic<int>& limit() {
  static std::atomic<int> value{initial_limit()};
  return value;
}

}  // namespace

int thread_limit() { return limit().load(); }

void set_thread_limit(int threads) { limit().store(std::max(1, threads)); }

void parallel_for(int begin, int end, const std::function<void(int)>& body) {
  const int count = end - begin;
  if (count <= 0) return;
  // Not worth a thread below a few rows of a typical grid.
  const int workers = std::min(thread_limit(), std::max(1, count / 16));
  if (workers <= 1) {
    for (int k = begin; k < end; ++k) body(k);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const int lo = begin + static_cast<int>(static_cast<long long>(count) * w / workers);
    const int hi = begin + static_cast<int>(static_cast<long long>(count) * (w + 1) / workers);
    pool.emplace_back([&, w, lo, hi] {
      try {
        for (int k = lo; k < hi; ++k) body(k);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  // Rethrow the first failure in chunk order so errors are reproducible.
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace gclab
