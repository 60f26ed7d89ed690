#include "heis/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace heis::parallel {
namespace {

std::atomic<int>& thread_cap() {
  static std::atomic<int> cap{std::max(1, static_cast<int>(std::thread::hardware_concurrency()))};
  return cap;
}

double pairwise(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise(v, half) + pairwise(v + half, n - half);
}

// Nested loops inside a worker run serially.
thread_local bool in_worker = false;

}  // namespace

void set_max_threads(int threads) { thread_cap().store(std::max(1, threads)); }
int max_threads() { return thread_cap().load(); }

void for_chunks(std::size_t count, std::size_t chunk,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  const std::size_t chunks = chunk_count(count, chunk);
  if (chunks == 0) return;
  const auto run = [&](std::size_t c) { body(c, c * chunk, std::min(count, (c + 1) * chunk)); };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(max_threads()), chunks);
  if (workers <= 1 || in_worker) {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        in_worker = true;
        try {
          for (std::size_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) run(c);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(chunks);
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

double pairwise_sum(std::span<const double> values) { return pairwise(values.data(), values.size()); }

double deterministic_sum(std::size_t count, const std::function<double(std::size_t)>& f,
                         std::size_t chunk) {
  std::vector<double> partial(chunk_count(count, chunk), 0.0);
  for_chunks(count, chunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
    std::vector<double> local(end - begin);
    for (std::size_t i = begin; i < end; ++i) local[i - begin] = f(i);
    partial[c] = pairwise_sum(local);
  });
  return pairwise_sum(partial);
}

}  // namespace heis::parallel
