#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace terra {

/// Fixed-size pool running static-chunked parallel loops.
///
/// Chunk boundaries depend only on the range size and worker count, and every
/// index is processed exactly once, so results written per index do not
/// depend on scheduling.
class ThreadPool {
 public:
  /// `workers` <= 0 picks default_worker_count().
  explicit ThreadPool(int workers = 0);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int size() const noexcept { return static_cast<int>(threads_.size()) + 1; }

  /// Calls fn(begin, end) over disjoint chunks covering [0, n). Blocks until
  /// every chunk is done. Not reentrant.
  void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

  /// Hardware concurrency capped by the TERRA_THREADS environment variable.
  static int default_worker_count();

 private:
  void worker_loop(int index);

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(std::size_t, std::size_t)>* job_ = nullptr;
  std::size_t job_size_ = 0;
  std::size_t generation_ = 0;
  int pending_ = 0;
  bool stop_ = false;
};

}  // namespace terra
