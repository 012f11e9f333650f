#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mdsc {

/// Fixed-size pool of worker threads. The calling thread participates in
/// every run, so a pool of size 1 spawns no threads at all.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t threads);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const noexcept { return workers_.size() + 1; }

  /// Calls fn(i) for every i in [0, count) and waits. If several calls throw,
  /// the exception of the lowest index is rethrown. Nested calls from inside
  /// fn run serially on the calling worker.
  void run(std::size_t count, const std::function<void(std::size_t)>& fn);

 private:
  void worker_loop();
  void drain();

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(std::size_t)>* job_ = nullptr;
  std::size_t job_count_ = 0;
  std::size_t next_index_ = 0;
  std::size_t active_ = 0;
  std::size_t generation_ = 0;
  bool stopping_ = false;
  std::size_t error_index_ = 0;
  std::exception_ptr error_;
};

/// Handle passed to computation routines: either serial or backed by a pool
/// owned by the caller.
class Parallelism {
 public:
  Parallelism() = default;
  explicit Parallelism(WorkerPool& pool) : pool_(&pool) {}

  std::size_t workers() const noexcept { return pool_ ? pool_->size() : 1; }
  void for_each(std::size_t count, const std::function<void(std::size_t)>& fn) const;

  static Parallelism serial() { return {}; }

 private:
  WorkerPool* pool_ = nullptr;
};

}  // namespace mdsc
