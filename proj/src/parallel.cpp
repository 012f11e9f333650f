#include "mdsc/parallel.hpp"

namespace mdsc {

namespace {
thread_local const WorkerPool* tls_current_pool = nullptr;
}

WorkerPool::WorkerPool(std::size_t threads) {
  const std::size_t extra = threads > 1 ? threads - 1 : 0;
  workers_.reserve(extra);
  for (std::size_t i = 0; i < extra; ++i) {
    workers_.emplace_back([this] { worker_loop(); });
  }
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  for (auto& t : workers_) t.join();
}

void WorkerPool::drain() {
  const auto* previous = tls_current_pool;
  tls_current_pool = this;
  std::unique_lock lock(mutex_);
  while (next_index_ < job_count_) {
    const std::size_t i = next_index_++;
    const auto* fn = job_;
    lock.unlock();
    std::exception_ptr failure;
    try {
      (*fn)(i);
    } catch (...) {
      failure = std::current_exception();
    }
    lock.lock();
    if (failure && (!error_ || i < error_index_)) {
      error_ = failure;
      error_index_ = i;
    }
  }
  tls_current_pool = previous;
}

void WorkerPool::worker_loop() {
  std::size_t seen = 0;
  std::unique_lock lock(mutex_);
  for (;;) {
    wake_.wait(lock, [&] { return stopping_ || generation_ != seen; });
    if (stopping_) return;
    seen = generation_;
    ++active_;
    lock.unlock();
    drain();
    lock.lock();
    if (--active_ == 0) done_.notify_all();
  }
}

void WorkerPool::run(std::size_t count, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  if (workers_.empty() || tls_current_pool == this) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  {
    std::lock_guard lock(mutex_);
    job_ = &fn;
    job_count_ = count;
    next_index_ = 0;
    error_ = nullptr;
    ++generation_;
  }
  wake_.notify_all();
  drain();
  std::unique_lock lock(mutex_);
  done_.wait(lock, [&] { return active_ == 0 && next_index_ >= job_count_; });
  job_ = nullptr;
  job_count_ = 0;
  if (error_) {
    auto e = error_;
    error_ = nullptr;
    std::rethrow_exception(e);
  }
}

void Parallelism::for_each(std::size_t count, const std::function<void(std::size_t)>& fn) const {
  if (pool_) {
    pool_->run(count, fn);
  } else {
    for (std::size_t i = 0; i < count; ++i) fn(i);
  }
}

}  // namespace mdsc
