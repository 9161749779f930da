#include "flochern/parallel.hpp"

#include <exception>

namespace flochern {

ThreadPool::ThreadPool(std::size_t threads) {
  for (std::size_t i = 1; i < threads; ++i) workers_.emplace_back([this] { worker_loop(); });
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  wake_.notify_all();
  for (auto& w : workers_) w.join();
}

void ThreadPool::parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (workers_.empty() || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::unique_lock lock(mutex_);
  job_ = &fn;
  job_size_ = n;
  next_ = 0;
  remaining_ = n;
  error_ = nullptr;
  ++generation_;
  wake_.notify_all();
  // The caller takes indices too.
  while (next_ < job_size_) {
    const std::size_t i = next_++;
    lock.unlock();
    try {
      fn(i);
    } catch (...) {
      std::lock_guard g(mutex_);
      if (!error_) error_ = std::current_exception();
    }
    lock.lock();
    --remaining_;
  }
  done_.wait(lock, [this] { return remaining_ == 0; });
  job_ = nullptr;
  if (error_) std::rethrow_exception(error_);
}

void ThreadPool::worker_loop() {
  std::size_t seen = 0;
  std::unique_lock lock(mutex_);
  while (true) {
    wake_.wait(lock, [&] { return stop_ || (generation_ != seen && job_ != nullptr && next_ < job_size_); });
    if (stop_) return;
    seen = generation_;
    while (job_ != nullptr && next_ < job_size_) {
      const std::size_t i = next_++;
      const auto* fn = job_;
      lock.unlock();
      try {
        (*fn)(i);
      } catch (...) {
        std::lock_guard g(mutex_);
        if (!error_) error_ = std::current_exception();
      }
      lock.lock();
      if (--remaining_ == 0) done_.notify_all();
    }
  }
}

}  // namespace flochern
