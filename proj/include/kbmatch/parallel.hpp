#pragma once

// A small fixed-size worker pool.
//
// parallel_for hands out chunks of an index range dynamically, so the
// assignment of indices to threads varies from run to run. Callers keep
// results deterministic by writing into per-index slots and merging in index
// order; nothing here reduces across threads.

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace kbmatch {

class WorkerPool {
 public:
  /// `workers` == 0 picks the hardware concurrency. A pool of size 1 runs
  /// everything on the calling thread.
  explicit WorkerPool(std::size_t workers = 1) {
    if (workers == 0) workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    size_ = workers;
    for (std::size_t i = 1; i < workers; ++i) threads_.emplace_back([this] { worker_loop(); });
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  ~WorkerPool() {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  std::size_t size() const noexcept { return size_; }

  /// Calls `fn(begin, end)` on disjoint chunks covering [0, n) and returns
  /// once all chunks are done. The calling thread takes part, so nested calls
  /// from inside a task cannot deadlock. The first exception is rethrown.
  template <class Fn>
  void parallel_for(std::size_t n, Fn&& fn, std::size_t grain = 0) {
    if (n == 0) return;
    if (grain == 0) grain = std::max<std::size_t>(1, n / (size_ * 8));
    const std::size_t chunks = (n + grain - 1) / grain;
    if (size_ == 1 || chunks == 1) {
      fn(std::size_t{0}, n);
      return;
    }

    struct State {
      std::atomic<std::size_t> next{0};
      std::atomic<std::size_t> done{0};
      std::mutex m;
      std::condition_variable cv;
      std::exception_ptr error;
    };
    auto state = std::make_shared<State>();
    auto body = std::function<void(std::size_t, std::size_t)>(std::forward<Fn>(fn));

    auto drain = [state, body, n, grain, chunks] {
      for (;;) {
        const std::size_t c = state->next.fetch_add(1);
        if (c >= chunks) return;
        try {
          body(c * grain, std::min(n, (c + 1) * grain));
        } catch (...) {
          std::lock_guard lock(state->m);
          if (!state->error) state->error = std::current_exception();
        }
        if (state->done.fetch_add(1) + 1 == chunks) {
          std::lock_guard lock(state->m);
          state->cv.notify_all();
        }
      }
    };

    const std::size_t helpers = std::min(size_ - 1, chunks - 1);
    {
      std::lock_guard lock(mutex_);
      for (std::size_t i = 0; i < helpers; ++i) queue_.emplace_back(drain);
    }
    cv_.notify_all();
    drain();
    std::unique_lock lock(state->m);
    state->cv.wait(lock, [&] { return state->done.load() == chunks; });
    if (state->error) std::rethrow_exception(state->error);
  }

  /// Runs independent tasks concurrently and waits for all of them.
  void run_all(const std::vector<std::function<void()>>& tasks) {
    parallel_for(
        tasks.size(),
        [&](std::size_t b, std::size_t e) {
          for (std::size_t i = b; i < e; ++i) tasks[i]();
        },
        1);
  }

 private:
  void worker_loop() {
    for (;;) {
      std::function<void()> job;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
        if (queue_.empty()) return;
        job = std::move(queue_.front());
        queue_.pop_front();
      }
      job();
    }
  }

  std::size_t size_ = 1;
  std::vector<std::thread> threads_;
  std::deque<std::function<void()>> queue_;
  std::mutex mutex_;
  std::condition_variable cv_;
  bool stopping_ = false;
};

}  // namespace kbmatch
