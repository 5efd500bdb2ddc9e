#ifndef MMPC_THREAD_POOL_HPP_
#define MMPC_THREAD_POOL_HPP_

#include <atomic>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace mmpc {

/// Fixed-width worker pool for fan-out/fan-in parallel loops.
///
/// parallel_for dispatches [0, n) to the workers and blocks until every
/// index has been processed. Tasks must not throw; callers capture
/// failures into per-index result slots instead.
class ThreadPool {
 public:
  explicit ThreadPool(int width) {
    width = width < 1 ? 1 : width;
    workers_.reserve(width);
    for (int i = 0; i < width; ++i) {
      workers_.emplace_back([this] { worker_loop(); });
    }
  }

  ~ThreadPool() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      stop_ = true;
    }
    wake_.notify_all();
    for (auto& w : workers_) w.join();
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int width() const { return static_cast<int>(workers_.size()); }

  /// Runs body(i) for i in [0, n). A single index runs inline.
  void parallel_for(int n, std::function<void(int)> body) {
    if (n <= 0) return;
    if (n == 1) {
      body(0);
      return;
    }
    auto batch = std::make_shared<Batch>();
    batch->body = std::move(body);
    batch->total = n;
    batch->remaining.store(n);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      current_ = batch;
    }
    wake_.notify_all();
    run_batch(*batch);  // caller participates; a busy pool cannot stall us
    {
      std::unique_lock<std::mutex> lock(mutex_);
      done_.wait(lock, [&] { return batch->remaining.load() == 0; });
      if (current_ == batch) current_.reset();
    }
  }

 private:
  struct Batch {
    std::function<void(int)> body;
    std::atomic<int> next{0};
    std::atomic<int> remaining{0};
    int total{0};
  };

  void run_batch(Batch& batch) {
    while (true) {
      const int i = batch.next.fetch_add(1);
      if (i >= batch.total) break;
      batch.body(i);
      if (batch.remaining.fetch_sub(1) == 1) {
        std::lock_guard<std::mutex> lock(mutex_);
        done_.notify_all();
      }
    }
  }

  void worker_loop() {
    std::shared_ptr<Batch> last;
    while (true) {
      std::shared_ptr<Batch> batch;
      {
        std::unique_lock<std::mutex> lock(mutex_);
        wake_.wait(lock, [&] { return stop_ || (current_ && current_ != last); });
        if (stop_) return;
        batch = current_;
      }
      run_batch(*batch);
      last = std::move(batch);
    }
  }

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  std::shared_ptr<Batch> current_;
  bool stop_{false};
};

}  // namespace mmpc

#endif  // MMPC_THREAD_POOL_HPP_
