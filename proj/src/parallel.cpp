#include "speckle/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace speckle {
namespace {

thread_local bool inside_pool = false;

// One batch of chunks. Workers hold a shared_ptr to the task they drain, so
// a late worker can never touch counters of a newer batch.
struct Task {
  const std::function<void(int64_t)>* fn = nullptr;
  int64_t count = 0;
  std::atomic<int64_t> next{0};
  std::atomic<int64_t> pending{0};
};

class Pool {
 public:
  explicit Pool(int workers) {
    for (int i = 0; i < workers; ++i) threads_.emplace_back([this] { worker_loop(); });
  }

  ~Pool() {
    {
      std::scoped_lock lock(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  void run(int64_t chunks, const std::function<void(int64_t)>& chunk_fn) {
    auto task = std::make_shared<Task>();
    task->fn = &chunk_fn;
    task->count = chunks;
    task->pending.store(chunks);
    {
      std::scoped_lock lock(mu_);
      task_ = task;
      ++generation_;
    }
    cv_.notify_all();
    bool prev = inside_pool;
    inside_pool = true;  // nested parallel_for from chunk_fn runs inline
    drain(*task);
    inside_pool = prev;
    std::unique_lock lock(mu_);
    done_cv_.wait(lock, [&] { return task->pending.load() == 0; });
  }

 private:
  void drain(Task& task) {
    for (;;) {
      int64_t c = task.next.fetch_add(1, std::memory_order_relaxed);
      if (c >= task.count) return;
      (*task.fn)(c);
      if (task.pending.fetch_sub(1) == 1) {
        std::scoped_lock lock(mu_);
        done_cv_.notify_all();
      }
    }
  }

  void worker_loop() {
    inside_pool = true;
    uint64_t seen = 0;
    for (;;) {
      std::shared_ptr<Task> task;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
        task = task_;
      }
      if (task) drain(*task);
    }
  }

  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  std::vector<std::thread> threads_;
  std::shared_ptr<Task> task_;
  uint64_t generation_ = 0;
  bool stop_ = false;
};

Pool& pool() {
  static Pool p(std::max(0, worker_count() - 1));
  return p;
}

}  // namespace

int worker_count() {
  static int n = [] {
    if (const char* env = std::getenv("SPECKLE_THREADS")) {
      int v = std::atoi(env);
      if (v >= 1) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return int(hc == 0 ? 1 : hc);
  }();
  return n;
}

void parallel_for(int64_t n, int64_t grain, const std::function<void(int64_t, int64_t)>& fn) {
  if (n <= 0) return;
  grain = std::max<int64_t>(1, grain);
  int64_t chunks = (n + grain - 1) / grain;
  if (chunks == 1 || worker_count() == 1 || inside_pool) {
    fn(0, n);
    return;
  }
  auto chunk_fn = [&](int64_t c) {
    int64_t begin = c * grain;
    int64_t end = std::min(n, begin + grain);
    fn(begin, end);
  };
  pool().run(chunks, chunk_fn);
}

}  // namespace speckle
