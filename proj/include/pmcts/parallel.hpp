// Copyright 2026 The PMCTS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PMCTS_PARALLEL_HPP_
#define PMCTS_PARALLEL_HPP_

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "pmcts/errors.hpp"

namespace pmcts {

// Fixed pool of worker threads running one parallel_for at a time.
//
// The index range is split into one contiguous chunk per worker and the
// calling thread runs chunk 0, so a pool of size 1 spawns no threads. Work
// items must write only to their own slots; any reduction is left to the
// caller, which keeps results independent of the worker count.
class WorkerPool {
 public:
  explicit WorkerPool(int workers = 1) : size_(workers) {
    if (workers < 1) throw ValidationError("workers must be >= 1");
    for (int w = 1; w < workers; ++w) {
      threads_.emplace_back([this, w] { loop(w); });
    }
  }

  ~WorkerPool() {
    {
      std::lock_guard<std::mutex> lock(mu_);
      stop_ = true;
    }
    start_.notify_all();
    for (auto& t : threads_) t.join();
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  int size() const { return size_; }

  // Calls fn(i) for every i in [0, n). Rethrows the exception of the lowest
  // failing chunk.
  template <class F>
  void parallel_for(std::size_t n, F&& fn) {
    if (n == 0) return;
    if (size_ == 1 || n == 1) {
      for (std::size_t i = 0; i < n; ++i) fn(i);
      return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(size_));
    auto run_chunk = [&](int w) {
      const std::size_t lo = n * static_cast<std::size_t>(w) / size_;
      const std::size_t hi = n * static_cast<std::size_t>(w + 1) / size_;
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    };
    {
      std::lock_guard<std::mutex> lock(mu_);
      job_ = run_chunk;
      pending_ = size_ - 1;
      ++generation_;
    }
    start_.notify_all();
    run_chunk(0);
    {
      std::unique_lock<std::mutex> lock(mu_);
      done_.wait(lock, [this] { return pending_ == 0; });
      job_ = nullptr;
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

 private:
  void loop(int w) {
    unsigned long seen = 0;
    for (;;) {
      std::function<void(int)> job;
      {
        std::unique_lock<std::mutex> lock(mu_);
        start_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
        job = job_;
      }
      job(w);
      {
        std::lock_guard<std::mutex> lock(mu_);
        if (--pending_ == 0) done_.notify_one();
      }
    }
  }

  int size_;
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable start_;
  std::condition_variable done_;
  std::function<void(int)> job_;
  int pending_ = 0;
  unsigned long generation_ = 0;
  bool stop_ = false;
};

}  // namespace pmcts

#endif  // PMCTS_PARALLEL_HPP_
