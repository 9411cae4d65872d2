/*
 *   Copyright 2026 The heatbem Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef HEATBEM_PARALLEL_HPP
#define HEATBEM_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace heatbem {

/// Worker count from HEATBEM_WORKERS, else the hardware concurrency.
inline int default_workers() {
  if (const char *env = std::getenv("HEATBEM_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1)
        return n;
    } catch (const std::exception &) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls body(i, worker) for i in [0, n) on `workers` threads. Indices are
/// handed out in chunks from a shared counter. The first exception thrown by
/// a worker is rethrown after all workers stop.
template <class Body>
void parallel_for(int n, int workers, Body &&body, int chunk = 1) {
  workers = std::max(1, std::min(workers, n));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i)
      body(i, 0);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&](int worker) {
    try {
      while (!failed.load(std::memory_order_relaxed)) {
        const int begin = next.fetch_add(chunk);
        if (begin >= n)
          break;
        const int end = std::min(n, begin + chunk);
        for (int i = begin; i < end; ++i)
          body(i, worker);
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error)
        error = std::current_exception();
      failed = true;
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers - 1);
  for (int w = 1; w < workers; ++w)
    threads.emplace_back(run, w);
  run(0);
  for (auto &t : threads)
    t.join();
  if (error)
    std::rethrow_exception(error);
}

} // namespace heatbem

#endif // HEATBEM_PARALLEL_HPP
