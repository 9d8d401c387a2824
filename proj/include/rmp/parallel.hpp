// Trial-parallel helper.  Each trial derives its own seed from the master
// seed and writes into its own slot, so aggregate results are bit-identical
// for any thread count.
#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace rmp {

inline void parallel_trials(int trials, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || trials <= 1) {
    for (int i = 0; i < trials; ++i) body(i);
    return;
  }
  const int nt = std::min(threads, trials);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&, t]() {
      for (int i = t; i < trials; i += nt) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace rmp
