#include "ordembed/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace ordembed {

int default_threads() {
  if (const char *env = std::getenv("ORDEMBED_THREADS")) {
    try {
      const int t = std::stoi(env);
      if (t > 0)
        return t;
    } catch (const std::exception &) {
    }
  }
  return 1;
}

int resolve_threads(int requested) {
  return requested > 0 ? requested : default_threads();
}

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)> &fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  std::vector<std::exception_ptr> errors(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    for (auto &t : pool)
      t.join();
  }
  for (auto &e : errors)
    if (e)
      std::rethrow_exception(e);
}

} // namespace ordembed
