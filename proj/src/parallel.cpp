#include "oscillab/parallel.hpp"

#include <cstdlib>
#include <string>

namespace oscillab {
namespace {

int initial_count() {
  if (const char* env = std::getenv("OSCILLAB_THREADS")) {
    try {
      int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  return 0;
}

std::atomic<int> g_threads{initial_count()};

}  // namespace

void set_thread_count(int n) { g_threads = std::max(0, n); }

int thread_count() {
  int n = g_threads;
  if (n > 0) return n;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace oscillab
