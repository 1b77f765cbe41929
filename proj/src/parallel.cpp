#include "emscat/parallel.hpp"

namespace emscat {

namespace {
std::atomic<int> g_threads{1};
}

void set_default_threads(int n) {
  if (n <= 0) n = int(std::max(1u, std::thread::hardware_concurrency()));
  g_threads = n;
}

int default_threads() { return g_threads; }

}  // namespace emscat
