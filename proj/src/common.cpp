#include "obslearn/common.hpp"

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <sstream>

namespace obslearn {

int qubit_cap() {
  static const int cap = [] {
    const char* env = std::getenv("OBSLEARN_QUBIT_CAP");
    if (env == nullptr) return 20;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 30)
      throw DomainError("OBSLEARN_QUBIT_CAP must be an integer in [1,30]");
    return static_cast<int>(v);
  }();
  return cap;
}

void check_qubit_budget(int qubits, const std::string& where) {
  if (qubits > qubit_cap()) {
    std::ostringstream os;
    os << where << ": " << qubits << " qubits exceeds cap " << qubit_cap()
       << " (set OBSLEARN_QUBIT_CAP to raise)";
    throw ResourceError(os.str());
  }
}

void check_dim_budget(std::int64_t dim, const std::string& where) {
  const std::int64_t cap = std::int64_t(1) << qubit_cap();
  if (dim > cap) {
    std::ostringstream os;
    os << where << ": dimension " << dim << " exceeds cap " << cap;
    throw ResourceError(os.str());
  }
}

void parallel_for(std::int64_t n, int threads,
                  const std::function<void(std::int64_t)>& fn) {
  if (n <= 0) return;
  if (threads <= 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  int workers = static_cast<int>(std::min<std::int64_t>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr first_error = nullptr;
  std::mutex* guard = new std::mutex;  // outlives joins below
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::int64_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(*guard);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  delete guard;
  if (first_error) std::rethrow_exception(first_error);
}

namespace {
std::atomic<int> g_thread_cap{0};
}  // namespace

int default_threads() {
  unsigned hc = std::thread::hardware_concurrency();
  int n = hc == 0 ? 1 : static_cast<int>(hc);
  int cap = g_thread_cap.load(std::memory_order_relaxed);
  return (cap > 0 && cap < n) ? cap : n;
}

void set_thread_cap(int threads) {
  g_thread_cap.store(threads < 0 ? 0 : threads, std::memory_order_relaxed);
}

}  // namespace obslearn
