#ifndef OBSLEARN_COMMON_HPP
#define OBSLEARN_COMMON_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace obslearn {

using cd = std::complex<double>;

inline constexpr const char* kVersion = "0.1.0";

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// Bad argument values (out of range, inconsistent sizes by intent).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Vector/matrix/register size mismatches.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Instance exceeds the configured qubit / dimension budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Qubit budget for anything that materializes a 2^n-dimensional object.
// Overridable through the OBSLEARN_QUBIT_CAP environment variable.
int qubit_cap();

// Dense eigendecompositions are allowed up to this dimension; larger
// operators go through the Krylov path.
inline constexpr std::int64_t kDenseDimCap = std::int64_t(1) << 14;

void check_qubit_budget(int qubits, const std::string& where);
void check_dim_budget(std::int64_t dim, const std::string& where);

// Runs fn(i) for i in [0, n) on up to `threads` workers. fn must be pure
// with respect to shared state. threads <= 1 runs inline.
void parallel_for(std::int64_t n, int threads,
                  const std::function<void(std::int64_t)>& fn);

int default_threads();
// Caps default_threads(); 0 restores the hardware default. Results never
// depend on the cap, only wall time does.
void set_thread_cap(int threads);

}  // namespace obslearn

#endif
