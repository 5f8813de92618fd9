#ifndef OBSLEARN_SPECTRAL_HPP
#define OBSLEARN_SPECTRAL_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "obslearn/common.hpp"

namespace obslearn {

struct CooEntry {
  std::int64_t row = 0;
  std::int64_t col = 0;
  cd value{0.0, 0.0};
};

/// Sparse Hermitian operator. Construction validates hermiticity
/// (entry-wise, 1e-12) and caches a Gershgorin bound on the spectral range.
class SparseHermitian {
 public:
  SparseHermitian() = default;  // empty 0-dimensional operator

  static SparseHermitian from_entries(std::int64_t dim,
                                      const std::vector<CooEntry>& entries);
  static SparseHermitian from_dense(const Eigen::MatrixXcd& m);
  static SparseHermitian zero(std::int64_t dim);

  std::int64_t dim() const { return mat_.rows(); }
  std::int64_t nonzeros() const { return mat_.nonZeros(); }
  double norm_bound() const { return norm_bound_; }
  const Eigen::SparseMatrix<cd>& matrix() const { return mat_; }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;
  Eigen::MatrixXcd to_dense() const;
  std::vector<CooEntry> entries() const;

  SparseHermitian scaled(double s) const;
  static SparseHermitian sum(const std::vector<const SparseHermitian*>& parts);

  void dump_coo(std::ostream& out) const;
  static SparseHermitian load_coo(std::istream& in);

 private:
  explicit SparseHermitian(Eigen::SparseMatrix<cd> mat);
  Eigen::SparseMatrix<cd> mat_;
  double norm_bound_ = 0.0;
};

enum class EvolveMethod { kAuto, kDense, kKrylov };

/// e^{+iHt} psi. Dense eigendecomposition when dim fits the dense cap,
/// Lanczos propagation with full reorthogonalization otherwise. The Krylov
/// path targets 1e-10 accuracy per call.
Eigen::VectorXcd evolve(const SparseHermitian& h, const Eigen::VectorXcd& psi,
                        double t, EvolveMethod method = EvolveMethod::kAuto);

/// Caches the eigendecomposition so repeated times/states are cheap.
/// Falls back to per-call Krylov propagation above the dense cap.
class Evolver {
 public:
  explicit Evolver(const SparseHermitian& h,
                   EvolveMethod method = EvolveMethod::kAuto);
  Eigen::VectorXcd apply(const Eigen::VectorXcd& psi, double t) const;

 private:
  const SparseHermitian& h_;
  bool dense_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXcd eigenvectors_;
};

struct GroundResult {
  double energy = 0.0;
  Eigen::VectorXcd state;
  double residual = 0.0;   // ||H psi - E psi||
  double gap = 0.0;        // E1 - E0, >= 0
  bool degenerate = false; // gap below the degeneracy threshold
};

inline constexpr double kGroundResidualTol = 1e-8;
inline constexpr double kDegenerateGapTol = 1e-10;

GroundResult ground_state(const SparseHermitian& h,
                          EvolveMethod method = EvolveMethod::kAuto);
double spectral_gap(const SparseHermitian& h,
                    EvolveMethod method = EvolveMethod::kAuto);

/// Lowest `count` eigenvalues (ascending).
Eigen::VectorXd low_eigenvalues(const SparseHermitian& h, int count,
                                EvolveMethod method = EvolveMethod::kAuto);

}  // namespace obslearn

#endif
