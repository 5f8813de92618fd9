#ifndef OBSLEARN_CLOCKHAM_HPP
#define OBSLEARN_CLOCKHAM_HPP

#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "obslearn/circuit.hpp"
#include "obslearn/spectral.hpp"

namespace obslearn {

/// Hamiltonian encoding of a k-gate circuit on a hybrid work (x) clock space
/// of dimension 2^n * (k+1), hybrid index t*2^n + w. Step j couples clock
/// levels j-1 and j through gate U_j:
///   H = sum_j c_j (U_j (x) |j><j-1| + U_j^dag (x) |j-1><j|).
/// The Feynman form uses c_j = 1. The weighted form stores the step weights
/// w_j = sqrt(j(k+1-j)) and uses c_j = w_j / 2, which makes the restricted
/// matrix the spin-k/2 angular momentum J_x, so a pi rotation transfers
/// |psi>|0> to U|psi>|k> exactly at t = pi. (With the unhalved couplings the
/// restricted matrix is 2 J_x and the transfer lands at t = pi/2 instead.)
class ClockHamiltonian {
 public:
  static ClockHamiltonian feynman(const Circuit& c);
  static ClockHamiltonian childs_weighted(const Circuit& c);

  const Circuit& circuit() const { return circuit_; }
  int work_n() const { return circuit_.n(); }
  int steps() const { return static_cast<int>(circuit_.size()); }
  const std::vector<double>& weights() const { return weights_; }
  double step_scale() const { return step_scale_; }
  const SparseHermitian& op() const { return op_; }

  /// |psi_j> = U_j ... U_1 |psi_in> (x) |j> for j = 0..k. Orthonormal.
  std::vector<Eigen::VectorXcd> krylov_states(
      const Eigen::VectorXcd& psi_in) const;
  /// (k+1)x(k+1) matrix <psi_i|H|psi_j>.
  Eigen::MatrixXcd restricted_matrix(const Eigen::VectorXcd& psi_in) const;
  /// Work state embedded at clock level t.
  Eigen::VectorXcd embed(const Eigen::VectorXcd& work, int t) const;

 private:
  ClockHamiltonian(Circuit c, std::vector<double> weights, double scale);
  Circuit circuit_;
  std::vector<double> weights_;
  double step_scale_;
  SparseHermitian op_;
};

std::vector<double> childs_weights(int k);

struct TransferReport {
  int k = 0;
  int n_work = 0;
  double fidelity = 0.0;
  double t_used = 0.0;
  double leakage = 0.0;           // max norm outside the Krylov span
  int locality_measured = 0;      // max term support in the unary embedding
  bool passed = false;
};

/// |<target| e^{iHt} |psi_in, 0>|^2 with target = U|psi_in> (x) |k>.
double transfer_fidelity(const ClockHamiltonian& h,
                         const Eigen::VectorXcd& psi_in, double t);
/// Max norm of the evolved state outside span{|psi_j>} over `times`.
double krylov_leakage(const ClockHamiltonian& h,
                      const Eigen::VectorXcd& psi_in,
                      const std::vector<double>& times);

/// Builds the weighted clock Hamiltonian for c, evolves |psi_in>|0> for
/// time t (default pi) and checks fidelity >= 1 - tol against U|psi_in>|k>.
/// Leakage is maximized over 20 uniform times in [0, t].
TransferReport verify_perfect_transfer(const Circuit& c,
                                       const Eigen::VectorXcd& psi_in,
                                       double tol, double t = -1.0);

struct UnaryEmbedding {
  SparseHermitian op;                  // on work_n + k qubits
  Eigen::SparseMatrix<cd> isometry;    // 2^{n+k} x 2^n(k+1), legal walls
  int locality = 0;                    // max term support (work + clock)
  int total_qubits = 0;
};

/// Domain-wall clock encoding |1^t 0^{k-t}> on k clock qubits appended after
/// the work register. isometry^dag H_unary isometry reproduces op().
UnaryEmbedding unary_embedding(const ClockHamiltonian& h);

/// Max qubit support of any unary-encoded step term (work support of the
/// gate plus the clock window), without building the matrix.
int unary_locality(const Circuit& c);

}  // namespace obslearn

#endif
