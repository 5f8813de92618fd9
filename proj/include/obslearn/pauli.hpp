#ifndef OBSLEARN_PAULI_HPP
#define OBSLEARN_PAULI_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "obslearn/common.hpp"

namespace obslearn {

/// Tensor product of single-qubit Paulis, written as a letter string over
/// {I,X,Y,Z} with position q acting on qubit q (qubit 0 = least significant
/// bit of the amplitude index).
class PauliString {
 public:
  explicit PauliString(const std::string& letters);

  int n() const { return static_cast<int>(letters_.size()); }
  const std::string& letters() const { return letters_; }
  int weight() const { return weight_; }
  const std::vector<int>& support() const { return support_; }
  bool is_identity() const { return weight_ == 0; }

  std::uint64_t flip_mask() const { return flip_mask_; }

  // P|psi>, amplitude-exact (multiplies by +-1, +-i only).
  Eigen::VectorXcd apply(const Eigen::VectorXcd& psi) const;
  // <psi|P|psi> for a 2^n state; always real up to rounding.
  double expectation(const Eigen::VectorXcd& psi) const;
  // Dense 2^n x 2^n matrix; intended for small n.
  Eigen::MatrixXcd to_matrix() const;

  bool operator==(const PauliString& other) const {
    return letters_ == other.letters_;
  }

 private:
  std::string letters_;
  int weight_ = 0;
  std::vector<int> support_;
  std::uint64_t flip_mask_ = 0;   // X or Y positions
  std::uint64_t phase_mask_ = 0;  // Y or Z positions
  int y_count_ = 0;
};

PauliString pauli_from_label(const std::string& label);

enum class BasisGeometry { kLine, kAllSubsets };

/// Ordered k-local basis over n qubits. Index 0 is the identity.
/// Line geometry enumerates (window start, letter word) pairs
/// lexicographically with I<X<Y<Z, one window of k contiguous qubits at a
/// time, so the list has (n-k+1)*(4^k-1)+1 entries; operators whose support
/// fits in two overlapping windows appear once per window. All-subsets
/// geometry lists each distinct string of weight <= k exactly once, in
/// lexicographic order.
std::vector<PauliString> enumerate_local_paulis(int n, int k,
                                                BasisGeometry geometry);

/// Real linear combination of Pauli strings with coefficients in [-1,1],
/// so the operator norm is bounded by the coefficient l1 norm.
class PauliObservable {
 public:
  PauliObservable() = default;  // empty zero observable
  PauliObservable(std::vector<PauliString> basis, Eigen::VectorXd alpha,
                  std::size_t max_terms = 0);

  int n() const { return n_; }
  std::size_t terms() const { return basis_.size(); }
  const std::vector<PauliString>& basis() const { return basis_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  double l1() const { return alpha_.lpNorm<1>(); }

  double expectation(const Eigen::VectorXcd& psi) const;
  Eigen::MatrixXcd to_matrix() const;

 private:
  std::vector<PauliString> basis_;
  Eigen::VectorXd alpha_;
  int n_ = 0;
};

double pauli_expectation(const Eigen::VectorXcd& psi, const PauliString& p);
double observable_expectation(const Eigen::VectorXcd& psi,
                              const PauliObservable& obs);

}  // namespace obslearn

#endif
