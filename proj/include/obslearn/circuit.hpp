#ifndef OBSLEARN_CIRCUIT_HPP
#define OBSLEARN_CIRCUIT_HPP

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "obslearn/common.hpp"
#include "obslearn/pauli.hpp"
#include "obslearn/rng.hpp"

namespace obslearn {

enum class GateKind {
  kX, kY, kZ, kH, kS, kT, kCnot, kCz, kRx, kRy, kRz, kCustom1, kCustom2
};

struct Gate {
  GateKind kind;
  int q0 = 0;
  int q1 = -1;           // second qubit for two-qubit kinds
  double theta = 0.0;    // rotation angle for kRx/kRy/kRz
  // Row/column index for kCustom2 is 2*bit(q0) + bit(q1).
  Eigen::MatrixXcd custom;

  static Gate single(GateKind kind, int q, double theta = 0.0);
  static Gate cnot(int control, int target);
  static Gate cz(int a, int b);
  static Gate custom1(int q, const Eigen::Matrix2cd& u);
  static Gate custom2(int qa, int qb, const Eigen::Matrix4cd& u);

  bool two_qubit() const;
  Eigen::MatrixXcd matrix() const;  // 2x2 or 4x4
  Gate inverse() const;
  std::string text() const;         // one line of the circuit text format
};

class Circuit {
 public:
  Circuit(int n, std::vector<Gate> gates);

  int n() const { return n_; }
  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }
  // Number of layers under greedy left-packing of disjoint gates.
  int depth() const;
  Circuit inverse() const;

  std::string text() const;

 private:
  int n_;
  std::vector<Gate> gates_;
};

/// Parses the one-gate-per-line text format "KIND q0 [q1] [theta]".
/// Lines that are empty or start with '#' are skipped.
Circuit parse_circuit(std::istream& in, int n);
Circuit parse_circuit(const std::string& body, int n);

struct StateVector {
  int n = 0;
  Eigen::VectorXcd amps;

  static StateVector zero(int n);
  // bits[q] is the value of qubit q.
  static StateVector basis(int n, const std::string& bits);

  double norm() const { return amps.norm(); }
};

void apply_gate(StateVector& psi, const Gate& g);
StateVector run_circuit(const Circuit& c, const StateVector& input);

/// Single-qubit stabilizer states, indexed 0..5:
/// |0>, |1>, |+>, |->, |y+>, |y->.
inline constexpr int kStab1Count = 6;
Eigen::Vector2cd stab1_state(int label);
/// <s|P|s> for a stab1 state and single-qubit Pauli letter; always in
/// {-1, 0, +1}.
double stab1_letter_expectation(int label, char letter);
StateVector prepare_stabilizer_product(const std::vector<int>& labels);
/// Product-state expectation of a Pauli string, O(weight) via the
/// single-qubit table.
double stabilizer_product_expectation(const std::vector<int>& labels,
                                      const PauliString& p);

/// Input router used by the unitary-parameter concept family. An input
/// bitstring x = x1 | x_Q | x_S selects one of two state preparations on a
/// register of 1 + n_q + n_s qubits:
///   x1 = 0: |0> (x) |x_Q> (x) stabilizer product from probe_catalog[x_S]
///   x1 = 1: |1> (x) |x_Q> (x) bqp_branch[leading bits of x_S] |0...0>
/// Catalogs are explicit maps keyed by selector bitstrings; a lookup miss
/// names the offending x_S value.
struct DispatcherSpec {
  int n = 0;            // total input bits
  int n_q = 0;          // measurement selector bits
  int n_s = 0;          // payload qubits
  int bqp_key_bits = 0; // leading selector bits that key the circuit branch
  std::map<std::string, std::vector<int>> probe_catalog;
  std::map<std::string, std::string> observable_catalog;  // circuit text
  std::map<std::string, std::string> bqp_branch;          // circuit text

  int selector_bits() const { return n - 1 - n_q; }
  int state_qubits() const { return 1 + n_q + n_s; }
  void validate() const;

  /// Probe catalog closed over base-6 encodings: selector uses 3 bits per
  /// payload qubit holding a value in [0,6). bqp_branch must be supplied
  /// for every pattern of bqp_key_bits (= n_s) afterwards.
  static DispatcherSpec shallow(int n_s, int n_q = 0);
};

struct DispatcherInput {
  bool branch_bqp = false;
  std::string x_q;
  std::string x_s;
};

DispatcherInput split_dispatcher_input(const DispatcherSpec& spec,
                                       const std::string& x);
StateVector dispatcher_state(const DispatcherSpec& spec, const std::string& x);

/// Probe labels for an x1=0 input (catalog lookup).
std::vector<int> dispatcher_probe_labels(const DispatcherSpec& spec,
                                         const std::string& x_s);
/// Rotation circuit V(x_Q) on the payload register; identity when the
/// observable catalog is empty.
Circuit dispatcher_rotation(const DispatcherSpec& spec, const std::string& x_q);

/// Haar-random single-qubit unitary as a custom gate.
Gate haar_single_qubit_gate(int q, Rng& rng);
/// Random circuit over Haar single-qubit gates and CNOTs (CNOT fraction
/// cnot_p, only if n >= 2).
Circuit random_circuit(int n, int gates, Rng& rng, double cnot_p = 0.3);

}  // namespace obslearn

#endif
