#ifndef OBSLEARN_KITAEV_HPP
#define OBSLEARN_KITAEV_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "obslearn/circuit.hpp"
#include "obslearn/spectral.hpp"

namespace obslearn {

/// Circuit-to-Hamiltonian construction whose frustration-free ground state
/// is the uniform history of the computation on input x. The circuit is
/// padded with 2T identity layers so two thirds of the history holds the
/// finished output. Hybrid index t*2^N + w over clock levels t = 0..3T.
///
/// Terms:
///   H_init  = sum_i |1-x_i><1-x_i|_i (x) |0><0|_clock
///   H_t     = 1/2 (I(x)(|t-1><t-1| + |t><t|) - U_t(x)|t><t-1| - h.c.)
///   H_clock = 0 in this representation (every clock level is legal); the
///             unary embedding carries the |01><01| penalties instead.
struct KitaevHamiltonian {
  int work_n = 0;      // N
  int gate_count = 0;  // T before padding
  int padded_steps = 0;  // 3T
  std::string input;   // x as a bitstring of length N
  Circuit padded;      // 3T gates (identity padding appended)
  SparseHermitian h_init;
  SparseHermitian h_clock;             // zero here, kept for term accounting
  std::vector<SparseHermitian> h_prop; // padded_steps terms
  SparseHermitian total;

  std::int64_t dim() const {
    return (std::int64_t(1) << work_n) * (padded_steps + 1);
  }
};

KitaevHamiltonian build_kitaev(const Circuit& c, const std::string& x);

/// (1/sqrt(3T+1)) sum_t U_t...U_1 |x> (x) |t>.
Eigen::VectorXcd history_state(const Circuit& c, const std::string& x);

/// Z on work qubit 1 restricted to clock levels t >= T, i.e. the decision
/// readout on the finished two thirds of the history.
SparseHermitian decision_observable(int work_n, int gate_count);

struct GroundReport {
  int work_n = 0;
  int gate_count = 0;
  double energy = 0.0;
  double residual = 0.0;
  double gap = 0.0;
  double decision_value = 0.0;
  bool passed = false;
};

/// Ground-state check: energy within tol of zero, residual within the
/// solver bound, decision value evaluated on the computed ground state.
GroundReport verify_ground(const KitaevHamiltonian& h, double tol);

struct KitaevUnary {
  SparseHermitian op;                // work_n + 3T qubits
  Eigen::SparseMatrix<cd> isometry;  // legal domain walls
  int locality = 0;
};

/// Domain-wall encoding with explicit |01><01| clock penalties; intended for
/// locality demonstrations at small sizes.
KitaevUnary kitaev_unary(const KitaevHamiltonian& h);

}  // namespace obslearn

#endif
