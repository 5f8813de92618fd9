#include "obslearn/clockham.hpp"

#include <cmath>
#include <numbers>

namespace obslearn {

namespace {

// Sparse matrix of a gate acting on an n-qubit register.
std::vector<Eigen::Triplet<cd>> gate_triplets(const Gate& g, int n) {
  std::vector<Eigen::Triplet<cd>> out;
  const std::int64_t dim = std::int64_t(1) << n;
  Eigen::MatrixXcd u = g.matrix();
  if (!g.two_qubit()) {
    const std::int64_t m = std::int64_t(1) << g.q0;
    for (std::int64_t col = 0; col < dim; ++col) {
      int b = (col & m) ? 1 : 0;
      for (int r = 0; r < 2; ++r) {
        cd v = u(r, b);
        if (v == cd(0.0, 0.0)) continue;
        std::int64_t row = r ? (col | m) : (col & ~m);
        out.emplace_back(row, col, v);
      }
    }
  } else {
    const std::int64_t m0 = std::int64_t(1) << g.q0;
    const std::int64_t m1 = std::int64_t(1) << g.q1;
    for (std::int64_t col = 0; col < dim; ++col) {
      int b = 2 * ((col & m0) ? 1 : 0) + ((col & m1) ? 1 : 0);
      for (int r = 0; r < 4; ++r) {
        cd v = u(r, b);
        if (v == cd(0.0, 0.0)) continue;
        std::int64_t row = col & ~(m0 | m1);
        if (r & 2) row |= m0;
        if (r & 1) row |= m1;
        out.emplace_back(row, col, v);
      }
    }
  }
  return out;
}

int gate_support(const Gate& g) { return g.two_qubit() ? 2 : 1; }

}  // namespace

std::vector<double> childs_weights(int k) {
  if (k < 1) throw DomainError("childs_weights: need k >= 1");
  std::vector<double> w(k);
  for (int j = 1; j <= k; ++j)
    w[j - 1] = std::sqrt(static_cast<double>(j) * (k + 1 - j));
  return w;
}

ClockHamiltonian::ClockHamiltonian(Circuit c, std::vector<double> weights,
                                   double scale)
    : circuit_(std::move(c)),
      weights_(std::move(weights)),
      step_scale_(scale),
      op_(SparseHermitian::zero(1)) {
  const int n = circuit_.n();
  const int k = steps();
  const std::int64_t wdim = std::int64_t(1) << n;
  check_dim_budget(wdim * (k + 1), "ClockHamiltonian");
  std::vector<CooEntry> entries;
  for (int j = 1; j <= k; ++j) {
    double cpl = weights_[j - 1] * step_scale_;
    auto trips = gate_triplets(circuit_.gates()[j - 1], n);
    for (const auto& t : trips) {
      // c_j U_j (x) |j><j-1| plus the conjugate block.
      std::int64_t row = j * wdim + t.row();
      std::int64_t col = (j - 1) * wdim + t.col();
      entries.push_back({row, col, cpl * t.value()});
      entries.push_back({col, row, cpl * std::conj(t.value())});
    }
  }
  op_ = SparseHermitian::from_entries(wdim * (k + 1), entries);
}

ClockHamiltonian ClockHamiltonian::feynman(const Circuit& c) {
  return ClockHamiltonian(c, std::vector<double>(c.size(), 1.0), 1.0);
}

ClockHamiltonian ClockHamiltonian::childs_weighted(const Circuit& c) {
  return ClockHamiltonian(c, childs_weights(static_cast<int>(c.size())), 0.5);
}

Eigen::VectorXcd ClockHamiltonian::embed(const Eigen::VectorXcd& work,
                                         int t) const {
  const std::int64_t wdim = std::int64_t(1) << work_n();
  if (work.size() != wdim)
    throw DimensionError("ClockHamiltonian::embed: work dimension mismatch");
  if (t < 0 || t > steps())
    throw DomainError("ClockHamiltonian::embed: clock level out of range");
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(wdim * (steps() + 1));
  out.segment(t * wdim, wdim) = work;
  return out;
}

std::vector<Eigen::VectorXcd> ClockHamiltonian::krylov_states(
    const Eigen::VectorXcd& psi_in) const {
  const std::int64_t wdim = std::int64_t(1) << work_n();
  if (psi_in.size() != wdim)
    throw DimensionError("krylov_states: work dimension mismatch");
  std::vector<Eigen::VectorXcd> out;
  out.reserve(steps() + 1);
  StateVector cur;
  cur.n = work_n();
  cur.amps = psi_in;
  out.push_back(embed(cur.amps, 0));
  for (int j = 1; j <= steps(); ++j) {
    apply_gate(cur, circuit_.gates()[j - 1]);
    out.push_back(embed(cur.amps, j));
  }
  return out;
}

Eigen::MatrixXcd ClockHamiltonian::restricted_matrix(
    const Eigen::VectorXcd& psi_in) const {
  auto states = krylov_states(psi_in);
  const int k = steps();
  Eigen::MatrixXcd m(k + 1, k + 1);
  for (int j = 0; j <= k; ++j) {
    Eigen::VectorXcd h_psi = op_.apply(states[j]);
    for (int i = 0; i <= k; ++i) m(i, j) = states[i].dot(h_psi);
  }
  return m;
}

double transfer_fidelity(const ClockHamiltonian& h,
                         const Eigen::VectorXcd& psi_in, double t) {
  const std::int64_t wdim = std::int64_t(1) << h.work_n();
  if (psi_in.size() != wdim)
    throw DimensionError("transfer_fidelity: work dimension mismatch");
  double nrm = psi_in.norm();
  if (std::abs(nrm - 1.0) > 1e-10)
    throw DomainError("transfer_fidelity: input state not normalized");
  Eigen::VectorXcd start = h.embed(psi_in, 0);
  Eigen::VectorXcd evolved = evolve(h.op(), start, t);
  StateVector target;
  target.n = h.work_n();
  target.amps = psi_in;
  for (const Gate& g : h.circuit().gates()) apply_gate(target, g);
  Eigen::VectorXcd target_full = h.embed(target.amps, h.steps());
  return std::norm(target_full.dot(evolved));
}

double krylov_leakage(const ClockHamiltonian& h,
                      const Eigen::VectorXcd& psi_in,
                      const std::vector<double>& times) {
  auto basis = h.krylov_states(psi_in);
  Eigen::VectorXcd start = h.embed(psi_in, 0);
  Evolver ev(h.op());
  double worst = 0.0;
  for (double t : times) {
    Eigen::VectorXcd s = ev.apply(start, t);
    for (const auto& b : basis) s -= b.dot(s) * b;
    worst = std::max(worst, s.norm());
  }
  return worst;
}

int unary_locality(const Circuit& c) {
  const int k = static_cast<int>(c.size());
  int worst = 0;
  for (int j = 1; j <= k; ++j) {
    int clock = 1 + (j >= 2 ? 1 : 0) + (j <= k - 1 ? 1 : 0);
    worst = std::max(worst, clock + gate_support(c.gates()[j - 1]));
  }
  return worst;
}

TransferReport verify_perfect_transfer(const Circuit& c,
                                       const Eigen::VectorXcd& psi_in,
                                       double tol, double t) {
  if (tol <= 0.0)
    throw DomainError("verify_perfect_transfer: tolerance must be positive");
  if (t < 0.0) t = std::numbers::pi;
  ClockHamiltonian h = ClockHamiltonian::childs_weighted(c);
  TransferReport r;
  r.k = h.steps();
  r.n_work = h.work_n();
  r.t_used = t;
  r.fidelity = transfer_fidelity(h, psi_in, t);
  std::vector<double> times;
  for (int i = 1; i <= 20; ++i) times.push_back(t * i / 20.0);
  r.leakage = krylov_leakage(h, psi_in, times);
  r.locality_measured = unary_locality(c);
  r.passed = r.fidelity >= 1.0 - tol;
  return r;
}

UnaryEmbedding unary_embedding(const ClockHamiltonian& h) {
  const int n = h.work_n();
  const int k = h.steps();
  check_qubit_budget(n + k, "unary_embedding");
  const std::int64_t wdim = std::int64_t(1) << n;
  const std::int64_t full = std::int64_t(1) << (n + k);

  UnaryEmbedding out;
  out.total_qubits = n + k;
  out.locality = unary_locality(h.circuit());

  // Isometry: abstract (w, t) -> |w> (x) |1^t 0^{k-t}>.
  Eigen::SparseMatrix<cd> iso(full, wdim * (k + 1));
  {
    std::vector<Eigen::Triplet<cd>> trips;
    for (int t = 0; t <= k; ++t) {
      std::int64_t wall = (std::int64_t(1) << t) - 1;  // clock bits 0..t-1
      for (std::int64_t w = 0; w < wdim; ++w)
        trips.emplace_back((wall << n) | w, t * wdim + w, cd(1.0, 0.0));
    }
    iso.setFromTriplets(trips.begin(), trips.end());
  }
  out.isometry = iso;

  // Hop for step j flips clock bit j-1 (0-based) from 0 to 1, guarded by
  // bit j-2 = 1 (j >= 2) and bit j = 0 (j <= k-1).
  std::vector<CooEntry> entries;
  for (int j = 1; j <= k; ++j) {
    double cpl = h.weights()[j - 1] * h.step_scale();
    auto trips = gate_triplets(h.circuit().gates()[j - 1], n);
    const std::int64_t bit = std::int64_t(1) << (n + j - 1);
    const std::int64_t guard_lo = j >= 2 ? std::int64_t(1) << (n + j - 2) : 0;
    const std::int64_t guard_hi = j <= k - 1 ? std::int64_t(1) << (n + j) : 0;
    for (std::int64_t clock = 0; clock < (std::int64_t(1) << k); ++clock) {
      std::int64_t cbits = clock << n;
      if (cbits & bit) continue;
      if (guard_lo && !(cbits & guard_lo)) continue;
      if (guard_hi && (cbits & guard_hi)) continue;
      for (const auto& t : trips) {
        std::int64_t row = (cbits | bit) | t.row();
        std::int64_t col = cbits | t.col();
        entries.push_back({row, col, cpl * t.value()});
        entries.push_back({col, row, cpl * std::conj(t.value())});
      }
    }
  }
  out.op = SparseHermitian::from_entries(full, entries);
  return out;
}

}  // namespace obslearn
