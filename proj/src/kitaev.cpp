#include "obslearn/kitaev.hpp"

#include <cmath>

namespace obslearn {

namespace {

void check_input(const Circuit& c, const std::string& x) {
  if (static_cast<int>(x.size()) != c.n())
    throw DimensionError("kitaev: input bit count must equal work qubits");
  for (char b : x)
    if (b != '0' && b != '1')
      throw ParseError("kitaev: input must be a bitstring over {0,1}");
}

Circuit pad_circuit(const Circuit& c) {
  std::vector<Gate> gates = c.gates();
  const std::size_t t = gates.size();
  for (std::size_t i = 0; i < 2 * t; ++i)
    gates.push_back(Gate::single(GateKind::kRz, 0, 0.0));
  return Circuit(c.n(), std::move(gates));
}

// Dense unitary of one gate on the work register; small N only.
Eigen::MatrixXcd gate_unitary(const Gate& g, int n) {
  const std::int64_t dim = std::int64_t(1) << n;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::int64_t col = 0; col < dim; ++col) {
    StateVector s;
    s.n = n;
    s.amps = Eigen::VectorXcd::Zero(dim);
    s.amps[col] = 1.0;
    apply_gate(s, g);
    u.col(col) = s.amps;
  }
  return u;
}

}  // namespace

KitaevHamiltonian build_kitaev(const Circuit& c, const std::string& x) {
  check_input(c, x);
  const int n = c.n();
  const int t_gates = static_cast<int>(c.size());
  const int steps = 3 * t_gates;
  const std::int64_t wdim = std::int64_t(1) << n;
  const std::int64_t dim = wdim * (steps + 1);
  check_dim_budget(dim, "build_kitaev");

  KitaevHamiltonian h{
      n, t_gates, steps, x, pad_circuit(c),
      SparseHermitian::zero(dim), SparseHermitian::zero(dim), {},
      SparseHermitian::zero(dim)};

  // Work states disagreeing with x at clock level 0 are penalized once per
  // disagreeing qubit.
  {
    std::vector<CooEntry> entries;
    for (std::int64_t w = 0; w < wdim; ++w) {
      int mismatches = 0;
      for (int q = 0; q < n; ++q) {
        int bit = (w >> q) & 1;
        if (bit != (x[q] - '0')) ++mismatches;
      }
      if (mismatches > 0)
        entries.push_back({w, w, cd(static_cast<double>(mismatches), 0.0)});
    }
    h.h_init = SparseHermitian::from_entries(dim, entries);
  }

  h.h_prop.reserve(steps);
  for (int t = 1; t <= steps; ++t) {
    Eigen::MatrixXcd u = gate_unitary(h.padded.gates()[t - 1], n);
    std::vector<CooEntry> entries;
    for (std::int64_t w = 0; w < wdim; ++w) {
      entries.push_back({(t - 1) * wdim + w, (t - 1) * wdim + w, cd(0.5, 0.0)});
      entries.push_back({t * wdim + w, t * wdim + w, cd(0.5, 0.0)});
    }
    for (std::int64_t r = 0; r < wdim; ++r) {
      for (std::int64_t cidx = 0; cidx < wdim; ++cidx) {
        cd v = u(r, cidx);
        if (v == cd(0.0, 0.0)) continue;
        entries.push_back({t * wdim + r, (t - 1) * wdim + cidx, -0.5 * v});
        entries.push_back({(t - 1) * wdim + cidx, t * wdim + r,
                           -0.5 * std::conj(v)});
      }
    }
    h.h_prop.push_back(SparseHermitian::from_entries(dim, entries));
  }

  std::vector<const SparseHermitian*> parts = {&h.h_init, &h.h_clock};
  for (const auto& p : h.h_prop) parts.push_back(&p);
  h.total = SparseHermitian::sum(parts);
  return h;
}

Eigen::VectorXcd history_state(const Circuit& c, const std::string& x) {
  check_input(c, x);
  const int n = c.n();
  const int steps = 3 * static_cast<int>(c.size());
  const std::int64_t wdim = std::int64_t(1) << n;
  Circuit padded = pad_circuit(c);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(wdim * (steps + 1));
  StateVector cur = StateVector::basis(n, x);
  const double amp = 1.0 / std::sqrt(static_cast<double>(steps + 1));
  out.segment(0, wdim) = amp * cur.amps;
  for (int t = 1; t <= steps; ++t) {
    apply_gate(cur, padded.gates()[t - 1]);
    out.segment(t * wdim, wdim) = amp * cur.amps;
  }
  return out;
}

SparseHermitian decision_observable(int work_n, int gate_count) {
  if (work_n < 1 || gate_count < 1)
    throw DomainError("decision_observable: need work_n >= 1, gate_count >= 1");
  const int steps = 3 * gate_count;
  const std::int64_t wdim = std::int64_t(1) << work_n;
  std::vector<CooEntry> entries;
  for (int t = gate_count; t <= steps; ++t)
    for (std::int64_t w = 0; w < wdim; ++w)
      entries.push_back({t * wdim + w, t * wdim + w,
                         cd((w & 1) ? -1.0 : 1.0, 0.0)});
  return SparseHermitian::from_entries(wdim * (steps + 1), entries);
}

GroundReport verify_ground(const KitaevHamiltonian& h, double tol) {
  if (tol <= 0.0) throw DomainError("verify_ground: tolerance must be positive");
  GroundReport r;
  r.work_n = h.work_n;
  r.gate_count = h.gate_count;
  GroundResult g = ground_state(h.total);
  r.energy = g.energy;
  r.residual = g.residual;
  r.gap = g.gap;
  SparseHermitian obs = decision_observable(h.work_n, h.gate_count);
  r.decision_value = g.state.dot(obs.apply(g.state)).real();
  r.passed = std::abs(r.energy) <= tol && r.residual <= kGroundResidualTol;
  return r;
}

KitaevUnary kitaev_unary(const KitaevHamiltonian& h) {
  const int n = h.work_n;
  const int k = h.padded_steps;
  check_qubit_budget(n + k, "kitaev_unary");
  const std::int64_t wdim = std::int64_t(1) << n;
  const std::int64_t full = std::int64_t(1) << (n + k);

  KitaevUnary out;
  {
    std::vector<Eigen::Triplet<cd>> trips;
    for (int t = 0; t <= k; ++t) {
      std::int64_t wall = (std::int64_t(1) << t) - 1;
      for (std::int64_t w = 0; w < wdim; ++w)
        trips.emplace_back((wall << n) | w, t * wdim + w, cd(1.0, 0.0));
    }
    out.isometry.resize(full, wdim * (k + 1));
    out.isometry.setFromTriplets(trips.begin(), trips.end());
  }

  std::vector<CooEntry> entries;
  const std::int64_t clock_count = std::int64_t(1) << k;

  // Initialization penalty: disagreements with x while clock qubit 1 is 0.
  const std::int64_t first_clock = std::int64_t(1) << n;
  for (std::int64_t clock = 0; clock < clock_count; ++clock) {
    std::int64_t cbits = clock << n;
    if (cbits & first_clock) continue;
    for (std::int64_t w = 0; w < wdim; ++w) {
      int mismatches = 0;
      for (int q = 0; q < n; ++q)
        if (((w >> q) & 1) != (h.input[q] - '0')) ++mismatches;
      if (mismatches > 0)
        entries.push_back({cbits | w, cbits | w,
                           cd(static_cast<double>(mismatches), 0.0)});
    }
  }

  // Clock penalty: |01><01| on adjacent clock qubits (broken wall).
  for (int t = 1; t <= k - 1; ++t) {
    const std::int64_t lo = std::int64_t(1) << (n + t - 1);
    const std::int64_t hi = std::int64_t(1) << (n + t);
    for (std::int64_t i = 0; i < full; ++i)
      if (!(i & lo) && (i & hi)) entries.push_back({i, i, cd(1.0, 0.0)});
  }

  // Propagation terms, domain-wall hop with neighbor guards.
  int locality = 0;
  for (int t = 1; t <= k; ++t) {
    const Gate& g = h.padded.gates()[t - 1];
    Eigen::MatrixXcd u = gate_unitary(g, n);
    const std::int64_t bit = std::int64_t(1) << (n + t - 1);
    const std::int64_t guard_lo = t >= 2 ? std::int64_t(1) << (n + t - 2) : 0;
    const std::int64_t guard_hi = t <= k - 1 ? std::int64_t(1) << (n + t) : 0;
    int clock_support = 1 + (guard_lo ? 1 : 0) + (guard_hi ? 1 : 0);
    locality = std::max(locality,
                        clock_support + (g.two_qubit() ? 2 : 1));
    for (std::int64_t clock = 0; clock < clock_count; ++clock) {
      std::int64_t cbits = clock << n;
      if (cbits & bit) continue;
      if (guard_lo && !(cbits & guard_lo)) continue;
      if (guard_hi && (cbits & guard_hi)) continue;
      for (std::int64_t w = 0; w < wdim; ++w) {
        entries.push_back({cbits | w, cbits | w, cd(0.5, 0.0)});
        entries.push_back({(cbits | bit) | w, (cbits | bit) | w, cd(0.5, 0.0)});
      }
      for (std::int64_t r = 0; r < wdim; ++r) {
        for (std::int64_t cidx = 0; cidx < wdim; ++cidx) {
          cd v = u(r, cidx);
          if (v == cd(0.0, 0.0)) continue;
          entries.push_back({(cbits | bit) | r, cbits | cidx, -0.5 * v});
          entries.push_back({cbits | cidx, (cbits | bit) | r,
                             -0.5 * std::conj(v)});
        }
      }
    }
  }
  out.locality = locality;
  out.op = SparseHermitian::from_entries(full, entries);
  return out;
}

}  // namespace obslearn
