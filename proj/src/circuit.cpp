#include "obslearn/circuit.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <sstream>

namespace obslearn {

namespace {

constexpr double kUnitaryTol = 1e-12;

const std::map<std::string, GateKind>& name_table() {
  static const std::map<std::string, GateKind> t = {
      {"X", GateKind::kX},     {"Y", GateKind::kY},   {"Z", GateKind::kZ},
      {"H", GateKind::kH},     {"S", GateKind::kS},   {"T", GateKind::kT},
      {"CNOT", GateKind::kCnot}, {"CZ", GateKind::kCz},
      {"RX", GateKind::kRx},   {"RY", GateKind::kRy}, {"RZ", GateKind::kRz}};
  return t;
}

std::string kind_name(GateKind k) {
  switch (k) {
    case GateKind::kX: return "X";
    case GateKind::kY: return "Y";
    case GateKind::kZ: return "Z";
    case GateKind::kH: return "H";
    case GateKind::kS: return "S";
    case GateKind::kT: return "T";
    case GateKind::kCnot: return "CNOT";
    case GateKind::kCz: return "CZ";
    case GateKind::kRx: return "RX";
    case GateKind::kRy: return "RY";
    case GateKind::kRz: return "RZ";
    case GateKind::kCustom1: return "CUSTOM1";
    case GateKind::kCustom2: return "CUSTOM2";
  }
  return "?";
}

bool takes_theta(GateKind k) {
  return k == GateKind::kRx || k == GateKind::kRy || k == GateKind::kRz;
}

void check_unitary(const Eigen::MatrixXcd& u, const std::string& where) {
  Eigen::MatrixXcd d = u.adjoint() * u -
                       Eigen::MatrixXcd::Identity(u.rows(), u.cols());
  if (d.cwiseAbs().maxCoeff() > kUnitaryTol)
    throw DomainError(where + ": matrix is not unitary to 1e-12");
}

}  // namespace

bool Gate::two_qubit() const {
  return kind == GateKind::kCnot || kind == GateKind::kCz ||
         kind == GateKind::kCustom2;
}

Gate Gate::single(GateKind kind, int q, double theta) {
  if (kind == GateKind::kCnot || kind == GateKind::kCz ||
      kind == GateKind::kCustom1 || kind == GateKind::kCustom2)
    throw DomainError("Gate::single: kind is not a plain single-qubit gate");
  if (takes_theta(kind) && !std::isfinite(theta))
    throw DomainError("Gate::single: non-finite rotation angle");
  Gate g;
  g.kind = kind;
  g.q0 = q;
  g.theta = takes_theta(kind) ? theta : 0.0;
  return g;
}

Gate Gate::cnot(int control, int target) {
  if (control == target) throw DomainError("Gate::cnot: equal qubits");
  Gate g;
  g.kind = GateKind::kCnot;
  g.q0 = control;
  g.q1 = target;
  return g;
}

Gate Gate::cz(int a, int b) {
  if (a == b) throw DomainError("Gate::cz: equal qubits");
  Gate g;
  g.kind = GateKind::kCz;
  g.q0 = a;
  g.q1 = b;
  return g;
}

Gate Gate::custom1(int q, const Eigen::Matrix2cd& u) {
  check_unitary(u, "Gate::custom1");
  Gate g;
  g.kind = GateKind::kCustom1;
  g.q0 = q;
  g.custom = u;
  return g;
}

Gate Gate::custom2(int qa, int qb, const Eigen::Matrix4cd& u) {
  if (qa == qb) throw DomainError("Gate::custom2: equal qubits");
  check_unitary(u, "Gate::custom2");
  Gate g;
  g.kind = GateKind::kCustom2;
  g.q0 = qa;
  g.q1 = qb;
  g.custom = u;
  return g;
}

Eigen::MatrixXcd Gate::matrix() const {
  const cd i(0, 1);
  const double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
  Eigen::Matrix2cd m2;
  switch (kind) {
    case GateKind::kX: m2 << 0, 1, 1, 0; return m2;
    case GateKind::kY: m2 << 0, -i, i, 0; return m2;
    case GateKind::kZ: m2 << 1, 0, 0, -1; return m2;
    case GateKind::kH:
      m2 << inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2;
      return m2;
    case GateKind::kS: m2 << 1, 0, 0, i; return m2;
    case GateKind::kT: m2 << 1, 0, 0, std::exp(i * (std::numbers::pi / 4)); return m2;
    case GateKind::kRx:
      m2 << std::cos(theta / 2), -i * std::sin(theta / 2),
            -i * std::sin(theta / 2), std::cos(theta / 2);
      return m2;
    case GateKind::kRy:
      m2 << std::cos(theta / 2), -std::sin(theta / 2),
            std::sin(theta / 2), std::cos(theta / 2);
      return m2;
    case GateKind::kRz:
      m2 << std::exp(-i * (theta / 2)), 0, 0, std::exp(i * (theta / 2));
      return m2;
    case GateKind::kCustom1:
      return custom;
    case GateKind::kCnot: {
      Eigen::Matrix4cd m = Eigen::Matrix4cd::Identity();
      // Index is 2*bit(q0=control) + bit(q1=target).
      m(2, 2) = 0; m(3, 3) = 0; m(2, 3) = 1; m(3, 2) = 1;
      return m;
    }
    case GateKind::kCz: {
      Eigen::Matrix4cd m = Eigen::Matrix4cd::Identity();
      m(3, 3) = -1;
      return m;
    }
    case GateKind::kCustom2:
      return custom;
  }
  throw DomainError("Gate::matrix: unknown kind");
}

Gate Gate::inverse() const {
  switch (kind) {
    case GateKind::kX: case GateKind::kY: case GateKind::kZ:
    case GateKind::kH: case GateKind::kCnot: case GateKind::kCz:
      return *this;
    case GateKind::kRx: case GateKind::kRy: case GateKind::kRz: {
      Gate g = *this;
      g.theta = -theta;
      return g;
    }
    case GateKind::kS: case GateKind::kT:
      return Gate::custom1(q0, Eigen::Matrix2cd(matrix().adjoint()));
    case GateKind::kCustom1:
      return Gate::custom1(q0, Eigen::Matrix2cd(custom.adjoint()));
    case GateKind::kCustom2:
      return Gate::custom2(q0, q1, Eigen::Matrix4cd(custom.adjoint()));
  }
  throw DomainError("Gate::inverse: unknown kind");
}

std::string Gate::text() const {
  std::ostringstream os;
  os.precision(17);
  os << kind_name(kind) << ' ' << q0;
  if (two_qubit()) os << ' ' << q1;
  if (takes_theta(kind)) os << ' ' << theta;
  if (kind == GateKind::kCustom1 || kind == GateKind::kCustom2)
    throw DomainError("Gate::text: custom matrices have no text form");
  return os.str();
}

Circuit::Circuit(int n, std::vector<Gate> gates)
    : n_(n), gates_(std::move(gates)) {
  if (n_ < 1) throw DomainError("Circuit: need at least one qubit");
  check_qubit_budget(n_, "Circuit");
  if (gates_.empty()) throw DomainError("Circuit: need at least one gate");
  for (std::size_t gi = 0; gi < gates_.size(); ++gi) {
    const Gate& g = gates_[gi];
    auto bad = [&](const std::string& what) {
      std::ostringstream os;
      os << "Circuit: gate " << gi << " (" << kind_name(g.kind) << "): "
         << what;
      throw DomainError(os.str());
    };
    if (g.q0 < 0 || g.q0 >= n_) bad("first qubit out of range");
    if (g.two_qubit()) {
      if (g.q1 < 0 || g.q1 >= n_) bad("second qubit out of range");
      if (g.q1 == g.q0) bad("qubits must be distinct");
    }
  }
}

int Circuit::depth() const {
  std::vector<int> free_at(n_, 0);
  int depth = 0;
  for (const Gate& g : gates_) {
    int layer = free_at[g.q0];
    if (g.two_qubit()) layer = std::max(layer, free_at[g.q1]);
    free_at[g.q0] = layer + 1;
    if (g.two_qubit()) free_at[g.q1] = layer + 1;
    depth = std::max(depth, layer + 1);
  }
  return depth;
}

Circuit Circuit::inverse() const {
  std::vector<Gate> inv;
  inv.reserve(gates_.size());
  for (auto it = gates_.rbegin(); it != gates_.rend(); ++it)
    inv.push_back(it->inverse());
  return Circuit(n_, std::move(inv));
}

std::string Circuit::text() const {
  std::ostringstream os;
  for (const Gate& g : gates_) os << g.text() << '\n';
  return os.str();
}

Circuit parse_circuit(std::istream& in, int n) {
  std::vector<Gate> gates;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind) || kind[0] == '#') continue;
    auto it = name_table().find(kind);
    auto fail = [&](const std::string& what) {
      std::ostringstream os;
      os << "circuit text line " << lineno << ": " << what;
      throw ParseError(os.str());
    };
    if (it == name_table().end()) fail("unknown gate kind '" + kind + "'");
    GateKind k = it->second;
    int q0 = -1;
    if (!(ls >> q0)) fail("missing target qubit");
    Gate g;
    if (k == GateKind::kCnot || k == GateKind::kCz) {
      int q1 = -1;
      if (!(ls >> q1)) fail("missing second qubit");
      g = (k == GateKind::kCnot) ? Gate::cnot(q0, q1) : Gate::cz(q0, q1);
    } else if (takes_theta(k)) {
      double theta = 0.0;
      if (!(ls >> theta)) fail("missing rotation angle");
      if (!std::isfinite(theta)) fail("non-finite rotation angle");
      g = Gate::single(k, q0, theta);
    } else {
      g = Gate::single(k, q0);
    }
    std::string extra;
    if (ls >> extra) fail("trailing token '" + extra + "'");
    gates.push_back(g);
  }
  if (gates.empty()) throw ParseError("circuit text: no gates");
  return Circuit(n, std::move(gates));
}

Circuit parse_circuit(const std::string& body, int n) {
  std::istringstream in(body);
  return parse_circuit(in, n);
}

StateVector StateVector::zero(int n) {
  if (n < 1) throw DomainError("StateVector::zero: need at least one qubit");
  check_qubit_budget(n, "StateVector");
  StateVector s;
  s.n = n;
  s.amps = Eigen::VectorXcd::Zero(std::int64_t(1) << n);
  s.amps[0] = 1.0;
  return s;
}

StateVector StateVector::basis(int n, const std::string& bits) {
  if (static_cast<int>(bits.size()) != n)
    throw DimensionError("StateVector::basis: bitstring length mismatch");
  StateVector s = zero(n);
  std::int64_t idx = 0;
  for (int q = 0; q < n; ++q) {
    if (bits[q] == '1') idx |= std::int64_t(1) << q;
    else if (bits[q] != '0')
      throw ParseError("StateVector::basis: bitstring must be over {0,1}");
  }
  s.amps[0] = 0.0;
  s.amps[idx] = 1.0;
  return s;
}

namespace {

void apply_1q(Eigen::VectorXcd& amps, int q, const Eigen::Matrix2cd& u) {
  const std::int64_t dim = amps.size();
  const std::int64_t m = std::int64_t(1) << q;
  for (std::int64_t base = 0; base < dim; ++base) {
    if (base & m) continue;
    cd a0 = amps[base];
    cd a1 = amps[base | m];
    amps[base] = u(0, 0) * a0 + u(0, 1) * a1;
    amps[base | m] = u(1, 0) * a0 + u(1, 1) * a1;
  }
}

void apply_2q(Eigen::VectorXcd& amps, int qa, int qb,
              const Eigen::Matrix4cd& u) {
  const std::int64_t dim = amps.size();
  const std::int64_t ma = std::int64_t(1) << qa;
  const std::int64_t mb = std::int64_t(1) << qb;
  for (std::int64_t base = 0; base < dim; ++base) {
    if (base & (ma | mb)) continue;
    std::int64_t idx[4] = {base, base | mb, base | ma, base | ma | mb};
    Eigen::Vector4cd v;
    for (int r = 0; r < 4; ++r) v[r] = amps[idx[r]];
    Eigen::Vector4cd w = u * v;
    for (int r = 0; r < 4; ++r) amps[idx[r]] = w[r];
  }
}

}  // namespace

void apply_gate(StateVector& psi, const Gate& g) {
  if (g.q0 >= psi.n || (g.two_qubit() && g.q1 >= psi.n))
    throw DimensionError("apply_gate: qubit index out of range for state");
  switch (g.kind) {
    case GateKind::kCnot: {
      const std::int64_t mc = std::int64_t(1) << g.q0;
      const std::int64_t mt = std::int64_t(1) << g.q1;
      for (std::int64_t i = 0; i < psi.amps.size(); ++i) {
        if ((i & mc) && !(i & mt)) std::swap(psi.amps[i], psi.amps[i | mt]);
      }
      return;
    }
    case GateKind::kCz: {
      const std::int64_t m = (std::int64_t(1) << g.q0) |
                             (std::int64_t(1) << g.q1);
      for (std::int64_t i = 0; i < psi.amps.size(); ++i)
        if ((i & m) == m) psi.amps[i] = -psi.amps[i];
      return;
    }
    case GateKind::kCustom2:
      apply_2q(psi.amps, g.q0, g.q1, Eigen::Matrix4cd(g.matrix()));
      return;
    default:
      apply_1q(psi.amps, g.q0, Eigen::Matrix2cd(g.matrix()));
      return;
  }
}

StateVector run_circuit(const Circuit& c, const StateVector& input) {
  if (input.n != c.n())
    throw DimensionError("run_circuit: state has wrong qubit count");
  StateVector out = input;
  for (const Gate& g : c.gates()) apply_gate(out, g);
  return out;
}

Eigen::Vector2cd stab1_state(int label) {
  const double s = std::numbers::sqrt2 / 2.0;
  const cd i(0, 1);
  Eigen::Vector2cd v;
  switch (label) {
    case 0: v << 1, 0; break;
    case 1: v << 0, 1; break;
    case 2: v << s, s; break;
    case 3: v << s, -s; break;
    case 4: v << s, i * s; break;
    case 5: v << s, -i * s; break;
    default:
      throw DomainError("stab1_state: label must be in [0,6)");
  }
  return v;
}

double stab1_letter_expectation(int label, char letter) {
  if (label < 0 || label >= kStab1Count)
    throw DomainError("stab1_letter_expectation: label must be in [0,6)");
  switch (letter) {
    case 'I': return 1.0;
    case 'Z': return label == 0 ? 1.0 : (label == 1 ? -1.0 : 0.0);
    case 'X': return label == 2 ? 1.0 : (label == 3 ? -1.0 : 0.0);
    case 'Y': return label == 4 ? 1.0 : (label == 5 ? -1.0 : 0.0);
    default:
      throw ParseError("stab1_letter_expectation: bad Pauli letter");
  }
}

StateVector prepare_stabilizer_product(const std::vector<int>& labels) {
  if (labels.empty())
    throw DomainError("prepare_stabilizer_product: empty label list");
  int n = static_cast<int>(labels.size());
  StateVector s = StateVector::zero(n);
  const std::int64_t dim = s.amps.size();
  std::vector<Eigen::Vector2cd> parts;
  parts.reserve(labels.size());
  for (int l : labels) parts.push_back(stab1_state(l));
  for (std::int64_t i = 0; i < dim; ++i) {
    cd a(1, 0);
    for (int q = 0; q < n; ++q) a *= parts[q][(i >> q) & 1];
    s.amps[i] = a;
  }
  return s;
}

double stabilizer_product_expectation(const std::vector<int>& labels,
                                      const PauliString& p) {
  if (static_cast<int>(labels.size()) != p.n())
    throw DimensionError(
        "stabilizer_product_expectation: label count != string length");
  double v = 1.0;
  for (int q : p.support()) {
    v *= stab1_letter_expectation(labels[q], p.letters()[q]);
    if (v == 0.0) return 0.0;
  }
  return v;
}

void DispatcherSpec::validate() const {
  if (n < 2) throw DomainError("DispatcherSpec: need n >= 2 input bits");
  if (n_q < 0 || n_s < 1)
    throw DomainError("DispatcherSpec: need n_q >= 0 and n_s >= 1");
  if (selector_bits() < 1)
    throw DomainError("DispatcherSpec: no selector bits left after x1, x_Q");
  if (bqp_key_bits < 1 || bqp_key_bits > selector_bits())
    throw DomainError("DispatcherSpec: bqp_key_bits out of range");
  check_qubit_budget(state_qubits(), "DispatcherSpec");
  for (const auto& [key, labels] : probe_catalog) {
    if (static_cast<int>(key.size()) != selector_bits())
      throw DomainError("DispatcherSpec: probe catalog key '" + key +
                        "' has wrong length");
    if (static_cast<int>(labels.size()) != n_s)
      throw DomainError("DispatcherSpec: probe catalog entry '" + key +
                        "' has wrong label count");
    for (int l : labels)
      if (l < 0 || l >= kStab1Count)
        throw DomainError("DispatcherSpec: probe label out of range in '" +
                          key + "'");
  }
  for (const auto& [key, body] : bqp_branch) {
    if (static_cast<int>(key.size()) != bqp_key_bits)
      throw DomainError("DispatcherSpec: bqp branch key '" + key +
                        "' has wrong length");
    parse_circuit(body, n_s);
  }
  for (const auto& [key, body] : observable_catalog) {
    if (static_cast<int>(key.size()) != n_q)
      throw DomainError("DispatcherSpec: observable catalog key '" + key +
                        "' has wrong length");
    parse_circuit(body, n_s);
  }
}

DispatcherSpec DispatcherSpec::shallow(int n_s, int n_q) {
  if (n_s < 1) throw DomainError("DispatcherSpec::shallow: need n_s >= 1");
  DispatcherSpec spec;
  spec.n_q = n_q;
  spec.n_s = n_s;
  spec.bqp_key_bits = n_s;
  spec.n = 1 + n_q + 3 * n_s;
  // 3 selector bits per payload qubit, values 0..5; patterns 6 and 7 stay
  // out of the catalog so sampling never produces them.
  std::vector<int> labels(n_s, 0);
  auto rec = [&](auto&& self, int q) -> void {
    if (q == n_s) {
      std::string key;
      key.reserve(3 * n_s);
      for (int l : labels)
        for (int b = 2; b >= 0; --b) key.push_back(((l >> b) & 1) ? '1' : '0');
      spec.probe_catalog[key] = labels;
      return;
    }
    for (int l = 0; l < kStab1Count; ++l) {
      labels[q] = l;
      self(self, q + 1);
    }
  };
  rec(rec, 0);
  return spec;
}

DispatcherInput split_dispatcher_input(const DispatcherSpec& spec,
                                       const std::string& x) {
  if (static_cast<int>(x.size()) != spec.n)
    throw DimensionError("dispatcher input has wrong bit count");
  for (char c : x)
    if (c != '0' && c != '1')
      throw ParseError("dispatcher input must be a bitstring");
  DispatcherInput in;
  in.branch_bqp = x[0] == '1';
  in.x_q = x.substr(1, spec.n_q);
  in.x_s = x.substr(1 + spec.n_q);
  return in;
}

std::vector<int> dispatcher_probe_labels(const DispatcherSpec& spec,
                                         const std::string& x_s) {
  auto it = spec.probe_catalog.find(x_s);
  if (it == spec.probe_catalog.end())
    throw DomainError("dispatcher: probe catalog has no entry for x_S='" +
                      x_s + "'");
  return it->second;
}

Circuit dispatcher_rotation(const DispatcherSpec& spec,
                            const std::string& x_q) {
  if (spec.observable_catalog.empty())
    return Circuit(spec.n_s, {Gate::single(GateKind::kRz, 0, 0.0)});
  auto it = spec.observable_catalog.find(x_q);
  if (it == spec.observable_catalog.end())
    throw DomainError("dispatcher: observable catalog has no entry for x_Q='" +
                      x_q + "'");
  return parse_circuit(it->second, spec.n_s);
}

StateVector dispatcher_state(const DispatcherSpec& spec,
                             const std::string& x) {
  spec.validate();
  DispatcherInput in = split_dispatcher_input(spec, x);

  StateVector payload = StateVector::zero(spec.n_s);
  if (!in.branch_bqp) {
    payload = prepare_stabilizer_product(dispatcher_probe_labels(spec, in.x_s));
  } else {
    std::string key = in.x_s.substr(0, spec.bqp_key_bits);
    auto it = spec.bqp_branch.find(key);
    if (it == spec.bqp_branch.end())
      throw DomainError("dispatcher: bqp branch has no entry for x_S key '" +
                        key + "'");
    payload = run_circuit(parse_circuit(it->second, spec.n_s), payload);
  }

  // Assemble |x1> (x) |x_Q> (x) payload with qubit 0 = x1.
  StateVector out = StateVector::zero(spec.state_qubits());
  out.amps.setZero();
  std::int64_t prefix = in.branch_bqp ? 1 : 0;
  for (int b = 0; b < spec.n_q; ++b)
    if (in.x_q[b] == '1') prefix |= std::int64_t(1) << (1 + b);
  const int shift = 1 + spec.n_q;
  for (std::int64_t i = 0; i < payload.amps.size(); ++i)
    out.amps[(i << shift) | prefix] = payload.amps[i];
  return out;
}

Gate haar_single_qubit_gate(int q, Rng& rng) {
  // Euler-angle parametrization of the Haar measure on U(2) up to global
  // phase: theta = asin(sqrt(u)) gives the correct marginal.
  double theta = std::asin(std::sqrt(rng.uniform01()));
  double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
  double b = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const cd i(0, 1);
  Eigen::Matrix2cd u;
  u << std::exp(i * a) * std::cos(theta), std::exp(i * b) * std::sin(theta),
      -std::exp(-i * b) * std::sin(theta), std::exp(-i * a) * std::cos(theta);
  return Gate::custom1(q, u);
}

Circuit random_circuit(int n, int gates, Rng& rng, double cnot_p) {
  if (gates < 1) throw DomainError("random_circuit: need at least one gate");
  std::vector<Gate> gs;
  gs.reserve(gates);
  for (int g = 0; g < gates; ++g) {
    if (n >= 2 && rng.uniform01() < cnot_p) {
      int c = static_cast<int>(rng.below(n));
      int t = static_cast<int>(rng.below(n - 1));
      if (t >= c) ++t;
      gs.push_back(Gate::cnot(c, t));
    } else {
      gs.push_back(haar_single_qubit_gate(static_cast<int>(rng.below(n)), rng));
    }
  }
  return Circuit(n, std::move(gs));
}

}  // namespace obslearn
