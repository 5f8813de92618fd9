#include "obslearn/concepts.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "obslearn/clockham.hpp"

namespace obslearn {

namespace {

void check_bits(const std::string& x, int n, const std::string& where) {
  if (static_cast<int>(x.size()) != n)
    throw DimensionError(where + ": input has " + std::to_string(x.size()) +
                         " bits, expected " + std::to_string(n));
  for (char b : x)
    if (b != '0' && b != '1')
      throw ParseError(where + ": input must be a bitstring over {0,1}");
}

void check_alpha(const Eigen::VectorXd& alpha, std::size_t m,
                 const std::string& where) {
  if (static_cast<std::size_t>(alpha.size()) != m)
    throw DimensionError(where + ": coefficient count does not match basis");
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (!std::isfinite(alpha[i]) || std::abs(alpha[i]) > 1.0)
      throw DomainError(where + ": coefficients must lie in [-1, 1]");
  }
}

void check_basis(const std::vector<PauliString>& basis, int work_n,
                 const std::string& where) {
  if (basis.empty()) throw DomainError(where + ": empty Pauli basis");
  for (const auto& p : basis)
    if (p.n() != work_n)
      throw DimensionError(where + ": basis string length does not match " +
                           "the work register");
}

void check_hybrid(const SparseHermitian& h, int work_n, std::int64_t levels,
                  const std::string& where) {
  if (work_n < 1) throw DomainError(where + ": need at least one work qubit");
  if (levels < 1) throw DomainError(where + ": need at least one clock level");
  if (h.dim() != (std::int64_t(1) << work_n) * levels)
    throw DimensionError(where + ": operator dimension is not 2^n * levels");
}

// Applies the inverse of a payload-register circuit, with the payload
// starting at qubit `offset` of psi.
void unapply_on_payload(StateVector& psi, const Circuit& c, int offset) {
  Circuit inv = c.inverse();
  for (Gate g : inv.gates()) {
    g.q0 += offset;
    if (g.q1 >= 0) g.q1 += offset;
    apply_gate(psi, g);
  }
}

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

template <typename V>
std::string key_at(const std::map<std::string, V>& m, std::uint64_t i) {
  auto it = m.begin();
  std::advance(it, static_cast<std::ptrdiff_t>(i));
  return it->first;
}

std::string random_bits(int n, Rng& rng) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int q = 0; q < n; ++q)
    if (rng.bernoulli(0.5)) s[static_cast<std::size_t>(q)] = '1';
  return s;
}

}  // namespace

double hybrid_pauli_expectation(const Eigen::VectorXcd& psi, int work_n,
                                std::int64_t levels, const PauliString& p) {
  if (p.n() != work_n)
    throw DimensionError("hybrid_pauli_expectation: Pauli length mismatch");
  const std::int64_t wdim = std::int64_t(1) << work_n;
  if (psi.size() != wdim * levels)
    throw DimensionError("hybrid_pauli_expectation: state dimension mismatch");
  double total = 0.0;
  for (std::int64_t t = 0; t < levels; ++t) {
    Eigen::VectorXcd blk = psi.segment(t * wdim, wdim);
    total += p.expectation(blk);
  }
  return total;
}

ConceptSpec::ConceptSpec(EvolvedConcept c, std::string fingerprint)
    : variant_(Variant::kEvolved),
      payload_(std::move(c)),
      fingerprint_(std::move(fingerprint)) {
  const auto& e = std::get<EvolvedConcept>(payload_);
  check_hybrid(e.h, e.work_n, e.levels, "EvolvedConcept");
  check_basis(e.basis, e.work_n, "EvolvedConcept");
  check_alpha(e.alpha, e.basis.size(), "EvolvedConcept");
  if (!std::isfinite(e.tau)) throw DomainError("EvolvedConcept: bad tau");
  if (fingerprint_.empty()) {
    std::ostringstream os;
    os << "evolved(n=" << e.work_n << ",levels=" << e.levels
       << ",m=" << e.basis.size() << ",tau=" << e.tau << ")";
    fingerprint_ = os.str();
  }
}

ConceptSpec::ConceptSpec(GroundStateConcept c, std::string fingerprint)
    : variant_(Variant::kGroundState),
      payload_(std::move(c)),
      fingerprint_(std::move(fingerprint)) {
  const auto& g = std::get<GroundStateConcept>(payload_);
  if (!g.family) throw DomainError("GroundStateConcept: missing family");
  if (g.work_n < 1 || g.levels < 1)
    throw DomainError("GroundStateConcept: bad register shape");
  check_basis(g.basis, g.work_n, "GroundStateConcept");
  check_alpha(g.alpha, g.basis.size(), "GroundStateConcept");
  if (fingerprint_.empty()) {
    std::ostringstream os;
    os << "ground(n=" << g.work_n << ",levels=" << g.levels
       << ",m=" << g.basis.size() << ")";
    fingerprint_ = os.str();
  }
}

ConceptSpec::ConceptSpec(UnitaryParamConcept c, std::string fingerprint)
    : variant_(Variant::kUnitaryParam),
      payload_(std::move(c)),
      fingerprint_(std::move(fingerprint)) {
  const auto& u = std::get<UnitaryParamConcept>(payload_);
  u.dispatcher.validate();
  if (!u.w_family) throw DomainError("UnitaryParamConcept: missing W family");
  if (u.param_count != u.alpha.size())
    throw DimensionError("UnitaryParamConcept: param_count != alpha size");
  for (Eigen::Index i = 0; i < u.alpha.size(); ++i)
    if (!std::isfinite(u.alpha[i]))
      throw DomainError("UnitaryParamConcept: non-finite parameter");
  if (u.base_obs.n() != u.dispatcher.n_s)
    throw DimensionError(
        "UnitaryParamConcept: base observable must act on the payload");
  Circuit w = u.w_family(u.alpha);
  if (w.n() != u.dispatcher.n_s)
    throw DimensionError("UnitaryParamConcept: W must act on the payload");
  if (fingerprint_.empty()) {
    std::ostringstream os;
    os << "unitary(n=" << u.dispatcher.n << ",n_s=" << u.dispatcher.n_s
       << ",params=" << u.param_count << ",obs=" << u.base_obs.letters()
       << ")";
    fingerprint_ = os.str();
  }
}

ConceptSpec::ConceptSpec(FlippedConcept c, std::string fingerprint)
    : variant_(Variant::kFlipped),
      payload_(std::move(c)),
      fingerprint_(std::move(fingerprint)) {
  const auto& f = std::get<FlippedConcept>(payload_);
  check_hybrid(f.h, f.work_n, f.levels, "FlippedConcept");
  check_bits(f.x_fixed, f.work_n, "FlippedConcept");
  check_basis(f.basis, f.work_n, "FlippedConcept");
  if (!std::isfinite(f.tau)) throw DomainError("FlippedConcept: bad tau");
  if (fingerprint_.empty()) {
    std::ostringstream os;
    os << "flipped(n=" << f.work_n << ",levels=" << f.levels
       << ",m=" << f.basis.size() << ",x=" << f.x_fixed << ",tau=" << f.tau
       << ")";
    fingerprint_ = os.str();
  }
}

const EvolvedConcept& ConceptSpec::evolved() const {
  if (variant_ != Variant::kEvolved)
    throw DomainError("ConceptSpec: not an Evolved concept");
  return std::get<EvolvedConcept>(payload_);
}

const GroundStateConcept& ConceptSpec::ground() const {
  if (variant_ != Variant::kGroundState)
    throw DomainError("ConceptSpec: not a GroundState concept");
  return std::get<GroundStateConcept>(payload_);
}

const UnitaryParamConcept& ConceptSpec::unitary() const {
  if (variant_ != Variant::kUnitaryParam)
    throw DomainError("ConceptSpec: not a UnitaryParam concept");
  return std::get<UnitaryParamConcept>(payload_);
}

const FlippedConcept& ConceptSpec::flipped() const {
  if (variant_ != Variant::kFlipped)
    throw DomainError("ConceptSpec: not a Flipped concept");
  return std::get<FlippedConcept>(payload_);
}

int ConceptSpec::input_bits() const {
  switch (variant_) {
    case Variant::kEvolved:
      return evolved().work_n;
    case Variant::kGroundState:
      return ground().work_n;
    case Variant::kUnitaryParam:
      return unitary().dispatcher.n;
    case Variant::kFlipped:
      throw DomainError("ConceptSpec: Flipped concepts take real vectors");
  }
  throw DomainError("ConceptSpec: unknown variant");
}

std::int64_t ConceptSpec::basis_size() const {
  switch (variant_) {
    case Variant::kEvolved:
      return static_cast<std::int64_t>(evolved().basis.size());
    case Variant::kGroundState:
      return static_cast<std::int64_t>(ground().basis.size());
    case Variant::kFlipped:
      return static_cast<std::int64_t>(flipped().basis.size());
    case Variant::kUnitaryParam:
      return 0;
  }
  return 0;
}

double ConceptSpec::alpha_l1() const {
  switch (variant_) {
    case Variant::kEvolved:
      return evolved().alpha.lpNorm<1>();
    case Variant::kGroundState:
      return ground().alpha.lpNorm<1>();
    case Variant::kUnitaryParam:
      return unitary().alpha.lpNorm<1>();
    case Variant::kFlipped:
      return 0.0;
  }
  return 0.0;
}

std::function<Circuit(const Eigen::VectorXd&)> ry_layer_family(int n_s) {
  if (n_s < 1) throw DomainError("ry_layer_family: need n_s >= 1");
  return [n_s](const Eigen::VectorXd& a) {
    if (a.size() != n_s)
      throw DimensionError("ry_layer_family: parameter count mismatch");
    std::vector<Gate> gates;
    gates.reserve(static_cast<std::size_t>(n_s));
    for (int q = 0; q < n_s; ++q)
      gates.push_back(Gate::single(GateKind::kRy, q, std::numbers::pi * a[q]));
    return Circuit(n_s, std::move(gates));
  };
}

ConceptEvaluator::ConceptEvaluator(std::shared_ptr<const ConceptSpec> spec)
    : spec_(std::move(spec)) {
  if (!spec_) throw DomainError("ConceptEvaluator: null spec");
  if (spec_->variant() == ConceptSpec::Variant::kEvolved)
    evolver_ = std::make_shared<Evolver>(spec_->evolved().h);
  else if (spec_->variant() == ConceptSpec::Variant::kFlipped)
    evolver_ = std::make_shared<Evolver>(spec_->flipped().h);
}

const Eigen::VectorXd& ConceptEvaluator::state_features(
    const std::string& x) const {
  check_bits(x, spec_->input_bits(), "concept_eval");
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = feature_cache_.find(x);
    if (it != feature_cache_.end()) return it->second;
  }

  Eigen::VectorXd phi;
  if (spec_->variant() == ConceptSpec::Variant::kEvolved) {
    const auto& e = spec_->evolved();
    const std::int64_t wdim = std::int64_t(1) << e.work_n;
    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(wdim * e.levels);
    full.segment(0, wdim) = StateVector::basis(e.work_n, x).amps;
    Eigen::VectorXcd evolved_state = evolver_->apply(full, e.tau);
    phi.resize(static_cast<Eigen::Index>(e.basis.size()));
    for (std::size_t i = 0; i < e.basis.size(); ++i)
      phi[static_cast<Eigen::Index>(i)] = clamp_unit(hybrid_pauli_expectation(
          evolved_state, e.work_n, e.levels, e.basis[i]));
  } else if (spec_->variant() == ConceptSpec::Variant::kGroundState) {
    const auto& g = spec_->ground();
    SparseHermitian h = g.family(x);
    check_hybrid(h, g.work_n, g.levels, "GroundStateConcept instance");
    GroundResult gr = ground_state(h);
    if (gr.degenerate)
      throw DomainError("concept_eval: degenerate ground state at x=" + x);
    phi.resize(static_cast<Eigen::Index>(g.basis.size()));
    for (std::size_t i = 0; i < g.basis.size(); ++i)
      phi[static_cast<Eigen::Index>(i)] = clamp_unit(hybrid_pauli_expectation(
          gr.state, g.work_n, g.levels, g.basis[i]));
  } else {
    throw DomainError("feature_map: concept variant has no Pauli basis");
  }

  std::lock_guard<std::mutex> lock(mu_);
  return feature_cache_.emplace(x, std::move(phi)).first->second;
}

Eigen::VectorXd ConceptEvaluator::features(const std::string& x) const {
  return state_features(x);
}

double ConceptEvaluator::eval(const std::string& x) const {
  switch (spec_->variant()) {
    case ConceptSpec::Variant::kEvolved:
      return spec_->evolved().alpha.dot(state_features(x));
    case ConceptSpec::Variant::kGroundState:
      return spec_->ground().alpha.dot(state_features(x));
    case ConceptSpec::Variant::kUnitaryParam: {
      const auto& u = spec_->unitary();
      check_bits(x, u.dispatcher.n, "concept_eval");
      StateVector psi = dispatcher_state(u.dispatcher, x);
      DispatcherInput in = split_dispatcher_input(u.dispatcher, x);
      const int offset = 1 + u.dispatcher.n_q;
      unapply_on_payload(psi, u.w_family(u.alpha), offset);
      if (!in.branch_bqp)
        unapply_on_payload(psi, dispatcher_rotation(u.dispatcher, in.x_q),
                           offset);
      std::string prefixed(static_cast<std::size_t>(offset), 'I');
      PauliString obs(prefixed + u.base_obs.letters());
      return clamp_unit(obs.expectation(psi.amps));
    }
    case ConceptSpec::Variant::kFlipped:
      throw DomainError(
          "concept_eval: Flipped concepts take a coefficient vector, not a "
          "bitstring");
  }
  throw DomainError("concept_eval: unknown variant");
}

const Eigen::VectorXd& ConceptEvaluator::flipped_v() const {
  if (spec_->variant() != ConceptSpec::Variant::kFlipped)
    throw DomainError("flipped_v: not a Flipped concept");
  std::lock_guard<std::mutex> lock(mu_);
  if (!flipped_v_) {
    const auto& f = spec_->flipped();
    const std::int64_t wdim = std::int64_t(1) << f.work_n;
    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(wdim * f.levels);
    full.segment(0, wdim) = StateVector::basis(f.work_n, f.x_fixed).amps;
    Eigen::VectorXcd evolved_state = evolver_->apply(full, f.tau);
    Eigen::VectorXd v(static_cast<Eigen::Index>(f.basis.size()));
    for (std::size_t i = 0; i < f.basis.size(); ++i)
      v[static_cast<Eigen::Index>(i)] = clamp_unit(hybrid_pauli_expectation(
          evolved_state, f.work_n, f.levels, f.basis[i]));
    flipped_v_ = std::move(v);
  }
  return *flipped_v_;
}

double ConceptEvaluator::eval_flipped(const Eigen::VectorXd& alpha) const {
  const Eigen::VectorXd& v = flipped_v();
  if (alpha.size() != v.size())
    throw DimensionError("eval_flipped: coefficient count mismatch");
  return alpha.dot(v);
}

double concept_eval(const ConceptSpec& spec, const std::string& x) {
  ConceptEvaluator ev(std::make_shared<const ConceptSpec>(spec));
  return ev.eval(x);
}

InputDistribution InputDistribution::uniform(int n) {
  if (n < 1) throw DomainError("InputDistribution: need n >= 1");
  InputDistribution d;
  d.kind = Kind::kUniform;
  d.n = n;
  return d;
}

InputDistribution InputDistribution::bernoulli(std::vector<double> p) {
  InputDistribution d;
  d.kind = Kind::kBernoulli;
  d.n = static_cast<int>(p.size());
  d.p = std::move(p);
  d.validate();
  return d;
}

InputDistribution InputDistribution::from_table(
    std::map<std::string, double> table) {
  InputDistribution d;
  d.kind = Kind::kTable;
  d.table = std::move(table);
  if (d.table.empty())
    throw DomainError("InputDistribution: empty explicit table");
  d.n = static_cast<int>(d.table.begin()->first.size());
  d.validate();
  return d;
}

InputDistribution InputDistribution::dispatcher_inputs(
    std::shared_ptr<const DispatcherSpec> spec,
    std::map<std::string, double> bqp_law) {
  if (!spec) throw DomainError("InputDistribution: null dispatcher spec");
  InputDistribution d;
  d.kind = Kind::kDispatcher;
  d.n = spec->n;
  d.dispatcher = std::move(spec);
  d.bqp_law = std::move(bqp_law);
  d.validate();
  return d;
}

void InputDistribution::validate() const {
  switch (kind) {
    case Kind::kUniform:
      if (n < 1) throw DomainError("InputDistribution: need n >= 1");
      return;
    case Kind::kBernoulli: {
      if (p.empty()) throw DomainError("InputDistribution: empty Bernoulli");
      for (double v : p)
        if (!(v >= 0.0 && v <= 1.0))
          throw DomainError("InputDistribution: probabilities must be in "
                            "[0, 1]");
      return;
    }
    case Kind::kTable: {
      if (table.empty())
        throw DomainError("InputDistribution: empty explicit table");
      double total = 0.0;
      for (const auto& [x, w] : table) {
        check_bits(x, n, "InputDistribution table");
        if (!(w >= 0.0))
          throw DomainError("InputDistribution: negative probability");
        total += w;
      }
      if (std::abs(total - 1.0) > 1e-9)
        throw DomainError("InputDistribution: table probabilities sum to " +
                          std::to_string(total) + ", expected 1");
      return;
    }
    case Kind::kDispatcher: {
      if (!dispatcher)
        throw DomainError("InputDistribution: null dispatcher spec");
      dispatcher->validate();
      if (!bqp_law.empty()) {
        double total = 0.0;
        for (const auto& [key, w] : bqp_law) {
          check_bits(key, dispatcher->bqp_key_bits, "InputDistribution "
                     "branch law");
          if (dispatcher->bqp_branch.find(key) == dispatcher->bqp_branch.end())
            throw DomainError(
                "InputDistribution: branch law names unknown key " + key);
          if (!(w >= 0.0))
            throw DomainError("InputDistribution: negative probability");
          total += w;
        }
        if (std::abs(total - 1.0) > 1e-9)
          throw DomainError("InputDistribution: branch law sums to " +
                            std::to_string(total) + ", expected 1");
      } else if (dispatcher->bqp_branch.empty()) {
        throw DomainError(
            "InputDistribution: dispatcher has no circuit branches to sample");
      }
      return;
    }
  }
  throw DomainError("InputDistribution: unknown kind");
}

std::string InputDistribution::sample(Rng& rng) const {
  switch (kind) {
    case Kind::kUniform:
      return random_bits(n, rng);
    case Kind::kBernoulli: {
      std::string s(p.size(), '0');
      for (std::size_t q = 0; q < p.size(); ++q)
        if (rng.bernoulli(p[q])) s[q] = '1';
      return s;
    }
    case Kind::kTable: {
      double u = rng.uniform01();
      double acc = 0.0;
      for (const auto& [x, w] : table) {
        acc += w;
        if (u < acc) return x;
      }
      return table.rbegin()->first;  // guard against rounding at u ~ 1
    }
    case Kind::kDispatcher: {
      const DispatcherSpec& d = *dispatcher;
      const bool bqp = rng.bernoulli(0.5);
      std::string x_q;
      std::string x_s;
      if (!bqp) {
        if (d.n_q > 0 && !d.observable_catalog.empty())
          x_q = key_at(d.observable_catalog,
                       rng.below(d.observable_catalog.size()));
        else
          x_q = random_bits(d.n_q, rng);
        x_s = key_at(d.probe_catalog, rng.below(d.probe_catalog.size()));
      } else {
        x_q = random_bits(d.n_q, rng);
        std::string branch;
        if (!bqp_law.empty()) {
          double u = rng.uniform01();
          double acc = 0.0;
          for (const auto& [key, w] : bqp_law) {
            acc += w;
            branch = key;
            if (u < acc) break;
          }
        } else {
          branch = key_at(d.bqp_branch, rng.below(d.bqp_branch.size()));
        }
        x_s = branch + random_bits(d.selector_bits() - d.bqp_key_bits, rng);
      }
      return (bqp ? "1" : "0") + x_q + x_s;
    }
  }
  throw DomainError("InputDistribution: unknown kind");
}

std::string InputDistribution::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::kUniform:
      os << "uniform(n=" << n << ")";
      break;
    case Kind::kBernoulli: {
      os << "bernoulli(";
      for (std::size_t i = 0; i < p.size(); ++i)
        os << (i ? "," : "") << p[i];
      os << ")";
      break;
    }
    case Kind::kTable:
      os << "table(" << table.size() << " entries, n=" << n << ")";
      break;
    case Kind::kDispatcher:
      os << "dispatcher(n=" << n
         << ",law=" << (bqp_law.empty() ? "uniform" : "explicit") << ")";
      break;
  }
  return os.str();
}

NoiseModel NoiseModel::exact() { return NoiseModel{}; }

NoiseModel NoiseModel::uniform(double eps2) {
  if (!(eps2 >= 0.0) || !std::isfinite(eps2))
    throw DomainError("NoiseModel: uniform half-width must be >= 0");
  NoiseModel m;
  m.kind = Kind::kUniform;
  m.eps2 = eps2;
  return m;
}

NoiseModel NoiseModel::with_shots(std::int64_t s) {
  if (s < 1) throw DomainError("NoiseModel: need at least one shot");
  NoiseModel m;
  m.kind = Kind::kShots;
  m.shots = s;
  return m;
}

std::string NoiseModel::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::kExact:
      os << "exact";
      break;
    case Kind::kUniform:
      os << "uniform(" << eps2 << ")";
      break;
    case Kind::kShots:
      os << "shots(" << shots << ")";
      break;
  }
  return os.str();
}

FeatureNoise FeatureNoise::exact() { return FeatureNoise{}; }

FeatureNoise FeatureNoise::with_shots(std::int64_t s) {
  if (s < 1) throw DomainError("FeatureNoise: need at least one shot");
  FeatureNoise f;
  f.kind = Kind::kShots;
  f.shots = s;
  return f;
}

double FeatureNoise::eps1() const {
  if (kind == Kind::kExact) return 0.0;
  return std::min(std::sqrt(9.0 / static_cast<double>(shots)), 2.0);
}

double shot_estimate(double value, std::int64_t shots, Rng& rng) {
  if (shots < 1) throw DomainError("shot_estimate: need at least one shot");
  const double v = clamp_unit(value);
  const double p = 0.5 * (1.0 + v);
  const std::int64_t k = rng.binomial(shots, p);
  return static_cast<double>(2 * k - shots) / static_cast<double>(shots);
}

namespace {

double noisy_label(const ConceptEvaluator& eval, const std::string& x,
                   const NoiseModel& noise, Rng& rng, double* exact_out) {
  const ConceptSpec& spec = eval.spec();
  double exact = eval.eval(x);
  if (exact_out) *exact_out = exact;
  switch (noise.kind) {
    case NoiseModel::Kind::kExact:
      return exact;
    case NoiseModel::Kind::kUniform:
      return exact + rng.uniform(-noise.eps2, noise.eps2);
    case NoiseModel::Kind::kShots: {
      if (spec.variant() == ConceptSpec::Variant::kUnitaryParam)
        return shot_estimate(exact, noise.shots, rng);
      // Term-by-term finite-shot estimation of the Pauli expansion.
      Eigen::VectorXd phi = eval.features(x);
      const Eigen::VectorXd& alpha =
          spec.variant() == ConceptSpec::Variant::kEvolved
              ? spec.evolved().alpha
              : spec.ground().alpha;
      double y = 0.0;
      for (Eigen::Index i = 0; i < phi.size(); ++i) {
        if (alpha[i] == 0.0) continue;
        y += alpha[i] * shot_estimate(phi[i], noise.shots, rng);
      }
      return y;
    }
  }
  throw DomainError("gen_dataset: unknown noise model");
}

double declared_eps2(const ConceptSpec& spec, const NoiseModel& noise) {
  switch (noise.kind) {
    case NoiseModel::Kind::kExact:
      return 0.0;
    case NoiseModel::Kind::kUniform:
      return noise.eps2;
    case NoiseModel::Kind::kShots: {
      double l1 = spec.variant() == ConceptSpec::Variant::kUnitaryParam
                      ? 1.0
                      : spec.alpha_l1();
      // 3-sigma bound per term, capped by the absolute range of a +-1 mean.
      double per_term = std::min(3.0 / std::sqrt(double(noise.shots)), 2.0);
      return l1 * per_term;
    }
  }
  return 0.0;
}

}  // namespace

Dataset gen_dataset(const ConceptEvaluator& eval, const InputDistribution& dist,
                    std::int64_t n, const NoiseModel& label_noise,
                    std::uint64_t seed, bool audit) {
  if (n < 1) throw DomainError("gen_dataset: need at least one sample");
  const ConceptSpec& spec = eval.spec();
  if (dist.n != spec.input_bits())
    throw DimensionError("gen_dataset: distribution bit count " +
                         std::to_string(dist.n) +
                         " does not match the concept input length " +
                         std::to_string(spec.input_bits()));
  dist.validate();

  Dataset out;
  out.samples.resize(static_cast<std::size_t>(n));
  std::vector<double> deviation(static_cast<std::size_t>(n), 0.0);

  // Inputs are drawn sequentially so the stream of x values matches the
  // single-threaded order; labels use per-sample streams.
  {
    Rng xs = Rng::stream(seed, 0, /*salt=*/0xd15a);
    for (std::int64_t i = 0; i < n; ++i)
      out.samples[static_cast<std::size_t>(i)].x = dist.sample(xs);
  }
  parallel_for(n, default_threads(), [&](std::int64_t i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i), /*salt=*/1);
    auto& s = out.samples[static_cast<std::size_t>(i)];
    double exact = 0.0;
    s.y = noisy_label(eval, s.x, label_noise, rng, audit ? &exact : nullptr);
    if (audit) deviation[static_cast<std::size_t>(i)] = std::abs(s.y - exact);
  });

  out.meta.concept_fingerprint = spec.fingerprint();
  out.meta.distribution = dist.describe();
  out.meta.noise = label_noise.describe();
  out.meta.seed = seed;
  out.meta.n_bits = spec.input_bits();
  out.meta.count = n;
  out.meta.eps2_declared = declared_eps2(spec, label_noise);
  if (audit) {
    out.meta.eps2_observed =
        *std::max_element(deviation.begin(), deviation.end());
    // Keep the declared bound honest for the shots model, whose per-run
    // deviation is only probabilistically bounded.
    out.meta.eps2_declared =
        std::max(out.meta.eps2_declared, out.meta.eps2_observed);
  }
  return out;
}

Eigen::VectorXd feature_map(const ConceptEvaluator& eval, const std::string& x,
                            const FeatureNoise& noise, Rng& rng) {
  Eigen::VectorXd phi = eval.features(x);
  if (noise.kind == FeatureNoise::Kind::kExact) return phi;
  for (Eigen::Index i = 0; i < phi.size(); ++i)
    phi[i] = shot_estimate(phi[i], noise.shots, rng);
  return phi;
}

FlippedSampleSet gen_flipped_dataset(const ConceptEvaluator& eval,
                                     std::int64_t n,
                                     const NoiseModel& label_noise,
                                     std::uint64_t seed) {
  if (n < 1) throw DomainError("gen_flipped_dataset: need a sample count");
  const Eigen::VectorXd& v = eval.flipped_v();
  const Eigen::Index m = v.size();
  FlippedSampleSet out;
  out.alphas.resize(n, m);
  out.y.resize(n);
  parallel_for(n, default_threads(), [&](std::int64_t i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i), /*salt=*/2);
    for (Eigen::Index j = 0; j < m; ++j)
      out.alphas(i, j) = rng.uniform(-1.0, 1.0);
    double exact = out.alphas.row(i).dot(v);
    switch (label_noise.kind) {
      case NoiseModel::Kind::kExact:
        out.y[i] = exact;
        break;
      case NoiseModel::Kind::kUniform:
        out.y[i] = exact + rng.uniform(-label_noise.eps2, label_noise.eps2);
        break;
      case NoiseModel::Kind::kShots: {
        double y = 0.0;
        for (Eigen::Index j = 0; j < m; ++j)
          y += out.alphas(i, j) * shot_estimate(v[j], label_noise.shots, rng);
        out.y[i] = y;
        break;
      }
    }
  });
  return out;
}

ConceptSpec hard_instance(const Circuit& decider, int locality,
                          BasisGeometry geometry) {
  if (decider.size() < 1)
    throw DomainError("hard_instance: decider needs at least one gate");
  const int n = decider.n();
  if (locality < 1 || locality > n)
    throw DomainError("hard_instance: locality must be in [1, n]");
  ClockHamiltonian clock = ClockHamiltonian::childs_weighted(decider);

  EvolvedConcept c;
  c.h = clock.op();
  c.work_n = n;
  c.levels = clock.steps() + 1;
  c.tau = std::numbers::pi;
  c.basis = enumerate_local_paulis(n, locality, geometry);

  // Decision readout: Z on work qubit 1 (the string "ZI...I").
  std::string target(static_cast<std::size_t>(n), 'I');
  target[0] = 'Z';
  Eigen::Index hit = -1;
  for (std::size_t i = 0; i < c.basis.size(); ++i) {
    if (c.basis[i].letters() == target) {
      hit = static_cast<Eigen::Index>(i);
      break;
    }
  }
  if (hit < 0)
    throw DomainError("hard_instance: basis does not contain the readout "
                      "term; increase locality");
  c.alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.basis.size()));
  c.alpha[hit] = 1.0;

  std::ostringstream os;
  os << "hard(n=" << n << ",gates=" << decider.size() << ",k=" << locality
     << "," << (geometry == BasisGeometry::kLine ? "line" : "subsets") << ")";
  return ConceptSpec(std::move(c), os.str());
}

}  // namespace obslearn
