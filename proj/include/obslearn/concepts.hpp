#ifndef OBSLEARN_CONCEPTS_HPP
#define OBSLEARN_CONCEPTS_HPP

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "obslearn/circuit.hpp"
#include "obslearn/pauli.hpp"
#include "obslearn/rng.hpp"
#include "obslearn/spectral.hpp"

namespace obslearn {

/// <psi| P (x) I_clock |psi> on a hybrid work-clock state of dimension
/// 2^work_n * levels (clock-major index).
double hybrid_pauli_expectation(const Eigen::VectorXcd& psi, int work_n,
                                std::int64_t levels, const PauliString& p);

/// f(x) = sum_i alpha_i <P_i> on e^{iH tau}|x, clock=0>.
struct EvolvedConcept {
  SparseHermitian h;
  int work_n = 0;
  std::int64_t levels = 1;  // clock levels; 1 for a plain Hamiltonian
  double tau = 0.0;
  std::vector<PauliString> basis;  // on the work register
  Eigen::VectorXd alpha;
};

/// f(x) = sum_i alpha_i <P_i> on the ground state of H(x).
struct GroundStateConcept {
  std::function<SparseHermitian(const std::string&)> family;
  int work_n = 0;
  std::int64_t levels = 1;
  std::vector<PauliString> basis;
  Eigen::VectorXd alpha;
};

/// f(x) = <chi| O_base |chi> with chi = V_A^dag W(alpha)^dag |dispatch(x)>,
/// i.e. the base observable conjugated first by the selector rotation V_A
/// and then by the parametrized shallow layer W(alpha).
struct UnitaryParamConcept {
  DispatcherSpec dispatcher;
  std::function<Circuit(const Eigen::VectorXd&)> w_family;
  int param_count = 0;
  Eigen::VectorXd alpha;
  PauliString base_obs{"I"};  // on the payload register
};

/// Inputs are coefficient vectors; f^x(alpha) = sum_i alpha_i <P_i> on the
/// evolved fixed state.
struct FlippedConcept {
  std::string x_fixed;
  SparseHermitian h;
  int work_n = 0;
  std::int64_t levels = 1;
  double tau = 0.0;
  std::vector<PauliString> basis;
};

class ConceptSpec {
 public:
  explicit ConceptSpec(EvolvedConcept c, std::string fingerprint = "");
  explicit ConceptSpec(GroundStateConcept c, std::string fingerprint = "");
  explicit ConceptSpec(UnitaryParamConcept c, std::string fingerprint = "");
  explicit ConceptSpec(FlippedConcept c, std::string fingerprint = "");

  enum class Variant { kEvolved, kGroundState, kUnitaryParam, kFlipped };
  Variant variant() const { return variant_; }
  const std::string& fingerprint() const { return fingerprint_; }

  const EvolvedConcept& evolved() const;
  const GroundStateConcept& ground() const;
  const UnitaryParamConcept& unitary() const;
  const FlippedConcept& flipped() const;

  /// Input bit count (Flipped concepts take real vectors instead).
  int input_bits() const;
  /// Pauli basis size for feature-mapped variants.
  std::int64_t basis_size() const;
  double alpha_l1() const;

 private:
  Variant variant_;
  std::variant<EvolvedConcept, GroundStateConcept, UnitaryParamConcept,
               FlippedConcept>
      payload_;
  std::string fingerprint_;
};

/// Depth-1 layer of RY(pi * alpha_q) on each payload qubit; W(0) = identity.
std::function<Circuit(const Eigen::VectorXd&)> ry_layer_family(int n_s);

/// Evaluation engine with per-input caching (evolver reuse, ground states,
/// feature vectors). Exact values; noise is applied by the samplers below.
class ConceptEvaluator {
 public:
  explicit ConceptEvaluator(std::shared_ptr<const ConceptSpec> spec);

  const ConceptSpec& spec() const { return *spec_; }

  /// Exact concept value on a bitstring input.
  double eval(const std::string& x) const;
  /// Exact feature vector (Evolved and GroundState variants only).
  Eigen::VectorXd features(const std::string& x) const;
  /// Flipped variant: value for a coefficient-vector input.
  double eval_flipped(const Eigen::VectorXd& alpha) const;
  /// Flipped variant: the fixed expectation vector v with f(alpha)=alpha.v.
  const Eigen::VectorXd& flipped_v() const;

 private:
  const Eigen::VectorXd& state_features(const std::string& x) const;
  std::shared_ptr<const ConceptSpec> spec_;
  std::shared_ptr<Evolver> evolver_;  // Evolved / Flipped
  mutable std::mutex mu_;
  mutable std::map<std::string, Eigen::VectorXd> feature_cache_;
  mutable std::optional<Eigen::VectorXd> flipped_v_;
};

double concept_eval(const ConceptSpec& spec, const std::string& x);

struct InputDistribution {
  enum class Kind { kUniform, kBernoulli, kTable, kDispatcher };
  Kind kind = Kind::kUniform;
  int n = 0;
  std::vector<double> p;                 // Bernoulli one-probabilities
  std::map<std::string, double> table;   // explicit distribution
  std::shared_ptr<const DispatcherSpec> dispatcher;
  std::map<std::string, double> bqp_law; // empty: uniform over branch keys

  static InputDistribution uniform(int n);
  static InputDistribution bernoulli(std::vector<double> p);
  static InputDistribution from_table(std::map<std::string, double> table);
  static InputDistribution dispatcher_inputs(
      std::shared_ptr<const DispatcherSpec> spec,
      std::map<std::string, double> bqp_law = {});

  void validate() const;
  std::string sample(Rng& rng) const;
  std::string describe() const;
};

struct NoiseModel {
  enum class Kind { kExact, kUniform, kShots };
  Kind kind = Kind::kExact;
  double eps2 = 0.0;       // uniform half-width
  std::int64_t shots = 0;  // per-term shot budget

  static NoiseModel exact();
  static NoiseModel uniform(double eps2);
  static NoiseModel with_shots(std::int64_t s);
  std::string describe() const;
};

struct FeatureNoise {
  enum class Kind { kExact, kShots };
  Kind kind = Kind::kExact;
  std::int64_t shots = 0;

  static FeatureNoise exact();
  static FeatureNoise with_shots(std::int64_t s);
  /// Per-entry 3-sigma error bound, clamped to the feature range width.
  double eps1() const;
};

/// Mean of s +-1 outcomes with P(+1) = (1+value)/2.
double shot_estimate(double value, std::int64_t shots, Rng& rng);

struct Sample {
  std::string x;
  double y = 0.0;
};

struct DatasetMeta {
  std::string concept_fingerprint;
  std::string distribution;
  std::string noise;
  double eps2_declared = 0.0;
  double eps2_observed = 0.0;  // audit: max |y - f(x)| actually drawn
  std::uint64_t seed = 0;
  int n_bits = 0;
  std::int64_t count = 0;
};

struct Dataset {
  DatasetMeta meta;
  std::vector<Sample> samples;
};

/// Draws inputs from dist and labels them with the concept value plus the
/// requested label noise. Per-sample RNG streams are derived from
/// (seed, sample index), so output is independent of evaluation order.
Dataset gen_dataset(const ConceptEvaluator& eval, const InputDistribution& dist,
                    std::int64_t n, const NoiseModel& label_noise,
                    std::uint64_t seed, bool audit = true);

/// Feature vector with optional per-entry finite-shot noise.
Eigen::VectorXd feature_map(const ConceptEvaluator& eval, const std::string& x,
                            const FeatureNoise& noise, Rng& rng);

struct FlippedSampleSet {
  Eigen::MatrixXd alphas;  // N x m
  Eigen::VectorXd y;
};

/// Coefficient inputs drawn uniformly from [-1,1]^m.
FlippedSampleSet gen_flipped_dataset(const ConceptEvaluator& eval,
                                     std::int64_t n,
                                     const NoiseModel& label_noise,
                                     std::uint64_t seed);

/// Weighted clock encoding of the decider with tau = pi; basis is the
/// k-local family over the work register and alpha singles out Z on work
/// qubit 1, so f(x) tracks the decider's output sign.
ConceptSpec hard_instance(const Circuit& decider, int locality,
                          BasisGeometry geometry = BasisGeometry::kLine);

}  // namespace obslearn

#endif
