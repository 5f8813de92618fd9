#ifndef OBSLEARN_HARNESS_HPP
#define OBSLEARN_HARNESS_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "obslearn/concepts.hpp"
#include "obslearn/io.hpp"
#include "obslearn/learners.hpp"

namespace obslearn {

/// What function the experiment learns. Zero-valued knobs resolve to
/// concept-derived defaults; the resolved form is echoed in every report so
/// a rerun from the echoed config reproduces the run byte for byte.
struct ConceptDesc {
  // evolved-hard | ground-kitaev | unitary-param | flipped
  std::string kind = "evolved-hard";

  // Circuit-backed kinds. Empty decider: a seeded circuit is generated from
  // `alpha_seed` and written back into the resolved config.
  std::string decider;
  int decider_qubits = 2;
  int locality = 2;
  BasisGeometry geometry = BasisGeometry::kLine;
  double tau = -1.0;  // < 0: pi

  // unitary-param: dispatcher payload size, parametrized layer, base
  // observable (payload Pauli letters, default Z on the first qubit), and a
  // seeded circuit catalog for the computation branch.
  int n_s = 2;
  std::string base_obs;
  std::uint64_t branch_seed = 1;
  int branch_gates = 3;

  // Concept coefficients where the kind permits them (unitary-param,
  // ground-kitaev); empty draws uniform from [-1,1] with `alpha_seed`.
  std::vector<double> alpha;
  std::uint64_t alpha_seed = 1;

  // flipped: evolved input, defaults to all zeros.
  std::string x_fixed;
};

struct ExperimentConfig {
  ConceptDesc target;

  std::int64_t n_train = 0;  // 0: resolved from the learner's sample bound
  std::int64_t n_test = 2000;

  std::string noise = "exact";  // exact | uniform | shots
  double eps2 = 0.0;            // uniform label-noise half-width
  std::int64_t shots = 0;       // per-term label shot budget
  std::int64_t feature_shots = 0;  // 0: exact training features

  LassoConfig lasso;           // lasso.b = 0: concept l1; eps3 = 0: 0.4 eps
  ShallowLearnConfig shallow;  // unitary-param path
  std::int64_t min_probes = 1;
  double ridge = 0.0;  // flipped path

  double eps = 0.05;   // expected-risk target
  double delta = 0.1;  // confidence budget
  int repetitions = 1;
  int min_pass = 0;  // 0: every repetition must pass
  std::uint64_t seed = 1;
  std::int64_t rep_offset = 0;  // shifts the per-repetition seed schedule
  int threads = 0;              // 0: leave the global default untouched
  std::string report_path;     // empty: do not persist

  static ExperimentConfig from_json(const json& j);
  json to_json() const;
  void validate() const;  // includes the eps2 <= eps noise precondition
};

/// Concept plus the input law it is learned under.
struct ConceptBundle {
  std::shared_ptr<const ConceptSpec> spec;
  std::shared_ptr<const DispatcherSpec> dispatcher;  // unitary-param only
  InputDistribution dist;
};

/// Builds the concept and fills every defaulted field of `desc` in place
/// (generated circuit texts, drawn alpha), so the caller can echo it.
ConceptBundle make_concept(ConceptDesc& desc);

/// One training/evaluation round. Test labels are exact concept values on
/// freshly drawn inputs, so test_mse estimates the expected risk directly.
struct RepReport {
  int rep = 0;
  std::uint64_t train_seed = 0;
  std::uint64_t test_seed = 0;
  double train_mse = 0.0;
  double test_mse = 0.0;
  double test_se = 0.0;  // standard error of the mean squared error
  double bound = 0.0;    // generalization bound (lasso path)
  double eps2_observed = 0.0;
  bool passed = false;
  // learner diagnostics
  bool converged = true;
  double certified_gap = 0.0;
  std::int64_t iterations = 0;
  json extra;  // per-variant details (branch split, recovery error, ...)
  std::vector<std::string> warnings;
  // phase wall clock, seconds; serialized only under the timing subobject
  double data_s = 0.0;
  double train_s = 0.0;
  double eval_s = 0.0;
};

struct ExperimentReport {
  ExperimentConfig resolved;
  std::string concept_fingerprint;
  std::int64_t m = 0;  // basis terms / unknowns
  double b = 0.0;      // resolved l1 budget
  double eps3 = 0.0;   // resolved optimization slack
  double risk_target = 0.0;
  std::string risk_rule;
  std::vector<RepReport> reps;
  int passes = 0;
  int required_passes = 0;
  bool passed = false;
  double mean_test_mse = 0.0;
  double sd_test_mse = 0.0;
  double total_s = 0.0;

  /// Stable payload plus a "timing" subobject holding every volatile field.
  json to_json() const;
};

/// Strips the volatile subobject so reruns can be compared byte for byte.
json report_payload(json report);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// One sweep dimension: a JSON pointer into the config document and the
/// values it takes.
struct SweepAxis {
  std::string pointer;
  std::vector<json> values;
};

std::vector<SweepAxis> sweep_axes_from_json(const json& j);

/// Cartesian product over the axes; each cell runs every repetition as its
/// own single-repetition report (seed schedule identical to one multi-rep
/// run). No declared axes means no grid: empty output.
struct SweepResult {
  std::vector<ExperimentReport> reports;  // one per cell x repetition
  std::vector<json> cells;                // axis assignment per report
  std::string csv;  // per-cell aggregate: mean/sd of test MSE
};

SweepResult sweep(const ExperimentConfig& base,
                  const std::vector<SweepAxis>& axes);

/// Cross-module invariant checks, each with a measured value against an
/// explicit budget.
struct VerifyCheck {
  std::string module;
  std::string name;
  bool passed = false;
  double value = 0.0;
  double budget = 0.0;
  std::string detail;
};

struct VerifySummary {
  std::vector<VerifyCheck> checks;
  bool passed = false;
  double total_s = 0.0;

  json to_json() const;
};

VerifySummary verify_suite();

/// Deterministic circuit in the one-gate-per-line text format (parseable
/// kinds only, so the text round-trips).
std::string seeded_circuit_text(int n, int gates, std::uint64_t seed);

}  // namespace obslearn

#endif
