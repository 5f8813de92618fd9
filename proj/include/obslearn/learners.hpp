#ifndef OBSLEARN_LEARNERS_HPP
#define OBSLEARN_LEARNERS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "obslearn/concepts.hpp"
#include "obslearn/pauli.hpp"

namespace obslearn {

/// Euclidean projection onto the l1 ball of radius b (sort-based exact
/// solve). Idempotent; ||out||_1 <= b + 1e-12.
Eigen::VectorXd project_l1(const Eigen::VectorXd& v, double b);

struct LassoConfig {
  double b = 1.0;      // l1 budget
  double eps3 = 0.01;  // slack target: stop once the gap certificate <= eps3/2
  std::int64_t max_iters = 100000;
  enum class Step { kFixed, kBacktracking };
  Step step = Step::kFixed;
  // Optional extra stop: projected-gradient step shorter than this.
  double tol_residual = 0.0;
};

struct LassoDiagnostics {
  double train_mse = 0.0;
  std::int64_t iterations = 0;
  double certified_gap = 0.0;  // duality gap at the returned iterate
  bool converged = false;      // certificate reached within max_iters
  double lipschitz = 0.0;
  double step_size = 0.0;
  std::vector<double> objective_history;  // objective after each iterate
};

/// Constrained least-squares model h(x) = w . phi(x) with ||w||_1 <= b, so
/// |h| <= b whenever ||phi||_inf <= 1.
struct LassoModel {
  Eigen::VectorXd w;
  double b = 0.0;
  std::string basis_fingerprint;
  LassoDiagnostics diag;

  double predict(const Eigen::VectorXd& phi) const { return w.dot(phi); }
};

/// Projected gradient descent on the l1 ball; terminates when the
/// linear-minimization duality gap <g, w> + b ||g||_inf falls to eps3/2,
/// which certifies the training error is within eps3/2 of the constrained
/// optimum. Non-convergence is reported in diagnostics, never thrown.
LassoModel lasso_train(const Eigen::MatrixXd& features,
                       const Eigen::VectorXd& labels, const LassoConfig& cfg,
                       const std::string& basis_fingerprint = "");

/// (1/N) || Phi w - y ||^2.
double lasso_objective(const Eigen::MatrixXd& features,
                       const Eigen::VectorXd& labels,
                       const Eigen::VectorXd& w);

/// ceil(2 b^4 sqrt(2 ln(2m/delta)) / eps3^2): samples sufficient for the
/// optimization slack target at confidence 1-delta over m basis terms.
std::int64_t sample_complexity(double b, std::int64_t m, double delta,
                               double eps3);

/// Expected-risk upper bound: train_mse
///   + 2 b (b+2) sqrt(2 ln(2m) / n) + (b+2) sqrt(ln(1/delta) / (2n))
/// with feature range 1 and loss range b+2.
double generalization_bound(double train_mse, double b, std::int64_t m,
                            std::int64_t n_samples, double delta);
double generalization_bound(const LassoModel& model, std::int64_t m,
                            std::int64_t n_samples, double delta);

struct ShallowProbe {
  std::vector<int> labels;  // one stabilizer label in [0,6) per qubit
  double value = 0.0;
};

struct ShallowLearnConfig {
  int k_max = 1;
  double eps = 0.1;          // target coefficient error (diagnostics only)
  double delta = 0.05;       // failure probability (diagnostics only)
  double threshold = 0.0;    // drop |alpha_hat| below this
  BasisGeometry geometry = BasisGeometry::kAllSubsets;
};

struct ShallowResult {
  PauliObservable observable;
  std::int64_t probes_used = 0;
  std::int64_t candidates = 0;
  std::int64_t kept = 0;
  std::int64_t recommended_probes = 0;  // sample bound for (eps, delta)
  std::vector<std::string> warnings;
};

/// Probes sufficient for coefficient error eps at confidence 1-delta with
/// support size k over n qubits: ceil(9^k ln(n 4^k / delta) / eps^2).
std::int64_t shallow_sample_bound(int n, int k, double eps, double delta);

/// Correlation estimator over stabilizer-product probes: for each candidate
/// Pauli Q with |supp Q| <= k_max,
///   alpha_hat_Q = 3^{|supp Q|} (1/N) sum_l v_l <psi_l| Q |psi_l>,
/// unbiased because the single-qubit stabilizer twirl gives
/// E[<P><Q>] = delta_PQ / 3 per non-identity qubit. Coefficients below
/// cfg.threshold are dropped.
ShallowResult shallow_learn(const std::vector<ShallowProbe>& probes,
                            const ShallowLearnConfig& cfg);

struct UnitaryLearnConfig {
  ShallowLearnConfig shallow;
  std::int64_t min_probes = 1;  // least acceptable number of x1=0 samples
};

/// Prediction side of the dispatcher concept: one learned observable per
/// measurement-selector group, evaluated on the dispatched state.
struct UnitaryPredictor {
  DispatcherSpec dispatcher;
  std::map<std::string, PauliObservable> groups;  // keyed by x_Q
  std::optional<std::string> identity_group;      // x_Q with V(x_Q) ~ identity
  std::map<std::string, std::int64_t> group_counts;
  std::vector<std::string> warnings;

  /// x1=0: stabilizer-product expectation of the group observable.
  /// x1=1: simulate the branch state, measure the identity group's
  /// observable. Unknown group or missing identity group raises DomainError.
  double predict(const std::string& x) const;
};

/// Splits a dispatcher dataset on x1, converts the x1=0 half to stabilizer
/// probes grouped by x_Q, and runs shallow_learn per group.
UnitaryPredictor unitary_param_learn(const Dataset& data,
                                     const DispatcherSpec& spec,
                                     const UnitaryLearnConfig& cfg);

struct FlippedResult {
  Eigen::VectorXd v;        // estimated expectations, one per basis term
  int rank = 0;
  double condition = 0.0;   // largest / smallest nonzero singular value
  double residual = 0.0;    // ||A v - y||
  bool min_norm = false;    // rank-deficient least squares at ridge = 0
  double ridge = 0.0;
};

/// Least-squares solve of alphas . v = y by SVD; ridge > 0 regularizes,
/// ridge = 0 takes the pseudoinverse (minimum-norm on rank deficiency,
/// flagged in the result).
FlippedResult flipped_solve(const Eigen::MatrixXd& alphas,
                            const Eigen::VectorXd& y, double ridge = 0.0);

}  // namespace obslearn

#endif
