#include "obslearn/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace obslearn {

Eigen::VectorXd project_l1(const Eigen::VectorXd& v, double b) {
  if (!(b >= 0.0) || !std::isfinite(b))
    throw DomainError("project_l1: radius must be a finite nonnegative value");
  if (v.size() == 0) return v;
  if (b == 0.0) return Eigen::VectorXd::Zero(v.size());
  if (v.lpNorm<1>() <= b) return v;

  // Sort magnitudes descending, find the KKT threshold.
  std::vector<double> u(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) u[i] = std::abs(v[i]);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double acc = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    acc += u[j];
    double cand = (acc - b) / static_cast<double>(j + 1);
    if (u[j] - cand <= 0.0) break;
    theta = cand;
  }
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double mag = std::abs(v[i]) - theta;
    out[i] = mag > 0.0 ? (v[i] > 0.0 ? mag : -mag) : 0.0;
  }
  return out;
}

double lasso_objective(const Eigen::MatrixXd& features,
                       const Eigen::VectorXd& labels,
                       const Eigen::VectorXd& w) {
  if (features.rows() != labels.size() || features.cols() != w.size())
    throw DimensionError("lasso_objective: shape mismatch");
  return (features * w - labels).squaredNorm() /
         static_cast<double>(labels.size());
}

namespace {

void check_training_data(const Eigen::MatrixXd& features,
                         const Eigen::VectorXd& labels) {
  if (features.rows() < 1) throw DomainError("lasso_train: no samples");
  if (features.cols() < 1) throw DomainError("lasso_train: no features");
  if (features.rows() != labels.size())
    throw DimensionError("lasso_train: feature/label count mismatch");
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    if (!std::isfinite(labels[i]))
      throw DomainError("lasso_train: non-finite label at row " +
                        std::to_string(i));
  const double slack = 1.0 + 1e-9;
  for (Eigen::Index r = 0; r < features.rows(); ++r)
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      double v = features(r, c);
      if (!std::isfinite(v) || std::abs(v) > slack)
        throw DomainError("lasso_train: feature out of [-1, 1] at (" +
                          std::to_string(r) + "," + std::to_string(c) + ")");
    }
}

}  // namespace

LassoModel lasso_train(const Eigen::MatrixXd& features,
                       const Eigen::VectorXd& labels, const LassoConfig& cfg,
                       const std::string& basis_fingerprint) {
  check_training_data(features, labels);
  if (!(cfg.b >= 0.0) || !std::isfinite(cfg.b))
    throw DomainError("lasso_train: l1 budget must be >= 0");
  if (!(cfg.eps3 > 0.0)) throw DomainError("lasso_train: eps3 must be > 0");
  if (cfg.max_iters < 1) throw DomainError("lasso_train: max_iters must be >= 1");

  const Eigen::Index m = features.cols();
  const double n = static_cast<double>(features.rows());

  LassoModel model;
  model.b = cfg.b;
  model.basis_fingerprint = basis_fingerprint;

  // Gram form: objective (w'Gw - 2c'w + y'y)/N, gradient 2(Gw - c)/N.
  const Eigen::MatrixXd gram = features.transpose() * features;
  const Eigen::VectorXd corr = features.transpose() * labels;
  const double yy = labels.squaredNorm();
  auto objective = [&](const Eigen::VectorXd& w) {
    return (w.dot(gram * w) - 2.0 * corr.dot(w) + yy) / n;
  };
  auto gradient = [&](const Eigen::VectorXd& w) {
    return Eigen::VectorXd(2.0 / n * (gram * w - corr));
  };
  auto fw_gap = [&](const Eigen::VectorXd& w, const Eigen::VectorXd& g) {
    // max over the ball of <g, w - s> = <g, w> + b ||g||_inf.
    return g.dot(w) + cfg.b * g.lpNorm<Eigen::Infinity>();
  };

  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  if (cfg.b == 0.0) {
    model.w = w;
    model.diag.train_mse = lasso_objective(features, labels, w);
    model.diag.converged = true;
    model.diag.objective_history = {model.diag.train_mse};
    return model;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success)
    throw ConvergenceError("lasso_train: Gram eigendecomposition failed");
  const double lipschitz = 2.0 * std::max(eig.eigenvalues().maxCoeff(), 0.0) / n;
  model.diag.lipschitz = lipschitz;
  if (lipschitz <= 0.0) {
    // All-zero features: every w scores the same; the origin is optimal.
    model.w = w;
    model.diag.train_mse = lasso_objective(features, labels, w);
    model.diag.converged = true;
    model.diag.objective_history = {model.diag.train_mse};
    return model;
  }

  const double base_step =
      cfg.step == LassoConfig::Step::kFixed ? 1.0 / lipschitz : 4.0 / lipschitz;
  model.diag.step_size = base_step;

  double f_cur = objective(w);
  model.diag.objective_history.push_back(f_cur);
  Eigen::VectorXd best_w = w;
  double best_f = f_cur;
  bool converged = false;
  std::int64_t it = 0;

  for (; it < cfg.max_iters; ++it) {
    Eigen::VectorXd g = gradient(w);
    if (fw_gap(w, g) <= cfg.eps3 / 2.0) {
      converged = true;
      break;
    }
    Eigen::VectorXd next;
    if (cfg.step == LassoConfig::Step::kFixed) {
      next = project_l1(w - base_step * g, cfg.b);
    } else {
      double t = base_step;
      for (;;) {
        next = project_l1(w - t * g, cfg.b);
        Eigen::VectorXd d = next - w;
        double quad = f_cur + g.dot(d) + d.squaredNorm() / (2.0 * t);
        if (objective(next) <= quad + 1e-15 || t < 1e-18) break;
        t *= 0.5;
      }
    }
    double move = (next - w).norm();
    w = std::move(next);
    f_cur = objective(w);
    model.diag.objective_history.push_back(f_cur);
    if (f_cur < best_f) {
      best_f = f_cur;
      best_w = w;
    }
    if (cfg.tol_residual > 0.0 && move <= cfg.tol_residual) {
      ++it;
      break;
    }
  }

  if (!converged) {
    // Return the best objective seen and certify whatever gap it has.
    w = best_w;
  }
  Eigen::VectorXd g = gradient(w);
  model.w = w;
  model.diag.iterations = it;
  model.diag.converged = converged || fw_gap(w, g) <= cfg.eps3 / 2.0;
  model.diag.certified_gap = fw_gap(w, g);
  model.diag.train_mse = lasso_objective(features, labels, w);
  return model;
}

std::int64_t sample_complexity(double b, std::int64_t m, double delta,
                               double eps3) {
  if (!(b >= 0.0) || !std::isfinite(b))
    throw DomainError("sample_complexity: b must be >= 0");
  if (m < 1) throw DomainError("sample_complexity: m must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw DomainError("sample_complexity: delta must be in (0, 1)");
  if (!(eps3 > 0.0)) throw DomainError("sample_complexity: eps3 must be > 0");
  long double lb = static_cast<long double>(b);
  long double val = 2.0L * lb * lb * lb * lb *
                    std::sqrt(2.0L * std::log(2.0L * static_cast<long double>(m) /
                                              static_cast<long double>(delta))) /
                    (static_cast<long double>(eps3) * eps3);
  if (val > 4e18L)
    throw ResourceError("sample_complexity: count exceeds a 64-bit budget");
  return static_cast<std::int64_t>(std::ceil(val));
}

double generalization_bound(double train_mse, double b, std::int64_t m,
                            std::int64_t n_samples, double delta) {
  if (!(b >= 0.0)) throw DomainError("generalization_bound: b must be >= 0");
  if (m < 1 || n_samples < 1)
    throw DomainError("generalization_bound: m and N must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw DomainError("generalization_bound: delta must be in (0, 1)");
  const double range = b + 2.0;  // loss slope bound: |h - y| <= b + 2
  const double n = static_cast<double>(n_samples);
  return train_mse +
         2.0 * b * range * std::sqrt(2.0 * std::log(2.0 * double(m)) / n) +
         range * std::sqrt(std::log(1.0 / delta) / (2.0 * n));
}

double generalization_bound(const LassoModel& model, std::int64_t m,
                            std::int64_t n_samples, double delta) {
  return generalization_bound(model.diag.train_mse, model.b, m, n_samples,
                              delta);
}

std::int64_t shallow_sample_bound(int n, int k, double eps, double delta) {
  if (n < 1 || k < 1 || k > n)
    throw DomainError("shallow_sample_bound: need 1 <= k <= n");
  if (!(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0))
    throw DomainError("shallow_sample_bound: eps, delta must be in (0, 1)");
  long double nine_k = std::pow(9.0L, static_cast<long double>(k));
  long double inside = static_cast<long double>(n) *
                       std::pow(4.0L, static_cast<long double>(k)) /
                       static_cast<long double>(delta);
  long double val = nine_k * std::log(inside) /
                    (static_cast<long double>(eps) * eps);
  if (val > 4e18L)
    throw ResourceError("shallow_sample_bound: count exceeds a 64-bit budget");
  return static_cast<std::int64_t>(std::ceil(val));
}

ShallowResult shallow_learn(const std::vector<ShallowProbe>& probes,
                            const ShallowLearnConfig& cfg) {
  if (probes.empty()) throw DomainError("shallow_learn: empty probe set");
  const int n = static_cast<int>(probes[0].labels.size());
  if (n < 1) throw DomainError("shallow_learn: probes carry no qubits");
  if (cfg.k_max < 1 || cfg.k_max > n)
    throw DomainError("shallow_learn: need 1 <= k_max <= n");
  if (!(cfg.eps > 0.0 && cfg.eps < 1.0) ||
      !(cfg.delta > 0.0 && cfg.delta < 1.0))
    throw DomainError("shallow_learn: eps, delta must be in (0, 1)");
  if (!(cfg.threshold >= 0.0))
    throw DomainError("shallow_learn: threshold must be >= 0");
  for (const auto& p : probes) {
    if (static_cast<int>(p.labels.size()) != n)
      throw DimensionError("shallow_learn: ragged probe label lists");
    for (int l : p.labels)
      if (l < 0 || l >= kStab1Count)
        throw DomainError("shallow_learn: stabilizer label out of range");
    if (!std::isfinite(p.value))
      throw DomainError("shallow_learn: non-finite probe value");
  }

  ShallowResult out;
  out.probes_used = static_cast<std::int64_t>(probes.size());
  out.recommended_probes = shallow_sample_bound(n, cfg.k_max, cfg.eps,
                                                cfg.delta);

  // Distinct candidates regardless of the requested geometry (line windows
  // repeat cross-window strings, which would double-count operator terms).
  std::vector<PauliString> candidates;
  {
    std::set<std::string> seen;
    for (auto& p : enumerate_local_paulis(n, cfg.k_max, cfg.geometry))
      if (seen.insert(p.letters()).second) candidates.push_back(std::move(p));
  }
  out.candidates = static_cast<std::int64_t>(candidates.size());

  const double scale_n = static_cast<double>(probes.size());
  if (std::pow(9.0, cfg.k_max) > scale_n) {
    std::ostringstream os;
    os << "probe count " << probes.size() << " is below the 9^k_max = "
       << std::pow(9.0, cfg.k_max) << " variance scale; estimates may be "
       << "dominated by noise";
    out.warnings.push_back(os.str());
  }

  Eigen::VectorXd alpha_hat(static_cast<Eigen::Index>(candidates.size()));
  parallel_for(static_cast<std::int64_t>(candidates.size()), default_threads(),
               [&](std::int64_t ci) {
                 const PauliString& q = candidates[static_cast<std::size_t>(ci)];
                 double acc = 0.0;
                 for (const auto& p : probes)
                   acc += p.value *
                          stabilizer_product_expectation(p.labels, q);
                 alpha_hat[static_cast<Eigen::Index>(ci)] =
                     std::pow(3.0, q.weight()) * acc / scale_n;
               });

  std::vector<PauliString> kept_basis;
  std::vector<double> kept_alpha;
  int clamped = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double a = alpha_hat[static_cast<Eigen::Index>(i)];
    if (std::abs(a) < cfg.threshold) continue;
    if (std::abs(a) > 1.0) {
      a = std::clamp(a, -1.0, 1.0);
      ++clamped;
    }
    kept_basis.push_back(candidates[i]);
    kept_alpha.push_back(a);
  }
  if (clamped > 0) {
    std::ostringstream os;
    os << clamped << " coefficient estimate(s) exceeded [-1, 1] and were "
       << "clamped";
    out.warnings.push_back(os.str());
  }
  if (kept_basis.empty()) {
    out.warnings.push_back("all coefficients fell below the threshold; "
                           "returning the zero observable");
    kept_basis.emplace_back(std::string(static_cast<std::size_t>(n), 'I'));
    kept_alpha.push_back(0.0);
  }
  out.kept = static_cast<std::int64_t>(kept_basis.size());
  Eigen::VectorXd coeffs = Eigen::Map<Eigen::VectorXd>(
      kept_alpha.data(), static_cast<Eigen::Index>(kept_alpha.size()));
  out.observable = PauliObservable(std::move(kept_basis), coeffs);
  return out;
}

namespace {

Eigen::MatrixXcd circuit_unitary(const Circuit& c) {
  const std::int64_t dim = std::int64_t(1) << c.n();
  Eigen::MatrixXcd u(dim, dim);
  for (std::int64_t col = 0; col < dim; ++col) {
    StateVector s;
    s.n = c.n();
    s.amps = Eigen::VectorXcd::Zero(dim);
    s.amps[col] = 1.0;
    for (const Gate& g : c.gates()) apply_gate(s, g);
    u.col(col) = s.amps;
  }
  return u;
}

bool is_identity_up_to_phase(const Eigen::MatrixXcd& u) {
  if (std::abs(u(0, 0)) < 0.5) return false;
  cd phase = u(0, 0) / std::abs(u(0, 0));
  return (u - phase * Eigen::MatrixXcd::Identity(u.rows(), u.cols()))
             .cwiseAbs()
             .maxCoeff() <= 1e-9;
}

}  // namespace

double UnitaryPredictor::predict(const std::string& x) const {
  DispatcherInput in = split_dispatcher_input(dispatcher, x);
  if (!in.branch_bqp) {
    auto it = groups.find(in.x_q);
    if (it == groups.end())
      throw DomainError("UnitaryPredictor: no learned group for selector '" +
                        in.x_q + "'");
    std::vector<int> labels = dispatcher_probe_labels(dispatcher, in.x_s);
    const PauliObservable& obs = it->second;
    double y = 0.0;
    for (std::size_t i = 0; i < obs.basis().size(); ++i)
      y += obs.alpha()[static_cast<Eigen::Index>(i)] *
           stabilizer_product_expectation(labels, obs.basis()[i]);
    return y;
  }
  if (!identity_group)
    throw DomainError(
        "UnitaryPredictor: circuit-branch inputs need an identity "
        "measurement group, none was learned");
  const PauliObservable& obs = groups.at(*identity_group);
  StateVector psi = dispatcher_state(dispatcher, x);
  const std::string prefix(static_cast<std::size_t>(1 + dispatcher.n_q), 'I');
  double y = 0.0;
  for (std::size_t i = 0; i < obs.basis().size(); ++i) {
    PauliString full(prefix + obs.basis()[i].letters());
    y += obs.alpha()[static_cast<Eigen::Index>(i)] *
         full.expectation(psi.amps);
  }
  return y;
}

UnitaryPredictor unitary_param_learn(const Dataset& data,
                                     const DispatcherSpec& spec,
                                     const UnitaryLearnConfig& cfg) {
  spec.validate();
  if (cfg.min_probes < 1)
    throw DomainError("unitary_param_learn: min_probes must be >= 1");
  if (cfg.shallow.k_max > spec.n_s)
    throw DomainError("unitary_param_learn: k_max exceeds the payload size");

  std::map<std::string, std::vector<ShallowProbe>> by_group;
  std::int64_t probe_samples = 0;
  for (const auto& s : data.samples) {
    DispatcherInput in = split_dispatcher_input(spec, s.x);
    if (in.branch_bqp) continue;
    ++probe_samples;
    by_group[in.x_q].push_back(
        {dispatcher_probe_labels(spec, in.x_s), s.y});
  }
  if (probe_samples < cfg.min_probes)
    throw DomainError("unitary_param_learn: insufficient probe samples: " +
                      std::to_string(probe_samples) + " with x1=0, need " +
                      std::to_string(cfg.min_probes));

  UnitaryPredictor out;
  out.dispatcher = spec;
  for (auto& [x_q, probes] : by_group) {
    ShallowResult res = shallow_learn(probes, cfg.shallow);
    for (const auto& w : res.warnings)
      out.warnings.push_back("group '" + x_q + "': " + w);
    out.group_counts[x_q] = res.probes_used;
    out.groups.emplace(x_q, std::move(res.observable));
    if (!out.identity_group &&
        is_identity_up_to_phase(circuit_unitary(dispatcher_rotation(spec, x_q))))
      out.identity_group = x_q;
  }
  if (!out.identity_group)
    out.warnings.push_back(
        "no identity measurement group found; circuit-branch inputs cannot "
        "be predicted");
  return out;
}

FlippedResult flipped_solve(const Eigen::MatrixXd& alphas,
                            const Eigen::VectorXd& y, double ridge) {
  if (alphas.rows() < 1 || alphas.cols() < 1)
    throw DomainError("flipped_solve: empty system");
  if (alphas.rows() != y.size())
    throw DimensionError("flipped_solve: row/label count mismatch");
  if (!(ridge >= 0.0) || !std::isfinite(ridge))
    throw DomainError("flipped_solve: ridge must be >= 0");
  if (!alphas.allFinite() || !y.allFinite())
    throw DomainError("flipped_solve: non-finite entries");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(alphas,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sig = svd.singularValues();
  const double cutoff =
      sig.size() > 0
          ? sig[0] * std::numeric_limits<double>::epsilon() *
                static_cast<double>(std::max(alphas.rows(), alphas.cols()))
          : 0.0;

  FlippedResult out;
  out.ridge = ridge;
  int rank = 0;
  for (Eigen::Index i = 0; i < sig.size(); ++i)
    if (sig[i] > cutoff) ++rank;
  out.rank = rank;
  out.condition = rank > 0 ? sig[0] / sig[rank - 1] : 0.0;

  Eigen::VectorXd uty = svd.matrixU().transpose() * y;
  Eigen::VectorXd scaled = Eigen::VectorXd::Zero(sig.size());
  if (ridge > 0.0) {
    for (Eigen::Index i = 0; i < sig.size(); ++i)
      scaled[i] = sig[i] / (sig[i] * sig[i] + ridge) * uty[i];
  } else {
    for (Eigen::Index i = 0; i < rank; ++i) scaled[i] = uty[i] / sig[i];
    out.min_norm = rank < alphas.cols();
  }
  out.v = svd.matrixV() * scaled;
  out.residual = (alphas * out.v - y).norm();
  return out;
}

}  // namespace obslearn
