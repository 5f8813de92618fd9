#include "obslearn/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "obslearn/clockham.hpp"
#include "obslearn/kitaev.hpp"

namespace obslearn {

namespace {

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch())
      .count();
}

// Rethrows module errors with the experiment phase prepended, keeping the
// concrete type so callers can still map errors to exit codes.
template <class F>
auto run_phase(const char* phase, F&& f) -> decltype(f()) {
  auto tag = [phase](const Error& e) {
    return std::string("[") + phase + "] " + e.what();
  };
  try {
    return f();
  } catch (const ParseError& e) {
    throw ParseError(tag(e));
  } catch (const DomainError& e) {
    throw DomainError(tag(e));
  } catch (const DimensionError& e) {
    throw DimensionError(tag(e));
  } catch (const ResourceError& e) {
    throw ResourceError(tag(e));
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(tag(e));
  } catch (const Error& e) {
    throw Error(tag(e));
  }
}

BasisGeometry geometry_from_string(const std::string& s) {
  if (s == "line") return BasisGeometry::kLine;
  if (s == "all") return BasisGeometry::kAllSubsets;
  throw ParseError("geometry must be \"line\" or \"all\", got \"" + s + "\"");
}

std::string geometry_to_string(BasisGeometry g) {
  return g == BasisGeometry::kLine ? "line" : "all";
}

void check_keys(const json& j, const char* where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object())
    throw ParseError(std::string(where) + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok)
      throw ParseError(std::string(where) + ": unknown key \"" + key + "\"");
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

Eigen::VectorXd seeded_alpha(std::int64_t m, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 0, 0x616c70);  // coefficient stream
  Eigen::VectorXd a(m);
  for (std::int64_t i = 0; i < m; ++i) a[i] = rng.uniform(-1.0, 1.0);
  double l1 = a.lpNorm<1>();
  if (l1 > 0) a /= l1;  // unit coefficient budget by default
  return a;
}

std::string key_bits(std::int64_t value, int bits) {
  std::string s(static_cast<std::size_t>(bits), '0');
  for (int b = 0; b < bits; ++b)
    if ((value >> (bits - 1 - b)) & 1) s[static_cast<std::size_t>(b)] = '1';
  return s;
}

json environment_json() {
  std::ostringstream eigen;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
        << EIGEN_MINOR_VERSION;
  return json{{"version", kVersion},
              {"compiler", __VERSION__},
              {"eigen", eigen.str()}};
}

}  // namespace

std::string seeded_circuit_text(int n, int gates, std::uint64_t seed) {
  if (n < 1) throw DomainError("seeded_circuit_text: need at least one qubit");
  if (gates < 1) throw DomainError("seeded_circuit_text: need at least one gate");
  Rng rng = Rng::stream(seed, 0, 0x637274);
  static const char* singles[] = {"H", "S", "T", "X", "RX", "RY", "RZ"};
  std::ostringstream os;
  for (int g = 0; g < gates; ++g) {
    if (n >= 2 && rng.bernoulli(0.3)) {
      int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
      if (b >= a) ++b;
      os << (rng.bernoulli(0.5) ? "CNOT" : "CZ") << ' ' << a << ' ' << b
         << '\n';
    } else {
      int kind = static_cast<int>(rng.below(7));
      int q = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      os << singles[kind] << ' ' << q;
      if (kind >= 4) {
        char buf[40];
        std::snprintf(buf, sizeof buf, " %.9g",
                      rng.uniform(0.0, 2.0 * std::numbers::pi));
        os << buf;
      }
      os << '\n';
    }
  }
  return os.str();
}

ConceptBundle make_concept(ConceptDesc& d) {
  ConceptBundle out;
  const bool circuit_backed = d.kind == "evolved-hard" ||
                              d.kind == "ground-kitaev" || d.kind == "flipped";
  if (!circuit_backed && d.kind != "unitary-param")
    throw DomainError("unknown concept kind \"" + d.kind +
                      "\" (expected evolved-hard, ground-kitaev, "
                      "unitary-param, or flipped)");

  if (d.kind == "unitary-param") {
    if (d.n_s < 1 || d.n_s > 8)
      throw DomainError("unitary-param: n_s must be in [1,8]");
    DispatcherSpec ds = DispatcherSpec::shallow(d.n_s);
    const std::int64_t keys = std::int64_t(1) << ds.bqp_key_bits;
    for (std::int64_t j = 0; j < keys; ++j) {
      std::uint64_t s =
          Rng::stream(d.branch_seed, static_cast<std::uint64_t>(j), 0x6272)
              .next();
      ds.bqp_branch[key_bits(j, ds.bqp_key_bits)] =
          seeded_circuit_text(d.n_s, d.branch_gates, s);
    }
    ds.validate();
    if (d.base_obs.empty())
      d.base_obs = "Z" + std::string(static_cast<std::size_t>(d.n_s - 1), 'I');
    PauliString base(d.base_obs);
    if (base.n() != d.n_s)
      throw DomainError("unitary-param: base_obs must have one letter per "
                        "payload qubit");
    if (d.alpha.empty()) {
      Eigen::VectorXd a = seeded_alpha(d.n_s, d.alpha_seed);
      d.alpha.assign(a.data(), a.data() + a.size());
    }
    if (static_cast<int>(d.alpha.size()) != d.n_s)
      throw DomainError("unitary-param: alpha needs one entry per payload "
                        "qubit");
    UnitaryParamConcept c;
    c.dispatcher = ds;
    c.w_family = ry_layer_family(d.n_s);
    c.param_count = d.n_s;
    c.alpha = Eigen::Map<const Eigen::VectorXd>(
        d.alpha.data(), static_cast<Eigen::Index>(d.alpha.size()));
    c.base_obs = base;
    auto spec = std::make_shared<const ConceptSpec>(std::move(c));
    out.dispatcher =
        std::make_shared<const DispatcherSpec>(spec->unitary().dispatcher);
    out.dist = InputDistribution::dispatcher_inputs(out.dispatcher);
    out.spec = std::move(spec);
    return out;
  }

  if (d.decider.empty())
    d.decider = seeded_circuit_text(d.decider_qubits, 4, d.alpha_seed);
  Circuit decider = parse_circuit(d.decider, d.decider_qubits);

  if (d.kind == "evolved-hard") {
    if (!d.alpha.empty())
      throw DomainError("evolved-hard fixes its coefficients by construction");
    if (d.tau >= 0.0)
      throw DomainError("evolved-hard pins the evolution time; leave tau "
                        "unset");
    out.spec = std::make_shared<const ConceptSpec>(
        hard_instance(decider, d.locality, d.geometry));
    out.dist = InputDistribution::uniform(out.spec->input_bits());
    return out;
  }

  if (d.kind == "ground-kitaev") {
    if (d.tau >= 0.0)
      throw DomainError("ground-kitaev has no evolution time; leave tau "
                        "unset");
    GroundStateConcept c;
    c.family = [decider](const std::string& x) {
      return build_kitaev(decider, x).total;
    };
    c.work_n = decider.n();
    c.levels = 3 * static_cast<std::int64_t>(decider.size()) + 1;
    c.basis = enumerate_local_paulis(decider.n(), d.locality, d.geometry);
    const std::int64_t m = static_cast<std::int64_t>(c.basis.size());
    if (d.alpha.empty()) {
      Eigen::VectorXd a = seeded_alpha(m, d.alpha_seed);
      d.alpha.assign(a.data(), a.data() + a.size());
    }
    if (static_cast<std::int64_t>(d.alpha.size()) != m)
      throw DomainError("ground-kitaev: alpha needs one entry per basis term "
                        "(" + std::to_string(m) + ")");
    c.alpha = Eigen::Map<const Eigen::VectorXd>(
        d.alpha.data(), static_cast<Eigen::Index>(d.alpha.size()));
    std::ostringstream fp;
    fp << "ground-kitaev(n=" << c.work_n << ",levels=" << c.levels
       << ",m=" << m << ")";
    out.spec =
        std::make_shared<const ConceptSpec>(std::move(c), fp.str());
    out.dist = InputDistribution::uniform(out.spec->input_bits());
    return out;
  }

  // flipped
  if (!d.alpha.empty())
    throw DomainError("flipped: coefficients are the inputs, not part of the "
                      "concept");
  if (d.tau < 0.0) d.tau = std::numbers::pi;
  if (d.x_fixed.empty())
    d.x_fixed = std::string(static_cast<std::size_t>(decider.n()), '0');
  ClockHamiltonian clock = ClockHamiltonian::childs_weighted(decider);
  FlippedConcept c;
  c.x_fixed = d.x_fixed;
  c.h = clock.op();
  c.work_n = decider.n();
  c.levels = clock.steps() + 1;
  c.tau = d.tau;
  c.basis = enumerate_local_paulis(decider.n(), d.locality, d.geometry);
  out.spec = std::make_shared<const ConceptSpec>(std::move(c));
  out.dist = InputDistribution::uniform(decider.n());
  return out;
}

// ---------------------------------------------------------------------------
// config serialization

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  check_keys(j, "config",
             {"schema", "concept", "n_train", "n_test", "noise", "eps2",
              "shots", "feature_shots", "lasso", "shallow", "min_probes",
              "ridge", "eps", "delta", "repetitions", "min_pass", "seed",
              "rep_offset", "threads", "report_path"});
  ExperimentConfig cfg;
  if (j.contains("concept")) {
    const json& c = j.at("concept");
    check_keys(c, "concept",
               {"kind", "decider", "qubits", "locality", "geometry", "tau",
                "n_s", "base_obs", "branch_seed", "branch_gates", "alpha",
                "alpha_seed", "x_fixed"});
    ConceptDesc& d = cfg.target;
    d.kind = c.value("kind", d.kind);
    d.decider = c.value("decider", d.decider);
    d.decider_qubits = c.value("qubits", d.decider_qubits);
    d.locality = c.value("locality", d.locality);
    if (c.contains("geometry"))
      d.geometry = geometry_from_string(c.at("geometry").get<std::string>());
    d.tau = c.value("tau", d.tau);
    d.n_s = c.value("n_s", d.n_s);
    d.base_obs = c.value("base_obs", d.base_obs);
    d.branch_seed = c.value("branch_seed", d.branch_seed);
    d.branch_gates = c.value("branch_gates", d.branch_gates);
    if (c.contains("alpha")) d.alpha = c.at("alpha").get<std::vector<double>>();
    d.alpha_seed = c.value("alpha_seed", d.alpha_seed);
    d.x_fixed = c.value("x_fixed", d.x_fixed);
  }
  cfg.n_train = j.value("n_train", cfg.n_train);
  cfg.n_test = j.value("n_test", cfg.n_test);
  cfg.noise = j.value("noise", cfg.noise);
  cfg.eps2 = j.value("eps2", cfg.eps2);
  cfg.shots = j.value("shots", cfg.shots);
  cfg.feature_shots = j.value("feature_shots", cfg.feature_shots);
  if (j.contains("lasso")) {
    const json& l = j.at("lasso");
    check_keys(l, "lasso", {"b", "eps3", "max_iters", "step"});
    cfg.lasso.b = l.value("b", cfg.lasso.b);
    cfg.lasso.eps3 = l.value("eps3", cfg.lasso.eps3);
    cfg.lasso.max_iters = l.value("max_iters", cfg.lasso.max_iters);
    if (l.contains("step")) {
      std::string s = l.at("step").get<std::string>();
      if (s == "fixed")
        cfg.lasso.step = LassoConfig::Step::kFixed;
      else if (s == "backtracking")
        cfg.lasso.step = LassoConfig::Step::kBacktracking;
      else
        throw ParseError("lasso.step must be \"fixed\" or \"backtracking\"");
    }
  }
  if (j.contains("shallow")) {
    const json& s = j.at("shallow");
    check_keys(s, "shallow", {"k_max", "eps", "delta", "threshold",
                              "geometry"});
    cfg.shallow.k_max = s.value("k_max", cfg.shallow.k_max);
    cfg.shallow.eps = s.value("eps", cfg.shallow.eps);
    cfg.shallow.delta = s.value("delta", cfg.shallow.delta);
    cfg.shallow.threshold = s.value("threshold", cfg.shallow.threshold);
    if (s.contains("geometry"))
      cfg.shallow.geometry =
          geometry_from_string(s.at("geometry").get<std::string>());
  }
  cfg.min_probes = j.value("min_probes", cfg.min_probes);
  cfg.ridge = j.value("ridge", cfg.ridge);
  cfg.eps = j.value("eps", cfg.eps);
  cfg.delta = j.value("delta", cfg.delta);
  cfg.repetitions = j.value("repetitions", cfg.repetitions);
  cfg.min_pass = j.value("min_pass", cfg.min_pass);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.rep_offset = j.value("rep_offset", cfg.rep_offset);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.report_path = j.value("report_path", cfg.report_path);
  cfg.validate();
  return cfg;
}

json ExperimentConfig::to_json() const {
  const ConceptDesc& d = target;
  json c{{"kind", d.kind},
         {"decider", d.decider},
         {"qubits", d.decider_qubits},
         {"locality", d.locality},
         {"geometry", geometry_to_string(d.geometry)},
         {"tau", d.tau},
         {"n_s", d.n_s},
         {"base_obs", d.base_obs},
         {"branch_seed", d.branch_seed},
         {"branch_gates", d.branch_gates},
         {"alpha", d.alpha},
         {"alpha_seed", d.alpha_seed},
         {"x_fixed", d.x_fixed}};
  json l{{"b", lasso.b},
         {"eps3", lasso.eps3},
         {"max_iters", lasso.max_iters},
         {"step", lasso.step == LassoConfig::Step::kFixed ? "fixed"
                                                          : "backtracking"}};
  json s{{"k_max", shallow.k_max},
         {"eps", shallow.eps},
         {"delta", shallow.delta},
         {"threshold", shallow.threshold},
         {"geometry", geometry_to_string(shallow.geometry)}};
  return json{{"schema", 1},
              {"concept", c},
              {"n_train", n_train},
              {"n_test", n_test},
              {"noise", noise},
              {"eps2", eps2},
              {"shots", shots},
              {"feature_shots", feature_shots},
              {"lasso", l},
              {"shallow", s},
              {"min_probes", min_probes},
              {"ridge", ridge},
              {"eps", eps},
              {"delta", delta},
              {"repetitions", repetitions},
              {"min_pass", min_pass},
              {"seed", seed},
              {"rep_offset", rep_offset},
              {"threads", threads},
              {"report_path", report_path}};
}

void ExperimentConfig::validate() const {
  if (repetitions < 1) throw DomainError("config: repetitions must be >= 1");
  if (n_train < 0) throw DomainError("config: n_train must be >= 0");
  if (n_test < 1) throw DomainError("config: n_test must be >= 1");
  if (!(eps > 0.0)) throw DomainError("config: eps must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw DomainError("config: delta must lie in (0,1)");
  if (noise != "exact" && noise != "uniform" && noise != "shots")
    throw DomainError("config: noise must be exact, uniform, or shots");
  if (noise == "uniform" && eps2 < 0.0)
    throw DomainError("config: eps2 must be >= 0");
  if (noise == "uniform" && eps2 > eps)
    throw DomainError("config: label noise eps2 exceeds the risk target eps; "
                      "the learning precondition needs eps2 <= eps");
  if (noise == "shots" && shots < 1)
    throw DomainError("config: shots noise needs shots >= 1");
  if (feature_shots < 0) throw DomainError("config: feature_shots must be >= 0");
  if (min_pass < 0 || min_pass > repetitions)
    throw DomainError("config: min_pass must lie in [0, repetitions]");
  if (lasso.b < 0.0) throw DomainError("config: lasso.b must be >= 0");
  if (lasso.eps3 < 0.0) throw DomainError("config: lasso.eps3 must be >= 0");
  if (ridge < 0.0) throw DomainError("config: ridge must be >= 0");
  if (threads < 0) throw DomainError("config: threads must be >= 0");
}

// ---------------------------------------------------------------------------
// experiment

namespace {

struct ResolvedExperiment {
  ExperimentConfig cfg;  // every defaulted knob filled in
  ConceptBundle bundle;
  std::int64_t m = 0;
  double b = 0.0;
  double eps3 = 0.0;
  double risk_target = 0.0;
  std::string risk_rule;
  NoiseModel label_noise;
};

ResolvedExperiment resolve(const ExperimentConfig& in) {
  in.validate();
  ResolvedExperiment r;
  r.cfg = in;
  r.bundle = run_phase("concept", [&] { return make_concept(r.cfg.target); });
  const ConceptSpec& spec = *r.bundle.spec;
  const bool lasso_path = spec.variant() == ConceptSpec::Variant::kEvolved ||
                          spec.variant() == ConceptSpec::Variant::kGroundState;

  if (spec.variant() == ConceptSpec::Variant::kUnitaryParam)
    r.m = static_cast<std::int64_t>(
        enumerate_local_paulis(r.cfg.target.n_s, r.cfg.shallow.k_max,
                               r.cfg.shallow.geometry)
            .size());
  else
    r.m = spec.basis_size();

  if (lasso_path) {
    r.b = r.cfg.lasso.b > 0.0 ? r.cfg.lasso.b : spec.alpha_l1();
    r.eps3 = r.cfg.lasso.eps3 > 0.0 ? r.cfg.lasso.eps3 : 0.4 * r.cfg.eps;
    r.cfg.lasso.b = r.b;
    r.cfg.lasso.eps3 = r.eps3;
    if (r.cfg.n_train == 0)
      r.cfg.n_train = sample_complexity(r.b, r.m, r.cfg.delta, r.eps3);
  } else if (spec.variant() == ConceptSpec::Variant::kUnitaryParam) {
    r.b = spec.alpha_l1();
    r.eps3 = 0.0;
    if (r.cfg.n_train == 0)
      r.cfg.n_train =
          2 * shallow_sample_bound(r.cfg.target.n_s, r.cfg.shallow.k_max,
                                   r.cfg.shallow.eps, r.cfg.shallow.delta);
  } else {  // flipped
    r.b = 0.0;
    r.eps3 = 0.0;
    if (r.cfg.n_train == 0) r.cfg.n_train = 2 * r.m;
  }

  if (r.cfg.noise == "exact") {
    r.label_noise = NoiseModel::exact();
    r.risk_target = r.cfg.eps;
    r.risk_rule = "exact labels: eps";
  } else if (r.cfg.noise == "uniform") {
    r.label_noise = NoiseModel::uniform(r.cfg.eps2);
    r.risk_target = std::pow(0.2 * r.cfg.eps + r.cfg.eps2, 2) + r.eps3;
    r.risk_rule = "noisy labels: (0.2 eps + eps2)^2 + eps3";
  } else {
    r.label_noise = NoiseModel::with_shots(r.cfg.shots);
    double declared =
        spec.alpha_l1() *
        std::min(3.0 / std::sqrt(static_cast<double>(r.cfg.shots)), 2.0);
    r.risk_target = std::pow(0.2 * r.cfg.eps + declared, 2) + r.eps3;
    r.risk_rule = "shot labels: (0.2 eps + eps2_declared)^2 + eps3";
  }
  return r;
}

void rep_seeds(const ExperimentConfig& cfg, int rep, std::uint64_t* train,
               std::uint64_t* test) {
  const std::uint64_t k =
      static_cast<std::uint64_t>(cfg.rep_offset + rep);
  *train = Rng::stream(cfg.seed, k, 0x7472).next();
  *test = Rng::stream(cfg.seed, k, 0x7465).next();
  if (*test == *train) ++*test;  // distinct stream keys, disjoint samples
}

struct ErrorStats {
  double mse = 0.0;
  double se = 0.0;
};

ErrorStats error_stats(const Eigen::VectorXd& sq_errors) {
  ErrorStats s;
  const Eigen::Index n = sq_errors.size();
  if (n == 0) return s;
  s.mse = sq_errors.mean();
  if (n > 1) {
    double var = (sq_errors.array() - s.mse).square().sum() /
                 static_cast<double>(n - 1);
    s.se = std::sqrt(var / static_cast<double>(n));
  }
  return s;
}

RepReport run_rep_lasso(const ResolvedExperiment& r,
                        const ConceptEvaluator& eval, int rep) {
  RepReport out;
  out.rep = rep;
  out.extra = json::object();
  rep_seeds(r.cfg, rep, &out.train_seed, &out.test_seed);
  const std::int64_t n_train = r.cfg.n_train;
  const std::int64_t n_test = r.cfg.n_test;

  double t0 = now_s();
  Dataset train = run_phase("train-data", [&] {
    return gen_dataset(eval, r.bundle.dist, n_train, r.label_noise,
                       out.train_seed);
  });
  Dataset test = run_phase("test-data", [&] {
    return gen_dataset(eval, r.bundle.dist, n_test, NoiseModel::exact(),
                       out.test_seed);
  });
  out.eps2_observed = train.meta.eps2_observed;

  Eigen::MatrixXd phi(n_train, r.m);
  Eigen::VectorXd y(n_train);
  FeatureNoise fnoise = r.cfg.feature_shots > 0
                            ? FeatureNoise::with_shots(r.cfg.feature_shots)
                            : FeatureNoise::exact();
  run_phase("features", [&] {
    parallel_for(n_train, default_threads(), [&](std::int64_t i) {
      Rng rng = Rng::stream(out.train_seed, static_cast<std::uint64_t>(i),
                            0x6665);
      phi.row(i) =
          feature_map(eval, train.samples[static_cast<std::size_t>(i)].x,
                      fnoise, rng)
              .transpose();
      y[i] = train.samples[static_cast<std::size_t>(i)].y;
    });
    return 0;
  });
  out.data_s = now_s() - t0;

  t0 = now_s();
  LassoModel model = run_phase("train", [&] {
    return lasso_train(phi, y, r.cfg.lasso, eval.spec().fingerprint());
  });
  out.train_s = now_s() - t0;

  t0 = now_s();
  Eigen::VectorXd sq(n_test);
  run_phase("evaluate", [&] {
    parallel_for(n_test, default_threads(), [&](std::int64_t i) {
      const Sample& s = test.samples[static_cast<std::size_t>(i)];
      double pred = model.predict(eval.features(s.x));
      sq[i] = (pred - s.y) * (pred - s.y);
    });
    return 0;
  });
  ErrorStats stats = error_stats(sq);
  out.eval_s = now_s() - t0;

  out.train_mse = model.diag.train_mse;
  out.test_mse = stats.mse;
  out.test_se = stats.se;
  out.bound = generalization_bound(model, r.m, n_train, r.cfg.delta);
  out.converged = model.diag.converged;
  out.certified_gap = model.diag.certified_gap;
  out.iterations = model.diag.iterations;
  if (!model.diag.converged)
    out.warnings.push_back("optimizer stopped before the gap certificate");
  out.passed = out.test_mse <= r.risk_target;
  return out;
}

RepReport run_rep_unitary(const ResolvedExperiment& r,
                          const ConceptEvaluator& eval, int rep) {
  RepReport out;
  out.rep = rep;
  out.extra = json::object();
  rep_seeds(r.cfg, rep, &out.train_seed, &out.test_seed);
  const std::int64_t n_train = r.cfg.n_train;
  const std::int64_t n_test = r.cfg.n_test;

  double t0 = now_s();
  Dataset train = run_phase("train-data", [&] {
    return gen_dataset(eval, r.bundle.dist, n_train, r.label_noise,
                       out.train_seed);
  });
  Dataset test = run_phase("test-data", [&] {
    return gen_dataset(eval, r.bundle.dist, n_test, NoiseModel::exact(),
                       out.test_seed);
  });
  out.eps2_observed = train.meta.eps2_observed;
  out.data_s = now_s() - t0;

  t0 = now_s();
  UnitaryLearnConfig ucfg;
  ucfg.shallow = r.cfg.shallow;
  ucfg.min_probes = r.cfg.min_probes;
  UnitaryPredictor predictor = run_phase("train", [&] {
    return unitary_param_learn(train, *r.bundle.dispatcher, ucfg);
  });
  out.train_s = now_s() - t0;

  t0 = now_s();
  Eigen::VectorXd train_sq(n_train);
  run_phase("train-risk", [&] {
    parallel_for(n_train, default_threads(), [&](std::int64_t i) {
      const Sample& s = train.samples[static_cast<std::size_t>(i)];
      double pred = predictor.predict(s.x);
      train_sq[i] = (pred - s.y) * (pred - s.y);
    });
    return 0;
  });
  Eigen::VectorXd sq(n_test);
  run_phase("evaluate", [&] {
    parallel_for(n_test, default_threads(), [&](std::int64_t i) {
      const Sample& s = test.samples[static_cast<std::size_t>(i)];
      double pred = predictor.predict(s.x);
      sq[i] = (pred - s.y) * (pred - s.y);
    });
    return 0;
  });
  ErrorStats stats = error_stats(sq);
  out.eval_s = now_s() - t0;

  std::int64_t train_branch1 = 0;
  for (const Sample& s : train.samples)
    if (!s.x.empty() && s.x[0] == '1') ++train_branch1;
  double branch0_sum = 0.0, branch1_sum = 0.0;
  std::int64_t branch1_n = 0;
  for (std::int64_t i = 0; i < n_test; ++i) {
    if (test.samples[static_cast<std::size_t>(i)].x[0] == '1') {
      branch1_sum += sq[i];
      ++branch1_n;
    } else {
      branch0_sum += sq[i];
    }
  }
  out.extra["train_branch1_fraction"] =
      static_cast<double>(train_branch1) / static_cast<double>(n_train);
  out.extra["test_mse_branch0"] =
      branch1_n == n_test ? 0.0
                          : branch0_sum / static_cast<double>(n_test - branch1_n);
  out.extra["test_mse_branch1"] =
      branch1_n == 0 ? 0.0 : branch1_sum / static_cast<double>(branch1_n);
  out.extra["groups"] = static_cast<std::int64_t>(predictor.groups.size());
  out.extra["identity_group"] = predictor.identity_group.has_value();

  ErrorStats train_stats = error_stats(train_sq);
  out.train_mse = train_stats.mse;
  out.test_mse = stats.mse;
  out.test_se = stats.se;
  out.warnings = predictor.warnings;
  out.passed = out.test_mse <= r.risk_target;
  return out;
}

RepReport run_rep_flipped(const ResolvedExperiment& r,
                          const ConceptEvaluator& eval, int rep) {
  RepReport out;
  out.rep = rep;
  out.extra = json::object();
  rep_seeds(r.cfg, rep, &out.train_seed, &out.test_seed);
  const std::int64_t n_train = r.cfg.n_train;
  const std::int64_t n_test = r.cfg.n_test;

  double t0 = now_s();
  FlippedSampleSet train = run_phase("train-data", [&] {
    return gen_flipped_dataset(eval, n_train, r.label_noise, out.train_seed);
  });
  FlippedSampleSet test = run_phase("test-data", [&] {
    return gen_flipped_dataset(eval, n_test, NoiseModel::exact(),
                               out.test_seed);
  });
  out.data_s = now_s() - t0;

  t0 = now_s();
  FlippedResult fr = run_phase("train", [&] {
    return flipped_solve(train.alphas, train.y, r.cfg.ridge);
  });
  out.train_s = now_s() - t0;

  t0 = now_s();
  Eigen::VectorXd train_res = train.alphas * fr.v - train.y;
  out.train_mse = train_res.squaredNorm() / static_cast<double>(n_train);
  Eigen::VectorXd sq =
      (test.alphas * fr.v - test.y).array().square().matrix();
  ErrorStats stats = error_stats(sq);
  out.eval_s = now_s() - t0;

  out.test_mse = stats.mse;
  out.test_se = stats.se;
  out.extra["rank"] = fr.rank;
  out.extra["condition"] = fr.condition;
  out.extra["min_norm"] = fr.min_norm;
  out.extra["recovery_error_inf"] =
      (fr.v - eval.flipped_v()).lpNorm<Eigen::Infinity>();
  if (fr.min_norm)
    out.warnings.push_back("rank-deficient system solved at minimum norm");
  out.passed = out.test_mse <= r.risk_target;
  return out;
}

}  // namespace

json report_payload(json report) {
  report.erase("timing");
  return report;
}

json ExperimentReport::to_json() const {
  json reps_j = json::array();
  json timing_reps = json::array();
  for (const RepReport& r : reps) {
    reps_j.push_back(json{{"rep", r.rep},
                          {"train_seed", r.train_seed},
                          {"test_seed", r.test_seed},
                          {"train_mse", r.train_mse},
                          {"test_mse", r.test_mse},
                          {"test_se", r.test_se},
                          {"bound", r.bound},
                          {"eps2_observed", r.eps2_observed},
                          {"passed", r.passed},
                          {"converged", r.converged},
                          {"certified_gap", r.certified_gap},
                          {"iterations", r.iterations},
                          {"extra", r.extra},
                          {"warnings", r.warnings}});
    timing_reps.push_back(json{{"data_s", r.data_s},
                               {"train_s", r.train_s},
                               {"eval_s", r.eval_s}});
  }
  return json{{"schema", 1},
              {"config", resolved.to_json()},
              {"concept", concept_fingerprint},
              {"resolved",
               json{{"n_train", resolved.n_train},
                    {"m", m},
                    {"b", b},
                    {"eps3", eps3},
                    {"risk_target", risk_target},
                    {"risk_rule", risk_rule}}},
              {"environment", environment_json()},
              {"reps", reps_j},
              {"aggregate", json{{"passes", passes},
                                 {"required_passes", required_passes},
                                 {"passed", passed},
                                 {"mean_test_mse", mean_test_mse},
                                 {"sd_test_mse", sd_test_mse}}},
              {"timing", json{{"total_s", total_s}, {"reps", timing_reps}}}};
}

ExperimentReport run_experiment(const ExperimentConfig& cfg_in) {
  const double t_start = now_s();
  ResolvedExperiment r = resolve(cfg_in);
  if (r.cfg.threads > 0) set_thread_cap(r.cfg.threads);

  ExperimentReport report;
  report.concept_fingerprint = r.bundle.spec->fingerprint();
  report.m = r.m;
  report.b = r.b;
  report.eps3 = r.eps3;
  report.risk_target = r.risk_target;
  report.risk_rule = r.risk_rule;

  ConceptEvaluator eval(r.bundle.spec);
  for (int k = 0; k < r.cfg.repetitions; ++k) {
    RepReport rep;
    switch (r.bundle.spec->variant()) {
      case ConceptSpec::Variant::kEvolved:
      case ConceptSpec::Variant::kGroundState:
        rep = run_rep_lasso(r, eval, k);
        break;
      case ConceptSpec::Variant::kUnitaryParam:
        rep = run_rep_unitary(r, eval, k);
        break;
      case ConceptSpec::Variant::kFlipped:
        rep = run_rep_flipped(r, eval, k);
        break;
    }
    if (rep.passed) ++report.passes;
    report.reps.push_back(std::move(rep));
  }

  report.required_passes =
      r.cfg.min_pass > 0 ? r.cfg.min_pass : r.cfg.repetitions;
  report.passed = report.passes >= report.required_passes;
  if (!report.reps.empty()) {
    double sum = 0.0;
    for (const RepReport& rep : report.reps) sum += rep.test_mse;
    report.mean_test_mse = sum / static_cast<double>(report.reps.size());
    if (report.reps.size() > 1) {
      double var = 0.0;
      for (const RepReport& rep : report.reps) {
        double d = rep.test_mse - report.mean_test_mse;
        var += d * d;
      }
      report.sd_test_mse =
          std::sqrt(var / static_cast<double>(report.reps.size() - 1));
    }
  }
  report.resolved = r.cfg;
  report.total_s = now_s() - t_start;
  if (!r.cfg.report_path.empty())
    run_phase("persist", [&] {
      write_text_file(r.cfg.report_path, report.to_json().dump(2) + "\n");
      return 0;
    });
  return report;
}

// ---------------------------------------------------------------------------
// sweep

std::vector<SweepAxis> sweep_axes_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("axes: expected a JSON array");
  std::vector<SweepAxis> axes;
  for (const json& a : j) {
    check_keys(a, "axis", {"pointer", "values"});
    SweepAxis axis;
    axis.pointer = a.at("pointer").get<std::string>();
    if (axis.pointer.empty() || axis.pointer[0] != '/')
      throw ParseError("axis pointer must start with '/': " + axis.pointer);
    if (!a.at("values").is_array())
      throw ParseError("axis values must be an array");
    for (const json& v : a.at("values")) axis.values.push_back(v);
    axes.push_back(std::move(axis));
  }
  return axes;
}

SweepResult sweep(const ExperimentConfig& base,
                  const std::vector<SweepAxis>& axes) {
  SweepResult out;
  std::ostringstream csv;
  csv << "cell";
  for (const SweepAxis& a : axes) csv << ',' << a.pointer;
  csv << ",repetitions,n_train,m,risk_target,mean_test_mse,sd_test_mse,"
         "passes,passed\n";
  out.csv = csv.str();

  std::int64_t cells = axes.empty() ? 0 : 1;
  for (const SweepAxis& a : axes) cells *= static_cast<std::int64_t>(a.values.size());
  if (cells == 0) return out;

  const json base_j = base.to_json();
  std::vector<std::size_t> index(axes.size(), 0);
  for (std::int64_t cell = 0; cell < cells; ++cell) {
    json cell_j = base_j;
    json assign = json::object();
    for (std::size_t ax = 0; ax < axes.size(); ++ax) {
      const json& v = axes[ax].values[index[ax]];
      cell_j[json::json_pointer(axes[ax].pointer)] = v;
      assign[axes[ax].pointer] = v;
    }
    ExperimentConfig cell_cfg = run_phase(
        "sweep-config", [&] { return ExperimentConfig::from_json(cell_j); });
    const int reps = cell_cfg.repetitions;
    int passes = 0;
    std::vector<double> mses;
    for (int k = 0; k < reps; ++k) {
      ExperimentConfig single = cell_cfg;
      single.repetitions = 1;
      single.min_pass = 0;
      single.rep_offset = cell_cfg.rep_offset + k;
      single.report_path.clear();
      ExperimentReport rep = run_experiment(single);
      passes += rep.passes;
      mses.push_back(rep.reps.at(0).test_mse);
      json cell_info = assign;
      cell_info["cell"] = cell;
      cell_info["rep"] = k;
      out.cells.push_back(std::move(cell_info));
      out.reports.push_back(std::move(rep));
    }
    double mean = 0.0;
    for (double v : mses) mean += v;
    mean /= static_cast<double>(mses.size());
    double sd = 0.0;
    if (mses.size() > 1) {
      for (double v : mses) sd += (v - mean) * (v - mean);
      sd = std::sqrt(sd / static_cast<double>(mses.size() - 1));
    }
    const int required =
        cell_cfg.min_pass > 0 ? cell_cfg.min_pass : reps;
    const ExperimentReport& last = out.reports.back();
    std::ostringstream row;
    row << cell;
    for (std::size_t ax = 0; ax < axes.size(); ++ax)
      row << ',' << axes[ax].values[index[ax]].dump();
    row << ',' << reps << ',' << last.resolved.n_train << ',' << last.m << ','
        << format_double(last.risk_target) << ',' << format_double(mean) << ','
        << format_double(sd) << ',' << passes << ','
        << (passes >= required ? "true" : "false") << '\n';
    out.csv += row.str();

    for (std::size_t ax = axes.size(); ax-- > 0;) {
      if (++index[ax] < axes[ax].values.size()) break;
      index[ax] = 0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// verify suite

namespace {

void add_check(VerifySummary& s, std::string module, std::string name,
               double value, double budget, bool passed, std::string detail) {
  s.checks.push_back(VerifyCheck{std::move(module), std::move(name), passed,
                                 value, budget, std::move(detail)});
}

Eigen::VectorXcd random_state(int n, Rng& rng) {
  Eigen::VectorXcd psi(std::int64_t(1) << n);
  for (Eigen::Index i = 0; i < psi.size(); ++i)
    psi[i] = cd(rng.normal(), rng.normal());
  psi.normalize();
  return psi;
}

}  // namespace

json VerifySummary::to_json() const {
  json checks_j = json::array();
  for (const VerifyCheck& c : checks)
    checks_j.push_back(json{{"module", c.module},
                            {"name", c.name},
                            {"passed", c.passed},
                            {"value", c.value},
                            {"budget", c.budget},
                            {"detail", c.detail}});
  return json{{"schema", 1},
              {"passed", passed},
              {"checks", checks_j},
              {"timing", json{{"total_s", total_s}}}};
}

VerifySummary verify_suite() {
  const double t0 = now_s();
  VerifySummary s;

  {  // clock transfer at t = pi
    double min_fid = 1.0;
    for (int i = 0; i < 10; ++i) {
      Rng rng = Rng::stream(11, static_cast<std::uint64_t>(i), 0x7666);
      int n = 1 + static_cast<int>(rng.below(2));
      int k = 1 + static_cast<int>(rng.below(4));
      Circuit c = random_circuit(n, k, rng);
      Eigen::VectorXcd psi = random_state(n, rng);
      TransferReport tr = verify_perfect_transfer(c, psi, 1e-9);
      min_fid = std::min(min_fid, tr.fidelity);
    }
    add_check(s, "clockham", "transfer_fidelity", min_fid, 1.0 - 1e-9,
              min_fid >= 1.0 - 1e-9,
              "min fidelity over 10 random circuits, t = pi");
  }

  {  // unary embedding reproduces the abstract operator
    Rng rng = Rng::stream(12, 0, 0x7666);
    Circuit c = random_circuit(2, 3, rng);
    ClockHamiltonian h = ClockHamiltonian::childs_weighted(c);
    UnaryEmbedding ue = unary_embedding(h);
    Eigen::MatrixXcd dense = ue.op.to_dense();
    Eigen::MatrixXcd restricted =
        Eigen::MatrixXcd(ue.isometry).adjoint() * dense *
        Eigen::MatrixXcd(ue.isometry);
    double diff = (restricted - h.op().to_dense()).cwiseAbs().maxCoeff();
    add_check(s, "clockham", "unary_equivalence", diff, 1e-8, diff <= 1e-8,
              "max entry difference on the legal subspace");
  }

  {  // history state annihilated term by term
    Rng rng = Rng::stream(13, 0, 0x7666);
    Circuit c = random_circuit(2, 2, rng);
    KitaevHamiltonian kh = build_kitaev(c, "01");
    Eigen::VectorXcd hist = history_state(c, "01");
    double worst = kh.h_init.apply(hist).norm();
    for (const SparseHermitian& term : kh.h_prop)
      worst = std::max(worst, term.apply(hist).norm());
    GroundReport gr = verify_ground(kh, 1e-9);
    bool ok = worst <= 1e-9 && gr.passed && gr.gap > 0.0;
    add_check(s, "kitaev", "history_ground", std::max(worst, gr.energy), 1e-9,
              ok, "term annihilation, solver minimum, positive gap");
  }

  {  // estimator unbiasedness: exact recovery from the full product basis
    std::vector<ShallowProbe> probes;
    std::vector<int> labels(2, 0);
    PauliString target_a("XX");
    PauliString target_b("ZI");
    for (int a = 0; a < kStab1Count; ++a)
      for (int b = 0; b < kStab1Count; ++b) {
        ShallowProbe p;
        p.labels = {a, b};
        p.value = 0.7 * stabilizer_product_expectation(p.labels, target_a) +
                  0.3 * stabilizer_product_expectation(p.labels, target_b);
        probes.push_back(std::move(p));
      }
    ShallowLearnConfig cfg;
    cfg.k_max = 2;
    ShallowResult res = shallow_learn(probes, cfg);
    double err = 0.0;
    for (std::size_t i = 0; i < res.observable.basis().size(); ++i) {
      double want = 0.0;
      if (res.observable.basis()[i] == target_a) want = 0.7;
      if (res.observable.basis()[i] == target_b) want = 0.3;
      err = std::max(
          err, std::abs(res.observable.alpha()[static_cast<Eigen::Index>(i)] -
                        want));
    }
    add_check(s, "learners", "estimator_unbiasedness", err, 1e-12,
              err <= 1e-12, "exact recovery over the 36-state product basis");
  }

  {  // optimizer certificate on a random instance
    Rng rng = Rng::stream(14, 0, 0x7666);
    Eigen::MatrixXd phi(12, 3);
    for (Eigen::Index i = 0; i < phi.size(); ++i)
      phi.data()[i] = rng.uniform(-1.0, 1.0);
    Eigen::VectorXd w_true(3);
    w_true << 0.5, -0.3, 0.1;
    Eigen::VectorXd y = phi * w_true;
    LassoConfig cfg;
    cfg.b = 1.0;
    cfg.eps3 = 0.01;
    LassoModel model = lasso_train(phi, y, cfg);
    bool ok = model.diag.converged && model.diag.certified_gap <= cfg.eps3 / 2;
    // spot check: no feasible point beats the certificate margin
    double best = lasso_objective(phi, y, model.w);
    double probe_min = best;
    for (int t = 0; t < 500; ++t) {
      Eigen::VectorXd w(3);
      for (int i = 0; i < 3; ++i) w[i] = rng.uniform(-1.0, 1.0);
      w = project_l1(w, cfg.b);
      probe_min = std::min(probe_min, lasso_objective(phi, y, w));
    }
    ok = ok && best <= probe_min + cfg.eps3 / 2;
    add_check(s, "learners", "lasso_certificate", model.diag.certified_gap,
              cfg.eps3 / 2, ok, "duality gap plus random feasible spot check");
  }

  {  // reproducibility of datasets and report payloads
    ExperimentConfig cfg;
    cfg.target.kind = "evolved-hard";
    cfg.target.decider_qubits = 2;
    cfg.target.locality = 1;
    cfg.n_train = 40;
    cfg.n_test = 50;
    cfg.repetitions = 1;
    cfg.eps = 0.5;
    cfg.seed = 99;
    ExperimentReport a = run_experiment(cfg);
    ExperimentReport b = run_experiment(cfg);
    bool same = report_payload(a.to_json()).dump() ==
                report_payload(b.to_json()).dump();
    std::ostringstream sa, sb;
    ConceptDesc d = cfg.target;
    ConceptBundle bundle = make_concept(d);
    ConceptEvaluator eval(bundle.spec);
    save_dataset(sa,
                 gen_dataset(eval, bundle.dist, 25, NoiseModel::uniform(0.1),
                             7));
    save_dataset(sb,
                 gen_dataset(eval, bundle.dist, 25, NoiseModel::uniform(0.1),
                             7));
    same = same && sa.str() == sb.str();
    add_check(s, "harness", "reproducibility", same ? 0.0 : 1.0, 0.0, same,
              "identical seeds give byte-identical payloads");
  }

  s.passed = true;
  for (const VerifyCheck& c : s.checks) s.passed = s.passed && c.passed;
  s.total_s = now_s() - t0;
  return s;
}

}  // namespace obslearn
