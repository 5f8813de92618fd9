#include <doctest.h>

#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "obslearn/learners.hpp"
#include "obslearn/rng.hpp"

using namespace obslearn;

namespace {

Eigen::MatrixXd random_features(std::int64_t n, std::int64_t m,
                                std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 0, 0x6665);
  Eigen::MatrixXd phi(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) phi(i, j) = rng.uniform(-1.0, 1.0);
  return phi;
}

}  // namespace

TEST_SUITE("learners") {

TEST_CASE("l1 projection") {
  Eigen::VectorXd v(2);
  v << 3.0, 1.0;
  Eigen::VectorXd p = project_l1(v, 2.0);
  CHECK(p[0] == doctest::Approx(2.0));
  CHECK(p[1] == doctest::Approx(0.0));

  Eigen::VectorXd w(2);
  w << 1.0, -1.0;
  Eigen::VectorXd q = project_l1(w, 1.0);
  CHECK(q[0] == doctest::Approx(0.5));
  CHECK(q[1] == doctest::Approx(-0.5));

  Eigen::VectorXd inside(3);
  inside << 0.2, -0.1, 0.05;
  CHECK((project_l1(inside, 1.0) - inside).norm() == 0.0);

  Eigen::VectorXd big(4);
  big << 2.0, -3.0, 0.5, 1.0;
  Eigen::VectorXd once = project_l1(big, 1.7);
  CHECK(once.lpNorm<1>() == doctest::Approx(1.7).epsilon(1e-12));
  CHECK((project_l1(once, 1.7) - once).norm() < 1e-14);
  // Signs never flip.
  for (int i = 0; i < 4; ++i) CHECK(once[i] * big[i] >= 0.0);

  CHECK(project_l1(big, 0.0).norm() == 0.0);
  CHECK_THROWS_AS(project_l1(big, -1.0), DomainError);
}

TEST_CASE("lasso recovers a sparse realizable target") {
  Eigen::MatrixXd phi = random_features(400, 10, 81);
  Eigen::VectorXd w_true = Eigen::VectorXd::Zero(10);
  w_true[2] = 0.5;
  w_true[7] = -0.3;
  Eigen::VectorXd y = phi * w_true;

  LassoConfig cfg;
  cfg.b = 1.0;
  cfg.eps3 = 1e-3;
  LassoModel model = lasso_train(phi, y, cfg, "test-basis");
  CHECK(model.diag.converged);
  CHECK(model.diag.certified_gap <= cfg.eps3 / 2);
  CHECK(model.diag.train_mse <= cfg.eps3);
  CHECK(model.b == doctest::Approx(1.0));
  CHECK(model.basis_fingerprint == "test-basis");
  CHECK(model.w.lpNorm<1>() <= 1.0 + 1e-10);
  CHECK((model.w - w_true).lpNorm<Eigen::Infinity>() < 0.05);
  CHECK(model.predict(phi.row(3)) ==
        doctest::Approx(model.w.dot(phi.row(3))));
  CHECK(lasso_objective(phi, y, model.w) ==
        doctest::Approx(model.diag.train_mse).epsilon(1e-12));

  // The certificate bounds the gap to any feasible point.
  Rng rng = Rng::stream(83, 0, 0x6665);
  double obj_model = lasso_objective(phi, y, model.w);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd cand(10);
    for (int j = 0; j < 10; ++j) cand[j] = rng.uniform(-1.0, 1.0);
    cand = project_l1(cand, cfg.b);
    CHECK(obj_model <= lasso_objective(phi, y, cand) +
                           model.diag.certified_gap + 1e-10);
  }
}

TEST_CASE("lasso edge cases") {
  Eigen::MatrixXd phi = random_features(50, 4, 85);
  Eigen::VectorXd y = phi.col(0);

  LassoConfig zero;
  zero.b = 0.0;
  LassoModel mz = lasso_train(phi, y, zero);
  CHECK(mz.w.norm() == 0.0);
  CHECK(mz.diag.converged);
  CHECK(mz.diag.train_mse == doctest::Approx(y.squaredNorm() / 50));

  LassoConfig strict;
  strict.b = 1.0;
  strict.eps3 = 1e-12;
  strict.max_iters = 2;
  LassoModel cut = lasso_train(phi, y, strict);
  CHECK_FALSE(cut.diag.converged);
  CHECK(cut.diag.iterations <= 2);
  CHECK(cut.diag.certified_gap > strict.eps3 / 2);
  CHECK(cut.w.lpNorm<1>() <= 1.0 + 1e-10);

  Eigen::VectorXd bad(3);
  bad << 1, 2, 3;
  CHECK_THROWS_AS(lasso_train(phi, bad, zero), DimensionError);
}

TEST_CASE("sample complexity formula") {
  // ceil(2 b^4 sqrt(2 ln(2m/delta)) / eps3^2), recomputed independently.
  auto recompute = [](double b, std::int64_t m, double delta, double eps3) {
    long double inner =
        2.0L * std::log(2.0L * static_cast<long double>(m) / delta);
    long double val =
        2.0L * std::pow(static_cast<long double>(b), 4.0L) * std::sqrt(inner) /
        (static_cast<long double>(eps3) * eps3);
    return static_cast<std::int64_t>(std::ceil(val));
  };
  CHECK(sample_complexity(1.0, 4, 0.1, 0.4) == 38);
  CHECK(sample_complexity(1.0, 4, 0.1, 0.4) == recompute(1.0, 4, 0.1, 0.4));
  CHECK(sample_complexity(1.0, 16, 0.1, 0.02) ==
        recompute(1.0, 16, 0.1, 0.02));
  CHECK(sample_complexity(2.0, 8, 0.05, 0.1) == recompute(2.0, 8, 0.05, 0.1));
  CHECK(sample_complexity(2.0, 4, 0.1, 0.4) >
        sample_complexity(1.0, 4, 0.1, 0.4));
  CHECK(sample_complexity(1.0, 4, 0.1, 0.2) >
        sample_complexity(1.0, 4, 0.1, 0.4));
  CHECK_THROWS_AS(sample_complexity(1.0, 4, 0.1, 0.0), DomainError);
}

TEST_CASE("generalization bound formula") {
  // train + 2b(b+2) sqrt(2 ln(2m)/n) + (b+2) sqrt(ln(1/delta)/(2n)).
  double got = generalization_bound(0.0, 1.0, 16, 1000, 0.05);
  double t1 = 2.0 * 1.0 * 3.0 * std::sqrt(2.0 * std::log(32.0) / 1000.0);
  double t2 = 3.0 * std::sqrt(std::log(20.0) / 2000.0);
  CHECK(got == doctest::Approx(t1 + t2).epsilon(1e-12));
  CHECK(got == doctest::Approx(0.6156404).epsilon(1e-5));
  CHECK(generalization_bound(0.1, 1.0, 16, 1000, 0.05) ==
        doctest::Approx(0.1 + t1 + t2).epsilon(1e-12));

  LassoModel m;
  m.w = Eigen::VectorXd::Zero(16);
  m.b = 1.0;
  m.diag.train_mse = 0.1;
  CHECK(generalization_bound(m, 16, 1000, 0.05) ==
        doctest::Approx(0.1 + t1 + t2).epsilon(1e-12));
}

TEST_CASE("stabilizer twirl identity") {
  // (1/6) sum_s <s|P|s><s|Q|s> = delta_PQ / 3 for non-identity P, Q.
  for (char p : {'X', 'Y', 'Z'}) {
    for (char q : {'X', 'Y', 'Z'}) {
      double acc = 0.0;
      for (int l = 0; l < kStab1Count; ++l)
        acc += stab1_letter_expectation(l, p) * stab1_letter_expectation(l, q);
      acc /= 6.0;
      CHECK(acc == doctest::Approx(p == q ? 1.0 / 3.0 : 0.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("shallow estimator is exact on the full probe set") {
  // True observable 0.7 XX + 0.3 ZI over two qubits.
  PauliObservable truth({PauliString("XX"), PauliString("ZI")},
                        [] {
                          Eigen::VectorXd a(2);
                          a << 0.7, 0.3;
                          return a;
                        }());
  std::vector<ShallowProbe> probes;
  for (int l0 = 0; l0 < 6; ++l0)
    for (int l1 = 0; l1 < 6; ++l1) {
      std::vector<int> labels{l0, l1};
      StateVector s = prepare_stabilizer_product(labels);
      probes.push_back({labels, truth.expectation(s.amps)});
    }

  ShallowLearnConfig cfg;
  cfg.k_max = 2;
  cfg.threshold = 0.05;
  ShallowResult res = shallow_learn(probes, cfg);
  CHECK(res.probes_used == 36);
  CHECK(res.candidates == 16);  // all strings on two qubits
  CHECK(res.kept == 2);
  std::map<std::string, double> got;
  for (std::size_t i = 0; i < res.observable.basis().size(); ++i)
    got[res.observable.basis()[i].letters()] =
        res.observable.alpha()[static_cast<Eigen::Index>(i)];
  REQUIRE(got.count("XX") == 1);
  REQUIRE(got.count("ZI") == 1);
  CHECK(got["XX"] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(got["ZI"] == doctest::Approx(0.3).epsilon(1e-12));

  // The identity candidate estimates the probe mean, which vanishes for a
  // traceless target; coefficients below the threshold are dropped.
  ShallowLearnConfig tight = cfg;
  tight.threshold = 0.75;
  ShallowResult trimmed = shallow_learn(probes, tight);
  // Everything below threshold: the zero observable comes back, flagged.
  CHECK(trimmed.kept == 1);
  CHECK(trimmed.observable.basis()[0].is_identity());
  CHECK(trimmed.observable.alpha()[0] == 0.0);
  CHECK_FALSE(trimmed.warnings.empty());

  CHECK_THROWS_AS(shallow_learn({}, cfg), DomainError);
  std::vector<ShallowProbe> ragged{{{0, 1}, 0.5}, {{0}, 0.5}};
  CHECK_THROWS_AS(shallow_learn(ragged, cfg), DimensionError);
}

TEST_CASE("shallow line geometry deduplicates overlapping windows") {
  std::vector<ShallowProbe> probes;
  Rng rng = Rng::stream(87, 0, 0x7374);
  PauliObservable truth({PauliString("IZI")}, Eigen::VectorXd::Ones(1));
  for (int i = 0; i < 200; ++i) {
    std::vector<int> labels(3);
    for (auto& l : labels) l = static_cast<int>(rng.below(6));
    probes.push_back(
        {labels, stabilizer_product_expectation(labels, truth.basis()[0])});
  }
  ShallowLearnConfig cfg;
  cfg.k_max = 2;
  cfg.geometry = BasisGeometry::kLine;
  cfg.threshold = 0.4;
  ShallowResult res = shallow_learn(probes, cfg);
  // 31 line-enumerated strings, 28 distinct.
  CHECK(res.candidates == 28);
  std::set<std::string> names;
  for (const auto& p : res.observable.basis()) names.insert(p.letters());
  CHECK(names.size() == res.observable.basis().size());

  CHECK(shallow_sample_bound(4, 2, 0.1, 0.05) == 57953);
  CHECK(shallow_sample_bound(2, 1, 0.2, 0.1) ==
        static_cast<std::int64_t>(
            std::ceil(9.0 * std::log(2.0 * 4.0 / 0.1) / 0.04)));
}

TEST_CASE("unitary learner is exact on exhaustive probes") {
  UnitaryParamConcept c;
  c.dispatcher = DispatcherSpec::shallow(1);
  c.dispatcher.bqp_branch["0"] = "RZ 0 0.0";
  c.dispatcher.bqp_branch["1"] = "X 0";
  c.w_family = ry_layer_family(1);
  c.param_count = 1;
  c.alpha = Eigen::VectorXd(1);
  c.alpha << 0.3;
  c.base_obs = PauliString("Z");
  DispatcherSpec spec = c.dispatcher;
  ConceptEvaluator eval(
      std::make_shared<const ConceptSpec>(std::move(c), "unitary-exact"));

  Dataset data;
  data.meta.n_bits = 4;
  for (int l = 0; l < 6; ++l) {
    std::string key;
    for (int b = 2; b >= 0; --b) key.push_back(((l >> b) & 1) ? '1' : '0');
    std::string x = "0" + key;
    data.samples.push_back({x, eval.eval(x)});
  }
  data.samples.push_back({"1000", eval.eval("1000")});
  data.meta.count = static_cast<std::int64_t>(data.samples.size());

  UnitaryLearnConfig cfg;
  cfg.shallow.k_max = 1;
  cfg.shallow.threshold = 0.05;
  UnitaryPredictor pred = unitary_param_learn(data, spec, cfg);
  REQUIRE(pred.groups.count("") == 1);
  REQUIRE(pred.identity_group.has_value());
  CHECK(*pred.identity_group == "");
  CHECK(pred.group_counts.at("") == 6);

  // Learned observable is cos(0.3 pi) Z + sin(0.3 pi) X exactly.
  std::map<std::string, double> got;
  const PauliObservable& obs = pred.groups.at("");
  for (std::size_t i = 0; i < obs.basis().size(); ++i)
    got[obs.basis()[i].letters()] =
        obs.alpha()[static_cast<Eigen::Index>(i)];
  CHECK(got["Z"] == doctest::Approx(std::cos(0.3 * M_PI)).epsilon(1e-12));
  CHECK(got["X"] == doctest::Approx(std::sin(0.3 * M_PI)).epsilon(1e-12));

  for (const auto& s : data.samples)
    CHECK(pred.predict(s.x) == doctest::Approx(eval.eval(s.x)).epsilon(1e-10));
  CHECK(pred.predict("1100") ==
        doctest::Approx(eval.eval("1100")).epsilon(1e-10));

  UnitaryPredictor broken = pred;
  broken.identity_group.reset();
  CHECK_THROWS_AS(broken.predict("1000"), DomainError);

  Dataset empty_side;
  empty_side.samples.push_back({"1000", 0.0});
  CHECK_THROWS_AS(unitary_param_learn(empty_side, spec, cfg), DomainError);
}

TEST_CASE("flipped solver handles rank deficiency") {
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd y(3);
  y << 0.2, -0.4, 0.9;
  FlippedResult r = flipped_solve(id, y);
  CHECK(r.rank == 3);
  CHECK_FALSE(r.min_norm);
  CHECK((r.v - y).norm() < 1e-12);
  CHECK(r.residual < 1e-12);

  Eigen::MatrixXd dup(2, 2);
  dup << 1, 0, 1, 0;
  Eigen::VectorXd y2(2);
  y2 << 1, 3;
  FlippedResult r2 = flipped_solve(dup, y2);
  CHECK(r2.rank == 1);
  CHECK(r2.min_norm);
  CHECK(r2.v[0] == doctest::Approx(2.0));
  CHECK(r2.v[1] == doctest::Approx(0.0));

  FlippedResult r3 = flipped_solve(dup, y2, 2.0);
  CHECK(r3.v[0] == doctest::Approx(1.0));
  CHECK(r3.ridge == doctest::Approx(2.0));

  Eigen::VectorXd wrong(3);
  wrong << 1, 2, 3;
  CHECK_THROWS_AS(flipped_solve(dup, wrong), DimensionError);
}

}  // TEST_SUITE
