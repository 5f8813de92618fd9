#include <doctest.h>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "obslearn/concepts.hpp"
#include "obslearn/rng.hpp"

using namespace obslearn;

namespace {

Eigen::MatrixXcd random_hermitian(std::int64_t dim, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 0, 0x6865);
  Eigen::MatrixXcd a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j)
      a(i, j) = cd(rng.normal(), rng.normal());
  return 0.5 * (a + a.adjoint());
}

std::shared_ptr<const ConceptSpec> evolved_spec(double tau) {
  EvolvedConcept c;
  c.h = SparseHermitian::from_dense(random_hermitian(4, 61));
  c.work_n = 2;
  c.levels = 1;
  c.tau = tau;
  c.basis = {PauliString("ZI"), PauliString("IX")};
  c.alpha = Eigen::VectorXd(2);
  c.alpha << 0.6, -0.2;
  return std::make_shared<const ConceptSpec>(std::move(c), "evolved-test");
}

}  // namespace

TEST_SUITE("concepts") {

TEST_CASE("hybrid expectation ignores the clock") {
  Rng rng = Rng::stream(63, 0, 0x7374);
  int work_n = 2;
  std::int64_t levels = 3;
  Eigen::VectorXcd psi(4 * levels);
  for (Eigen::Index i = 0; i < psi.size(); ++i)
    psi[i] = cd(rng.normal(), rng.normal());
  psi.normalize();

  PauliString p("ZX");
  double want = 0.0;
  for (std::int64_t t = 0; t < levels; ++t) {
    Eigen::VectorXcd block = psi.segment(t * 4, 4);
    want += std::real(block.dot(p.apply(block)));
  }
  CHECK(hybrid_pauli_expectation(psi, work_n, levels, p) ==
        doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("evolved concept matches the matrix exponential") {
  auto spec = evolved_spec(0.8);
  ConceptEvaluator eval(spec);
  CHECK(spec->input_bits() == 2);
  CHECK(spec->basis_size() == 2);
  CHECK(spec->alpha_l1() == doctest::Approx(0.8));

  Eigen::MatrixXcd u = (cd(0, 1) * 0.8 * spec->evolved().h.to_dense()).exp();
  for (const char* x : {"00", "10", "01", "11"}) {
    std::int64_t idx = (x[0] == '1' ? 1 : 0) | (x[1] == '1' ? 2 : 0);
    Eigen::VectorXcd state = u.col(idx);
    double want = 0.6 * PauliString("ZI").expectation(state) -
                  0.2 * PauliString("IX").expectation(state);
    CHECK(eval.eval(x) == doctest::Approx(want).epsilon(1e-10));
    Eigen::VectorXd phi = eval.features(x);
    REQUIRE(phi.size() == 2);
    CHECK(phi[0] == doctest::Approx(PauliString("ZI").expectation(state))
                        .epsilon(1e-10));
    CHECK(spec->evolved().alpha.dot(phi) ==
          doctest::Approx(eval.eval(x)).epsilon(1e-12));
  }
  CHECK(concept_eval(*spec, "00") == doctest::Approx(eval.eval("00")));
  CHECK_THROWS_AS(eval.eval("0"), DimensionError);
}

TEST_CASE("ground-state concept tracks the family minimum") {
  GroundStateConcept c;
  c.family = [](const std::string& x) {
    std::vector<CooEntry> e;
    if (x == "0") {
      e = {{0, 0, cd(0, 0)}, {1, 1, cd(1, 0)}};
    } else {
      e = {{0, 0, cd(1, 0)}, {1, 1, cd(0, 0)}};
    }
    return SparseHermitian::from_entries(2, e);
  };
  c.work_n = 1;
  c.levels = 1;
  c.basis = {PauliString("Z")};
  c.alpha = Eigen::VectorXd::Ones(1);
  ConceptEvaluator eval(
      std::make_shared<const ConceptSpec>(std::move(c), "ground-test"));
  CHECK(eval.eval("0") == doctest::Approx(1.0));
  CHECK(eval.eval("1") == doctest::Approx(-1.0));
}

TEST_CASE("unitary-parameter concept tilts the base observable") {
  UnitaryParamConcept c;
  c.dispatcher = DispatcherSpec::shallow(1);
  c.dispatcher.bqp_branch["0"] = "RZ 0 0.0";
  c.dispatcher.bqp_branch["1"] = "X 0";
  c.w_family = ry_layer_family(1);
  c.param_count = 1;
  c.alpha = Eigen::VectorXd(1);
  c.alpha << 0.25;
  c.base_obs = PauliString("Z");
  ConceptEvaluator eval(
      std::make_shared<const ConceptSpec>(std::move(c), "unitary-test"));

  // W Z W^dag = cos(pi/4) Z + sin(pi/4) X on the payload qubit.
  double cz = std::cos(M_PI / 4), sx = std::sin(M_PI / 4);
  CHECK(eval.eval("0000") == doctest::Approx(cz).epsilon(1e-12));   // |0>
  CHECK(eval.eval("0001") == doctest::Approx(-cz).epsilon(1e-12));  // |1>
  CHECK(eval.eval("0010") == doctest::Approx(sx).epsilon(1e-12));   // |+>
  CHECK(eval.eval("0011") == doctest::Approx(-sx).epsilon(1e-12));  // |->
  CHECK(eval.eval("1000") == doctest::Approx(cz).epsilon(1e-12));   // branch 0
  CHECK(eval.eval("1100") == doctest::Approx(-cz).epsilon(1e-12));  // branch X

  // W(0) is the identity layer.
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  Circuit w0 = ry_layer_family(1)(zero);
  StateVector s = StateVector::zero(1);
  CHECK((run_circuit(w0, s).amps - s.amps).norm() < 1e-14);
}

TEST_CASE("flipped concept is linear in the coefficients") {
  FlippedConcept c;
  c.x_fixed = "00";
  c.h = SparseHermitian::from_dense(random_hermitian(4, 71));
  c.work_n = 2;
  c.levels = 1;
  c.tau = 0.5;
  c.basis = {PauliString("ZI"), PauliString("XX"), PauliString("IY")};
  ConceptEvaluator eval(
      std::make_shared<const ConceptSpec>(std::move(c), "flipped-test"));

  const Eigen::VectorXd& v = eval.flipped_v();
  REQUIRE(v.size() == 3);
  Eigen::MatrixXcd u =
      (cd(0, 1) * 0.5 * eval.spec().flipped().h.to_dense()).exp();
  Eigen::VectorXcd state = u.col(0);
  CHECK(v[0] == doctest::Approx(PauliString("ZI").expectation(state))
                    .epsilon(1e-10));
  CHECK(v[1] == doctest::Approx(PauliString("XX").expectation(state))
                    .epsilon(1e-10));

  Rng rng = Rng::stream(73, 0, 0x7374);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd a(3);
    for (int i = 0; i < 3; ++i) a[i] = rng.uniform(-1.0, 1.0);
    CHECK(eval.eval_flipped(a) == doctest::Approx(a.dot(v)).epsilon(1e-12));
  }
}

TEST_CASE("input distributions sample their support") {
  Rng rng = Rng::stream(75, 0, 0x7374);

  InputDistribution u = InputDistribution::uniform(3);
  std::map<std::string, int> counts;
  for (int i = 0; i < 800; ++i) ++counts[u.sample(rng)];
  CHECK(counts.size() == 8);
  for (const auto& [k, c] : counts) {
    CHECK(k.size() == 3);
    CHECK(c > 50);
    CHECK(c < 150);
  }

  InputDistribution b = InputDistribution::bernoulli({1.0, 0.0});
  for (int i = 0; i < 10; ++i) CHECK(b.sample(rng) == "10");

  InputDistribution t = InputDistribution::from_table({{"01", 1.0}});
  CHECK(t.sample(rng) == "01");
  CHECK_THROWS_AS(InputDistribution::from_table({}).validate(), DomainError);
  CHECK_THROWS_AS(InputDistribution::from_table({{"0", -1.0}}).validate(),
                  DomainError);
  CHECK_THROWS_AS(InputDistribution::bernoulli({1.5}).validate(), DomainError);

  auto spec = std::make_shared<DispatcherSpec>(DispatcherSpec::shallow(1));
  spec->bqp_branch["0"] = "RZ 0 0.0";
  spec->bqp_branch["1"] = "X 0";
  InputDistribution d = InputDistribution::dispatcher_inputs(spec);
  int ones = 0;
  for (int i = 0; i < 600; ++i) {
    std::string x = d.sample(rng);
    REQUIRE(x.size() == 4);
    if (x[0] == '1') ++ones;
    else CHECK(spec->probe_catalog.count(x.substr(1)) == 1);
  }
  CHECK(ones > 200);
  CHECK(ones < 400);

  InputDistribution forced =
      InputDistribution::dispatcher_inputs(spec, {{"1", 1.0}});
  for (int i = 0; i < 50; ++i) {
    std::string x = forced.sample(rng);
    if (x[0] == '1') CHECK(x[1] == '1');
  }
}

TEST_CASE("shot estimates concentrate") {
  Rng rng = Rng::stream(77, 0, 0x7374);
  double est = shot_estimate(0.3, 1000000, rng);
  CHECK(std::abs(est - 0.3) < 0.01);
  double one = shot_estimate(0.5, 1, rng);
  CHECK(std::abs(std::abs(one) - 1.0) < 1e-15);

  CHECK(FeatureNoise::exact().eps1() == 0.0);
  CHECK(FeatureNoise::with_shots(9).eps1() == doctest::Approx(1.0));
  CHECK(FeatureNoise::with_shots(1).eps1() == doctest::Approx(2.0));
}

TEST_CASE("datasets are deterministic and audited") {
  auto spec = evolved_spec(0.6);
  ConceptEvaluator eval(spec);
  InputDistribution dist = InputDistribution::uniform(2);

  Dataset exact = gen_dataset(eval, dist, 200, NoiseModel::exact(), 42);
  CHECK(exact.samples.size() == 200);
  CHECK(exact.meta.eps2_observed == 0.0);
  for (const auto& s : exact.samples)
    CHECK(s.y == doctest::Approx(eval.eval(s.x)).epsilon(1e-12));

  Dataset again = gen_dataset(eval, dist, 200, NoiseModel::exact(), 42);
  for (std::size_t i = 0; i < 200; ++i) {
    CHECK(exact.samples[i].x == again.samples[i].x);
    CHECK(exact.samples[i].y == again.samples[i].y);
  }
  Dataset other = gen_dataset(eval, dist, 200, NoiseModel::exact(), 43);
  int diff = 0;
  for (std::size_t i = 0; i < 200; ++i)
    if (exact.samples[i].x != other.samples[i].x) ++diff;
  CHECK(diff > 50);

  Dataset noisy = gen_dataset(eval, dist, 300, NoiseModel::uniform(0.1), 42);
  double max_dev = 0.0;
  for (const auto& s : noisy.samples)
    max_dev = std::max(max_dev, std::abs(s.y - eval.eval(s.x)));
  CHECK(max_dev <= 0.1);
  CHECK(max_dev > 0.01);
  CHECK(noisy.meta.eps2_observed == doctest::Approx(max_dev));
  CHECK(noisy.meta.eps2_declared == doctest::Approx(0.1));

  Dataset shots = gen_dataset(eval, dist, 100, NoiseModel::with_shots(400), 7);
  for (const auto& s : shots.samples) {
    CHECK(s.y >= -1.0 - 1e-12);
    CHECK(s.y <= 1.0 + 1e-12);
  }
}

TEST_CASE("flipped datasets stay in the coefficient cube") {
  FlippedConcept c;
  c.x_fixed = "0";
  c.h = SparseHermitian::from_dense(random_hermitian(2, 79));
  c.work_n = 1;
  c.levels = 1;
  c.tau = 1.1;
  c.basis = {PauliString("Z"), PauliString("X")};
  ConceptEvaluator eval(
      std::make_shared<const ConceptSpec>(std::move(c), "flipped-ds"));

  FlippedSampleSet fs = gen_flipped_dataset(eval, 50, NoiseModel::exact(), 11);
  CHECK(fs.alphas.rows() == 50);
  CHECK(fs.alphas.cols() == 2);
  CHECK(fs.alphas.cwiseAbs().maxCoeff() <= 1.0);
  for (int i = 0; i < 50; ++i)
    CHECK(fs.y[i] == doctest::Approx(fs.alphas.row(i).dot(eval.flipped_v()))
                         .epsilon(1e-12));
}

TEST_CASE("hard instance encodes the decision sign") {
  Circuit flip = parse_circuit("X 0", 1);
  ConceptSpec spec = hard_instance(flip, 1);
  CHECK(spec.variant() == ConceptSpec::Variant::kEvolved);
  CHECK(spec.basis_size() == 4);
  CHECK(spec.alpha_l1() == doctest::Approx(1.0));
  ConceptEvaluator eval(std::make_shared<const ConceptSpec>(spec));
  // The weighted walk finishes the computation at tau = pi, so the readout
  // is Z of the flipped bit.
  CHECK(eval.eval("0") == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(eval.eval("1") == doctest::Approx(1.0).epsilon(1e-9));
}

}  // TEST_SUITE
