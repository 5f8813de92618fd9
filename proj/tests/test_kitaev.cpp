#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "obslearn/kitaev.hpp"
#include "obslearn/rng.hpp"

using namespace obslearn;

namespace {

// Dense H_init oracle: sum_i |1-x_i><1-x_i|_i (x) |0><0|_clock on the
// hybrid index t*2^N + w.
Eigen::MatrixXcd init_dense(int work_n, int steps, const std::string& x) {
  std::int64_t wdim = std::int64_t(1) << work_n;
  std::int64_t dim = wdim * (steps + 1);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < work_n; ++i) {
    int bad = x[static_cast<std::size_t>(i)] == '0' ? 1 : 0;
    for (std::int64_t w = 0; w < wdim; ++w)
      if (((w >> i) & 1) == bad) m(w, w) += 1.0;
  }
  return m;
}

}  // namespace

TEST_SUITE("kitaev") {

TEST_CASE("shape and clock padding") {
  Circuit c = parse_circuit("X 0", 1);
  KitaevHamiltonian h = build_kitaev(c, "0");
  CHECK(h.work_n == 1);
  CHECK(h.gate_count == 1);
  CHECK(h.padded_steps == 3);
  CHECK(h.padded.size() == 3);
  CHECK(h.dim() == 8);
  CHECK(h.h_prop.size() == 3);
  CHECK(h.h_clock.nonzeros() == 0);
  CHECK(h.total.dim() == 8);

  CHECK_THROWS_AS(build_kitaev(c, "01"), DimensionError);
  CHECK_THROWS_AS(build_kitaev(c, "2"), ParseError);
}

TEST_CASE("history of a bit flip") {
  Circuit c = parse_circuit("X 0", 1);
  Eigen::VectorXcd hist = history_state(c, "0");
  REQUIRE(hist.size() == 8);
  // (1/2)(|0>|t=0> + |1>|t=1> + |1>|t=2> + |1>|t=3>), hybrid index t*2 + w.
  CHECK(std::abs(hist[0] - cd(0.5, 0)) < 1e-14);
  CHECK(std::abs(hist[3] - cd(0.5, 0)) < 1e-14);
  CHECK(std::abs(hist[5] - cd(0.5, 0)) < 1e-14);
  CHECK(std::abs(hist[7] - cd(0.5, 0)) < 1e-14);
  CHECK(std::abs(hist[1]) < 1e-15);
  CHECK(std::abs(hist[4]) < 1e-15);
}

TEST_CASE("history is annihilated term by term") {
  Rng rng = Rng::stream(51, 0, 0x6363);
  for (int trial = 0; trial < 4; ++trial) {
    int n = 1 + static_cast<int>(rng.below(2));
    int t = 1 + static_cast<int>(rng.below(3));
    Circuit c = random_circuit(n, t, rng);
    std::string x;
    for (int i = 0; i < n; ++i) x.push_back(rng.bernoulli(0.5) ? '1' : '0');
    KitaevHamiltonian h = build_kitaev(c, x);
    Eigen::VectorXcd hist = history_state(c, x);
    CHECK(hist.norm() == doctest::Approx(1.0));
    CHECK(h.h_init.apply(hist).norm() < 1e-12);
    for (const auto& term : h.h_prop) CHECK(term.apply(hist).norm() < 1e-12);
    CHECK(std::abs(hist.dot(h.total.apply(hist))) < 1e-12);
  }
}

TEST_CASE("init term matches the dense oracle") {
  Circuit c = parse_circuit("CNOT 0 1\nH 0", 2);
  KitaevHamiltonian h = build_kitaev(c, "10");
  Eigen::MatrixXcd want = init_dense(2, h.padded_steps, "10");
  CHECK((h.h_init.to_dense() - want).cwiseAbs().maxCoeff() < 1e-14);

  // total = init + sum of propagation terms.
  Eigen::MatrixXcd total = h.h_init.to_dense();
  for (const auto& term : h.h_prop) total += term.to_dense();
  CHECK((h.total.to_dense() - total).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("ground check on a bit flip") {
  Circuit c = parse_circuit("X 0", 1);
  KitaevHamiltonian h = build_kitaev(c, "0");
  GroundReport rep = verify_ground(h, 1e-9);
  CHECK(rep.passed);
  CHECK(std::abs(rep.energy) <= 1e-9);
  CHECK(rep.residual <= 1e-8);
  CHECK(rep.gap > 0.0);

  // Output is |1>, and the finished two thirds of the clock carry it:
  // <Z_out * P_{t>=T}> = -(2T+1)/(3T+1) = -3/4.
  CHECK(rep.decision_value == doctest::Approx(-0.75).epsilon(1e-9));

  // Independent spectrum check on the dense matrix.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.total.to_dense());
  CHECK(es.eigenvalues()[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rep.gap == doctest::Approx(es.eigenvalues()[1]).epsilon(1e-8));

  Circuit id = parse_circuit("RZ 0 0.0", 1);
  GroundReport plus = verify_ground(build_kitaev(id, "0"), 1e-9);
  CHECK(plus.decision_value == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("decision observable restricts to finished levels") {
  SparseHermitian d = decision_observable(2, 1);
  // 3T+1 = 4 clock levels over 4 work states.
  CHECK(d.dim() == 16);
  Eigen::MatrixXcd m = d.to_dense();
  for (int t = 0; t <= 3; ++t)
    for (std::int64_t w = 0; w < 4; ++w) {
      double want = t >= 1 ? ((w & 1) ? -1.0 : 1.0) : 0.0;
      CHECK(std::abs(m(t * 4 + w, t * 4 + w) - cd(want, 0)) < 1e-14);
    }
  CHECK_THROWS_AS(decision_observable(0, 1), DomainError);
}

TEST_CASE("unary encoding pins the history sector") {
  Circuit c = parse_circuit("H 0", 1);
  KitaevHamiltonian h = build_kitaev(c, "0");
  KitaevUnary u = kitaev_unary(h);
  // 1 work + 3 clock qubits.
  CHECK(u.op.dim() == 16);
  CHECK(u.isometry.rows() == 16);
  CHECK(u.isometry.cols() == h.dim());

  Eigen::MatrixXcd iso = Eigen::MatrixXcd(u.isometry);
  CHECK((iso.adjoint() * iso -
         Eigen::MatrixXcd::Identity(iso.cols(), iso.cols()))
            .cwiseAbs()
            .maxCoeff() < 1e-14);
  Eigen::MatrixXcd restricted = iso.adjoint() * u.op.to_dense() * iso;
  CHECK((restricted - h.total.to_dense()).cwiseAbs().maxCoeff() < 1e-12);

  // The embedded history is still a zero-energy state even though the
  // penalties act on the full register.
  Eigen::VectorXcd hist = history_state(c, "0");
  Eigen::VectorXcd lifted = iso * hist;
  CHECK(u.op.apply(lifted).norm() < 1e-12);
  CHECK(u.locality >= 2);
}

}  // TEST_SUITE
