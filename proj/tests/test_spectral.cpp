#include <doctest.h>

#include <complex>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "obslearn/rng.hpp"
#include "obslearn/spectral.hpp"

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

Eigen::VectorXcd random_state(std::int64_t dim, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 1, 0x6865);
  Eigen::VectorXcd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = cd(rng.normal(), rng.normal());
  v.normalize();
  return v;
}

SparseHermitian diag_op(const std::vector<double>& d) {
  std::vector<CooEntry> entries;
  for (std::size_t i = 0; i < d.size(); ++i)
    entries.push_back({static_cast<std::int64_t>(i),
                       static_cast<std::int64_t>(i), cd(d[i], 0.0)});
  return SparseHermitian::from_entries(static_cast<std::int64_t>(d.size()),
                                       entries);
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("construction validates") {
  std::vector<CooEntry> ok{{0, 0, cd(1, 0)},
                           {0, 1, cd(0, 2)},
                           {1, 0, cd(0, -2)},
                           {1, 1, cd(3, 0)}};
  SparseHermitian h = SparseHermitian::from_entries(2, ok);
  CHECK(h.dim() == 2);
  CHECK(h.nonzeros() == 4);

  std::vector<CooEntry> skew{{0, 1, cd(0, 2)}, {1, 0, cd(0, 2)}};
  CHECK_THROWS_AS(SparseHermitian::from_entries(2, skew), DomainError);
  std::vector<CooEntry> oob{{0, 5, cd(1, 0)}};
  CHECK_THROWS_AS(SparseHermitian::from_entries(2, oob), DimensionError);
  CHECK_THROWS_AS(SparseHermitian::from_entries(0, {}), DomainError);

  Eigen::MatrixXcd nh = Eigen::MatrixXcd::Zero(2, 2);
  nh(0, 1) = cd(1, 0);
  CHECK_THROWS_AS(SparseHermitian::from_dense(nh), DomainError);
}

TEST_CASE("dense round trip and apply") {
  Eigen::MatrixXcd m = random_hermitian(8, 3);
  SparseHermitian h = SparseHermitian::from_dense(m);
  CHECK((h.to_dense() - m).cwiseAbs().maxCoeff() < 1e-14);

  Eigen::VectorXcd v = random_state(8, 4);
  CHECK((h.apply(v) - m * v).norm() < 1e-13);
  CHECK_THROWS_AS(h.apply(random_state(4, 1)), DimensionError);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  double radius = es.eigenvalues().cwiseAbs().maxCoeff();
  CHECK(h.norm_bound() >= radius - 1e-12);

  SparseHermitian z = SparseHermitian::zero(4);
  CHECK(z.dim() == 4);
  CHECK(z.nonzeros() == 0);
  CHECK(z.norm_bound() == 0.0);
}

TEST_CASE("scaling and sums") {
  Eigen::MatrixXcd m1 = random_hermitian(6, 5);
  Eigen::MatrixXcd m2 = random_hermitian(6, 6);
  SparseHermitian h1 = SparseHermitian::from_dense(m1);
  SparseHermitian h2 = SparseHermitian::from_dense(m2);
  CHECK((h1.scaled(2.0).to_dense() - 2.0 * m1).cwiseAbs().maxCoeff() < 1e-13);
  SparseHermitian s = SparseHermitian::sum({&h1, &h2});
  CHECK((s.to_dense() - (m1 + m2)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("coo serialization round trip") {
  Eigen::MatrixXcd m = random_hermitian(5, 7);
  SparseHermitian h = SparseHermitian::from_dense(m);
  std::ostringstream out;
  h.dump_coo(out);
  std::istringstream in(out.str());
  SparseHermitian back = SparseHermitian::load_coo(in);
  CHECK(back.dim() == h.dim());
  CHECK((back.to_dense() - h.to_dense()).cwiseAbs().maxCoeff() < 1e-12);

  std::istringstream junk("not a matrix");
  CHECK_THROWS_AS(SparseHermitian::load_coo(junk), ParseError);
}

TEST_CASE("evolution matches the matrix exponential") {
  Eigen::MatrixXcd m = random_hermitian(8, 11);
  SparseHermitian h = SparseHermitian::from_dense(m);
  Eigen::VectorXcd psi = random_state(8, 12);
  double t = 0.7;
  Eigen::MatrixXcd u = (cd(0, 1) * t * m).exp();
  Eigen::VectorXcd want = u * psi;

  Eigen::VectorXcd dense = evolve(h, psi, t, EvolveMethod::kDense);
  CHECK((dense - want).norm() < 1e-10);
  Eigen::VectorXcd krylov = evolve(h, psi, t, EvolveMethod::kKrylov);
  CHECK((krylov - want).norm() < 1e-8);
  Eigen::VectorXcd zero_t = evolve(h, psi, 0.0);
  CHECK((zero_t - psi).norm() < 1e-13);
  CHECK(evolve(h, psi, 2.5).norm() == doctest::Approx(1.0).epsilon(1e-12));

  Evolver ev(h);
  CHECK((ev.apply(psi, t) - want).norm() < 1e-10);
  CHECK((ev.apply(psi, -t) - u.adjoint() * psi).norm() < 1e-10);

  CHECK_THROWS_AS(evolve(h, random_state(4, 1), t), DimensionError);
}

TEST_CASE("krylov handles larger operators") {
  // Tridiagonal chain, dim 64, forced off the dense path.
  std::vector<CooEntry> entries;
  std::int64_t dim = 64;
  Rng rng = Rng::stream(13, 0, 0x6865);
  for (std::int64_t i = 0; i < dim; ++i)
    entries.push_back({i, i, cd(rng.uniform(-1.0, 1.0), 0.0)});
  for (std::int64_t i = 0; i + 1 < dim; ++i) {
    cd v(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
    entries.push_back({i, i + 1, v});
    entries.push_back({i + 1, i, std::conj(v)});
  }
  SparseHermitian h = SparseHermitian::from_entries(dim, entries);
  Eigen::VectorXcd psi = random_state(dim, 17);
  Eigen::VectorXcd a = evolve(h, psi, 1.3, EvolveMethod::kDense);
  Eigen::VectorXcd b = evolve(h, psi, 1.3, EvolveMethod::kKrylov);
  CHECK((a - b).norm() < 1e-8);

  GroundResult gd = ground_state(h, EvolveMethod::kDense);
  GroundResult gk = ground_state(h, EvolveMethod::kKrylov);
  CHECK(gk.energy == doctest::Approx(gd.energy).epsilon(1e-7));
  CHECK(gk.residual <= kGroundResidualTol);
}

TEST_CASE("ground states and gaps") {
  SparseHermitian d = diag_op({-1.0, 2.0, 5.0});
  GroundResult g = ground_state(d);
  CHECK(g.energy == doctest::Approx(-1.0));
  CHECK(g.gap == doctest::Approx(3.0));
  CHECK_FALSE(g.degenerate);
  CHECK(g.residual <= kGroundResidualTol);
  CHECK(std::abs(g.state[0]) == doctest::Approx(1.0));

  GroundResult deg = ground_state(diag_op({1.0, 1.0, 2.0}));
  CHECK(deg.degenerate);

  std::vector<CooEntry> flip{{0, 1, cd(1, 0)}, {1, 0, cd(1, 0)}};
  GroundResult x = ground_state(SparseHermitian::from_entries(2, flip));
  CHECK(x.energy == doctest::Approx(-1.0));
  CHECK(x.gap == doctest::Approx(2.0));
  CHECK(std::abs(x.state[0] - x.state[1]) == doctest::Approx(2.0 * std::abs(x.state[0])));

  CHECK(spectral_gap(diag_op({0.0, 0.3, 5.0})) == doctest::Approx(0.3));
}

TEST_CASE("low eigenvalues are sorted and correct") {
  Eigen::MatrixXcd m = random_hermitian(10, 19);
  SparseHermitian h = SparseHermitian::from_dense(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  Eigen::VectorXd low = low_eigenvalues(h, 3);
  REQUIRE(low.size() == 3);
  for (int i = 0; i < 3; ++i)
    CHECK(low[i] == doctest::Approx(es.eigenvalues()[i]).epsilon(1e-9));
  CHECK(low[0] <= low[1]);
  CHECK(low[1] <= low[2]);
}

}  // TEST_SUITE
