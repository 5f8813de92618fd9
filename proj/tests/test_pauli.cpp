#include <doctest.h>

#include <algorithm>
#include <complex>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "obslearn/pauli.hpp"
#include "obslearn/rng.hpp"

using namespace obslearn;

namespace {

Eigen::Matrix2cd letter_matrix(char c) {
  const cd i1(0.0, 1.0);
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  switch (c) {
    case 'I': m(0, 0) = 1; m(1, 1) = 1; break;
    case 'X': m(0, 1) = 1; m(1, 0) = 1; break;
    case 'Y': m(0, 1) = -i1; m(1, 0) = i1; break;
    case 'Z': m(0, 0) = 1; m(1, 1) = -1; break;
  }
  return m;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Independent dense build: qubit 0 is the least significant amplitude bit,
// so the full matrix is M_{n-1} (x) ... (x) M_0.
Eigen::MatrixXcd pauli_dense(const std::string& letters) {
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(1, 1);
  for (int q = static_cast<int>(letters.size()) - 1; q >= 0; --q)
    acc = kron(acc, letter_matrix(letters[static_cast<std::size_t>(q)]));
  return acc;
}

Eigen::VectorXcd random_state(int n, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 0, 0x7374);
  Eigen::VectorXcd v(std::int64_t(1) << n);
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = cd(rng.normal(), rng.normal());
  v.normalize();
  return v;
}

int letter_rank(char c) {
  switch (c) {
    case 'I': return 0;
    case 'X': return 1;
    case 'Y': return 2;
    default: return 3;
  }
}

bool pauli_lex_less(const PauliString& a, const PauliString& b) {
  const std::string& sa = a.letters();
  const std::string& sb = b.letters();
  for (std::size_t i = 0; i < sa.size(); ++i) {
    if (letter_rank(sa[i]) != letter_rank(sb[i]))
      return letter_rank(sa[i]) < letter_rank(sb[i]);
  }
  return false;
}

}  // namespace

TEST_SUITE("pauli") {

TEST_CASE("string structure") {
  PauliString p("IXYZ");
  CHECK(p.n() == 4);
  CHECK(p.weight() == 3);
  CHECK(p.support() == std::vector<int>{1, 2, 3});
  CHECK_FALSE(p.is_identity());
  // X and Y positions flip amplitudes: qubits 1 and 2.
  CHECK(p.flip_mask() == 0b110);

  CHECK(PauliString("II").is_identity());
  CHECK(pauli_from_label("XZ") == PauliString("XZ"));
  CHECK_THROWS_AS(PauliString("AB"), ParseError);
  CHECK_THROWS_AS(PauliString(""), DomainError);
  CHECK_THROWS_AS(pauli_from_label("xz"), ParseError);
}

TEST_CASE("matrix matches tensor ordering") {
  // "XI" has X on qubit 0, which is the least significant bit.
  Eigen::MatrixXcd xi = PauliString("XI").to_matrix();
  CHECK(xi(0, 1) == cd(1.0, 0.0));
  CHECK(xi(2, 3) == cd(1.0, 0.0));
  CHECK(xi(0, 2) == cd(0.0, 0.0));

  for (const char* s : {"X", "Y", "Z", "XI", "IX", "ZY", "XYZ", "IZI", "YY"}) {
    Eigen::MatrixXcd got = PauliString(s).to_matrix();
    Eigen::MatrixXcd want = pauli_dense(s);
    CHECK((got - want).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }
}

TEST_CASE("apply and expectation agree with dense") {
  for (const char* s : {"III", "XIZ", "YYI", "ZXY", "IIX"}) {
    PauliString p(s);
    Eigen::MatrixXcd m = pauli_dense(s);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      Eigen::VectorXcd psi = random_state(3, seed);
      Eigen::VectorXcd got = p.apply(psi);
      Eigen::VectorXcd want = m * psi;
      CHECK((got - want).norm() < 1e-13);
      double e = std::real(psi.dot(want));
      CHECK(p.expectation(psi) == doctest::Approx(e).epsilon(1e-12));
      CHECK(pauli_expectation(psi, p) == doctest::Approx(e).epsilon(1e-12));
    }
  }
}

TEST_CASE("expectation on basis states") {
  Eigen::VectorXcd zero(2), one(2);
  zero << 1, 0;
  one << 0, 1;
  CHECK(PauliString("Z").expectation(zero) == doctest::Approx(1.0));
  CHECK(PauliString("Z").expectation(one) == doctest::Approx(-1.0));
  CHECK(PauliString("X").expectation(zero) == doctest::Approx(0.0));
}

TEST_CASE("line basis enumeration") {
  auto b21 = enumerate_local_paulis(2, 1, BasisGeometry::kLine);
  REQUIRE(b21.size() == 7);
  CHECK(b21[0].letters() == "II");
  CHECK(b21[1].letters() == "XI");
  CHECK(b21[2].letters() == "YI");
  CHECK(b21[3].letters() == "ZI");
  CHECK(b21[4].letters() == "IX");
  CHECK(b21[6].letters() == "IZ");

  // (n - k + 1) * (4^k - 1) + 1 entries; overlapping windows repeat the
  // strings supported on their intersection.
  auto b32 = enumerate_local_paulis(3, 2, BasisGeometry::kLine);
  CHECK(b32.size() == 31);
  int ixi = 0;
  for (const auto& p : b32)
    if (p.letters() == "IXI") ++ixi;
  CHECK(ixi == 2);
}

TEST_CASE("all-subsets enumeration") {
  auto b22 = enumerate_local_paulis(2, 2, BasisGeometry::kAllSubsets);
  CHECK(b22.size() == 16);
  std::set<std::string> seen;
  for (const auto& p : b22) seen.insert(p.letters());
  CHECK(seen.size() == b22.size());
  CHECK(b22[0].letters() == "II");
  CHECK(std::is_sorted(b22.begin(), b22.end(), pauli_lex_less));

  auto b31 = enumerate_local_paulis(3, 1, BasisGeometry::kAllSubsets);
  CHECK(b31.size() == 10);
  for (const auto& p : b31) CHECK(p.weight() <= 1);

  CHECK_THROWS_AS(enumerate_local_paulis(2, 0, BasisGeometry::kLine),
                  DomainError);
  CHECK_THROWS_AS(enumerate_local_paulis(2, 3, BasisGeometry::kAllSubsets),
                  DomainError);
  CHECK_THROWS_AS(enumerate_local_paulis(0, 1, BasisGeometry::kLine),
                  DomainError);
}

TEST_CASE("observable validation and evaluation") {
  std::vector<PauliString> basis{PauliString("ZI"), PauliString("IX")};
  Eigen::VectorXd alpha(2);
  alpha << 0.5, -0.25;
  PauliObservable obs(basis, alpha);
  CHECK(obs.terms() == 2);
  CHECK(obs.l1() == doctest::Approx(0.75));

  Eigen::VectorXcd psi = random_state(2, 7);
  double direct = 0.5 * basis[0].expectation(psi) - 0.25 * basis[1].expectation(psi);
  CHECK(obs.expectation(psi) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(observable_expectation(psi, obs) == doctest::Approx(direct).epsilon(1e-12));

  Eigen::MatrixXcd dense = 0.5 * pauli_dense("ZI") - 0.25 * pauli_dense("IX");
  CHECK((obs.to_matrix() - dense).cwiseAbs().maxCoeff() < 1e-14);

  Eigen::VectorXd big(2);
  big << 1.5, 0.0;
  CHECK_THROWS_AS(PauliObservable(basis, big), DomainError);
  Eigen::VectorXd three(3);
  three << 0.1, 0.1, 0.1;
  CHECK_THROWS_AS(PauliObservable(basis, three), DimensionError);
  CHECK_THROWS_AS(PauliObservable(basis, alpha, 1), DomainError);
  CHECK_THROWS_AS(PauliObservable({}, Eigen::VectorXd()), DomainError);
  std::vector<PauliString> mixed{PauliString("ZI"), PauliString("X")};
  CHECK_THROWS_AS(PauliObservable(mixed, alpha), DimensionError);
}

}  // TEST_SUITE
