#include "obslearn/pauli.hpp"

#include <bit>
#include <cmath>
#include <sstream>

namespace obslearn {

namespace {

constexpr const char* kLetters = "IXYZ";

int letter_index(char c) {
  switch (c) {
    case 'I': return 0;
    case 'X': return 1;
    case 'Y': return 2;
    case 'Z': return 3;
    default: return -1;
  }
}

}  // namespace

PauliString::PauliString(const std::string& letters) : letters_(letters) {
  if (letters_.empty())
    throw DomainError("PauliString: empty letter string");
  if (letters_.size() > 63)
    throw DomainError("PauliString: more than 63 qubits unsupported");
  for (std::size_t q = 0; q < letters_.size(); ++q) {
    int li = letter_index(letters_[q]);
    if (li < 0) {
      std::ostringstream os;
      os << "PauliString: invalid letter '" << letters_[q] << "' at position "
         << q << " (expected I, X, Y or Z)";
      throw ParseError(os.str());
    }
    if (li != 0) {
      ++weight_;
      support_.push_back(static_cast<int>(q));
    }
    if (li == 1 || li == 2) flip_mask_ |= std::uint64_t(1) << q;
    if (li == 2 || li == 3) phase_mask_ |= std::uint64_t(1) << q;
    if (li == 2) ++y_count_;
  }
}

Eigen::VectorXcd PauliString::apply(const Eigen::VectorXcd& psi) const {
  const std::int64_t dim = std::int64_t(1) << n();
  if (psi.size() != dim)
    throw DimensionError("PauliString::apply: state dimension mismatch");
  // Per basis state: P|i> = phase(i) |i ^ flip>, where Y contributes
  // i*(-1)^bit and Z contributes (-1)^bit.
  static const cd i_pow[4] = {cd(1, 0), cd(0, 1), cd(-1, 0), cd(0, -1)};
  const cd base = i_pow[y_count_ & 3];
  Eigen::VectorXcd out(dim);
  for (std::int64_t i = 0; i < dim; ++i) {
    int par = std::popcount(static_cast<std::uint64_t>(i) & phase_mask_) & 1;
    cd phase = par ? -base : base;
    out[i ^ static_cast<std::int64_t>(flip_mask_)] = phase * psi[i];
  }
  return out;
}

double PauliString::expectation(const Eigen::VectorXcd& psi) const {
  const std::int64_t dim = std::int64_t(1) << n();
  if (psi.size() != dim)
    throw DimensionError("PauliString::expectation: state dimension mismatch");
  static const cd i_pow[4] = {cd(1, 0), cd(0, 1), cd(-1, 0), cd(0, -1)};
  const cd base = i_pow[y_count_ & 3];
  const std::int64_t f = static_cast<std::int64_t>(flip_mask_);
  cd acc(0, 0);
  for (std::int64_t j = 0; j < dim; ++j) {
    std::int64_t src = j ^ f;
    int par = std::popcount(static_cast<std::uint64_t>(src) & phase_mask_) & 1;
    cd phase = par ? -base : base;
    acc += std::conj(psi[j]) * phase * psi[src];
  }
  return acc.real();
}

Eigen::MatrixXcd PauliString::to_matrix() const {
  if (n() > 12)
    throw ResourceError("PauliString::to_matrix: dense matrix too large");
  const std::int64_t dim = std::int64_t(1) << n();
  static const cd i_pow[4] = {cd(1, 0), cd(0, 1), cd(-1, 0), cd(0, -1)};
  const cd base = i_pow[y_count_ & 3];
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::int64_t i = 0; i < dim; ++i) {
    int par = std::popcount(static_cast<std::uint64_t>(i) & phase_mask_) & 1;
    m(i ^ static_cast<std::int64_t>(flip_mask_), i) = par ? -base : base;
  }
  return m;
}

PauliString pauli_from_label(const std::string& label) {
  return PauliString(label);
}

std::vector<PauliString> enumerate_local_paulis(int n, int k,
                                                BasisGeometry geometry) {
  if (n < 1) throw DomainError("enumerate_local_paulis: n must be >= 1");
  if (k < 1 || k > n)
    throw DomainError("enumerate_local_paulis: need 1 <= k <= n");
  check_qubit_budget(n, "enumerate_local_paulis");

  std::vector<PauliString> out;
  out.emplace_back(std::string(n, 'I'));

  if (geometry == BasisGeometry::kLine) {
    std::int64_t words = 1;
    for (int j = 0; j < k; ++j) words *= 4;
    for (int start = 0; start + k <= n; ++start) {
      for (std::int64_t w = 1; w < words; ++w) {
        std::string s(n, 'I');
        std::int64_t rem = w;
        // Digit 0 of w is the last letter of the window so that the word
        // order is lexicographic with I<X<Y<Z.
        for (int j = k - 1; j >= 0; --j) {
          s[start + j] = kLetters[rem & 3];
          rem >>= 2;
        }
        out.emplace_back(s);
      }
    }
    return out;
  }

  // All subsets: every distinct string of weight in [1, k], lexicographic.
  std::string s(n, 'I');
  auto rec = [&](auto&& self, int pos, int weight) -> void {
    if (pos == n) {
      if (weight >= 1) out.emplace_back(s);
      return;
    }
    for (int li = 0; li < 4; ++li) {
      if (li != 0 && weight == k) continue;
      s[pos] = kLetters[li];
      self(self, pos + 1, weight + (li != 0 ? 1 : 0));
    }
    s[pos] = 'I';
  };
  rec(rec, 0, 0);
  return out;
}

PauliObservable::PauliObservable(std::vector<PauliString> basis,
                                 Eigen::VectorXd alpha, std::size_t max_terms)
    : basis_(std::move(basis)), alpha_(std::move(alpha)) {
  if (basis_.empty()) throw DomainError("PauliObservable: empty basis");
  if (static_cast<std::size_t>(alpha_.size()) != basis_.size())
    throw DimensionError(
        "PauliObservable: coefficient count does not match basis size");
  if (max_terms != 0 && basis_.size() > max_terms) {
    std::ostringstream os;
    os << "PauliObservable: " << basis_.size()
       << " terms exceed declared budget " << max_terms;
    throw DomainError(os.str());
  }
  n_ = basis_[0].n();
  for (const auto& p : basis_) {
    if (p.n() != n_)
      throw DimensionError("PauliObservable: mixed string lengths in basis");
  }
  for (Eigen::Index i = 0; i < alpha_.size(); ++i) {
    if (!std::isfinite(alpha_[i]) || alpha_[i] < -1.0 || alpha_[i] > 1.0) {
      std::ostringstream os;
      os << "PauliObservable: coefficient " << i << " = " << alpha_[i]
         << " outside [-1,1]";
      throw DomainError(os.str());
    }
  }
}

double PauliObservable::expectation(const Eigen::VectorXcd& psi) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    if (alpha_[static_cast<Eigen::Index>(i)] == 0.0) continue;
    acc += alpha_[static_cast<Eigen::Index>(i)] * basis_[i].expectation(psi);
  }
  return acc;
}

Eigen::MatrixXcd PauliObservable::to_matrix() const {
  const std::int64_t dim = std::int64_t(1) << n_;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t i = 0; i < basis_.size(); ++i)
    m += alpha_[static_cast<Eigen::Index>(i)] * basis_[i].to_matrix();
  return m;
}

double pauli_expectation(const Eigen::VectorXcd& psi, const PauliString& p) {
  return p.expectation(psi);
}

double observable_expectation(const Eigen::VectorXcd& psi,
                              const PauliObservable& obs) {
  return obs.expectation(psi);
}

}  // namespace obslearn
