#include "obslearn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "obslearn/rng.hpp"

namespace obslearn {

namespace {
constexpr double kHermTol = 1e-12;
constexpr double kEvolveTol = 1e-10;
}  // namespace

SparseHermitian::SparseHermitian(Eigen::SparseMatrix<cd> mat)
    : mat_(std::move(mat)) {
  mat_.prune([](std::int64_t, std::int64_t, const cd& v) {
    return v != cd(0.0, 0.0);
  });
  mat_.makeCompressed();
  // Hermiticity check and Gershgorin-style norm bound in one sweep.
  double bound = 0.0;
  std::vector<double> row_abs(mat_.rows(), 0.0);
  for (int k = 0; k < mat_.outerSize(); ++k) {
    for (Eigen::SparseMatrix<cd>::InnerIterator it(mat_, k); it; ++it) {
      if (it.row() == it.col()) {
        if (std::abs(it.value().imag()) > kHermTol)
          throw DomainError("SparseHermitian: diagonal entry not real");
      } else {
        cd mirror = mat_.coeff(it.col(), it.row());
        if (std::abs(mirror - std::conj(it.value())) > kHermTol)
          throw DomainError(
              "SparseHermitian: entries not conjugate-symmetric to 1e-12");
      }
      row_abs[it.row()] += std::abs(it.value());
    }
  }
  for (double r : row_abs) bound = std::max(bound, r);
  norm_bound_ = bound;
}

SparseHermitian SparseHermitian::from_entries(
    std::int64_t dim, const std::vector<CooEntry>& entries) {
  if (dim < 1) throw DomainError("SparseHermitian: dimension must be >= 1");
  check_dim_budget(dim, "SparseHermitian");
  std::vector<Eigen::Triplet<cd>> trips;
  trips.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= dim || e.col < 0 || e.col >= dim) {
      std::ostringstream os;
      os << "SparseHermitian: entry (" << e.row << "," << e.col
         << ") outside dim " << dim;
      throw DimensionError(os.str());
    }
    if (!std::isfinite(e.value.real()) || !std::isfinite(e.value.imag()))
      throw DomainError("SparseHermitian: non-finite entry");
    trips.emplace_back(e.row, e.col, e.value);
  }
  Eigen::SparseMatrix<cd> m(dim, dim);
  m.setFromTriplets(trips.begin(), trips.end());  // duplicates are summed
  return SparseHermitian(std::move(m));
}

SparseHermitian SparseHermitian::from_dense(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols())
    throw DimensionError("SparseHermitian::from_dense: matrix not square");
  std::vector<CooEntry> entries;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (m(r, c) != cd(0.0, 0.0)) entries.push_back({r, c, m(r, c)});
  return from_entries(m.rows(), entries);
}

SparseHermitian SparseHermitian::zero(std::int64_t dim) {
  return from_entries(dim, {});
}

Eigen::VectorXcd SparseHermitian::apply(const Eigen::VectorXcd& v) const {
  if (v.size() != dim())
    throw DimensionError("SparseHermitian::apply: vector dimension mismatch");
  return mat_ * v;
}

Eigen::MatrixXcd SparseHermitian::to_dense() const {
  if (dim() > kDenseDimCap)
    throw ResourceError("SparseHermitian::to_dense: above dense cap");
  return Eigen::MatrixXcd(mat_);
}

std::vector<CooEntry> SparseHermitian::entries() const {
  std::vector<CooEntry> out;
  out.reserve(mat_.nonZeros());
  for (int k = 0; k < mat_.outerSize(); ++k)
    for (Eigen::SparseMatrix<cd>::InnerIterator it(mat_, k); it; ++it)
      out.push_back({it.row(), it.col(), it.value()});
  std::sort(out.begin(), out.end(), [](const CooEntry& a, const CooEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  return out;
}

SparseHermitian SparseHermitian::scaled(double s) const {
  if (!std::isfinite(s))
    throw DomainError("SparseHermitian::scaled: non-finite factor");
  Eigen::SparseMatrix<cd> m = mat_ * cd(s, 0.0);
  return SparseHermitian(std::move(m));
}

SparseHermitian SparseHermitian::sum(
    const std::vector<const SparseHermitian*>& parts) {
  if (parts.empty()) throw DomainError("SparseHermitian::sum: no operands");
  Eigen::SparseMatrix<cd> m = parts[0]->mat_;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (parts[i]->dim() != m.rows())
      throw DimensionError("SparseHermitian::sum: dimension mismatch");
    m += parts[i]->mat_;
  }
  return SparseHermitian(std::move(m));
}

void SparseHermitian::dump_coo(std::ostream& out) const {
  out.precision(17);
  out << "dim " << dim() << '\n';
  for (const CooEntry& e : entries())
    out << e.row << ' ' << e.col << ' ' << e.value.real() << ' '
        << e.value.imag() << '\n';
}

SparseHermitian SparseHermitian::load_coo(std::istream& in) {
  std::string line;
  std::int64_t dim = -1;
  std::vector<CooEntry> entries;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first) || first[0] == '#') continue;
    if (dim < 0) {
      std::int64_t d;
      if (first != "dim" || !(ls >> d) || d < 1)
        throw ParseError("coo: expected 'dim N' header before entries");
      dim = d;
      continue;
    }
    CooEntry e;
    double re, im;
    std::istringstream row(line);
    if (!(row >> e.row >> e.col >> re >> im)) {
      std::ostringstream os;
      os << "coo line " << lineno << ": expected 'row col re im'";
      throw ParseError(os.str());
    }
    e.value = cd(re, im);
    entries.push_back(e);
  }
  if (dim < 0) throw ParseError("coo: missing 'dim N' header");
  return from_entries(dim, entries);
}

// ---------------------------------------------------------------------------
// Krylov machinery
// ---------------------------------------------------------------------------

namespace {

struct LanczosBasis {
  std::vector<Eigen::VectorXcd> v;
  std::vector<double> alpha;
  std::vector<double> beta;  // beta[j] couples v[j] and v[j+1]
  bool invariant = false;    // hit an invariant subspace
};

void orthogonalize(Eigen::VectorXcd& w,
                   const std::vector<Eigen::VectorXcd>& basis,
                   const std::vector<Eigen::VectorXcd>* deflate) {
  for (int pass = 0; pass < 2; ++pass) {
    if (deflate != nullptr)
      for (const auto& d : *deflate) w -= d.dot(w) * d;
    for (const auto& b : basis) w -= b.dot(w) * b;
  }
}

LanczosBasis lanczos(const SparseHermitian& h, const Eigen::VectorXcd& start,
                     int m, const std::vector<Eigen::VectorXcd>* deflate) {
  LanczosBasis lb;
  Eigen::VectorXcd v = start;
  orthogonalize(v, lb.v, deflate);
  double nrm = v.norm();
  if (nrm < 1e-14)
    throw ConvergenceError("lanczos: start vector inside deflated space");
  v /= nrm;
  lb.v.push_back(v);
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXcd w = h.apply(lb.v[j]);
    double a = lb.v[j].dot(w).real();
    lb.alpha.push_back(a);
    orthogonalize(w, lb.v, deflate);
    double b = w.norm();
    if (b < 1e-12 * std::max(1.0, h.norm_bound())) {
      lb.invariant = true;
      break;
    }
    lb.beta.push_back(b);
    lb.v.push_back(w / b);
  }
  return lb;
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tridiag_eig(
    const LanczosBasis& lb) {
  int m = static_cast<int>(lb.alpha.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    t(i, i) = lb.alpha[i];
    if (i + 1 < m && i < static_cast<int>(lb.beta.size())) {
      t(i, i + 1) = lb.beta[i];
      t(i + 1, i) = lb.beta[i];
    }
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t);
}

Eigen::VectorXcd random_start(std::int64_t dim) {
  Rng rng = Rng::stream(0x0b5e71ea, static_cast<std::uint64_t>(dim));
  Eigen::VectorXcd v(dim);
  for (std::int64_t i = 0; i < dim; ++i) v[i] = cd(rng.normal(), rng.normal());
  v /= v.norm();
  return v;
}

// One low eigenpair via restarted Lanczos, optionally inside the orthogonal
// complement of `deflate`.
std::pair<double, Eigen::VectorXcd> lowest_pair(
    const SparseHermitian& h, const std::vector<Eigen::VectorXcd>* deflate) {
  const std::int64_t dim = h.dim();
  Eigen::VectorXcd guess = random_start(dim);
  const int m = static_cast<int>(std::min<std::int64_t>(dim, 64));
  const double tol = kGroundResidualTol;
  double energy = 0.0;
  for (int restart = 0; restart < 400; ++restart) {
    LanczosBasis lb = lanczos(h, guess, m, deflate);
    auto eig = tridiag_eig(lb);
    int mm = static_cast<int>(lb.alpha.size());
    energy = eig.eigenvalues()[0];
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(dim);
    for (int i = 0; i < mm; ++i) x += eig.eigenvectors()(i, 0) * lb.v[i];
    x /= x.norm();
    double resid = (h.apply(x) - energy * x).norm();
    if (resid <= tol || lb.invariant) return {energy, x};
    guess = x;
  }
  throw ConvergenceError("lanczos ground state did not reach residual 1e-8");
}

}  // namespace

Evolver::Evolver(const SparseHermitian& h, EvolveMethod method) : h_(h) {
  dense_ = method == EvolveMethod::kDense ||
           (method == EvolveMethod::kAuto && h.dim() <= kDenseDimCap);
  if (method == EvolveMethod::kDense && h.dim() > kDenseDimCap)
    throw ResourceError("Evolver: dense method forced above the dense cap");
  if (dense_) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h.to_dense());
    if (eig.info() != Eigen::Success)
      throw ConvergenceError("Evolver: dense eigendecomposition failed");
    eigenvalues_ = eig.eigenvalues();
    eigenvectors_ = eig.eigenvectors();
  }
}

Eigen::VectorXcd Evolver::apply(const Eigen::VectorXcd& psi, double t) const {
  if (psi.size() != h_.dim())
    throw DimensionError("Evolver: state dimension mismatch");
  if (!std::isfinite(t)) throw DomainError("Evolver: non-finite time");
  if (dense_) {
    Eigen::VectorXcd y = eigenvectors_.adjoint() * psi;
    for (Eigen::Index i = 0; i < y.size(); ++i)
      y[i] *= std::exp(cd(0.0, eigenvalues_[i] * t));
    return eigenvectors_ * y;
  }
  // Chunked Lanczos propagation (Saad-style error estimate per chunk).
  if (t == 0.0) return psi;
  double nrm = psi.norm();
  if (nrm == 0.0) return psi;
  Eigen::VectorXcd cur = psi;
  double remaining = t;
  const int m = static_cast<int>(std::min<std::int64_t>(h_.dim(), 48));
  int guard = 0;
  while (remaining != 0.0) {
    if (++guard > 100000)
      throw ConvergenceError("evolve: krylov chunking failed to advance");
    double cn = cur.norm();
    LanczosBasis lb = lanczos(h_, cur, m, nullptr);
    auto eig = tridiag_eig(lb);
    int mm = static_cast<int>(lb.alpha.size());
    double dt = remaining;
    for (;;) {
      // u(dt) = e^{i T dt} e1 in the Krylov frame.
      Eigen::VectorXcd phases(mm);
      for (int i = 0; i < mm; ++i)
        phases[i] = std::exp(cd(0.0, eig.eigenvalues()[i] * dt));
      Eigen::VectorXd e1coef = eig.eigenvectors().row(0).transpose();
      Eigen::VectorXcd u(mm);
      for (int i = 0; i < mm; ++i) {
        cd acc(0, 0);
        for (int j = 0; j < mm; ++j)
          acc += eig.eigenvectors()(i, j) * phases[j] * e1coef[j];
        u[i] = acc;
      }
      double err = lb.invariant || mm == static_cast<int>(lb.v.size())
                       ? 0.0
                       : lb.beta.back() * std::abs(u[mm - 1]) * std::abs(dt);
      double budget = kEvolveTol * std::abs(dt) / std::abs(t);
      if (err <= budget || lb.invariant) {
        Eigen::VectorXcd next = Eigen::VectorXcd::Zero(h_.dim());
        for (int i = 0; i < mm; ++i) next += u[i] * lb.v[i];
        cur = next * cn;
        remaining -= dt;
        break;
      }
      dt /= 2.0;
    }
  }
  return cur;
}

Eigen::VectorXcd evolve(const SparseHermitian& h, const Eigen::VectorXcd& psi,
                        double t, EvolveMethod method) {
  return Evolver(h, method).apply(psi, t);
}

GroundResult ground_state(const SparseHermitian& h, EvolveMethod method) {
  GroundResult out;
  const std::int64_t dim = h.dim();
  bool dense = method == EvolveMethod::kDense ||
               (method == EvolveMethod::kAuto && dim <= kDenseDimCap);
  if (method == EvolveMethod::kDense && dim > kDenseDimCap)
    throw ResourceError("ground_state: dense method forced above cap");
  if (dense) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h.to_dense());
    if (eig.info() != Eigen::Success)
      throw ConvergenceError("ground_state: eigendecomposition failed");
    out.energy = eig.eigenvalues()[0];
    out.state = eig.eigenvectors().col(0);
    out.gap = dim >= 2 ? eig.eigenvalues()[1] - eig.eigenvalues()[0] : 0.0;
  } else {
    auto [e0, x0] = lowest_pair(h, nullptr);
    out.energy = e0;
    out.state = x0;
    if (dim >= 2) {
      std::vector<Eigen::VectorXcd> defl = {x0};
      auto [e1, x1] = lowest_pair(h, &defl);
      (void)x1;
      out.gap = e1 - e0;
    }
  }
  if (out.gap < 0.0) out.gap = 0.0;
  out.residual = (h.apply(out.state) - out.energy * out.state).norm();
  if (out.residual > kGroundResidualTol)
    throw ConvergenceError("ground_state: residual above 1e-8");
  out.degenerate = dim >= 2 && out.gap < kDegenerateGapTol;
  return out;
}

double spectral_gap(const SparseHermitian& h, EvolveMethod method) {
  if (h.dim() < 2)
    throw DimensionError("spectral_gap: needs dimension >= 2");
  return ground_state(h, method).gap;
}

Eigen::VectorXd low_eigenvalues(const SparseHermitian& h, int count,
                                EvolveMethod method) {
  if (count < 1 || count > h.dim())
    throw DomainError("low_eigenvalues: bad count");
  bool dense = method == EvolveMethod::kDense ||
               (method == EvolveMethod::kAuto && h.dim() <= kDenseDimCap);
  if (dense) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h.to_dense());
    return eig.eigenvalues().head(count);
  }
  Eigen::VectorXd vals(count);
  std::vector<Eigen::VectorXcd> defl;
  for (int i = 0; i < count; ++i) {
    auto [e, x] = lowest_pair(h, defl.empty() ? nullptr : &defl);
    vals[i] = e;
    defl.push_back(x);
  }
  return vals;
}

}  // namespace obslearn
