#include "kfp/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kfp {

BasisSpec::BasisSpec(int velocity_dim, int levels, std::optional<TorusFactor> torus)
    : BasisSpec(std::vector<int>(static_cast<std::size_t>(std::max(velocity_dim, 0)), levels), torus) {
  if (velocity_dim < 1) throw ArgumentError("hermite-ops", "velocity dimension must be positive");
}

BasisSpec::BasisSpec(std::vector<int> levels, std::optional<TorusFactor> torus)
    : levels_(std::move(levels)), torus_(torus) {
  if (levels_.empty()) throw ArgumentError("hermite-ops", "basis needs at least one velocity coordinate");
  for (int n : levels_)
    if (n < 4) throw ArgumentError("hermite-ops", "Hermite truncation must be >= 4 (got " + std::to_string(n) + ")");
  if (torus_) {
    if (torus_->dimension < 1 || torus_->points < 2 || !(torus_->period > 0.0))
      throw ArgumentError("hermite-ops", "invalid torus factor");
  }
}

Index BasisSpec::velocity_size() const {
  Index s = 1;
  for (int n : levels_) s *= n;
  return s;
}

Index BasisSpec::space_size() const {
  if (!torus_) return 1;
  Index s = 1;
  for (int k = 0; k < torus_->dimension; ++k) s *= torus_->points;
  return s;
}

std::vector<int> BasisSpec::multi_index(Index velocity_index) const {
  std::vector<int> n(levels_.size());
  for (std::size_t k = levels_.size(); k-- > 0;) {
    n[k] = static_cast<int>(velocity_index % levels_[k]);
    velocity_index /= levels_[k];
  }
  return n;
}

Index BasisSpec::velocity_index(std::span<const int> n) const {
  Index idx = 0;
  for (std::size_t k = 0; k < levels_.size(); ++k) idx = idx * levels_[k] + n[k];
  return idx;
}

BasisSpec BasisSpec::refined(double factor) const {
  std::vector<int> levels = levels_;
  for (int& n : levels) n = static_cast<int>(std::ceil(n * factor - 1e-9));
  return BasisSpec(std::move(levels), torus_);
}

std::string BasisSpec::describe() const {
  std::ostringstream os;
  os << "hermite[";
  for (std::size_t k = 0; k < levels_.size(); ++k) os << (k ? "x" : "") << levels_[k];
  os << "]";
  if (torus_) os << " torus[d=" << torus_->dimension << ",M=" << torus_->points << ",L=" << torus_->period << "]";
  return os.str();
}

const char* to_string(Symmetry s) {
  switch (s) {
    case Symmetry::hermitian: return "hermitian";
    case Symmetry::skew_hermitian: return "skew-hermitian";
    case Symmetry::none: return "none";
  }
  return "none";
}

bool SparseOperator::symmetry_holds() const {
  if (symmetry == Symmetry::none) return true;
  const SparseMatrixC adj = matrix.adjoint();
  const SparseMatrixC diff = symmetry == Symmetry::hermitian ? SparseMatrixC(matrix - adj) : SparseMatrixC(matrix + adj);
  for (Index c = 0; c < diff.outerSize(); ++c)
    for (SparseMatrixC::InnerIterator it(diff, c); it; ++it)
      if (it.value() != Complex(0.0)) return false;
  return true;
}

std::vector<Index> InteriorProjector::indices(const BasisSpec& basis) const {
  std::vector<Index> out;
  const Index nv = basis.velocity_size();
  std::vector<Index> vel;
  for (Index i = 0; i < nv; ++i) {
    const auto n = basis.multi_index(i);
    bool inside = true;
    for (std::size_t k = 0; k < n.size(); ++k) inside = inside && n[k] < basis.levels(static_cast<int>(k)) - margin;
    if (inside) vel.push_back(i);
  }
  out.reserve(vel.size() * static_cast<std::size_t>(basis.space_size()));
  for (Index s = 0; s < basis.space_size(); ++s)
    for (Index i : vel) out.push_back(s * nv + i);
  return out;
}

SparseMatrixC InteriorProjector::matrix(const BasisSpec& basis) const {
  SparseMatrixC p(basis.size(), basis.size());
  std::vector<Eigen::Triplet<Complex>> t;
  for (Index i : indices(basis)) t.emplace_back(i, i, 1.0);
  p.setFromTriplets(t.begin(), t.end());
  return p;
}

SparseMatrixC submatrix(const SparseMatrixC& a, std::span<const Index> rows, std::span<const Index> cols) {
  std::vector<Index> row_map(static_cast<std::size_t>(a.rows()), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) row_map[static_cast<std::size_t>(rows[i])] = static_cast<Index>(i);
  std::vector<Eigen::Triplet<Complex>> t;
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (SparseMatrixC::InnerIterator it(a, cols[j]); it; ++it) {
      const Index r = row_map[static_cast<std::size_t>(it.row())];
      if (r >= 0) t.emplace_back(r, static_cast<Index>(j), it.value());
    }
  SparseMatrixC out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

SparseMatrixC column_block(const SparseMatrixC& a, std::span<const Index> cols) {
  std::vector<Eigen::Triplet<Complex>> t;
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (SparseMatrixC::InnerIterator it(a, cols[j]); it; ++it) t.emplace_back(it.row(), static_cast<Index>(j), it.value());
  SparseMatrixC out(a.rows(), static_cast<Index>(cols.size()));
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

SparseMatrixC kron(const SparseMatrixC& a, const SparseMatrixC& b) {
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (Index ca = 0; ca < a.outerSize(); ++ca)
    for (SparseMatrixC::InnerIterator ia(a, ca); ia; ++ia)
      for (Index cb = 0; cb < b.outerSize(); ++cb)
        for (SparseMatrixC::InnerIterator ib(b, cb); ib; ++ib)
          t.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(), ia.value() * ib.value());
  SparseMatrixC out(a.rows() * b.rows(), a.cols() * b.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

SparseMatrixC identity(Index n) {
  SparseMatrixC i(n, n);
  i.setIdentity();
  return i;
}

Ladder ladder(int N) {
  if (N < 2) throw ArgumentError("hermite-ops", "ladder needs N >= 2");
  SparseMatrixR a(N, N);
  std::vector<Eigen::Triplet<double>> t;
  for (int n = 1; n < N; ++n) t.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
  a.setFromTriplets(t.begin(), t.end());
  SparseMatrixR adag = a.transpose();
  return {a, adag};
}

SparseMatrixR position_1d(int N) {
  const Ladder l = ladder(N);
  return l.lower + l.raise;
}

SparseMatrixR derivative_1d(int N) {
  const Ladder l = ladder(N);
  return 0.5 * (l.lower - l.raise);
}

SparseMatrixC velocity_factor(const SparseMatrixR& op, int k, const BasisSpec& basis) {
  if (k < 0 || k >= basis.velocity_dim())
    throw ArgumentError("hermite-ops", "velocity coordinate " + std::to_string(k) + " out of range");
  if (op.rows() != basis.levels(k)) throw ArgumentError("hermite-ops", "one-coordinate operator has wrong size");
  Index before = basis.space_size();
  for (int j = 0; j < k; ++j) before *= basis.levels(j);
  Index after = 1;
  for (int j = k + 1; j < basis.velocity_dim(); ++j) after *= basis.levels(j);

  // I_before (x) op (x) I_after, built directly.
  const SparseMatrixC opc = op.cast<Complex>();
  const Index n = opc.rows();
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(static_cast<std::size_t>(before * after * opc.nonZeros()));
  for (Index b = 0; b < before; ++b)
    for (Index c = 0; c < opc.outerSize(); ++c)
      for (SparseMatrixC::InnerIterator it(opc, c); it; ++it)
        for (Index a = 0; a < after; ++a)
          t.emplace_back((b * n + it.row()) * after + a, (b * n + it.col()) * after + a, it.value());
  SparseMatrixC out(basis.size(), basis.size());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

SparseMatrixC position(int k, const BasisSpec& basis) { return velocity_factor(position_1d(basis.levels(k)), k, basis); }

SparseMatrixC derivative(int k, const BasisSpec& basis) {
  return velocity_factor(derivative_1d(basis.levels(k)), k, basis);
}

SparseOperator oscillator(const BasisSpec& basis) {
  const Index nv = basis.velocity_size();
  SparseMatrixC h(basis.size(), basis.size());
  h.reserve(Eigen::VectorXi::Constant(basis.size(), 1));
  for (Index s = 0; s < basis.space_size(); ++s)
    for (Index i = 0; i < nv; ++i) {
      double e = 0.0;
      for (int n : basis.multi_index(i)) e += n + 0.5;
      h.insert(s * nv + i, s * nv + i) = e;
    }
  h.makeCompressed();
  return {h, Symmetry::hermitian};
}

SparseOperator angular_momentum(int j, int k, const BasisSpec& basis) {
  if (j == k) throw ArgumentError("hermite-ops", "angular momentum needs two distinct coordinates");
  if (j < 0 || k < 0 || j >= basis.velocity_dim() || k >= basis.velocity_dim())
    throw ArgumentError("hermite-ops", "angular momentum coordinate out of range");
  const Ladder lj = ladder(basis.levels(j));
  const Ladder lk = ladder(basis.levels(k));
  const SparseMatrixC m = velocity_factor(lj.raise, j, basis) * velocity_factor(lk.lower, k, basis) -
                          velocity_factor(lj.lower, j, basis) * velocity_factor(lk.raise, k, basis);
  return {m, Symmetry::skew_hermitian};
}

SparseOperator monomial_op(std::span<const int> alpha, std::span<const int> beta, const BasisSpec& basis) {
  const auto d = static_cast<std::size_t>(basis.velocity_dim());
  if (alpha.size() != d || beta.size() != d) throw ArgumentError("hermite-ops", "multi-index size mismatch");
  int order = 0;
  for (std::size_t k = 0; k < d; ++k) {
    if (alpha[k] < 0 || beta[k] < 0) throw ArgumentError("hermite-ops", "negative multi-index");
    order += alpha[k] + beta[k];
  }
  if (order > 2) throw ArgumentError("hermite-ops", "monomial order must be <= 2");

  SparseMatrixC m = identity(basis.size());
  for (std::size_t k = 0; k < d; ++k)
    for (int p = 0; p < beta[k]; ++p) m = derivative(static_cast<int>(k), basis) * m;
  for (std::size_t k = 0; k < d; ++k)
    for (int p = 0; p < alpha[k]; ++p) m = position(static_cast<int>(k), basis) * m;
  m.prune(Complex(0.0));
  return {m, Symmetry::none};
}

std::vector<std::pair<std::vector<int>, std::vector<int>>> monomial_indices(int velocity_dim, int order) {
  std::vector<std::pair<std::vector<int>, std::vector<int>>> out;
  const int slots = 2 * velocity_dim;
  std::vector<int> e(static_cast<std::size_t>(slots), 0);
  // Enumerate exponent vectors of length 2d with total degree <= order,
  // ordered by total degree then lexicographically.
  for (int total = 0; total <= order; ++total) {
    std::vector<std::vector<int>> level;
    std::vector<int> cur(static_cast<std::size_t>(slots), 0);
    auto rec = [&](auto&& self, int slot, int left) -> void {
      if (slot == slots - 1) {
        cur[static_cast<std::size_t>(slot)] = left;
        level.push_back(cur);
        return;
      }
      for (int x = left; x >= 0; --x) {
        cur[static_cast<std::size_t>(slot)] = x;
        self(self, slot + 1, left - x);
      }
    };
    rec(rec, 0, total);
    for (const auto& v : level)
      out.emplace_back(std::vector<int>(v.begin(), v.begin() + velocity_dim),
                       std::vector<int>(v.begin() + velocity_dim, v.end()));
  }
  return out;
}

VelocityPolynomial& VelocityPolynomial::add(Complex coefficient, std::vector<Factor> factors) {
  terms_.push_back({coefficient, std::move(factors)});
  return *this;
}

VelocityPolynomial& VelocityPolynomial::add_oscillator(double weight) {
  oscillator_weight_ += weight;
  return *this;
}

Complex VelocityPolynomial::left_symbol(std::span<const double> v, std::span<const double> eta) const {
  Complex total = 0.0;
  for (const auto& term : terms_) {
    Complex p = term.coefficient;
    for (const auto& f : term.factors) {
      const auto k = static_cast<std::size_t>(f.coordinate);
      p *= f.kind == Factor::position ? Complex(v[k]) : kI * eta[k];
    }
    total += p;
  }
  if (oscillator_weight_ != 0.0) {
    double q = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) q += eta[k] * eta[k] + 0.25 * v[k] * v[k];
    total += oscillator_weight_ * q;
  }
  return total;
}

SparseMatrixC VelocityPolynomial::realize(const BasisSpec& basis) const {
  SparseMatrixC total(basis.size(), basis.size());
  for (const auto& term : terms_) {
    if (term.coefficient == Complex(0.0)) continue;
    SparseMatrixC w = identity(basis.size());
    for (const auto& f : term.factors)
      w = w * (f.kind == Factor::position ? position(f.coordinate, basis) : derivative(f.coordinate, basis));
    total += term.coefficient * w;
  }
  if (oscillator_weight_ != 0.0) total += oscillator_weight_ * oscillator(basis).matrix;
  total.prune(Complex(0.0));
  return total;
}

}  // namespace kfp
