#include "kfp/nilpotent.hpp"

#include <Eigen/LU>
#include <json.hpp>

#include "kfp/pencil.hpp"

namespace kfp {

namespace {

constexpr std::array<std::string_view, kAlgebraDim> kLabels = {"Y'11", "Y'21", "Y''11", "Y''21",
                                                               "Y12",  "Y22",  "Y13",   "Y23"};
constexpr std::array<int, kAlgebraDim> kDegrees = {1, 1, 1, 1, 2, 2, 3, 3};

void check_index(int i) {
  if (i < 0 || i >= kAlgebraDim) throw ArgumentError("nilpotent", "algebra index out of range");
}

AlgebraVector add(AlgebraVector a, const AlgebraVector& b) {
  for (int k = 0; k < kAlgebraDim; ++k) a[static_cast<std::size_t>(k)] += b[static_cast<std::size_t>(k)];
  return a;
}

bool is_zero(const AlgebraVector& a) {
  for (int x : a)
    if (x != 0) return false;
  return true;
}

int rank_of(const std::vector<AlgebraVector>& vs) {
  if (vs.empty()) return 0;
  Eigen::MatrixXd m(kAlgebraDim, static_cast<Index>(vs.size()));
  for (std::size_t c = 0; c < vs.size(); ++c)
    for (int k = 0; k < kAlgebraDim; ++k) m(k, static_cast<Index>(c)) = vs[c][static_cast<std::size_t>(k)];
  return static_cast<int>(Eigen::FullPivLU<Eigen::MatrixXd>(m).rank());
}

void require_model_basis(const BasisSpec& basis) {
  if (basis.velocity_dim() != 2 || basis.torus())
    throw ArgumentError("nilpotent", "the induced representation acts on the 2-d velocity basis");
}

}  // namespace

GradedLieAlgebra::GradedLieAlgebra() {
  set(Yp11, Ypp11, Y22, 1);
  set(Yp21, Ypp21, Y22, 1);
  set(Y12, Yp11, Y13, 1);
  set(Y12, Yp21, Y23, 1);
}

void GradedLieAlgebra::set(int i, int j, int k, int value) {
  c_[static_cast<std::size_t>((i * 8 + j) * 8 + k)] = value;
  c_[static_cast<std::size_t>((j * 8 + i) * 8 + k)] = -value;
}

std::string_view GradedLieAlgebra::label(int i) {
  check_index(i);
  return kLabels[static_cast<std::size_t>(i)];
}

int GradedLieAlgebra::degree(int i) {
  check_index(i);
  return kDegrees[static_cast<std::size_t>(i)];
}

int GradedLieAlgebra::index_of(std::string_view label) {
  for (int i = 0; i < kAlgebraDim; ++i)
    if (kLabels[static_cast<std::size_t>(i)] == label) return i;
  throw ArgumentError("nilpotent", "unknown algebra label '" + std::string(label) + "'");
}

AlgebraVector GradedLieAlgebra::bracket(int i, int j) const {
  check_index(i);
  check_index(j);
  AlgebraVector r{};
  for (int k = 0; k < kAlgebraDim; ++k) r[static_cast<std::size_t>(k)] = structure_constant(i, j, k);
  return r;
}

AlgebraVector GradedLieAlgebra::bracket(const AlgebraVector& x, const AlgebraVector& y) const {
  AlgebraVector r{};
  for (int i = 0; i < kAlgebraDim; ++i) {
    if (x[static_cast<std::size_t>(i)] == 0) continue;
    for (int j = 0; j < kAlgebraDim; ++j) {
      const int xy = x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)];
      if (xy == 0) continue;
      for (int k = 0; k < kAlgebraDim; ++k) r[static_cast<std::size_t>(k)] += xy * structure_constant(i, j, k);
    }
  }
  return r;
}

AlgebraVector basis_vector(int i) {
  check_index(i);
  AlgebraVector e{};
  e[static_cast<std::size_t>(i)] = 1;
  return e;
}

int generated_dimension(const GradedLieAlgebra& g, const std::vector<int>& generators) {
  std::vector<AlgebraVector> span;
  for (int i : generators) span.push_back(basis_vector(i));
  int rank = rank_of(span);
  for (bool grew = true; grew;) {
    grew = false;
    const std::vector<AlgebraVector> current = span;
    for (const auto& x : current)
      for (const auto& y : current) {
        const AlgebraVector z = g.bracket(x, y);
        if (is_zero(z)) continue;
        span.push_back(z);
        if (rank_of(span) > rank) {
          ++rank;
          grew = true;
        } else {
          span.pop_back();
        }
      }
  }
  return rank;
}

AlgebraReport verify_algebra(const GradedLieAlgebra& g) {
  AlgebraReport rep;
  for (int i = 0; i < kAlgebraDim; ++i)
    for (int j = 0; j < kAlgebraDim; ++j)
      for (int k = 0; k < kAlgebraDim; ++k) {
        if (g.structure_constant(i, j, k) != -g.structure_constant(j, i, k)) rep.antisymmetric = false;
        if (g.structure_constant(i, j, k) != 0 && GradedLieAlgebra::degree(k) != GradedLieAlgebra::degree(i) + GradedLieAlgebra::degree(j))
          rep.grading_ok = false;
      }

  for (int i = 0; i < kAlgebraDim; ++i)
    for (int j = i + 1; j < kAlgebraDim; ++j)
      for (int k = j + 1; k < kAlgebraDim; ++k) {
        const AlgebraVector ei = basis_vector(i), ej = basis_vector(j), ek = basis_vector(k);
        const AlgebraVector r =
            add(add(g.bracket(ei, g.bracket(ej, ek)), g.bracket(ej, g.bracket(ek, ei))), g.bracket(ek, g.bracket(ei, ej)));
        rep.jacobi.push_back({{i, j, k}, r});
        if (!is_zero(r)) rep.jacobi_ok = false;
      }

  rep.generated_dimension = generated_dimension(g, {Yp11, Yp21, Ypp11, Ypp21, Y12});

  const InducedFunctional f = InducedFunctional::for_rho(Eigen::Vector2d(0.7, 1.3));
  rep.functional_ok = f.subalgebra_closed(g) && f.vanishes_on_brackets(g);
  return rep;
}

UEAElement UEAElement::generator(int i) {
  check_index(i);
  UEAElement e;
  e.add(1.0, {i});
  return e;
}

UEAElement& UEAElement::add(Complex coefficient, std::vector<int> letters) {
  for (int l : letters) check_index(l);
  words_.push_back({coefficient, std::move(letters)});
  return *this;
}

Complex UEAElement::coefficient(const std::vector<int>& letters) const {
  Complex c = 0.0;
  for (const auto& w : words_)
    if (w.letters == letters) c += w.coefficient;
  return c;
}

UEAElement build_F(const Eigen::Vector2d& bprime) {
  const Complex ib1 = kI * bprime(0);
  const Complex ib2 = kI * bprime(1);
  const std::vector<UEAElement::Word> all = {
      {1.0, {Y12}},
      {-1.0, {Yp11, Yp11}},
      {-1.0, {Yp21, Yp21}},
      {-0.25, {Ypp11, Ypp11}},
      {-0.25, {Ypp21, Ypp21}},
      {-ib1, {Yp11, Ypp21}},
      {ib1, {Yp21, Ypp11}},
      {-ib2, {Ypp11, Ypp21}},
      {-ib2, {Yp11, Yp21}},
  };
  UEAElement f;
  for (const auto& w : all)
    if (w.coefficient != Complex(0.0)) f.add(w.coefficient, w.letters);
  return f;
}

InducedFunctional InducedFunctional::for_rho(const Eigen::Vector2d& rho) {
  InducedFunctional f;
  f.ell(Y22) = 1.0;
  f.ell(Y13) = -rho(0);
  f.ell(Y23) = -rho(1);
  f.subalgebra = {Ypp11, Ypp21, Y12, Y22, Y13, Y23};
  return f;
}

double InducedFunctional::operator()(const AlgebraVector& x) const {
  double s = 0.0;
  for (int k = 0; k < kAlgebraDim; ++k) s += ell(k) * x[static_cast<std::size_t>(k)];
  return s;
}

bool InducedFunctional::subalgebra_closed(const GradedLieAlgebra& g) const {
  std::vector<bool> in(kAlgebraDim, false);
  for (int i : subalgebra) in[static_cast<std::size_t>(i)] = true;
  for (int i : subalgebra)
    for (int j : subalgebra) {
      const AlgebraVector z = g.bracket(i, j);
      for (int k = 0; k < kAlgebraDim; ++k)
        if (z[static_cast<std::size_t>(k)] != 0 && !in[static_cast<std::size_t>(k)]) return false;
    }
  return true;
}

bool InducedFunctional::vanishes_on_brackets(const GradedLieAlgebra& g) const {
  for (int i : subalgebra)
    for (int j : subalgebra)
      if ((*this)(g.bracket(i, j)) != 0.0) return false;
  return true;
}

SparseMatrixC represent(int generator, const Eigen::Vector2d& rho, const BasisSpec& basis) {
  require_model_basis(basis);
  check_index(generator);
  switch (generator) {
    case Yp11: return derivative(0, basis);
    case Yp21: return derivative(1, basis);
    case Ypp11: return kI * position(0, basis);
    case Ypp21: return kI * position(1, basis);
    case Y12: return kI * (rho(0) * position(0, basis) + rho(1) * position(1, basis));
    default: {
      const double l = InducedFunctional::for_rho(rho)(basis_vector(generator));
      return (kI * l) * identity(basis.size());
    }
  }
}

SparseMatrixC represent(const UEAElement& e, const Eigen::Vector2d& rho, const BasisSpec& basis) {
  require_model_basis(basis);
  std::array<SparseMatrixC, kAlgebraDim> gens;
  for (int i = 0; i < kAlgebraDim; ++i) gens[static_cast<std::size_t>(i)] = represent(i, rho, basis);
  SparseMatrixC total(basis.size(), basis.size());
  for (const auto& w : e.words()) {
    SparseMatrixC m = identity(basis.size());
    for (int l : w.letters) m = SparseMatrixC(m * gens[static_cast<std::size_t>(l)]);
    total += w.coefficient * m;
  }
  total.prune(Complex(0.0));
  return total;
}

SparseMatrixC represent(const AlgebraVector& x, const Eigen::Vector2d& rho, const BasisSpec& basis) {
  SparseMatrixC total(basis.size(), basis.size());
  for (int i = 0; i < kAlgebraDim; ++i)
    if (x[static_cast<std::size_t>(i)] != 0)
      total += static_cast<double>(x[static_cast<std::size_t>(i)]) * represent(i, rho, basis);
  return total;
}

RocklandPoint rockland_probe(const Eigen::Vector2d& bprime, const Eigen::Vector2d& rho, const BasisSpec& basis,
                             int margin) {
  const SparseMatrixC f = represent(build_F(bprime), rho, basis);
  const auto cols = InteriorProjector{margin}.indices(basis);
  const SingularResult s = smallest_singular_value(column_block(f, cols));
  return {bprime, rho, s.sigma, s.iterations, s.converged};
}

std::string structure_constants_json(const GradedLieAlgebra& g) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["dimension"] = kAlgebraDim;
  for (int i = 0; i < kAlgebraDim; ++i) {
    j["labels"].push_back(GradedLieAlgebra::label(i));
    j["degrees"].push_back(GradedLieAlgebra::degree(i));
  }
  j["brackets"] = nlohmann::ordered_json::array();
  for (int i = 0; i < kAlgebraDim; ++i)
    for (int k = i + 1; k < kAlgebraDim; ++k) {
      const AlgebraVector z = g.bracket(i, k);
      if (is_zero(z)) continue;
      nlohmann::ordered_json entry;
      entry["x"] = GradedLieAlgebra::label(i);
      entry["y"] = GradedLieAlgebra::label(k);
      for (int m = 0; m < kAlgebraDim; ++m)
        if (z[static_cast<std::size_t>(m)] != 0) entry["result"][std::string(GradedLieAlgebra::label(m))] = z[static_cast<std::size_t>(m)];
      j["brackets"].push_back(entry);
    }
  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  for (int i = 0; i < kAlgebraDim; ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int k = 0; k < kAlgebraDim; ++k) {
      nlohmann::ordered_json col = nlohmann::ordered_json::array();
      for (int m = 0; m < kAlgebraDim; ++m) col.push_back(g.structure_constant(i, k, m));
      row.push_back(col);
    }
    table.push_back(row);
  }
  j["structure_constants"] = table;
  return j.dump(2);
}

}  // namespace kfp
