#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cosheaf/errors.hpp"
#include "cosheaf/linalg.hpp"
#include "cosheaf/matrix.hpp"
#include "cosheaf/ring.hpp"

namespace cosheaf {

// The module R^g / rowspan(relations).
template <class R>
class PresentedModule {
 public:
  using Scalar = typename R::Scalar;

  PresentedModule(R ring, std::size_t generators)
      : ring_(ring), generators_(generators), data_(std::make_shared<Data>(Matrix<R>(ring, 0, generators))) {}

  PresentedModule(R ring, std::size_t generators, Matrix<R> relations)
      : ring_(std::move(ring)), generators_(generators) {
    if (relations.cols() != generators_) {
      throw DimensionError("relation matrix has " + std::to_string(relations.cols()) + " columns for " +
                           std::to_string(generators_) + " generators");
    }
    if (!(relations.ring() == ring_)) throw RingMismatchError("relation matrix over a different ring");
    data_ = std::make_shared<Data>(std::move(relations));
  }

  explicit PresentedModule(Matrix<R> relations)
      : PresentedModule(relations.ring(), relations.cols(), relations) {}

  static PresentedModule zero(const R& ring) { return PresentedModule(ring, 0); }
  static PresentedModule free(const R& ring, std::size_t rank) { return PresentedModule(ring, rank); }
  // R / (order) on one generator.
  static PresentedModule cyclic(const R& ring, const Integer& order) {
    Matrix<R> rel(ring, 1, 1);
    rel(0, 0) = ring.from_integer(order);
    return PresentedModule(ring, 1, std::move(rel));
  }
  // Direct sum of cyclic modules R/(d_i); d_i = 0 gives a free summand.
  static PresentedModule cyclic_product(const R& ring, const std::vector<Integer>& orders) {
    Matrix<R> rel(ring, orders.size(), orders.size());
    for (std::size_t i = 0; i < orders.size(); ++i) rel(i, i) = ring.from_integer(orders[i]);
    return PresentedModule(ring, orders.size(), std::move(rel));
  }

  const R& ring() const noexcept { return ring_; }
  std::size_t generators() const noexcept { return generators_; }
  const Matrix<R>& relations() const noexcept { return data_->relations; }
  std::size_t relation_count() const noexcept { return data_->relations.rows(); }

  // Solver for membership in the relation submodule, built once and shared by copies.
  const RowSpaceSolver<R>& relation_solver() const {
    std::call_once(data_->once, [&] {
      data_->solver = std::make_unique<RowSpaceSolver<R>>(data_->relations, false);
    });
    return *data_->solver;
  }

  bool is_zero_element(const std::vector<Scalar>& v) const {
    if (v.size() != generators_) throw DimensionError("element has wrong length");
    return relation_solver().contains(v);
  }
  bool is_zero_element(const Scalar* v) const { return relation_solver().contains(v); }

  std::vector<Scalar> generator_vector(std::size_t i) const {
    std::vector<Scalar> v(generators_, ring_.zero());
    v.at(i) = ring_.one();
    return v;
  }

  friend bool operator==(const PresentedModule& a, const PresentedModule& b) {
    if (!(a.ring_ == b.ring_) || a.generators_ != b.generators_) return false;
    return a.data_ == b.data_ || a.data_->relations == b.data_->relations;
  }

 private:
  struct Data {
    explicit Data(Matrix<R> rel) : relations(std::move(rel)) {}
    Matrix<R> relations;
    std::once_flag once;
    std::unique_ptr<RowSpaceSolver<R>> solver;
  };

  R ring_;
  std::size_t generators_;
  std::shared_ptr<Data> data_;
};

// Invariant-factor description: R^free_rank + R/(d_1) + ... with d_1 | d_2 | ..., all d_i >= 2.
struct CanonicalForm {
  RingSpec ring;
  std::size_t free_rank = 0;
  std::vector<Integer> torsion;

  bool is_zero() const { return free_rank == 0 && torsion.empty(); }

  // e.g. "Z^2 + Z/2 + Z/4", "F5^3", "0".
  std::string to_string() const {
    if (is_zero()) return "0";
    std::string s;
    if (free_rank > 0) s = free_rank == 1 ? base_name() : base_name() + "^" + std::to_string(free_rank);
    for (const auto& d : torsion) {
      if (!s.empty()) s += " + ";
      s += "Z/" + d.to_string();
    }
    return s;
  }

  std::string base_name() const {
    switch (ring.kind) {
      case RingKind::kIntegers:
        return "Z";
      case RingKind::kRationals:
        return "Q";
      case RingKind::kPrimeField:
        return "F" + std::to_string(ring.p);
    }
    return "?";
  }

  friend bool operator==(const CanonicalForm&, const CanonicalForm&) = default;
};

template <class R>
CanonicalForm canonicalize(const PresentedModule<R>& m) {
  const R& ring = m.ring();
  CanonicalForm cf{ring.spec(), 0, {}};
  auto diag = smith_diagonal(m.relations());
  cf.free_rank = m.generators() - diag.size();
  for (const auto& d : diag) {
    if (!ring.is_unit(d)) cf.torsion.push_back(ring.to_integer(d));
  }
  return cf;
}

template <class R>
bool is_isomorphic(const PresentedModule<R>& a, const PresentedModule<R>& b) {
  if (!(a.ring() == b.ring())) throw RingMismatchError("is_isomorphic across different rings");
  return canonicalize(a) == canonicalize(b);
}

// Homomorphism given by the images of the domain generators (rows of the matrix).
template <class R>
class ModuleMap {
 public:
  ModuleMap(PresentedModule<R> domain, PresentedModule<R> codomain, Matrix<R> matrix)
      : domain_(std::move(domain)), codomain_(std::move(codomain)), matrix_(std::move(matrix)) {
    if (!(domain_.ring() == codomain_.ring()) || !(matrix_.ring() == domain_.ring())) {
      throw RingMismatchError("module map across different rings");
    }
    if (matrix_.rows() != domain_.generators() || matrix_.cols() != codomain_.generators()) {
      throw DimensionError("map matrix is " + std::to_string(matrix_.rows()) + "x" +
                           std::to_string(matrix_.cols()) + ", expected " +
                           std::to_string(domain_.generators()) + "x" + std::to_string(codomain_.generators()));
    }
  }

  static ModuleMap identity(const PresentedModule<R>& m) {
    return ModuleMap(m, m, Matrix<R>::identity(m.ring(), m.generators()));
  }
  static ModuleMap zero(const PresentedModule<R>& a, const PresentedModule<R>& b) {
    return ModuleMap(a, b, Matrix<R>(a.ring(), a.generators(), b.generators()));
  }

  const PresentedModule<R>& domain() const noexcept { return domain_; }
  const PresentedModule<R>& codomain() const noexcept { return codomain_; }
  const Matrix<R>& matrix() const noexcept { return matrix_; }
  const R& ring() const noexcept { return domain_.ring(); }

 private:
  PresentedModule<R> domain_;
  PresentedModule<R> codomain_;
  Matrix<R> matrix_;
};

// Index of the first domain relation not carried into the codomain relations, if any.
template <class R>
std::optional<std::size_t> well_definedness_violation(const ModuleMap<R>& f) {
  const auto& rel = f.domain().relations();
  if (rel.rows() == 0) return std::nullopt;
  Matrix<R> img = rel * f.matrix();
  const auto& solver = f.codomain().relation_solver();
  for (std::size_t i = 0; i < img.rows(); ++i) {
    if (!solver.contains(img.row(i))) return i;
  }
  return std::nullopt;
}

template <class R>
bool is_well_defined(const ModuleMap<R>& f) {
  return !well_definedness_violation(f).has_value();
}

template <class R>
void require_well_defined(const ModuleMap<R>& f, const std::string& context = "map") {
  if (auto bad = well_definedness_violation(f)) {
    throw WellDefinednessError(context + " is not well defined: domain relation " + std::to_string(*bad) +
                                   " does not map into the codomain relations",
                               *bad);
  }
}

// g after f.
template <class R>
ModuleMap<R> compose(const ModuleMap<R>& g, const ModuleMap<R>& f) {
  if (!(f.codomain() == g.domain())) throw DimensionError("compose: codomain and domain differ");
  return ModuleMap<R>(f.domain(), g.codomain(), f.matrix() * g.matrix());
}

template <class R>
ModuleMap<R> add(const ModuleMap<R>& f, const ModuleMap<R>& g) {
  if (!(f.domain() == g.domain()) || !(f.codomain() == g.codomain())) {
    throw DimensionError("add: maps have different domains or codomains");
  }
  return ModuleMap<R>(f.domain(), f.codomain(), f.matrix() + g.matrix());
}

template <class R>
ModuleMap<R> negate(const ModuleMap<R>& f) {
  return ModuleMap<R>(f.domain(), f.codomain(), -f.matrix());
}

// Generator index whose image is nonzero, if any.
template <class R>
std::optional<std::size_t> nonzero_generator(const ModuleMap<R>& f) {
  const auto& solver = f.codomain().relation_solver();
  for (std::size_t i = 0; i < f.matrix().rows(); ++i) {
    if (!solver.contains(f.matrix().row(i))) return i;
  }
  return std::nullopt;
}

template <class R>
bool is_zero_map(const ModuleMap<R>& f) {
  return !nonzero_generator(f).has_value();
}

template <class R>
bool maps_equal(const ModuleMap<R>& f, const ModuleMap<R>& g) {
  return is_zero_map(ModuleMap<R>(f.domain(), f.codomain(), f.matrix() - g.matrix()));
}

// Module N/D for submodules D of N of an ambient free module; generators are a basis of N.
template <class R>
class Subquotient {
 public:
  using Scalar = typename R::Scalar;

  Subquotient(const Matrix<R>& numerator, const Matrix<R>& denominator)
      : basis_(row_space_basis(numerator)),
        solver_(std::make_shared<RowSpaceSolver<R>>(basis_)),
        module_(basis_.ring(), basis_.rows()) {
    Matrix<R> rel(basis_.ring(), 0, basis_.rows());
    for (std::size_t i = 0; i < denominator.rows(); ++i) {
      if (denominator.row_is_zero(i)) continue;
      auto c = solver_->solve(denominator.row(i));
      if (!c) throw InvariantError("subquotient denominator is not contained in the numerator");
      rel.append_row(*c);
    }
    module_ = PresentedModule<R>(basis_.ring(), basis_.rows(), std::move(rel));
  }

  const PresentedModule<R>& module() const noexcept { return module_; }
  // Representatives in the ambient module, one row per generator.
  const Matrix<R>& basis() const noexcept { return basis_; }
  std::size_t ambient_rank() const noexcept { return basis_.cols(); }

  // Coordinates of an ambient vector lying in the numerator.
  std::optional<std::vector<Scalar>> coordinates(const Scalar* v) const { return solver_->solve(v); }
  std::optional<std::vector<Scalar>> coordinates(const std::vector<Scalar>& v) const {
    return solver_->solve(v.data());
  }
  bool contains(const Scalar* v) const { return solver_->contains(v); }

 private:
  Matrix<R> basis_;
  std::shared_ptr<const RowSpaceSolver<R>> solver_;
  PresentedModule<R> module_;
};

// The map between subquotients induced by an ambient matrix (rows of source basis pushed through).
template <class R>
ModuleMap<R> induced_map(const Subquotient<R>& source, const Subquotient<R>& target, const Matrix<R>& ambient) {
  Matrix<R> images = source.basis() * ambient;
  Matrix<R> m(source.basis().ring(), images.rows(), target.module().generators());
  for (std::size_t i = 0; i < images.rows(); ++i) {
    auto c = target.coordinates(images.row(i));
    if (!c) throw InvariantError("induced map leaves the target subquotient");
    for (std::size_t j = 0; j < c->size(); ++j) m(i, j) = (*c)[j];
  }
  return ModuleMap<R>(source.module(), target.module(), std::move(m));
}

namespace detail {

// Generators of {x in R^g : x * F lies in rowspan(rel)}.
template <class R>
Matrix<R> preimage_lift(const Matrix<R>& f, const Matrix<R>& rel) {
  const R& ring = f.ring();
  const std::size_t g = f.rows();
  const std::size_t h = f.cols();
  Matrix<R> stacked(ring, g + rel.rows(), h + g);
  stacked.set_block(0, 0, f);
  for (std::size_t i = 0; i < g; ++i) stacked(i, h + i) = ring.one();
  stacked.set_block(g, 0, rel);
  auto pivots = echelonize(stacked, h);
  return stacked.block(pivots.size(), h, stacked.rows() - pivots.size(), g);
}

template <class R>
Matrix<R> kernel_lift(const ModuleMap<R>& f) {
  return preimage_lift(f.matrix(), f.codomain().relations());
}

}  // namespace detail

template <class R>
struct KernelResult {
  Subquotient<R> data;
  ModuleMap<R> inclusion;
  const PresentedModule<R>& module() const { return data.module(); }
};

template <class R>
struct CokernelResult {
  PresentedModule<R> module;
  ModuleMap<R> projection;
};

template <class R>
struct ImageResult {
  PresentedModule<R> module;
  ModuleMap<R> inclusion;
  ModuleMap<R> corestriction;
};

template <class R>
KernelResult<R> kernel(const ModuleMap<R>& f) {
  require_well_defined(f, "kernel argument");
  Subquotient<R> sq(detail::kernel_lift(f), f.domain().relations());
  ModuleMap<R> incl(sq.module(), f.domain(), sq.basis());
  return {std::move(sq), std::move(incl)};
}

template <class R>
CokernelResult<R> cokernel(const ModuleMap<R>& f) {
  require_well_defined(f, "cokernel argument");
  PresentedModule<R> c(f.ring(), f.codomain().generators(),
                       Matrix<R>::vstack(f.codomain().relations(), f.matrix()));
  ModuleMap<R> proj(f.codomain(), c, Matrix<R>::identity(f.ring(), f.codomain().generators()));
  return {c, proj};
}

template <class R>
ImageResult<R> image(const ModuleMap<R>& f) {
  require_well_defined(f, "image argument");
  PresentedModule<R> im(f.ring(), f.domain().generators(), row_space_basis(detail::kernel_lift(f)));
  ModuleMap<R> incl(im, f.codomain(), f.matrix());
  ModuleMap<R> co(f.domain(), im, Matrix<R>::identity(f.ring(), f.domain().generators()));
  return {im, incl, co};
}

template <class R>
bool is_injective(const ModuleMap<R>& f) {
  return canonicalize(kernel(f).module()).is_zero();
}

template <class R>
bool is_surjective(const ModuleMap<R>& f) {
  return canonicalize(cokernel(f).module).is_zero();
}

template <class R>
bool is_isomorphism(const ModuleMap<R>& f) {
  return is_injective(f) && is_surjective(f);
}

namespace detail {

template <class R>
void require_composite_zero(const ModuleMap<R>& f_in, const ModuleMap<R>& f_out) {
  if (!(f_in.codomain() == f_out.domain())) {
    throw DimensionError("homology_at: codomain of the incoming map differs from domain of the outgoing map");
  }
  ModuleMap<R> comp(f_in.domain(), f_out.codomain(), f_in.matrix() * f_out.matrix());
  if (auto g = nonzero_generator(comp)) {
    throw CompositeNonzeroError("homology_at: composite is nonzero on generator " + std::to_string(*g), *g);
  }
}

// ker(f_out) / im(f_in), no validation.
template <class R>
Subquotient<R> homology_unchecked(const ModuleMap<R>& f_in, const ModuleMap<R>& f_out) {
  return Subquotient<R>(kernel_lift(f_out), Matrix<R>::vstack(f_out.domain().relations(), f_in.matrix()));
}

}  // namespace detail

// ker(f_out) / im(f_in) with cycle representatives.
template <class R>
Subquotient<R> homology_data(const ModuleMap<R>& f_in, const ModuleMap<R>& f_out) {
  require_well_defined(f_in, "incoming map");
  require_well_defined(f_out, "outgoing map");
  detail::require_composite_zero(f_in, f_out);
  return detail::homology_unchecked(f_in, f_out);
}

template <class R>
PresentedModule<R> homology_at(const ModuleMap<R>& f_in, const ModuleMap<R>& f_out) {
  return homology_data(f_in, f_out).module();
}

template <class R>
struct DirectSum {
  PresentedModule<R> module;
  std::vector<std::size_t> offsets;
  std::vector<ModuleMap<R>> injections;
  std::vector<ModuleMap<R>> projections;
};

template <class R>
Matrix<R> block_diagonal(const R& ring, const std::vector<const Matrix<R>*>& blocks) {
  std::size_t rows = 0, cols = 0;
  for (auto* b : blocks) {
    rows += b->rows();
    cols += b->cols();
  }
  Matrix<R> m(ring, rows, cols);
  std::size_t r = 0, c = 0;
  for (auto* b : blocks) {
    m.set_block(r, c, *b);
    r += b->rows();
    c += b->cols();
  }
  return m;
}

// Block presentation of a sum, without the structure maps.
template <class R>
PresentedModule<R> direct_sum_module(const R& ring, const std::vector<PresentedModule<R>>& ms) {
  std::vector<const Matrix<R>*> rels;
  std::size_t g = 0;
  for (const auto& m : ms) {
    if (!(m.ring() == ring)) throw RingMismatchError("direct_sum across different rings");
    rels.push_back(&m.relations());
    g += m.generators();
  }
  return PresentedModule<R>(ring, g, block_diagonal(ring, rels));
}

template <class R>
DirectSum<R> direct_sum(const R& ring, const std::vector<PresentedModule<R>>& ms) {
  DirectSum<R> s{direct_sum_module(ring, ms), {}, {}, {}};
  std::size_t off = 0;
  for (const auto& m : ms) {
    s.offsets.push_back(off);
    Matrix<R> inj(ring, m.generators(), s.module.generators());
    Matrix<R> proj(ring, s.module.generators(), m.generators());
    for (std::size_t i = 0; i < m.generators(); ++i) {
      inj(i, off + i) = ring.one();
      proj(off + i, i) = ring.one();
    }
    s.injections.emplace_back(m, s.module, std::move(inj));
    s.projections.emplace_back(s.module, m, std::move(proj));
    off += m.generators();
  }
  return s;
}

// Hom(M, N) as a submodule of N^g, g = generators of M; an element is the g x h matrix of images.
template <class R>
class HomModule {
 public:
  using Scalar = typename R::Scalar;

  HomModule(PresentedModule<R> source, PresentedModule<R> target)
      : source_(std::move(source)), target_(std::move(target)), data_(build(source_, target_)) {}

  const PresentedModule<R>& module() const noexcept { return data_.module(); }
  const PresentedModule<R>& source() const noexcept { return source_; }
  const PresentedModule<R>& target() const noexcept { return target_; }

  // The homomorphism represented by generator i of the Hom module.
  ModuleMap<R> generator_map(std::size_t i) const { return element_map(data_.basis().row_vector(i), true); }

  // The homomorphism with the given coordinates in the Hom module.
  ModuleMap<R> element(const std::vector<Scalar>& coords) const {
    return element_map(module_generators_matrix().apply(coords), true);
  }

  std::vector<Scalar> coordinates(const ModuleMap<R>& phi) const {
    if (!(phi.domain() == source_) || !(phi.codomain() == target_)) {
      throw DimensionError("homomorphism does not match Hom module");
    }
    auto flat = flatten(phi.matrix());
    auto c = data_.coordinates(flat);
    if (!c) throw WellDefinednessError("homomorphism is not well defined", 0);
    return *c;
  }

  // Coordinates of a g x h matrix known to be a homomorphism.
  std::vector<Scalar> coordinates_of_matrix(const Matrix<R>& phi) const {
    auto c = data_.coordinates(flatten(phi));
    if (!c) throw WellDefinednessError("matrix is not a homomorphism", 0);
    return *c;
  }

  const Subquotient<R>& data() const noexcept { return data_; }

 private:
  const Matrix<R>& module_generators_matrix() const { return data_.basis(); }

  ModuleMap<R> element_map(const std::vector<Scalar>& flat, bool) const {
    const std::size_t g = source_.generators();
    const std::size_t h = target_.generators();
    Matrix<R> phi(source_.ring(), g, h);
    for (std::size_t i = 0; i < g; ++i) {
      for (std::size_t j = 0; j < h; ++j) phi(i, j) = flat[i * h + j];
    }
    return ModuleMap<R>(source_, target_, std::move(phi));
  }

  std::vector<Scalar> flatten(const Matrix<R>& phi) const {
    std::vector<Scalar> v;
    v.reserve(phi.rows() * phi.cols());
    for (std::size_t i = 0; i < phi.rows(); ++i) {
      for (std::size_t j = 0; j < phi.cols(); ++j) v.push_back(phi(i, j));
    }
    return v;
  }

  static Subquotient<R> build(const PresentedModule<R>& m, const PresentedModule<R>& n) {
    if (!(m.ring() == n.ring())) throw RingMismatchError("hom_module across different rings");
    const R& ring = m.ring();
    const std::size_t g = m.generators();
    const std::size_t h = n.generators();
    const std::size_t r = m.relation_count();
    const auto& rel_m = m.relations();
    const auto& rel_n = n.relations();
    // Relations of N^g.
    Matrix<R> denom(ring, g * rel_n.rows(), g * h);
    for (std::size_t i = 0; i < g; ++i) denom.set_block(i * rel_n.rows(), i * h, rel_n);
    if (r == 0) return Subquotient<R>(Matrix<R>::identity(ring, g * h), denom);
    // Phi -> Rel_M * Phi, as a map N^g -> N^r.
    Matrix<R> psi(ring, g * h, r * h);
    for (std::size_t i = 0; i < g; ++i) {
      for (std::size_t a = 0; a < r; ++a) {
        if (ring.is_zero(rel_m(a, i))) continue;
        for (std::size_t j = 0; j < h; ++j) psi(i * h + j, a * h + j) = rel_m(a, i);
      }
    }
    Matrix<R> rel_nr(ring, r * rel_n.rows(), r * h);
    for (std::size_t a = 0; a < r; ++a) rel_nr.set_block(a * rel_n.rows(), a * h, rel_n);
    return Subquotient<R>(detail::preimage_lift(psi, rel_nr), denom);
  }

  PresentedModule<R> source_;
  PresentedModule<R> target_;
  Subquotient<R> data_;
};

template <class R>
PresentedModule<R> hom_module(const PresentedModule<R>& m, const PresentedModule<R>& n) {
  return HomModule<R>(m, n).module();
}

// Hom(M, N) -> Hom(M', N), phi -> phi . f, for f: M' -> M.
template <class R>
ModuleMap<R> hom_precompose(const ModuleMap<R>& f, const HomModule<R>& hom_mn, const HomModule<R>& hom_m2n) {
  if (!(f.codomain() == hom_mn.source()) || !(f.domain() == hom_m2n.source()) ||
      !(hom_mn.target() == hom_m2n.target())) {
    throw DimensionError("hom_precompose: modules do not match");
  }
  const auto& src = hom_mn.module();
  Matrix<R> m(f.ring(), src.generators(), hom_m2n.module().generators());
  for (std::size_t k = 0; k < src.generators(); ++k) {
    Matrix<R> phi = f.matrix() * hom_mn.generator_map(k).matrix();
    auto c = hom_m2n.coordinates_of_matrix(phi);
    for (std::size_t j = 0; j < c.size(); ++j) m(k, j) = c[j];
  }
  return ModuleMap<R>(src, hom_m2n.module(), std::move(m));
}

// Hom(M, N) -> Hom(M, N'), phi -> g . phi, for g: N -> N'.
template <class R>
ModuleMap<R> hom_postcompose(const ModuleMap<R>& g, const HomModule<R>& hom_mn, const HomModule<R>& hom_mn2) {
  if (!(g.domain() == hom_mn.target()) || !(g.codomain() == hom_mn2.target()) ||
      !(hom_mn.source() == hom_mn2.source())) {
    throw DimensionError("hom_postcompose: modules do not match");
  }
  const auto& src = hom_mn.module();
  Matrix<R> m(g.ring(), src.generators(), hom_mn2.module().generators());
  for (std::size_t k = 0; k < src.generators(); ++k) {
    Matrix<R> phi = hom_mn.generator_map(k).matrix() * g.matrix();
    auto c = hom_mn2.coordinates_of_matrix(phi);
    for (std::size_t j = 0; j < c.size(); ++j) m(k, j) = c[j];
  }
  return ModuleMap<R>(src, hom_mn2.module(), std::move(m));
}

template <class R>
struct Simplification {
  PresentedModule<R> module;
  ModuleMap<R> to;    // original -> simplified
  ModuleMap<R> from;  // simplified -> original
};

// An isomorphic presentation in Smith form with unit factors removed, and the isomorphisms.
template <class R>
Simplification<R> simplify(const PresentedModule<R>& m) {
  const R& ring = m.ring();
  const std::size_t g = m.generators();
  auto f = smith_normal_form(m.relations());
  const std::size_t diag = std::min(f.d.rows(), f.d.cols());
  std::vector<std::size_t> keep;
  std::vector<typename R::Scalar> orders;
  for (std::size_t j = 0; j < g; ++j) {
    auto d = j < diag ? f.d(j, j) : ring.zero();
    if (ring.is_unit(d)) continue;
    keep.push_back(j);
    orders.push_back(d);
  }
  Matrix<R> rel(ring, 0, keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    if (ring.is_zero(orders[k])) continue;
    std::vector<typename R::Scalar> row(keep.size(), ring.zero());
    row[k] = orders[k];
    rel.append_row(row);
  }
  PresentedModule<R> out(ring, keep.size(), std::move(rel));
  Matrix<R> to(ring, g, keep.size());
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t k = 0; k < keep.size(); ++k) to(i, k) = f.v(i, keep[k]);
  }
  RowSpaceSolver<R> solver(f.v);
  Matrix<R> from(ring, keep.size(), g);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    std::vector<typename R::Scalar> e(g, ring.zero());
    e[keep[k]] = ring.one();
    // Row keep[k] of the inverse of v.
    auto c = solver.solve(e);
    if (!c) throw InvariantError("simplify: column transform is not invertible");
    for (std::size_t i = 0; i < g; ++i) from(k, i) = (*c)[i];
  }
  return {out, ModuleMap<R>(m, out, std::move(to)), ModuleMap<R>(out, m, std::move(from))};
}

}  // namespace cosheaf
