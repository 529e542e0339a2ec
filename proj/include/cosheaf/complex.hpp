#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cosheaf/errors.hpp"
#include "cosheaf/kmod.hpp"

namespace cosheaf {

// Chain complex C_0 <- C_1 <- ... <- C_top. boundaries[k] is the matrix of d_{k+1}: C_{k+1} -> C_k.
// A truncated complex only knows C_n for n <= top, so homology is available below top.
template <class R>
class ChainComplex {
 public:
  ChainComplex(R ring, std::vector<PresentedModule<R>> modules, std::vector<Matrix<R>> boundaries, bool truncated)
      : ring_(std::move(ring)), modules_(std::move(modules)), boundaries_(std::move(boundaries)), truncated_(truncated) {
    if (modules_.empty()) modules_.push_back(PresentedModule<R>::zero(ring_));
    if (boundaries_.size() + 1 != modules_.size()) throw DimensionError("one boundary per positive degree expected");
    for (std::size_t k = 0; k < boundaries_.size(); ++k) {
      if (boundaries_[k].rows() != modules_[k + 1].generators() || boundaries_[k].cols() != modules_[k].generators()) {
        throw DimensionError("boundary out of degree " + std::to_string(k + 1) + " has the wrong shape");
      }
    }
  }

  const R& ring() const noexcept { return ring_; }
  std::size_t top_degree() const noexcept { return modules_.size() - 1; }
  bool truncated() const noexcept { return truncated_; }

  PresentedModule<R> module(std::size_t n) const {
    return n < modules_.size() ? modules_[n] : PresentedModule<R>::zero(ring_);
  }

  // d_n : C_n -> C_{n-1}, with C_{-1} = 0.
  ModuleMap<R> boundary(std::size_t n) const {
    if (n == 0) return ModuleMap<R>(module(0), PresentedModule<R>::zero(ring_), Matrix<R>(ring_, module(0).generators(), 0));
    if (n > top_degree()) {
      return ModuleMap<R>(module(n), module(n - 1), Matrix<R>(ring_, 0, module(n - 1).generators()));
    }
    return ModuleMap<R>(modules_[n], modules_[n - 1], boundaries_[n - 1]);
  }

  // First degree n with d_{n-1} d_n != 0, or with an ill-defined boundary.
  std::optional<std::size_t> dd_violation() const {
    for (std::size_t n = 1; n <= top_degree(); ++n) {
      if (well_definedness_violation(boundary(n))) return n;
      if (n >= 2) {
        ModuleMap<R> dd(modules_[n], modules_[n - 2], boundaries_[n - 1] * boundaries_[n - 2]);
        if (!is_zero_map(dd)) return n;
      }
    }
    return std::nullopt;
  }

  void validate() const {
    if (auto n = dd_violation()) throw InvariantError("d o d is nonzero at degree " + std::to_string(*n));
  }

  Subquotient<R> homology_data(std::size_t n) const {
    require_known(n);
    return detail::homology_unchecked(boundary(n + 1), boundary(n));
  }
  PresentedModule<R> homology(std::size_t n) const { return homology_data(n).module(); }

 private:
  void require_known(std::size_t n) const {
    if (truncated_ && n >= top_degree()) {
      throw DimensionError("homology in degree " + std::to_string(n) + " needs the complex through degree " +
                           std::to_string(n + 1));
    }
  }

  R ring_;
  std::vector<PresentedModule<R>> modules_;
  std::vector<Matrix<R>> boundaries_;
  bool truncated_;
};

// Cochain complex C^0 -> C^1 -> ... -> C^top. coboundaries[k] is the matrix of delta_k: C^k -> C^{k+1}.
template <class R>
class CochainComplex {
 public:
  CochainComplex(R ring, std::vector<PresentedModule<R>> modules, std::vector<Matrix<R>> coboundaries, bool truncated)
      : ring_(std::move(ring)), modules_(std::move(modules)), coboundaries_(std::move(coboundaries)), truncated_(truncated) {
    if (modules_.empty()) modules_.push_back(PresentedModule<R>::zero(ring_));
    if (coboundaries_.size() + 1 != modules_.size()) throw DimensionError("one coboundary per degree below top expected");
    for (std::size_t k = 0; k < coboundaries_.size(); ++k) {
      if (coboundaries_[k].rows() != modules_[k].generators() || coboundaries_[k].cols() != modules_[k + 1].generators()) {
        throw DimensionError("coboundary out of degree " + std::to_string(k) + " has the wrong shape");
      }
    }
  }

  const R& ring() const noexcept { return ring_; }
  std::size_t top_degree() const noexcept { return modules_.size() - 1; }
  bool truncated() const noexcept { return truncated_; }

  PresentedModule<R> module(std::size_t n) const {
    return n < modules_.size() ? modules_[n] : PresentedModule<R>::zero(ring_);
  }

  // delta_n : C^n -> C^{n+1}.
  ModuleMap<R> coboundary(std::size_t n) const {
    if (n >= top_degree()) {
      return ModuleMap<R>(module(n), module(n + 1), Matrix<R>(ring_, module(n).generators(), module(n + 1).generators()));
    }
    return ModuleMap<R>(modules_[n], modules_[n + 1], coboundaries_[n]);
  }

  std::optional<std::size_t> dd_violation() const {
    for (std::size_t n = 0; n < coboundaries_.size(); ++n) {
      if (well_definedness_violation(coboundary(n))) return n;
      if (n + 1 < coboundaries_.size()) {
        ModuleMap<R> dd(modules_[n], modules_[n + 2], coboundaries_[n] * coboundaries_[n + 1]);
        if (!is_zero_map(dd)) return n;
      }
    }
    return std::nullopt;
  }

  void validate() const {
    if (auto n = dd_violation()) throw InvariantError("delta o delta is nonzero at degree " + std::to_string(*n));
  }

  // ker(delta_n) / im(delta_{n-1}).
  Subquotient<R> cohomology_data(std::size_t n) const {
    if (truncated_ && n >= top_degree()) {
      throw DimensionError("cohomology in degree " + std::to_string(n) + " needs the complex through degree " +
                           std::to_string(n + 1));
    }
    ModuleMap<R> in = n == 0 ? ModuleMap<R>(PresentedModule<R>::zero(ring_), module(0),
                                            Matrix<R>(ring_, 0, module(0).generators()))
                             : coboundary(n - 1);
    return detail::homology_unchecked(in, coboundary(n));
  }
  PresentedModule<R> cohomology(std::size_t n) const { return cohomology_data(n).module(); }

 private:
  R ring_;
  std::vector<PresentedModule<R>> modules_;
  std::vector<Matrix<R>> coboundaries_;
  bool truncated_;
};

// Degreewise matrices of a chain map C -> D.
template <class R>
struct ChainMap {
  std::vector<Matrix<R>> components;

  ModuleMap<R> on_homology(const ChainComplex<R>& source, const ChainComplex<R>& target, std::size_t n) const {
    return induced_map(source.homology_data(n), target.homology_data(n), components.at(n));
  }
};

}  // namespace cosheaf
