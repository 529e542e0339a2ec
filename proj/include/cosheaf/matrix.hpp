#pragma once

#include <algorithm>
#include <cstddef>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "cosheaf/errors.hpp"
#include "cosheaf/ring.hpp"

namespace cosheaf {

// Dense row-major matrix over a ring policy. Row vectors act on the left: x -> x * M.
template <class R>
class Matrix {
 public:
  using Scalar = typename R::Scalar;

  Matrix(R ring, std::size_t rows, std::size_t cols)
      : ring_(std::move(ring)), rows_(rows), cols_(cols), data_(rows * cols, ring_.zero()) {}

  static Matrix identity(const R& ring, std::size_t n) {
    Matrix m(ring, n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = ring.one();
    return m;
  }

  static Matrix from_rows(const R& ring, std::size_t cols, const std::vector<std::vector<Scalar>>& rows) {
    Matrix m(ring, rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != cols) throw DimensionError("ragged matrix literal");
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  // Integer literal rows, reduced into the ring.
  static Matrix from_ints(const R& ring, std::size_t cols, const std::vector<std::vector<long long>>& rows) {
    Matrix m(ring, rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != cols) throw DimensionError("ragged matrix literal");
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = ring.from_integer(Integer(rows[i][j]));
    }
    return m;
  }

  const R& ring() const noexcept { return ring_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  Scalar& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Scalar& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  Scalar* row(std::size_t i) { return data_.data() + i * cols_; }
  const Scalar* row(std::size_t i) const { return data_.data() + i * cols_; }

  std::vector<Scalar> row_vector(std::size_t i) const { return {row(i), row(i) + cols_}; }

  bool row_is_zero(std::size_t i) const {
    const Scalar* r = row(i);
    for (std::size_t j = 0; j < cols_; ++j) {
      if (!ring_.is_zero(r[j])) return false;
    }
    return true;
  }

  bool is_zero() const {
    for (const auto& x : data_) {
      if (!ring_.is_zero(x)) return false;
    }
    return true;
  }

  Matrix transpose() const {
    Matrix t(ring_, cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    }
    return t;
  }

  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) throw DimensionError("matrix block out of range");
    Matrix b(ring_, nr, nc);
    for (std::size_t i = 0; i < nr; ++i) {
      for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
    }
    return b;
  }

  Matrix select_rows(const std::vector<std::size_t>& idx) const {
    Matrix b(ring_, idx.size(), cols_);
    for (std::size_t i = 0; i < idx.size(); ++i) std::copy(row(idx[i]), row(idx[i]) + cols_, b.row(i));
    return b;
  }

  void set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
    if (r0 + b.rows_ > rows_ || c0 + b.cols_ > cols_) throw DimensionError("matrix block out of range");
    for (std::size_t i = 0; i < b.rows_; ++i) {
      for (std::size_t j = 0; j < b.cols_; ++j) (*this)(r0 + i, c0 + j) = b(i, j);
    }
  }

  void append_row(const std::vector<Scalar>& v) {
    if (v.size() != cols_) throw DimensionError("appended row has wrong length");
    data_.insert(data_.end(), v.begin(), v.end());
    ++rows_;
  }

  void append_rows(const Matrix& b) {
    if (b.cols_ != cols_) throw DimensionError("vertical stack with different widths");
    data_.insert(data_.end(), b.data_.begin(), b.data_.end());
    rows_ += b.rows_;
  }

  void resize_rows(std::size_t n) {
    data_.resize(n * cols_, ring_.zero());
    rows_ = n;
  }

  static Matrix vstack(const Matrix& a, const Matrix& b) {
    Matrix s = a;
    s.append_rows(b);
    return s;
  }

  static Matrix hstack(const Matrix& a, const Matrix& b) {
    if (a.rows_ != b.rows_) throw DimensionError("horizontal stack with different heights");
    Matrix s(a.ring_, a.rows_, a.cols_ + b.cols_);
    s.set_block(0, 0, a);
    s.set_block(0, a.cols_, b);
    return s;
  }

  void swap_rows(std::size_t i, std::size_t j) {
    if (i == j) return;
    std::swap_ranges(row(i), row(i) + cols_, row(j));
  }

  void swap_cols(std::size_t i, std::size_t j) {
    if (i == j) return;
    for (std::size_t r = 0; r < rows_; ++r) std::swap((*this)(r, i), (*this)(r, j));
  }

  // row_dst += c * row_src, starting at column from.
  void add_row_multiple(std::size_t dst, std::size_t src, const Scalar& c, std::size_t from = 0) {
    if (ring_.is_zero(c)) return;
    Scalar* d = row(dst);
    const Scalar* s = row(src);
    for (std::size_t j = from; j < cols_; ++j) {
      if (!ring_.is_zero(s[j])) ring_.add_mul(d[j], c, s[j]);
    }
  }

  void add_col_multiple(std::size_t dst, std::size_t src, const Scalar& c) {
    if (ring_.is_zero(c)) return;
    for (std::size_t r = 0; r < rows_; ++r) {
      const Scalar& s = (*this)(r, src);
      if (!ring_.is_zero(s)) ring_.add_mul((*this)(r, dst), c, s);
    }
  }

  void scale_row(std::size_t i, const Scalar& c, std::size_t from = 0) {
    Scalar* r = row(i);
    for (std::size_t j = from; j < cols_; ++j) {
      if (!ring_.is_zero(r[j])) r[j] = ring_.mul(c, r[j]);
    }
  }

  void scale_col(std::size_t j, const Scalar& c) {
    for (std::size_t r = 0; r < rows_; ++r) {
      if (!ring_.is_zero((*this)(r, j))) (*this)(r, j) = ring_.mul(c, (*this)(r, j));
    }
  }

  // (row_i, row_j) <- (a*row_i + b*row_j, c*row_i + d*row_j).
  void combine_rows(std::size_t i, std::size_t j, const Scalar& a, const Scalar& b, const Scalar& c,
                    const Scalar& d, std::size_t from = 0) {
    Scalar* ri = row(i);
    Scalar* rj = row(j);
    for (std::size_t k = from; k < cols_; ++k) {
      if (ring_.is_zero(ri[k]) && ring_.is_zero(rj[k])) continue;
      Scalar x = ring_.add(ring_.mul(a, ri[k]), ring_.mul(b, rj[k]));
      Scalar y = ring_.add(ring_.mul(c, ri[k]), ring_.mul(d, rj[k]));
      ri[k] = std::move(x);
      rj[k] = std::move(y);
    }
  }

  void combine_cols(std::size_t i, std::size_t j, const Scalar& a, const Scalar& b, const Scalar& c,
                    const Scalar& d) {
    for (std::size_t r = 0; r < rows_; ++r) {
      Scalar& xi = (*this)(r, i);
      Scalar& xj = (*this)(r, j);
      if (ring_.is_zero(xi) && ring_.is_zero(xj)) continue;
      Scalar x = ring_.add(ring_.mul(a, xi), ring_.mul(b, xj));
      Scalar y = ring_.add(ring_.mul(c, xi), ring_.mul(d, xj));
      xi = std::move(x);
      xj = std::move(y);
    }
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) {
      throw DimensionError("matrix product " + std::to_string(a.rows_) + "x" + std::to_string(a.cols_) +
                           " * " + std::to_string(b.rows_) + "x" + std::to_string(b.cols_));
    }
    const R& ring = a.ring_;
    Matrix c(ring, a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      Scalar* ci = c.row(i);
      const Scalar* ai = a.row(i);
      for (std::size_t k = 0; k < a.cols_; ++k) {
        if (ring.is_zero(ai[k])) continue;
        const Scalar* bk = b.row(k);
        for (std::size_t j = 0; j < b.cols_; ++j) {
          if (!ring.is_zero(bk[j])) ring.add_mul(ci[j], ai[k], bk[j]);
        }
      }
    }
    return c;
  }

  friend Matrix operator+(const Matrix& a, const Matrix& b) {
    a.require_same_shape(b);
    Matrix c = a;
    for (std::size_t k = 0; k < c.data_.size(); ++k) c.data_[k] = a.ring_.add(a.data_[k], b.data_[k]);
    return c;
  }

  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    a.require_same_shape(b);
    Matrix c = a;
    for (std::size_t k = 0; k < c.data_.size(); ++k) c.data_[k] = a.ring_.sub(a.data_[k], b.data_[k]);
    return c;
  }

  Matrix operator-() const {
    Matrix c = *this;
    for (auto& x : c.data_) x = ring_.neg(x);
    return c;
  }

  Matrix scaled(const Scalar& s) const {
    Matrix c = *this;
    for (auto& x : c.data_) x = ring_.mul(s, x);
    return c;
  }

  // Row vector times matrix.
  std::vector<Scalar> apply(const std::vector<Scalar>& v) const {
    if (v.size() != rows_) throw DimensionError("vector length does not match matrix rows");
    std::vector<Scalar> out(cols_, ring_.zero());
    for (std::size_t k = 0; k < rows_; ++k) {
      if (ring_.is_zero(v[k])) continue;
      const Scalar* bk = row(k);
      for (std::size_t j = 0; j < cols_; ++j) {
        if (!ring_.is_zero(bk[j])) ring_.add_mul(out[j], v[k], bk[j]);
      }
    }
    return out;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.ring_ == b.ring_ && a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  std::string to_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < rows_; ++i) {
      s += i ? ",[" : "[";
      for (std::size_t j = 0; j < cols_; ++j) {
        if (j) s += ",";
        s += ring_.format((*this)(i, j));
      }
      s += "]";
    }
    return s + "]";
  }

 private:
  void require_same_shape(const Matrix& b) const {
    if (rows_ != b.rows_ || cols_ != b.cols_) throw DimensionError("matrix shapes differ");
  }

  R ring_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Scalar> data_;
};

template <class R>
std::ostream& operator<<(std::ostream& os, const Matrix<R>& m) {
  return os << m.to_string();
}

}  // namespace cosheaf
