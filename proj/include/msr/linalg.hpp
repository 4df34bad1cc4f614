#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "msr/gf.hpp"

namespace msr {

// Dense ops reject anything taller than this unless the caller raises the
// cap; the library targets exact desk-scale verification, not bulk algebra.
inline constexpr std::size_t kDenseRowCap = 4096;

// Dense row-major matrix over one field context. All arithmetic is exact.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0) {}
  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  fe_t& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  fe_t at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  fe_t* row(std::size_t i) { return data_.data() + i * cols_; }
  const fe_t* row(std::size_t i) const { return data_.data() + i * cols_; }
  bool operator==(const Matrix&) const = default;

private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<fe_t> data_;
};

Matrix mat_mul(const FieldContext& gf, const Matrix& a, const Matrix& b);
std::vector<fe_t> mat_vec(const FieldContext& gf, const Matrix& a,
                          std::span<const fe_t> x);

// Gaussian elimination with first-nonzero pivoting. det is exact; solve and
// inverse raise singular-matrix; all four raise capacity above row_cap.
fe_t det(const FieldContext& gf, Matrix m, std::size_t row_cap = kDenseRowCap);
Matrix solve(const FieldContext& gf, Matrix a, Matrix rhs,
             std::size_t row_cap = kDenseRowCap);
Matrix inverse(const FieldContext& gf, const Matrix& a,
               std::size_t row_cap = kDenseRowCap);
std::size_t rank(const FieldContext& gf, Matrix m,
                 std::size_t row_cap = kDenseRowCap);

Matrix kron(const FieldContext& gf, const Matrix& a, const Matrix& b);
Matrix hconcat(const std::vector<const Matrix*>& parts);
Matrix vconcat(const std::vector<const Matrix*>& parts);

// Index permutation pi in row form: matrix() has entry (i, pi(i)) = 1.
struct Permutation {
  std::vector<std::uint32_t> map;  // map[i] = pi(i)

  std::size_t size() const { return map.size(); }
  static Permutation identity(std::size_t n);
  Permutation inverse() const;
  Matrix matrix() const;
};

// permute_rows(p, m) = p.matrix() * m; permute_cols(m, p) = m * p.matrix().
Matrix permute_rows(const Permutation& p, const Matrix& m);
Matrix permute_cols(const Matrix& m, const Permutation& p);
std::vector<fe_t> permute_vec(const Permutation& p, const std::vector<fe_t>& v);

}  // namespace msr
