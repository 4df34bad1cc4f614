#include "msr/linalg.hpp"

#include <string>
#include <utility>

namespace msr {

namespace {

void check_cap(std::size_t rows, std::size_t row_cap) {
  if (rows > row_cap)
    fail(ErrorClass::capacity,
         "dense operation on " + std::to_string(rows) +
             " rows exceeds the configured cap of " + std::to_string(row_cap));
}

// In-place row reduction shared by det/rank. Returns (pivot count, det of the
// leading square part). Pivoting picks the first nonzero entry in the column.
std::pair<std::size_t, fe_t> forward_eliminate(const FieldContext& gf,
                                               Matrix& m) {
  const std::size_t rows = m.rows(), cols = m.cols();
  std::size_t pivots = 0;
  fe_t d = 1;
  for (std::size_t c = 0; c < cols && pivots < rows; ++c) {
    std::size_t piv = pivots;
    while (piv < rows && m.at(piv, c) == 0) ++piv;
    if (piv == rows) {
      d = 0;
      continue;
    }
    if (piv != pivots) {
      for (std::size_t j = 0; j < cols; ++j)
        std::swap(m.at(piv, j), m.at(pivots, j));
      d = gf.neg(d);
    }
    const fe_t p = m.at(pivots, c);
    d = gf.mul(d, p);
    const fe_t ip = gf.inv(p);
    for (std::size_t r = pivots + 1; r < rows; ++r) {
      const fe_t f = gf.mul(m.at(r, c), ip);
      if (f == 0) continue;
      for (std::size_t j = c; j < cols; ++j)
        m.at(r, j) = gf.sub(m.at(r, j), gf.mul(f, m.at(pivots, j)));
    }
    ++pivots;
  }
  return {pivots, d};
}

}  // namespace

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

Matrix mat_mul(const FieldContext& gf, const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    fail(ErrorClass::invalid_argument, "mat_mul shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const fe_t v = a.at(i, k);
      if (v == 0) continue;
      const fe_t* brow = b.row(k);
      fe_t* crow = c.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j)
        crow[j] = gf.add(crow[j], gf.mul(v, brow[j]));
    }
  }
  return c;
}

std::vector<fe_t> mat_vec(const FieldContext& gf, const Matrix& a,
                          std::span<const fe_t> x) {
  if (a.cols() != x.size())
    fail(ErrorClass::invalid_argument, "mat_vec shape mismatch");
  std::vector<fe_t> y(a.rows(), 0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const fe_t* row = a.row(i);
    fe_t acc = 0;
    for (std::size_t j = 0; j < x.size(); ++j)
      acc = gf.add(acc, gf.mul(row[j], x[j]));
    y[i] = acc;
  }
  return y;
}

fe_t det(const FieldContext& gf, Matrix m, std::size_t row_cap) {
  if (m.rows() != m.cols())
    fail(ErrorClass::invalid_argument, "det requires a square matrix");
  check_cap(m.rows(), row_cap);
  auto [pivots, d] = forward_eliminate(gf, m);
  return pivots == m.rows() ? d : fe_t{0};
}

Matrix solve(const FieldContext& gf, Matrix a, Matrix rhs,
             std::size_t row_cap) {
  if (a.rows() != a.cols() || a.rows() != rhs.rows())
    fail(ErrorClass::invalid_argument, "solve shape mismatch");
  check_cap(a.rows(), row_cap);
  const std::size_t n = a.rows(), w = rhs.cols();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && a.at(piv, c) == 0) ++piv;
    if (piv == n)
      fail(ErrorClass::singular_matrix,
           "singular system (no pivot in column " + std::to_string(c) + ")");
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a.at(piv, j), a.at(c, j));
      for (std::size_t j = 0; j < w; ++j)
        std::swap(rhs.at(piv, j), rhs.at(c, j));
    }
    const fe_t ip = gf.inv(a.at(c, c));
    for (std::size_t j = 0; j < n; ++j) a.at(c, j) = gf.mul(ip, a.at(c, j));
    for (std::size_t j = 0; j < w; ++j) rhs.at(c, j) = gf.mul(ip, rhs.at(c, j));
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const fe_t f = a.at(r, c);
      if (f == 0) continue;
      for (std::size_t j = 0; j < n; ++j)
        a.at(r, j) = gf.sub(a.at(r, j), gf.mul(f, a.at(c, j)));
      for (std::size_t j = 0; j < w; ++j)
        rhs.at(r, j) = gf.sub(rhs.at(r, j), gf.mul(f, rhs.at(c, j)));
    }
  }
  return rhs;
}

Matrix inverse(const FieldContext& gf, const Matrix& a, std::size_t row_cap) {
  return solve(gf, a, Matrix::identity(a.rows()), row_cap);
}

std::size_t rank(const FieldContext& gf, Matrix m, std::size_t row_cap) {
  check_cap(m.rows(), row_cap);
  return forward_eliminate(gf, m).first;
}

Matrix kron(const FieldContext& gf, const Matrix& a, const Matrix& b) {
  Matrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const fe_t v = a.at(i, j);
      if (v == 0) continue;
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q)
          c.at(i * b.rows() + p, j * b.cols() + q) = gf.mul(v, b.at(p, q));
    }
  return c;
}

Matrix hconcat(const std::vector<const Matrix*>& parts) {
  if (parts.empty()) return {};
  const std::size_t rows = parts[0]->rows();
  std::size_t cols = 0;
  for (const Matrix* p : parts) {
    if (p->rows() != rows)
      fail(ErrorClass::invalid_argument, "hconcat row mismatch");
    cols += p->cols();
  }
  Matrix m(rows, cols);
  std::size_t off = 0;
  for (const Matrix* p : parts) {
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < p->cols(); ++j)
        m.at(i, off + j) = p->at(i, j);
    off += p->cols();
  }
  return m;
}

Matrix vconcat(const std::vector<const Matrix*>& parts) {
  if (parts.empty()) return {};
  const std::size_t cols = parts[0]->cols();
  std::size_t rows = 0;
  for (const Matrix* p : parts) {
    if (p->cols() != cols)
      fail(ErrorClass::invalid_argument, "vconcat column mismatch");
    rows += p->rows();
  }
  Matrix m(rows, cols);
  std::size_t off = 0;
  for (const Matrix* p : parts) {
    for (std::size_t i = 0; i < p->rows(); ++i)
      for (std::size_t j = 0; j < cols; ++j) m.at(off + i, j) = p->at(i, j);
    off += p->rows();
  }
  return m;
}

Permutation Permutation::identity(std::size_t n) {
  Permutation p;
  p.map.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.map[i] = static_cast<std::uint32_t>(i);
  return p;
}

Permutation Permutation::inverse() const {
  Permutation p;
  p.map.resize(map.size());
  for (std::size_t i = 0; i < map.size(); ++i)
    p.map[map[i]] = static_cast<std::uint32_t>(i);
  return p;
}

Matrix Permutation::matrix() const {
  Matrix m(map.size(), map.size());
  for (std::size_t i = 0; i < map.size(); ++i) m.at(i, map[i]) = 1;
  return m;
}

Matrix permute_rows(const Permutation& p, const Matrix& m) {
  if (p.size() != m.rows())
    fail(ErrorClass::invalid_argument, "row permutation size mismatch");
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out.at(i, j) = m.at(p.map[i], j);
  return out;
}

Matrix permute_cols(const Matrix& m, const Permutation& p) {
  if (p.size() != m.cols())
    fail(ErrorClass::invalid_argument, "column permutation size mismatch");
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out.at(i, p.map[j]) = m.at(i, j);
  return out;
}

std::vector<fe_t> permute_vec(const Permutation& p,
                              const std::vector<fe_t>& v) {
  if (p.size() != v.size())
    fail(ErrorClass::invalid_argument, "vector permutation size mismatch");
  std::vector<fe_t> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[p.map[i]];
  return out;
}

}  // namespace msr
