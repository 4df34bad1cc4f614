#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "msr/errors.hpp"
#include "msr/linalg.hpp"

using namespace msr;

namespace {

Matrix random_matrix(const FieldContext& gf, std::size_t n,
                     std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint32_t> dist(0, gf.order() - 1);
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m.at(i, j) = static_cast<fe_t>(dist(rng));
  return m;
}

Matrix random_invertible(const FieldContext& gf, std::size_t n,
                         std::mt19937_64& rng) {
  while (true) {
    Matrix m = random_matrix(gf, n, rng);
    if (det(gf, m) != 0) return m;
  }
}

}  // namespace

TEST_CASE("identity and tiny Vandermonde determinants") {
  FieldContext gf(5, 0x25);
  CHECK(det(gf, Matrix::identity(7)) == 1);
  Matrix v(2, 2);
  v.at(0, 0) = 1;
  v.at(0, 1) = 1;
  v.at(1, 0) = gf.exp(0);
  v.at(1, 1) = gf.exp(1);
  CHECK(det(gf, v) == gf.add(gf.exp(0), gf.exp(1)));
}

TEST_CASE("determinant is multiplicative") {
  FieldContext gf(4, 0x13);
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix a = random_matrix(gf, 6, rng);
    Matrix b = random_matrix(gf, 6, rng);
    CHECK(det(gf, mat_mul(gf, a, b)) == gf.mul(det(gf, a), det(gf, b)));
  }
}

TEST_CASE("solve recovers a planted solution and inverse works") {
  FieldContext gf(8, 0x11D);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint32_t> dist(0, gf.order() - 1);
  for (int rep = 0; rep < 10; ++rep) {
    Matrix a = random_invertible(gf, 8, rng);
    std::vector<fe_t> x(8);
    for (fe_t& v : x) v = static_cast<fe_t>(dist(rng));
    std::vector<fe_t> b = mat_vec(gf, a, x);
    Matrix rhs(8, 1);
    for (std::size_t i = 0; i < 8; ++i) rhs.at(i, 0) = b[i];
    Matrix sol = solve(gf, a, rhs);
    for (std::size_t i = 0; i < 8; ++i) CHECK(sol.at(i, 0) == x[i]);
    CHECK(mat_mul(gf, a, inverse(gf, a)) == Matrix::identity(8));
  }
}

TEST_CASE("singular systems raise the dedicated error") {
  FieldContext gf(5, 0x25);
  Matrix m(2, 2);
  m.at(0, 0) = 3;
  m.at(0, 1) = 5;
  m.at(1, 0) = 3;
  m.at(1, 1) = 5;
  CHECK(det(gf, m) == 0);
  CHECK_THROWS_AS(inverse(gf, m), Error);
  try {
    inverse(gf, m);
  } catch (const Error& e) {
    CHECK(e.cls() == ErrorClass::singular_matrix);
  }
}

TEST_CASE("rank agrees with determinant on square matrices") {
  FieldContext gf(4, 0x13);
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    Matrix m = random_matrix(gf, 5, rng);
    bool invertible = det(gf, m) != 0;
    CHECK((rank(gf, m) == 5) == invertible);
  }
  Matrix twice(2, 3);
  for (std::size_t j = 0; j < 3; ++j) {
    twice.at(0, j) = static_cast<fe_t>(j + 1);
    twice.at(1, j) = static_cast<fe_t>(j + 1);
  }
  CHECK(rank(gf, twice) == 1);
}

TEST_CASE("kronecker product satisfies the mixed product rule") {
  FieldContext gf(4, 0x13);
  std::mt19937_64 rng(13);
  Matrix a = random_matrix(gf, 3, rng);
  Matrix b = random_matrix(gf, 2, rng);
  Matrix c = random_matrix(gf, 3, rng);
  Matrix d = random_matrix(gf, 2, rng);
  Matrix lhs = mat_mul(gf, kron(gf, a, b), kron(gf, c, d));
  Matrix rhs = kron(gf, mat_mul(gf, a, c), mat_mul(gf, b, d));
  CHECK(lhs == rhs);
}

TEST_CASE("concatenation stitches blocks in order") {
  FieldContext gf(4, 0x13);
  Matrix a(2, 1);
  a.at(0, 0) = 1;
  a.at(1, 0) = 2;
  Matrix b(2, 2);
  b.at(0, 0) = 3;
  b.at(1, 1) = 4;
  Matrix h = hconcat({&a, &b});
  CHECK(h.rows() == 2);
  CHECK(h.cols() == 3);
  CHECK(h.at(0, 1) == 3);
  CHECK(h.at(1, 0) == 2);
  Matrix v = vconcat({&a, &a});
  CHECK(v.rows() == 4);
  CHECK(v.at(3, 0) == 2);
}

TEST_CASE("permutations act on rows, columns, and vectors coherently") {
  FieldContext gf(4, 0x13);
  // swap positions 1 and 3 of a length-9 index space, fixing 0, 4, 8
  Permutation p = Permutation::identity(9);
  p.map[1] = 3;
  p.map[3] = 1;
  std::vector<fe_t> v = {10, 11, 12, 13, 14, 15, 1, 2, 3};
  std::vector<fe_t> pv = permute_vec(p, v);
  CHECK(pv[1] == 13);
  CHECK(pv[3] == 11);
  CHECK(pv[0] == 10);
  CHECK(pv[4] == 14);

  std::mt19937_64 rng(17);
  Matrix m = random_matrix(gf, 9, rng);
  CHECK(permute_rows(p, m) == mat_mul(gf, p.matrix(), m));
  CHECK(permute_cols(m, p) == mat_mul(gf, m, p.matrix()));
  CHECK(det(gf, p.matrix()) == 1);

  Permutation q = p.inverse();
  for (std::size_t i = 0; i < 9; ++i) CHECK(q.map[p.map[i]] == i);
}

TEST_CASE("dense operations reject oversized inputs") {
  FieldContext gf(4, 0x13);
  Matrix m(10, 10);
  CHECK_THROWS_AS(det(gf, m, 4), Error);
  try {
    det(gf, m, 4);
  } catch (const Error& e) {
    CHECK(e.cls() == ErrorClass::capacity);
  }
}
