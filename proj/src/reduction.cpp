#include "msr/reduction.hpp"

#include <algorithm>

#include "msr/errors.hpp"

namespace msr {

namespace {

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out.at(j, i) = m.at(i, j);
  return out;
}

Matrix unit_kernel_concat(const CodeProfile& profile, unsigned group,
                          const std::vector<unsigned>& subset, unsigned t) {
  std::vector<BlockMatrix> blocks;
  blocks.reserve(subset.size());
  for (unsigned b : subset)
    blocks.push_back(build_kernel_unit(profile.params(), group, b, t));
  std::vector<const BlockMatrix*> ptrs;
  for (const BlockMatrix& bm : blocks) ptrs.push_back(&bm);
  return realize(profile.field(), profile.lambdas(),
                 hconcat_blocks(ptrs));
}

Matrix column_of(const std::vector<fe_t>& v) {
  Matrix out(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) out.at(i, 0) = v[i];
  return out;
}

bool zero_region(const Matrix& m, std::size_t r0, std::size_t r1,
                 std::size_t c0, std::size_t c1) {
  for (std::size_t i = r0; i < r1; ++i)
    for (std::size_t j = c0; j < c1; ++j)
      if (m.at(i, j) != 0) return false;
  return true;
}

bool region_equals(const Matrix& m, std::size_t r0, std::size_t c0,
                   const Matrix& want) {
  for (std::size_t i = 0; i < want.rows(); ++i)
    for (std::size_t j = 0; j < want.cols(); ++j)
      if (m.at(r0 + i, c0 + j) != want.at(i, j)) return false;
  return true;
}

[[noreturn]] void cert_fail(const std::string& what) {
  fail(ErrorClass::certificate_failure, what);
}

}  // namespace

EliminationCertificate build_elimination(const CodeProfile& profile,
                                         unsigned group,
                                         std::vector<unsigned> subset,
                                         unsigned t) {
  const CodeParams& p = profile.params();
  const FieldContext& gf = profile.field();
  unsigned s = p.s();
  unsigned g = p.group_size();

  std::sort(subset.begin(), subset.end());
  if (subset.empty() ||
      std::adjacent_find(subset.begin(), subset.end()) != subset.end())
    fail(ErrorClass::invalid_argument, "subset must be nonempty and distinct");
  if (group >= p.group_count())
    fail(ErrorClass::invalid_argument, "group out of range");
  for (unsigned b : subset)
    if (b >= g) fail(ErrorClass::invalid_argument, "subset entry out of range");
  unsigned v = static_cast<unsigned>(subset.size());
  if (t <= v || t > p.r())
    fail(ErrorClass::invalid_argument,
         "working length must exceed the subset size and stay within r");

  Matrix k_t = unit_kernel_concat(profile, group, subset, t);  // st x sv
  Matrix k_v = unit_kernel_concat(profile, group, subset, v);  // sv x sv

  Matrix k_v_inv(0, 0);
  try {
    k_v_inv = inverse(gf, k_v);
  } catch (const Error&) {
    cert_fail("subset kernel is singular at its own length");
  }
  Matrix k_v_inv_t = transpose(k_v_inv);

  // One annihilator row per piece: row i*t+v of the long kernel, rewritten
  // over the rows {j*t+z : z < v} and negated, with a 1 in its own slot.
  Matrix e_star(s, s * t);
  for (unsigned i = 0; i < s; ++i) {
    std::vector<fe_t> target(k_t.row(i * t + v),
                             k_t.row(i * t + v) + s * v);
    std::vector<fe_t> coeff = mat_vec(gf, k_v_inv_t, target);
    for (unsigned j = 0; j < s; ++j)
      for (unsigned z = 0; z < v; ++z)
        e_star.at(i, j * t + z) = gf.neg(coeff[j * v + z]);
    e_star.at(i, i * t + v) = 1;
  }
  for (unsigned i = 0; i < s; ++i) {
    std::vector<fe_t> probe(e_star.row(i), e_star.row(i) + s * t);
    std::vector<fe_t> lhs = mat_vec(gf, transpose(k_t), probe);
    if (!std::all_of(lhs.begin(), lhs.end(), [](fe_t x) { return x == 0; }))
      cert_fail("annihilator row does not cancel the long kernel");
  }

  // Eliminator: identity with each segment's tail rows replaced by shifted
  // copies of the annihilator rows. Shifting keeps the determinant at one.
  Matrix elim = Matrix::identity(s * t);
  for (unsigned i = 0; i < s; ++i) {
    for (unsigned c = 0; c + v < t; ++c) {
      std::size_t row = i * t + v + c;
      for (std::size_t col = 0; col < s * t; ++col) elim.at(row, col) = 0;
      for (unsigned j = 0; j < s; ++j)
        for (unsigned z = c; z < t; ++z)
          elim.at(row, j * t + z) = e_star.at(i, j * t + z - c);
    }
  }
  Permutation sorter = Permutation::identity(s * t);
  for (unsigned j = 0; j < s; ++j) {
    for (unsigned z = 0; z < v; ++z) sorter.map[j * v + z] = j * t + z;
    for (unsigned c = 0; c + v < t; ++c)
      sorter.map[s * v + j * (t - v) + c] = j * t + v + c;
  }
  Matrix sorted = permute_rows(sorter, elim);

  Matrix reduced = mat_mul(gf, sorted, k_t);
  if (!region_equals(reduced, 0, 0, k_v) ||
      !zero_region(reduced, s * v, s * t, 0, s * v))
    cert_fail("sorted eliminator does not stack the short kernel over zeros");

  // Residue blocks: how the eliminator rewrites every other lambda's column.
  std::uint32_t lam_count = static_cast<std::uint32_t>(p.lambda_count());
  std::vector<Matrix> f_blocks;
  std::vector<bool> f_singular;
  f_blocks.reserve(lam_count);
  std::vector<bool> own(lam_count, false);
  for (unsigned b : subset)
    for (unsigned j = 0; j < s; ++j) own[lambda_index(p, group, b, j)] = true;

  for (std::uint32_t idx = 0; idx < lam_count; ++idx) {
    std::vector<fe_t> L = build_L(gf, profile.lambda(idx), t);
    Matrix f(s, s);
    for (unsigned row = 0; row < s; ++row)
      for (unsigned col = 0; col < s; ++col) {
        fe_t acc = 0;
        for (unsigned z = 0; z < t; ++z)
          acc = gf.add(acc, gf.mul(e_star.at(row, col * t + z), L[z]));
        f.at(row, col) = acc;
      }
    bool singular = det(gf, f) == 0;
    if (singular != own[idx])
      cert_fail("residue singularity does not match the subset membership");

    Matrix tall = kron(gf, Matrix::identity(s), column_of(L));
    Matrix mixed = mat_mul(gf, sorted, tall);
    Matrix top = kron(gf, Matrix::identity(s),
                      column_of(build_L(gf, profile.lambda(idx), v)));
    Matrix bottom =
        kron(gf, f, column_of(build_L(gf, profile.lambda(idx), t - v)));
    if (!region_equals(mixed, 0, 0, top) ||
        !region_equals(mixed, s * v, 0, bottom))
      cert_fail("eliminator action on a foreign column has the wrong shape");

    f_blocks.push_back(std::move(f));
    f_singular.push_back(singular);
  }

  // Node-level mixer: per l/s segment apply the eliminator, regroup the kept
  // rows in front, and conjugate by the digit swap when the group is not the
  // lowest one.
  std::uint64_t l = p.ell();
  std::uint64_t lred = l / s;
  Matrix m0 = kron(gf, Matrix::identity(lred), sorted);
  Permutation picker = Permutation::identity(l * t);
  for (std::uint64_t x = 0; x < lred; ++x) {
    for (unsigned q = 0; q < s * v; ++q)
      picker.map[x * s * v + q] = x * s * t + q;
    for (unsigned q = 0; q < s * (t - v); ++q)
      picker.map[l * v + x * s * (t - v) + q] = x * s * t + s * v + q;
  }
  Matrix mixer = permute_rows(picker, m0);
  if (group != 0) {
    Permutation swap = build_group_swap(p, group, 0);
    Matrix swap_m = swap.matrix();
    Matrix left = Matrix::identity(l * t);
    Matrix top_left = kron(gf, swap_m, Matrix::identity(v));
    for (std::size_t i = 0; i < top_left.rows(); ++i)
      for (std::size_t j = 0; j < top_left.cols(); ++j)
        left.at(i, j) = top_left.at(i, j);
    Matrix right = kron(gf, swap_m, Matrix::identity(t));
    mixer = mat_mul(gf, left, mat_mul(gf, mixer, right));
  }
  if (det(gf, mixer) != 1) cert_fail("mixer determinant is not one");

  GlobalSelection sel;
  sel.picks.push_back({group, subset});
  Matrix node_t = realize_selection(profile, sel, t);
  Matrix node_v = realize_selection(profile, sel, v);
  Matrix mixed_nodes = mat_mul(gf, mixer, node_t);
  if (!region_equals(mixed_nodes, 0, 0, node_v) ||
      !zero_region(mixed_nodes, l * v, l * t, 0, l * v))
    cert_fail("mixer does not stack the short node matrices over zeros");

  EliminationCertificate cert;
  cert.group = group;
  cert.subset = std::move(subset);
  cert.t = t;
  cert.annihilator = std::move(e_star);
  cert.sorted_eliminator = std::move(sorted);
  cert.mixer = std::move(mixer);
  cert.f_blocks = std::move(f_blocks);
  cert.f_singular = std::move(f_singular);
  return cert;
}

namespace {

GlobalSelection tail_selection(const GlobalSelection& sel, std::size_t from) {
  GlobalSelection rest;
  rest.picks.assign(sel.picks.begin() + from, sel.picks.end());
  return rest;
}

bool verify_level(const CodeProfile& profile, const GlobalSelection& sel,
                  std::size_t off, unsigned t, const Matrix& x,
                  ReductionReport& report) {
  const CodeParams& p = profile.params();
  const FieldContext& gf = profile.field();
  unsigned s = p.s();
  std::uint64_t l = p.ell();

  const auto& [a0, b0] = sel.picks[off];
  unsigned v = static_cast<unsigned>(b0.size());

  if (off + 1 == sel.picks.size()) {
    fe_t dd = det(gf, x);
    report.steps.push_back({a0, b0, dd, 1});
    if (dd == 0) {
      report.failure = "base determinant is zero";
      return false;
    }
    return true;
  }

  EliminationCertificate cert = build_elimination(profile, a0, b0, t);
  Matrix y = mat_mul(gf, cert.mixer, x);

  if (!zero_region(y, l * v, l * t, 0, l * v)) {
    report.failure = "elimination left a nonzero block under the head";
    return false;
  }

  GlobalSelection head_sel;
  head_sel.picks.push_back(sel.picks[off]);
  Matrix head = realize_selection(profile, head_sel, v);
  if (!region_equals(y, 0, 0, head)) {
    report.failure = "head block does not match the short kernel form";
    return false;
  }

  GlobalSelection rest = tail_selection(sel, off + 1);
  Matrix rest_v = realize_selection(profile, rest, v);
  if (!region_equals(y, 0, l * v, rest_v)) {
    report.failure = "top right blocks do not match the short node forms";
    return false;
  }

  // Undo the per-column residue factor, chunk by chunk, then compare with
  // the remaining nodes rebuilt at the shorter length.
  std::uint64_t tail_dim = l * (t - v);
  Matrix z(tail_dim, tail_dim);
  for (std::size_t i = 0; i < tail_dim; ++i)
    for (std::size_t j = 0; j < tail_dim; ++j)
      z.at(i, j) = y.at(l * v + i, l * v + j);

  Matrix q(tail_dim, tail_dim);
  std::size_t node_off = 0;
  for (const auto& [ai, bi] : rest.picks) {
    for (unsigned b : bi) {
      std::uint32_t base_col = 0;
      for (std::uint64_t chunk = 0; chunk < l / s; ++chunk) {
        std::uint32_t idx = lambda_index(
            p, ai, b, index_digit(chunk * s, ai, s));
        Matrix inv_f = inverse(gf, cert.f_blocks[idx]);
        for (unsigned r0 = 0; r0 < s; ++r0)
          for (unsigned c0 = 0; c0 < s; ++c0)
            q.at(node_off + base_col + r0, node_off + base_col + c0) =
                inv_f.at(r0, c0);
        base_col += s;
      }
      node_off += l;
    }
  }

  Matrix zq = mat_mul(gf, z, q);
  Matrix rest_short = realize_selection(profile, rest, t - v);
  if (zq != rest_short) {
    report.failure = "tail columns do not reduce to the shorter node forms";
    return false;
  }

  fe_t head_det = det(gf, head);
  fe_t tail_det = det(gf, z);
  if (det(gf, x) != gf.mul(head_det, tail_det)) {
    report.failure = "determinant does not factor through the elimination";
    return false;
  }
  report.steps.push_back({a0, b0, head_det, tail_det});
  if (head_det == 0) {
    report.failure = "head determinant is zero";
    return false;
  }
  return verify_level(profile, sel, off + 1, t - v, rest_short, report);
}

}  // namespace

ReductionReport verify_triangular_reduction(const CodeProfile& profile,
                                            const GlobalSelection& selection) {
  const CodeParams& p = profile.params();
  if (selection.picks.empty())
    fail(ErrorClass::invalid_argument, "selection is empty");
  for (std::size_t i = 0; i + 1 < selection.picks.size(); ++i)
    if (selection.picks[i].first >= selection.picks[i + 1].first)
      fail(ErrorClass::invalid_argument, "selection groups must ascend");
  for (const auto& [group, subset] : selection.picks)
    if (group >= p.group_count())
      fail(ErrorClass::invalid_argument, "selection group out of range");
  unsigned t = selection.total();
  if (t == 0 || t > p.r())
    fail(ErrorClass::invalid_argument, "selection size must lie in [1, r]");

  ReductionReport report;
  report.selection = selection;
  Matrix x = realize_selection(profile, selection, t);
  report.direct_det = det(profile.field(), x);
  report.pass = verify_level(profile, selection, 0, t, x, report);
  if (report.pass) {
    const ReductionStep& first = report.steps.front();
    report.factored_det =
        profile.field().mul(first.head_det, first.tail_det);
    if (report.factored_det != report.direct_det) {
      report.pass = false;
      report.failure = "outer factorization disagrees with the flat determinant";
    }
  }
  return report;
}

}  // namespace msr
