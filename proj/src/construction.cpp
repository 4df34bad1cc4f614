#include "msr/construction.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <unordered_set>

#include "msr/digest.hpp"

namespace msr {

namespace {

std::uint64_t checked_pow(std::uint64_t base, unsigned e) {
  std::uint64_t v = 1;
  for (unsigned i = 0; i < e; ++i) {
    if (v > (std::uint64_t{1} << 40))
      fail(ErrorClass::capacity, "sub-packetization overflows the desk-scale range");
    v *= base;
  }
  return v;
}

std::uint64_t binom(unsigned n, unsigned t) {
  std::uint64_t v = 1;
  for (unsigned i = 0; i < t; ++i) v = v * (n - i) / (i + 1);
  return v;
}

void append_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

std::uint64_t CodeParams::ell() const {
  return checked_pow(s(), group_count());
}

std::uint64_t CodeParams::subset_collision_bound() const {
  const unsigned g = group_size(), sv = s();
  std::uint64_t alpha = 0;
  for (unsigned t = 1; t <= g; ++t)
    alpha += binom(g, t) * sv * t * (t - 1) / 2;
  return alpha;
}

unsigned CodeParams::default_field_width(const CodeParams& p) {
  const std::uint64_t need = p.lambda_count() + p.subset_collision_bound();
  for (unsigned w = 4; w <= 16; ++w)
    if ((std::uint64_t{1} << w) >= need) return w;
  fail(ErrorClass::capacity,
       "no supported field width reaches the sufficient size " +
           std::to_string(need));
}

void CodeParams::validate() const {
  if (n < 2 || k == 0 || k >= n)
    fail(ErrorClass::invalid_argument, "require 0 < k < n and n >= 2");
  if (d < k + 1 || d > n - 1)
    fail(ErrorClass::invalid_argument, "require k+1 <= d <= n-1");
  // s >= 2 and s <= r follow from the bounds above.
  if (r() * ell() > kDenseRowCap)
    fail(ErrorClass::capacity,
         "r*l = " + std::to_string(r() * ell()) +
             " exceeds the desk-scale dense cap of " +
             std::to_string(kDenseRowCap));
}

unsigned index_digit(std::uint64_t i, unsigned pos, unsigned s) {
  for (unsigned u = 0; u < pos; ++u) i /= s;
  return static_cast<unsigned>(i % s);
}

std::uint64_t index_with_digit(std::uint64_t i, unsigned pos, unsigned value,
                               unsigned s) {
  std::uint64_t step = 1;
  for (unsigned u = 0; u < pos; ++u) step *= s;
  return i + (static_cast<std::uint64_t>(value) - index_digit(i, pos, s)) * step;
}

Matrix realize(const FieldContext& gf, std::span<const fe_t> lambdas,
               const BlockMatrix& bm) {
  const std::size_t inner = bm.inner();
  const unsigned t = bm.t();
  Matrix m(bm.realized_rows(), bm.realized_cols());
  for (std::size_t i = 0; i < bm.grid_rows(); ++i)
    for (std::size_t j = 0; j < bm.grid_cols(); ++j) {
      const BlockEntry& e = bm.entry(i, j);
      if (e.sign == 0) continue;
      const std::vector<fe_t> col = build_L(gf, lambdas[e.lambda], t);
      for (std::size_t u = 0; u < inner; ++u)
        for (unsigned z = 0; z < t; ++z) {
          const fe_t v = e.sign < 0 ? gf.neg(col[z]) : col[z];
          m.at((i * inner + u) * t + z, j * inner + u) = v;
        }
    }
  return m;
}

std::vector<fe_t> build_L(const FieldContext& gf, fe_t lambda, unsigned t) {
  std::vector<fe_t> col(t);
  fe_t v = 1;
  for (unsigned z = 0; z < t; ++z) {
    col[z] = v;
    v = gf.mul(v, lambda);
  }
  return col;
}

std::uint32_t lambda_index(const CodeParams& p, unsigned a, unsigned b,
                           unsigned j) {
  return (a * p.group_size() + b) * p.s() + j;
}

namespace {

BlockMatrix kernel_with_inner(const CodeParams& p, unsigned a, unsigned b,
                              unsigned t, std::size_t inner) {
  const unsigned s = p.s();
  if (a >= p.group_count() || b >= p.group_size())
    fail(ErrorClass::invalid_argument, "kernel group or index out of range");
  BlockMatrix bm(s, s, t, inner);
  for (unsigned j = 0; j < s; ++j) {
    bm.entry(j, j) = {+1, lambda_index(p, a, b, j)};
    if (b < s && b != j) bm.entry(b, j) = {-1, lambda_index(p, a, b, j)};
  }
  return bm;
}

}  // namespace

BlockMatrix build_kernel(const CodeParams& p, unsigned a, unsigned b,
                         unsigned t) {
  std::size_t inner = 1;
  for (unsigned u = 0; u < a; ++u) inner *= p.s();
  return kernel_with_inner(p, a, b, t, inner);
}

BlockMatrix build_kernel_unit(const CodeParams& p, unsigned a, unsigned b,
                              unsigned t) {
  return kernel_with_inner(p, a, b, t, 1);
}

BlockMatrix build_node_matrix(const CodeParams& p, unsigned node, unsigned t) {
  if (node >= p.padded_n())
    fail(ErrorClass::invalid_argument, "node index out of range");
  const unsigned s = p.s(), m = p.group_count();
  const unsigned a = node / p.group_size(), b = node % p.group_size();
  const std::uint64_t ell = p.ell();
  BlockMatrix bm(ell, ell, t, 1);
  for (std::uint64_t i = 0; i < ell; ++i)
    for (std::uint64_t j = 0; j < ell; ++j) {
      const unsigned ja = index_digit(j, a, s);
      if (i == j) {
        bm.entry(i, j) = {+1, lambda_index(p, a, b, ja)};
        continue;
      }
      if (index_digit(i, a, s) != b) continue;
      bool match = true;
      for (unsigned u = 0; u < m && match; ++u)
        if (u != a && index_digit(i, u, s) != index_digit(j, u, s))
          match = false;
      if (match) bm.entry(i, j) = {-1, lambda_index(p, a, b, ja)};
    }
  return bm;
}

BlockMatrix hconcat_blocks(const std::vector<const BlockMatrix*>& parts) {
  if (parts.empty()) fail(ErrorClass::invalid_argument, "empty concatenation");
  const BlockMatrix& head = *parts[0];
  std::size_t cols = 0;
  for (const BlockMatrix* p : parts) {
    if (p->grid_rows() != head.grid_rows() || p->t() != head.t() ||
        p->inner() != head.inner())
      fail(ErrorClass::invalid_argument, "block concatenation shape mismatch");
    cols += p->grid_cols();
  }
  BlockMatrix out(head.grid_rows(), cols, head.t(), head.inner());
  std::size_t off = 0;
  for (const BlockMatrix* p : parts) {
    for (std::size_t i = 0; i < p->grid_rows(); ++i)
      for (std::size_t j = 0; j < p->grid_cols(); ++j)
        out.entry(i, off + j) = p->entry(i, j);
    off += p->grid_cols();
  }
  return out;
}

namespace {

// All in-group subset determinants for one group, evaluated on unit-inner
// kernels (equivalent to the full check; the inner identity only raises the
// determinant to a power).
bool group_subsets_pass(const FieldContext& gf, const CodeParams& p,
                        unsigned a, std::span<const fe_t> lambdas) {
  const unsigned g = p.group_size();
  for (std::uint32_t mask = 1; mask < (1u << g); ++mask) {
    std::vector<BlockMatrix> kernels;
    std::vector<const BlockMatrix*> ptrs;
    const unsigned t = static_cast<unsigned>(__builtin_popcount(mask));
    for (unsigned b = 0; b < g; ++b)
      if (mask >> b & 1) kernels.push_back(build_kernel_unit(p, a, b, t));
    for (const auto& kk : kernels) ptrs.push_back(&kk);
    const Matrix mat = realize(gf, lambdas, hconcat_blocks(ptrs));
    if (det(gf, mat) == 0) return false;
  }
  return true;
}

}  // namespace

std::vector<fe_t> select_lambdas(const FieldContext& gf, const CodeParams& p) {
  const std::uint32_t need = p.lambda_count();
  const std::uint32_t pool_size = gf.order() - 1;
  if (pool_size < need)
    fail(ErrorClass::capacity,
         "field with " + std::to_string(pool_size) +
             " nonzero elements cannot hold " + std::to_string(need) +
             " distinct lambdas (sufficient size: q >= " +
             std::to_string(need + p.subset_collision_bound()) + ")");
  std::vector<fe_t> pool(pool_size);
  for (std::uint32_t i = 0; i < pool_size; ++i) pool[i] = gf.exp(i);
  std::vector<bool> used(pool_size, false);

  const unsigned per_group = p.group_size() * p.s();
  std::vector<fe_t> out(need, 0);
  for (unsigned a = 0; a < p.group_count(); ++a) {
    std::vector<std::uint32_t> avail;
    for (std::uint32_t i = 0; i < pool_size; ++i)
      if (!used[i]) avail.push_back(i);
    bool placed = false;
    for (std::size_t start = 0; start + per_group <= avail.size(); ++start) {
      for (unsigned j = 0; j < per_group; ++j)
        out[a * per_group + j] = pool[avail[start + j]];
      if (group_subsets_pass(gf, p, a, out)) {
        for (unsigned j = 0; j < per_group; ++j) used[avail[start + j]] = true;
        placed = true;
        break;
      }
    }
    if (!placed)
      fail(ErrorClass::search_failure,
           "greedy lambda search exhausted the field for group " +
               std::to_string(a) + " (sufficient size: q >= " +
               std::to_string(need + p.subset_collision_bound()) + ")");
  }
  return out;
}

struct CodeProfile::Cache {
  // recursive: operator builders run under the lock and pull parity blocks
  mutable std::recursive_mutex mu;
  std::map<unsigned, Matrix> parity;
  std::optional<Matrix> encode_op;
  std::map<std::vector<unsigned>, Matrix> pattern_ops;
  std::atomic<bool> global_certified{false};
};

CodeProfile::CodeProfile(const CodeParams& p, FieldContext gf,
                         std::vector<fe_t> lambdas)
    : params_(p), gf_(std::move(gf)), lambdas_(std::move(lambdas)),
      cache_(std::make_unique<Cache>()) {
  std::vector<std::uint8_t> bytes = canonical_bytes();
  bytes.resize(bytes.size() - 8);  // digest covers everything before itself
  digest_ = fnv1a64(bytes);
}

CodeProfile::CodeProfile(CodeProfile&&) noexcept = default;
CodeProfile& CodeProfile::operator=(CodeProfile&&) noexcept = default;
CodeProfile::~CodeProfile() = default;

CodeProfile CodeProfile::build(const CodeParams& p, FieldContext gf) {
  p.validate();
  std::vector<fe_t> lambdas = select_lambdas(gf, p);
  CodeProfile profile(p, std::move(gf), std::move(lambdas));
  profile.locally_certified_ = true;  // greedy admits only passing windows
  return profile;
}

CodeProfile CodeProfile::from_lambdas(const CodeParams& p, FieldContext gf,
                                      std::vector<fe_t> lambdas,
                                      Validation level) {
  p.validate();
  if (lambdas.size() != p.lambda_count())
    fail(ErrorClass::invalid_argument,
         "expected " + std::to_string(p.lambda_count()) + " lambdas, got " +
             std::to_string(lambdas.size()));
  for (fe_t v : lambdas)
    if (v >= gf.order())
      fail(ErrorClass::invalid_argument, "lambda value outside the field");
  if (level != Validation::none) {
    std::unordered_set<fe_t> seen(lambdas.begin(), lambdas.end());
    if (seen.size() != lambdas.size())
      fail(ErrorClass::invalid_argument, "lambda sequence has duplicates");
  }
  CodeProfile profile(p, std::move(gf), std::move(lambdas));
  if (level == Validation::full) {
    for (unsigned a = 0; a < p.group_count(); ++a) {
      LocalReport rep = check_local_constraints(profile, a);
      if (!rep.pass())
        fail(ErrorClass::invalid_argument,
             "lambda sequence fails an in-group subset determinant in group " +
                 std::to_string(a));
    }
    profile.locally_certified_ = true;
  }
  return profile;
}

bool CodeProfile::globally_certified() const {
  return cache_->global_certified.load();
}

void CodeProfile::note_global_certified() const {
  cache_->global_certified.store(true);
}

const Matrix& CodeProfile::parity_matrix(unsigned node) const {
  if (node >= params_.padded_n())
    fail(ErrorClass::invalid_argument, "node index out of range");
  std::lock_guard<std::recursive_mutex> lock(cache_->mu);
  auto it = cache_->parity.find(node);
  if (it == cache_->parity.end()) {
    Matrix m = realize(gf_, lambdas_,
                       build_node_matrix(params_, node, params_.r()));
    it = cache_->parity.emplace(node, std::move(m)).first;
  }
  return it->second;
}

const Matrix& CodeProfile::memo_encode_op(
    const std::function<Matrix()>& build) const {
  std::lock_guard<std::recursive_mutex> lock(cache_->mu);
  if (!cache_->encode_op) cache_->encode_op = build();
  return *cache_->encode_op;
}

const Matrix& CodeProfile::memo_pattern_op(
    const std::vector<unsigned>& key,
    const std::function<Matrix()>& build) const {
  std::lock_guard<std::recursive_mutex> lock(cache_->mu);
  auto it = cache_->pattern_ops.find(key);
  if (it == cache_->pattern_ops.end())
    it = cache_->pattern_ops.emplace(key, build()).first;
  return it->second;
}

std::vector<std::uint8_t> CodeProfile::canonical_bytes() const {
  std::vector<std::uint8_t> out;
  out.push_back('M');
  out.push_back('S');
  out.push_back('R');
  out.push_back('P');
  append_u16(out, 1);  // format version
  out.push_back(static_cast<std::uint8_t>(params_.variant));
  out.push_back(0);
  append_u16(out, static_cast<std::uint16_t>(params_.n));
  append_u16(out, static_cast<std::uint16_t>(params_.k));
  append_u16(out, static_cast<std::uint16_t>(params_.d));
  out.push_back(static_cast<std::uint8_t>(gf_.width()));
  out.push_back(0);
  append_u32(out, gf_.poly());
  append_u32(out, static_cast<std::uint32_t>(lambdas_.size()));
  for (fe_t v : lambdas_) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    if (gf_.elem_bytes() == 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  append_u64(out, fnv1a64(out));
  return out;
}

LocalReport check_local_constraints(const CodeProfile& profile,
                                    unsigned group) {
  const CodeParams& p = profile.params();
  if (group >= p.group_count())
    fail(ErrorClass::invalid_argument, "group index out of range");
  const unsigned g = p.group_size();
  LocalReport rep;
  rep.group = group;
  for (std::uint32_t mask = 1; mask < (1u << g); ++mask) {
    std::vector<unsigned> B;
    for (unsigned b = 0; b < g; ++b)
      if (mask >> b & 1) B.push_back(b);
    const unsigned t = static_cast<unsigned>(B.size());
    std::vector<BlockMatrix> kernels;
    for (unsigned b : B) kernels.push_back(build_kernel(p, group, b, t));
    std::vector<const BlockMatrix*> ptrs;
    for (const auto& kk : kernels) ptrs.push_back(&kk);
    const Matrix mat =
        realize(profile.field(), profile.lambdas(), hconcat_blocks(ptrs));
    ++rep.checked;
    if (det(profile.field(), mat) == 0) rep.failing_subsets.push_back(B);
  }
  return rep;
}

std::string GlobalSelection::describe() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < picks.size(); ++i) {
    if (i) os << "+";
    os << "(a=" << picks[i].first << ",B={";
    for (std::size_t j = 0; j < picks[i].second.size(); ++j) {
      if (j) os << ",";
      os << picks[i].second[j];
    }
    os << "})";
  }
  return os.str();
}

std::vector<GlobalSelection> enumerate_global_selections(const CodeParams& p,
                                                         unsigned t_max) {
  const unsigned g = p.group_size(), m = p.group_count();
  std::vector<std::vector<unsigned>> subsets;
  for (std::uint32_t mask = 1; mask < (1u << g); ++mask) {
    std::vector<unsigned> B;
    for (unsigned b = 0; b < g; ++b)
      if (mask >> b & 1) B.push_back(b);
    if (B.size() <= t_max) subsets.push_back(std::move(B));
  }
  std::vector<GlobalSelection> out;
  GlobalSelection cur;
  // Depth-first over groups in increasing order; every nonempty prefix with
  // total width <= t_max is one selection.
  std::function<void(unsigned, unsigned)> walk = [&](unsigned from,
                                                     unsigned budget) {
    for (unsigned a = from; a < m; ++a)
      for (const auto& B : subsets) {
        if (B.size() > budget) continue;
        cur.picks.emplace_back(a, B);
        out.push_back(cur);
        if (out.size() > kGlobalSelectionBudget)
          fail(ErrorClass::capacity,
               "global selection enumeration exceeds the budget");
        walk(a + 1, budget - static_cast<unsigned>(B.size()));
        cur.picks.pop_back();
      }
  };
  walk(0, t_max);
  return out;
}

Matrix realize_selection(const CodeProfile& profile, const GlobalSelection& sel,
                         unsigned t) {
  const CodeParams& p = profile.params();
  std::vector<Matrix> mats;
  for (const auto& [a, B] : sel.picks)
    for (unsigned b : B)
      mats.push_back(realize(profile.field(), profile.lambdas(),
                             build_node_matrix(p, a * p.group_size() + b, t)));
  std::vector<const Matrix*> ptrs;
  for (const auto& mm : mats) ptrs.push_back(&mm);
  return hconcat(ptrs);
}

GlobalReport check_global_constraints(const CodeProfile& profile,
                                      unsigned t_max, std::uint64_t budget) {
  const CodeParams& p = profile.params();
  if (t_max > p.r())
    fail(ErrorClass::invalid_argument, "t_max cannot exceed r");
  std::vector<GlobalSelection> sels = enumerate_global_selections(p, t_max);
  if (sels.size() > budget)
    fail(ErrorClass::capacity,
         "global check needs " + std::to_string(sels.size()) +
             " determinants, over the budget of " + std::to_string(budget));
  GlobalReport rep;
  for (const GlobalSelection& sel : sels) {
    const Matrix mat = realize_selection(profile, sel, sel.total());
    ++rep.checked;
    if (det(profile.field(), mat) == 0) rep.failures.push_back(sel);
  }
  if (rep.pass() && t_max == p.r()) profile.note_global_certified();
  return rep;
}

Permutation build_group_swap(const CodeParams& p, unsigned g, unsigned h) {
  if (g >= p.group_count() || h >= p.group_count())
    fail(ErrorClass::invalid_argument, "group index out of range");
  const unsigned s = p.s();
  const std::uint64_t ell = p.ell();
  Permutation perm;
  perm.map.resize(ell);
  for (std::uint64_t i = 0; i < ell; ++i) {
    const unsigned dg = index_digit(i, g, s), dh = index_digit(i, h, s);
    std::uint64_t j = index_with_digit(i, g, dh, s);
    j = index_with_digit(j, h, dg, s);
    perm.map[i] = static_cast<std::uint32_t>(j);
  }
  return perm;
}

CodeProfile swap_lambda_blocks(const CodeProfile& profile, unsigned g,
                               unsigned h) {
  const CodeParams& p = profile.params();
  if (g >= p.group_count() || h >= p.group_count())
    fail(ErrorClass::invalid_argument, "group index out of range");
  const unsigned blk = p.group_size() * p.s();
  std::vector<fe_t> lam(profile.lambdas().begin(), profile.lambdas().end());
  for (unsigned j = 0; j < blk; ++j)
    std::swap(lam[g * blk + j], lam[h * blk + j]);
  return CodeProfile::from_lambdas(p, profile.field(), std::move(lam),
                                   Validation::full);
}

}  // namespace msr
