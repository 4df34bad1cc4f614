#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msr/linalg.hpp"

namespace msr {

// Two node-group layouts share one block-entry law. Variant A groups s nodes
// and is optimal-access; variant B groups s+1 nodes (smaller l for fixed n)
// and gives up optimal access on the extra node.
enum class Variant : std::uint8_t { A = 0, B = 1 };

// Code geometry. s = d-k+1 in-group pieces; l = s^(groups). When the group
// size does not divide n, the construction is built for the next multiple
// (padded_n) and the trailing nodes are pinned to zero (shortening).
struct CodeParams {
  Variant variant = Variant::A;
  unsigned n = 0, k = 0, d = 0;

  unsigned r() const { return n - k; }
  unsigned s() const { return d - k + 1; }
  unsigned group_size() const {
    return variant == Variant::A ? s() : s() + 1;
  }
  unsigned padded_n() const {
    const unsigned g = group_size();
    return (n + g - 1) / g * g;
  }
  unsigned group_count() const { return padded_n() / group_size(); }
  std::uint64_t ell() const;
  std::uint32_t lambda_count() const { return padded_n() * s(); }

  // Field-size sufficient condition: q >= padded_n*s + subset_collision_bound.
  std::uint64_t subset_collision_bound() const;
  static unsigned default_field_width(const CodeParams& p);

  void validate() const;
  bool operator==(const CodeParams&) const = default;
};

// Indices in [l) carry group_count base-s digits; digit `pos` selects the
// in-group piece relative to group `pos`.
unsigned index_digit(std::uint64_t i, unsigned pos, unsigned s);
std::uint64_t index_with_digit(std::uint64_t i, unsigned pos, unsigned value,
                               unsigned s);

struct BlockEntry {
  int sign = 0;               // {-1, 0, +1}; realized through neg() in char 2
  std::uint32_t lambda = 0;   // index into the profile's lambda sequence
};

// Symbolic block matrix: a grid of (sign, lambda) entries. Entry (i,j)
// realizes as sign * I_inner kron (1, lambda, ..., lambda^{t-1})^T, so the
// dense shape is (grid_rows*inner*t) x (grid_cols*inner).
class BlockMatrix {
public:
  BlockMatrix(std::size_t grid_rows, std::size_t grid_cols, unsigned t,
              std::size_t inner)
      : grid_rows_(grid_rows), grid_cols_(grid_cols), t_(t), inner_(inner),
        entries_(grid_rows * grid_cols) {}

  std::size_t grid_rows() const { return grid_rows_; }
  std::size_t grid_cols() const { return grid_cols_; }
  unsigned t() const { return t_; }
  std::size_t inner() const { return inner_; }
  std::size_t realized_rows() const { return grid_rows_ * inner_ * t_; }
  std::size_t realized_cols() const { return grid_cols_ * inner_; }

  BlockEntry& entry(std::size_t i, std::size_t j) {
    return entries_[i * grid_cols_ + j];
  }
  const BlockEntry& entry(std::size_t i, std::size_t j) const {
    return entries_[i * grid_cols_ + j];
  }

private:
  std::size_t grid_rows_, grid_cols_;
  unsigned t_;
  std::size_t inner_;
  std::vector<BlockEntry> entries_;
};

// Expand a symbolic block matrix against concrete lambda values.
Matrix realize(const FieldContext& gf, std::span<const fe_t> lambdas,
               const BlockMatrix& bm);

// (1, lambda, lambda^2, ..., lambda^{t-1})
std::vector<fe_t> build_L(const FieldContext& gf, fe_t lambda, unsigned t);

// Kernel of node (a,b): s x s grid; block (j,j) = +L_{base+b*s+j} and block
// (b,j) = -L_{base+b*s+j} for j != b, each kron'd with I_{s^a}. Variant B
// allows b = s, which leaves a pure diagonal kernel.
BlockMatrix build_kernel(const CodeParams& p, unsigned a, unsigned b,
                         unsigned t);
// Same grid with inner = 1; its subset determinants match build_kernel's up
// to sign, which makes it the cheap predicate for lambda search.
BlockMatrix build_kernel_unit(const CodeParams& p, unsigned a, unsigned b,
                              unsigned t);

// Full l x l block law of one node's parity matrix at entry length t:
// entry (i,j) is +L at i == j, -L when digit a of i equals b and every other
// digit of i matches j, and zero otherwise; the lambda index follows digit a
// of the column.
BlockMatrix build_node_matrix(const CodeParams& p, unsigned node, unsigned t);

// Concatenate block matrices with identical row geometry.
BlockMatrix hconcat_blocks(const std::vector<const BlockMatrix*>& parts);

std::uint32_t lambda_index(const CodeParams& p, unsigned a, unsigned b,
                           unsigned j);

// Deterministic greedy selection in theta-power order: per group, take the
// next group_size*s unused elements, test every in-group subset determinant,
// and slide the window forward on failure.
std::vector<fe_t> select_lambdas(const FieldContext& gf, const CodeParams& p);

enum class Validation {
  full,           // distinct lambdas + all in-group subset determinants
  distinct_only,  // skip the determinant sweep
  none,           // testing hook for the constraint checkers
};

// Immutable construction instance: params, field, lambda sequence, digest,
// plus lazily realized caches shared by the codec. Move-only.
class CodeProfile {
public:
  static CodeProfile build(const CodeParams& p, FieldContext gf);
  static CodeProfile from_lambdas(const CodeParams& p, FieldContext gf,
                                  std::vector<fe_t> lambdas,
                                  Validation level = Validation::full);

  CodeProfile(CodeProfile&&) noexcept;
  CodeProfile& operator=(CodeProfile&&) noexcept;
  ~CodeProfile();

  const CodeParams& params() const { return params_; }
  const FieldContext& field() const { return gf_; }
  std::span<const fe_t> lambdas() const { return lambdas_; }
  fe_t lambda(std::uint32_t idx) const { return lambdas_[idx]; }
  std::uint64_t digest() const { return digest_; }

  bool locally_certified() const { return locally_certified_; }
  bool globally_certified() const;
  void note_global_certified() const;

  // Realized parity matrix H_node (r*l x l), cached. Nodes in [padded_n).
  const Matrix& parity_matrix(unsigned node) const;

  // Shared memo slots for the codec's precomputed operators.
  const Matrix& memo_encode_op(
      const std::function<Matrix()>& build) const;
  const Matrix& memo_pattern_op(
      const std::vector<unsigned>& key,
      const std::function<Matrix()>& build) const;

  // Canonical serialized form (the digest covers all bytes before itself).
  std::vector<std::uint8_t> canonical_bytes() const;

private:
  CodeProfile(const CodeParams& p, FieldContext gf, std::vector<fe_t> lambdas);

  CodeParams params_;
  FieldContext gf_;
  std::vector<fe_t> lambdas_;
  std::uint64_t digest_ = 0;
  bool locally_certified_ = false;

  struct Cache;
  std::unique_ptr<Cache> cache_;
};

struct LocalReport {
  unsigned group = 0;
  std::uint64_t checked = 0;
  std::vector<std::vector<unsigned>> failing_subsets;
  bool pass() const { return failing_subsets.empty(); }
};

// Determinant sweep over every nonempty in-group subset B at t = |B|,
// realized with the group's true inner identity factor.
LocalReport check_local_constraints(const CodeProfile& profile,
                                    unsigned group);

struct GlobalSelection {
  // (group, nonempty in-group subset) picks with strictly increasing groups.
  std::vector<std::pair<unsigned, std::vector<unsigned>>> picks;
  unsigned total() const {
    unsigned t = 0;
    for (const auto& [g, b] : picks) t += static_cast<unsigned>(b.size());
    return t;
  }
  std::string describe() const;
};

std::vector<GlobalSelection> enumerate_global_selections(const CodeParams& p,
                                                         unsigned t_max);

struct GlobalReport {
  std::uint64_t checked = 0;
  std::vector<GlobalSelection> failures;
  bool pass() const { return failures.empty(); }
};

inline constexpr std::uint64_t kGlobalSelectionBudget = 1u << 20;

// Brute-force determinant check of every cross-group concatenation with
// total width t <= t_max. At t_max = r this is exactly the any-r-erasures
// (MDS) property. Raises capacity when the enumeration exceeds the budget.
GlobalReport check_global_constraints(const CodeProfile& profile,
                                      unsigned t_max,
                                      std::uint64_t budget = kGlobalSelectionBudget);

// Realize the concatenation [A_{a0,B0} | A_{a1,B1} | ...] at entry length t.
Matrix realize_selection(const CodeProfile& profile,
                         const GlobalSelection& sel, unsigned t);

// Digit-swap permutation on [l): exchanges base-s digits g and h.
Permutation build_group_swap(const CodeParams& p, unsigned g, unsigned h);

// Profile with the lambda blocks of groups g and h exchanged.
CodeProfile swap_lambda_blocks(const CodeProfile& profile, unsigned g,
                               unsigned h);

}  // namespace msr
