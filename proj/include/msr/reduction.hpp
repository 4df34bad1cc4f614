#pragma once

#include <string>

#include "msr/construction.hpp"

namespace msr {

// Row-elimination package for one (group, subset, length) triple. The sorted
// eliminator stacks the subset's kernel on top of zeros; the mixer lifts that
// action to whole node matrices. Both have unit determinant, so determinant
// bookkeeping stays exact.
struct EliminationCertificate {
  unsigned group = 0;
  std::vector<unsigned> subset;  // ascending in-group indices
  unsigned t = 0;                // working column length, |subset| < t <= r
  Matrix annihilator;            // s rows that cancel the kernel's tail
  Matrix sorted_eliminator;      // s*t x s*t
  Matrix mixer;                  // l*t x l*t
  std::vector<Matrix> f_blocks;  // s x s residue per profile lambda
  std::vector<bool> f_singular;  // true exactly on the subset's own lambdas
};

// Build the certificate and verify its three defining identities plus the
// node-level elimination it induces. Throws certificate_failure when any
// identity does not hold.
EliminationCertificate build_elimination(const CodeProfile& profile,
                                         unsigned group,
                                         std::vector<unsigned> subset,
                                         unsigned t);

struct ReductionStep {
  unsigned group = 0;
  std::vector<unsigned> subset;
  fe_t head_det = 0;  // subset kernel block at its own length
  fe_t tail_det = 0;  // remaining block after elimination
};

struct ReductionReport {
  GlobalSelection selection;
  fe_t direct_det = 0;    // determinant of the full selection, computed flat
  fe_t factored_det = 0;  // head times tail at the outermost level
  std::vector<ReductionStep> steps;
  bool pass = false;
  std::string failure;
};

// Peel the selection one group at a time, checking at every level that the
// mixed matrix has the predicted block shape, that the tail columns match the
// shorter forms after the residue correction, and that the determinant
// factors exactly.
ReductionReport verify_triangular_reduction(const CodeProfile& profile,
                                            const GlobalSelection& selection);

}  // namespace msr
