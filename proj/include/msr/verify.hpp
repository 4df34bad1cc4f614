#pragma once

#include <span>
#include <string>

#include "msr/construction.hpp"

namespace msr {

struct SuiteResult {
  std::string name;
  bool pass = false;
  std::uint64_t checked = 0;
  std::vector<std::string> failures;
  double seconds = 0.0;
};

// Kernel invertibility for every nonempty in-group subset.
SuiteResult run_local_suite(const CodeProfile& profile);

// Determinants of every cross-group selection up to t_max columns.
SuiteResult run_global_suite(const CodeProfile& profile, unsigned t_max);

// Elimination certificates for every (group, subset, length) triple plus the
// full triangular factorization of every selection (capped by sampling).
SuiteResult run_reduction_suite(const CodeProfile& profile, unsigned t_max,
                                std::uint64_t cap, std::uint64_t seed);

// Exercises every failed-node / helper-set combination on a random codeword
// and audits the transfer ledger against the bandwidth target.
SuiteResult run_repair_suite(const CodeProfile& profile, std::uint64_t cap,
                             std::uint64_t seed);

// Digit-relabelled codewords must satisfy the profile with the matching
// lambda blocks exchanged.
SuiteResult run_permutation_suite(const CodeProfile& profile, unsigned words,
                                  std::uint64_t seed);

std::string render_text(std::span<const SuiteResult> results);
std::string render_json(std::span<const SuiteResult> results);

}  // namespace msr
