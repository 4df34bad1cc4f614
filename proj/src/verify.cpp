#include "msr/verify.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <random>
#include <sstream>

#include <json.hpp>

#include "msr/codec.hpp"
#include "msr/errors.hpp"
#include "msr/reduction.hpp"
#include "msr/repair.hpp"

namespace msr {

namespace {

constexpr std::size_t kFailureCap = 32;

class SuiteTimer {
 public:
  explicit SuiteTimer(SuiteResult& result)
      : result_(result), start_(std::chrono::steady_clock::now()) {}
  ~SuiteTimer() {
    result_.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      start_)
            .count();
  }

 private:
  SuiteResult& result_;
  std::chrono::steady_clock::time_point start_;
};

void note_failure(SuiteResult& result, const std::string& what) {
  if (result.failures.size() < kFailureCap) result.failures.push_back(what);
}

std::string subset_text(unsigned group, const std::vector<unsigned>& subset) {
  std::ostringstream os;
  os << "group " << group << " subset {";
  for (std::size_t i = 0; i < subset.size(); ++i)
    os << (i ? "," : "") << subset[i];
  os << "}";
  return os.str();
}

std::vector<std::vector<unsigned>> nonempty_subsets(unsigned g) {
  std::vector<std::vector<unsigned>> out;
  for (unsigned mask = 1; mask < (1u << g); ++mask) {
    std::vector<unsigned> subset;
    for (unsigned b = 0; b < g; ++b)
      if (mask & (1u << b)) subset.push_back(b);
    out.push_back(std::move(subset));
  }
  return out;
}

Codeword random_codeword(const CodeProfile& profile, std::mt19937_64& rng) {
  const CodeParams& p = profile.params();
  std::uniform_int_distribution<std::uint32_t> dist(
      0, profile.field().order() - 1);
  std::vector<std::vector<fe_t>> data(p.k);
  for (auto& v : data) {
    v.resize(p.ell());
    for (fe_t& x : v) x = static_cast<fe_t>(dist(rng));
  }
  return encode(profile, data);
}

std::vector<std::vector<unsigned>> combinations(
    const std::vector<unsigned>& pool, unsigned pick) {
  std::vector<std::vector<unsigned>> out;
  std::vector<unsigned> idx(pick);
  for (unsigned i = 0; i < pick; ++i) idx[i] = i;
  while (true) {
    std::vector<unsigned> combo(pick);
    for (unsigned i = 0; i < pick; ++i) combo[i] = pool[idx[i]];
    out.push_back(std::move(combo));
    int i = static_cast<int>(pick) - 1;
    while (i >= 0 && idx[i] == pool.size() - pick + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (unsigned j = static_cast<unsigned>(i) + 1; j < pick; ++j)
      idx[j] = idx[j - 1] + 1;
  }
  return out;
}

}  // namespace

SuiteResult run_local_suite(const CodeProfile& profile) {
  SuiteResult result;
  result.name = "local";
  SuiteTimer timer(result);
  const CodeParams& p = profile.params();
  bool ok = true;
  for (unsigned a = 0; a < p.group_count(); ++a) {
    LocalReport report = check_local_constraints(profile, a);
    result.checked += report.checked;
    for (const auto& subset : report.failing_subsets) {
      ok = false;
      note_failure(result, "singular kernel for " + subset_text(a, subset));
    }
  }
  result.pass = ok;
  return result;
}

SuiteResult run_global_suite(const CodeProfile& profile, unsigned t_max) {
  SuiteResult result;
  result.name = "global";
  SuiteTimer timer(result);
  GlobalReport report =
      check_global_constraints(profile, t_max, kGlobalSelectionBudget);
  result.checked = report.checked;
  for (const GlobalSelection& sel : report.failures)
    note_failure(result, "singular selection " + sel.describe());
  result.pass = report.pass();
  return result;
}

SuiteResult run_reduction_suite(const CodeProfile& profile, unsigned t_max,
                                std::uint64_t cap, std::uint64_t seed) {
  SuiteResult result;
  result.name = "reduction";
  SuiteTimer timer(result);
  const CodeParams& p = profile.params();
  bool ok = true;

  for (unsigned a = 0; a < p.group_count(); ++a) {
    for (const auto& subset : nonempty_subsets(p.group_size())) {
      for (unsigned t = static_cast<unsigned>(subset.size()) + 1; t <= t_max;
           ++t) {
        ++result.checked;
        try {
          build_elimination(profile, a, subset, t);
        } catch (const Error& e) {
          ok = false;
          note_failure(result, subset_text(a, subset) + " at length " +
                                   std::to_string(t) + ": " + e.what());
        }
      }
    }
  }

  std::vector<GlobalSelection> selections =
      enumerate_global_selections(p, t_max);
  if (cap > 0 && selections.size() > cap) {
    std::mt19937_64 rng(seed);
    std::shuffle(selections.begin(), selections.end(), rng);
    selections.resize(cap);
  }
  for (const GlobalSelection& sel : selections) {
    ++result.checked;
    ReductionReport report = verify_triangular_reduction(profile, sel);
    if (!report.pass) {
      ok = false;
      note_failure(result, sel.describe() + ": " + report.failure);
    }
  }
  result.pass = ok;
  return result;
}

SuiteResult run_repair_suite(const CodeProfile& profile, std::uint64_t cap,
                             std::uint64_t seed) {
  SuiteResult result;
  result.name = "repair";
  SuiteTimer timer(result);
  const CodeParams& p = profile.params();
  std::mt19937_64 rng(seed);
  Codeword word = random_codeword(profile, rng);
  std::uint64_t lred = p.ell() / p.s();

  struct Case {
    unsigned failed;
    std::vector<unsigned> helpers;
  };
  std::vector<Case> cases;
  for (unsigned failed = 0; failed < p.n; ++failed) {
    std::vector<unsigned> pool;
    for (unsigned z = 0; z < p.n; ++z)
      if (z != failed) pool.push_back(z);
    for (auto& combo : combinations(pool, p.d))
      cases.push_back({failed, std::move(combo)});
  }
  if (cap > 0 && cases.size() > cap) {
    std::shuffle(cases.begin(), cases.end(), rng);
    cases.resize(cap);
  }

  bool ok = true;
  for (const Case& c : cases) {
    ++result.checked;
    std::string label = "failed " + std::to_string(c.failed) + " helpers {";
    for (std::size_t i = 0; i < c.helpers.size(); ++i)
      label += (i ? "," : "") + std::to_string(c.helpers[i]);
    label += "}";
    try {
      RepairPlan plan = plan_repair(profile, c.failed, c.helpers);
      std::vector<std::vector<fe_t>> payloads;
      for (const HelperPlan& hp : plan.helpers)
        payloads.push_back(
            extract_payload(profile, plan, hp.node, word.nodes[hp.node]));
      std::vector<fe_t> rebuilt = execute_repair(profile, plan, payloads);
      if (rebuilt != word.nodes[c.failed]) {
        ok = false;
        note_failure(result, label + ": rebuilt node differs");
        continue;
      }
      TransferLedger ledger = account(p, plan);
      if (ledger.total_sent != static_cast<std::uint64_t>(p.d) * lred) {
        ok = false;
        note_failure(result, label + ": bandwidth above d*l/s");
        continue;
      }
      for (const LedgerEntry& e : ledger.entries) {
        bool foreign_sum =
            e.read == p.ell() && e.sent == lred && e.read != e.sent;
        bool aligned = e.read == e.sent && e.sent == lred;
        if (!aligned && !foreign_sum) {
          ok = false;
          note_failure(result, label + ": helper " + std::to_string(e.node) +
                                   " reads off plan");
          break;
        }
      }
    } catch (const Error& e) {
      ok = false;
      note_failure(result, label + ": " + e.what());
    }
  }
  result.pass = ok;
  return result;
}

SuiteResult run_permutation_suite(const CodeProfile& profile, unsigned words,
                                  std::uint64_t seed) {
  SuiteResult result;
  result.name = "permutation";
  SuiteTimer timer(result);
  const CodeParams& p = profile.params();
  std::mt19937_64 rng(seed);
  unsigned groups = static_cast<unsigned>(p.group_count());
  bool shortened = p.padded_n() != p.n;
  bool ok = true;

  for (unsigned g = 0; g < groups; ++g) {
    for (unsigned h = g + 1; h < groups; ++h) {
      if (shortened && h + 1 == groups) continue;  // padded slots cannot move
      CodeProfile swapped = swap_lambda_blocks(profile, g, h);
      Permutation digit_swap = build_group_swap(p, g, h);
      for (unsigned w = 0; w < words; ++w) {
        ++result.checked;
        Codeword word = random_codeword(profile, rng);
        Codeword moved;
        moved.nodes.resize(p.n);
        for (unsigned z = 0; z < p.n; ++z) {
          unsigned src = z;
          unsigned zg = z / p.group_size();
          if (zg == g)
            src = h * p.group_size() + z % p.group_size();
          else if (zg == h)
            src = g * p.group_size() + z % p.group_size();
          moved.nodes[z] = permute_vec(digit_swap, word.nodes[src]);
        }
        if (!check_parity(swapped, moved)) {
          ok = false;
          note_failure(result, "pair (" + std::to_string(g) + "," +
                                   std::to_string(h) + ") word " +
                                   std::to_string(w) + " fails the checks");
        }
        if (w == 0) {
          // Control: relabelling digits without exchanging the node blocks
          // must not satisfy the exchanged profile.
          Codeword unswapped;
          unswapped.nodes.resize(p.n);
          for (unsigned z = 0; z < p.n; ++z)
            unswapped.nodes[z] = permute_vec(digit_swap, word.nodes[z]);
          if (check_parity(swapped, unswapped)) {
            ok = false;
            note_failure(result, "pair (" + std::to_string(g) + "," +
                                     std::to_string(h) +
                                     ") control word passes unexpectedly");
          }
        }
      }
    }
  }
  result.pass = ok;
  return result;
}

std::string render_text(std::span<const SuiteResult> results) {
  std::ostringstream os;
  bool all = true;
  for (const SuiteResult& r : results) {
    os << "suite " << r.name << ": " << (r.pass ? "PASS" : "FAIL") << " ("
       << r.checked << " checks, " << std::fixed << std::setprecision(2)
       << r.seconds << "s)\n";
    for (const std::string& f : r.failures) os << "  " << f << "\n";
    all = all && r.pass;
  }
  os << (all ? "verification passed" : "verification FAILED") << "\n";
  return os.str();
}

std::string render_json(std::span<const SuiteResult> results) {
  nlohmann::json out = nlohmann::json::array();
  bool all = true;
  for (const SuiteResult& r : results) {
    out.push_back({{"suite", r.name},
                   {"pass", r.pass},
                   {"checked", r.checked},
                   {"failures", r.failures},
                   {"seconds", r.seconds}});
    all = all && r.pass;
  }
  nlohmann::json doc = {{"suites", out}, {"pass", all}};
  return doc.dump(2) + "\n";
}

}  // namespace msr
