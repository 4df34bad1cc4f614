#pragma once

#include <span>

#include "msr/codec.hpp"
#include "msr/construction.hpp"

namespace msr {

// What a helper transmits: raw symbols at read_indices, or one sum per
// reduced index folding its whole vector along the repair digit.
enum class SendKind : std::uint8_t { raw = 0, sums = 1 };

struct HelperPlan {
  unsigned node = 0;
  SendKind kind = SendKind::raw;
  std::vector<std::uint32_t> read_indices;  // ascending symbol positions
  std::uint64_t send_count = 0;             // symbols on the wire, always l/s
};

struct RepairPlan {
  unsigned failed = 0;
  std::vector<HelperPlan> helpers;  // ascending by node
  std::uint64_t plan_digest = 0;    // binds profile, failed node, helper set
};

struct LedgerEntry {
  unsigned node = 0;
  std::uint64_t read = 0;
  std::uint64_t sent = 0;
};

// Per-stripe transfer accounting; totals are what the repair moves and touches.
struct TransferLedger {
  std::vector<LedgerEntry> entries;
  std::uint64_t total_read = 0;
  std::uint64_t total_sent = 0;
};

// Choose what each of the d helpers reads and sends for the failed node.
RepairPlan plan_repair(const CodeProfile& profile, unsigned failed,
                       std::vector<unsigned> helpers);

TransferLedger account(const CodeParams& params, const RepairPlan& plan);

// Compute one helper's wire payload (l/s symbols) from its full node vector.
std::vector<fe_t> extract_payload(const CodeProfile& profile,
                                  const RepairPlan& plan, unsigned helper,
                                  std::span<const fe_t> node_vector);

// Precomputed reduced linear system for one plan: the r*(l/s) unknowns are the
// failed node's s interleaved pieces plus the n-1-d bystander node images.
class RepairContext {
 public:
  RepairContext(const CodeProfile& profile, const RepairPlan& plan);

  const RepairPlan& plan() const { return plan_; }

  // payloads follow plan.helpers order, each of length l/s.
  std::vector<fe_t> execute(std::span<const std::vector<fe_t>> payloads) const;

 private:
  const CodeProfile& profile_;
  RepairPlan plan_;
  Matrix op_;  // unknown-system inverse times the helper columns
};

// One-shot convenience wrapper around RepairContext.
std::vector<fe_t> execute_repair(const CodeProfile& profile,
                                 const RepairPlan& plan,
                                 std::span<const std::vector<fe_t>> payloads);

// Rebuild a whole shard from d helper shards, stripe by stripe.
Shard repair_shard(const CodeProfile& profile, const RepairPlan& plan,
                   std::span<const Shard> helper_shards, unsigned threads = 1);

}  // namespace msr
