#pragma once

#include <span>

#include "msr/construction.hpp"

namespace msr {

// One codeword: n node vectors of length l. Erased nodes carry empty vectors.
struct Codeword {
  std::vector<std::vector<fe_t>> nodes;
  // Set on encode when the profile's any-r-erasures check has not run.
  bool profile_uncertified = false;
};

// Systematic encode: data occupies nodes 0..k-1 verbatim; parity nodes are
// solved from the parity-check equations through a cached r*l x r*l inverse.
Codeword encode(const CodeProfile& profile,
                std::span<const std::vector<fe_t>> data);

// Fill in up to r erased nodes. With fewer than r erasures the spare
// equations double as a consistency check on the survivors.
Codeword decode_erasures(const CodeProfile& profile, const Codeword& word,
                         std::vector<unsigned> erased);

// Evaluate every parity row of a complete codeword.
bool check_parity(const CodeProfile& profile, const Codeword& word);

// On-disk unit: one node's symbols across all stripes of a byte payload.
struct Shard {
  unsigned node = 0;
  std::uint64_t profile_digest = 0;
  std::uint64_t stripe_count = 0;
  std::uint64_t original_bytes = 0;
  std::vector<fe_t> symbols;  // stripe_count * l entries
};

// Byte payloads are bit-packed LSB-first into w-bit symbols, then chunked
// into stripes of k*l symbols (both paddings are zeros; the true byte length
// rides in each shard).
std::vector<fe_t> pack_symbols(const FieldContext& gf,
                               std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> unpack_symbols(const FieldContext& gf,
                                         std::span<const fe_t> symbols,
                                         std::uint64_t original_bytes);

std::vector<Shard> encode_bytes(const CodeProfile& profile,
                                std::span<const std::uint8_t> bytes,
                                unsigned threads = 1);
std::vector<std::uint8_t> decode_bytes(const CodeProfile& profile,
                                       std::span<const Shard> shards,
                                       unsigned threads = 1);

}  // namespace msr
