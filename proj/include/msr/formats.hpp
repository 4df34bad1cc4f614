#pragma once

#include <filesystem>
#include <span>

#include "msr/codec.hpp"
#include "msr/construction.hpp"

namespace msr {

// Profile files carry everything needed to rebuild the code: parameters,
// field choice, the lambda table, and a trailing integrity digest.
void save_profile(const CodeProfile& profile,
                  const std::filesystem::path& path);
CodeProfile load_profile(const std::filesystem::path& path);

// Shard files bind themselves to a profile through its digest; loading
// against the wrong profile is refused.
void save_shard(const CodeProfile& profile, const Shard& shard,
                const std::filesystem::path& path);
Shard load_shard(const CodeProfile& profile,
                 const std::filesystem::path& path);

// Helper payload blob: the l/s symbols one helper puts on the wire, tagged
// with the sending node and the plan digest they answer.
struct PayloadBlob {
  unsigned node = 0;
  std::uint64_t plan_digest = 0;
  std::vector<fe_t> elements;
};

std::vector<std::uint8_t> serialize_payload(const CodeProfile& profile,
                                            unsigned node,
                                            std::uint64_t plan_digest,
                                            std::span<const fe_t> elements);
PayloadBlob parse_payload(const CodeProfile& profile,
                          std::span<const std::uint8_t> bytes);
void save_payload(const CodeProfile& profile, unsigned node,
                  std::uint64_t plan_digest, std::span<const fe_t> elements,
                  const std::filesystem::path& path);
PayloadBlob load_payload(const CodeProfile& profile,
                         const std::filesystem::path& path);

// Plain byte-file helpers shared by the command line tool.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes);

}  // namespace msr
