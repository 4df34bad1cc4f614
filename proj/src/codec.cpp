#include "msr/codec.hpp"

#include <algorithm>
#include <functional>
#include <thread>

#include "msr/errors.hpp"

namespace msr {

namespace {

// Concatenation of the r data->parity operators: parity_concat = op * data_concat.
const Matrix& encode_operator(const CodeProfile& profile) {
  return profile.memo_encode_op([&] {
    const CodeParams& p = profile.params();
    const FieldContext& gf = profile.field();
    std::vector<const Matrix*> parity_cols;
    std::vector<const Matrix*> data_cols;
    for (unsigned z = 0; z < p.n; ++z) {
      const Matrix& h = profile.parity_matrix(z);
      (z < p.k ? data_cols : parity_cols).push_back(&h);
    }
    Matrix inv = inverse(gf, hconcat(parity_cols));
    return mat_mul(gf, inv, hconcat(data_cols));
  });
}

// Inverse of the r stacked node matrices named by the padded erasure pattern.
const Matrix& pattern_operator(const CodeProfile& profile,
                               const std::vector<unsigned>& pattern) {
  return profile.memo_pattern_op(pattern, [&] {
    std::vector<const Matrix*> cols;
    for (unsigned z : pattern) cols.push_back(&profile.parity_matrix(z));
    return inverse(profile.field(), hconcat(cols));
  });
}

void run_striped(std::uint64_t stripes, unsigned threads,
                 const std::function<void(std::uint64_t, std::uint64_t)>& body) {
  if (threads <= 1 || stripes <= 1) {
    body(0, stripes);
    return;
  }
  unsigned workers = static_cast<unsigned>(
      std::min<std::uint64_t>(threads, stripes));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::uint64_t chunk = (stripes + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    std::uint64_t lo = w * chunk;
    std::uint64_t hi = std::min<std::uint64_t>(stripes, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

Codeword encode(const CodeProfile& profile,
                std::span<const std::vector<fe_t>> data) {
  const CodeParams& p = profile.params();
  const FieldContext& gf = profile.field();
  std::uint64_t l = p.ell();
  if (data.size() != p.k)
    fail(ErrorClass::invalid_argument, "encode expects exactly k data nodes");
  for (const auto& v : data)
    if (v.size() != l)
      fail(ErrorClass::invalid_argument,
           "data node length does not match the sub-packetization");

  std::vector<fe_t> concat;
  concat.reserve(p.k * l);
  for (const auto& v : data) concat.insert(concat.end(), v.begin(), v.end());

  std::vector<fe_t> parity = mat_vec(gf, encode_operator(profile), concat);
  for (fe_t& x : parity) x = gf.neg(x);

  Codeword word;
  word.profile_uncertified = !profile.globally_certified();
  word.nodes.resize(p.n);
  for (unsigned z = 0; z < p.k; ++z)
    word.nodes[z].assign(data[z].begin(), data[z].end());
  for (unsigned z = p.k; z < p.n; ++z)
    word.nodes[z].assign(parity.begin() + (z - p.k) * l,
                         parity.begin() + (z - p.k + 1) * l);
  return word;
}

Codeword decode_erasures(const CodeProfile& profile, const Codeword& word,
                         std::vector<unsigned> erased) {
  const CodeParams& p = profile.params();
  const FieldContext& gf = profile.field();
  std::uint64_t l = p.ell();
  if (word.nodes.size() != p.n)
    fail(ErrorClass::invalid_argument, "codeword does not have n nodes");
  std::sort(erased.begin(), erased.end());
  if (std::adjacent_find(erased.begin(), erased.end()) != erased.end())
    fail(ErrorClass::invalid_argument, "duplicate erased node index");
  for (unsigned z : erased)
    if (z >= p.n) fail(ErrorClass::invalid_argument, "erased node out of range");
  if (erased.size() > p.r())
    fail(ErrorClass::too_many_erasures,
         "more erased nodes than parity nodes can cover");

  std::vector<bool> is_erased(p.n, false);
  for (unsigned z : erased) is_erased[z] = true;
  for (unsigned z = 0; z < p.n; ++z)
    if (!is_erased[z] && word.nodes[z].size() != l)
      fail(ErrorClass::invalid_argument,
           "surviving node has the wrong length");
  if (erased.empty()) return word;

  // Pad the pattern to exactly r nodes; the re-solved survivors must come
  // back unchanged, which checks the whole word against every parity row.
  std::vector<unsigned> pattern = erased;
  std::vector<bool> in_pattern(p.n, false);
  for (unsigned z : pattern) in_pattern[z] = true;
  for (unsigned z = 0; z < p.n && pattern.size() < p.r(); ++z) {
    if (!in_pattern[z]) {
      pattern.push_back(z);
      in_pattern[z] = true;
    }
  }
  std::sort(pattern.begin(), pattern.end());

  const Matrix& op = pattern_operator(profile, pattern);

  std::vector<fe_t> rhs(p.r() * l, 0);
  for (unsigned z = 0; z < p.n; ++z) {
    if (in_pattern[z]) continue;
    std::vector<fe_t> part = mat_vec(gf, profile.parity_matrix(z), word.nodes[z]);
    for (std::size_t i = 0; i < rhs.size(); ++i)
      rhs[i] = gf.add(rhs[i], part[i]);
  }
  for (fe_t& x : rhs) x = gf.neg(x);
  std::vector<fe_t> solved = mat_vec(gf, op, rhs);

  Codeword out = word;
  for (std::size_t slot = 0; slot < pattern.size(); ++slot) {
    unsigned z = pattern[slot];
    std::span<const fe_t> piece(solved.data() + slot * l, l);
    if (is_erased[z]) {
      out.nodes[z].assign(piece.begin(), piece.end());
    } else if (!std::equal(piece.begin(), piece.end(), word.nodes[z].begin())) {
      fail(ErrorClass::corruption,
           "surviving nodes are inconsistent with the parity equations");
    }
  }
  return out;
}

bool check_parity(const CodeProfile& profile, const Codeword& word) {
  const CodeParams& p = profile.params();
  const FieldContext& gf = profile.field();
  std::uint64_t l = p.ell();
  if (word.nodes.size() != p.n)
    fail(ErrorClass::invalid_argument, "codeword does not have n nodes");
  std::vector<fe_t> syndrome(p.r() * l, 0);
  for (unsigned z = 0; z < p.n; ++z) {
    if (word.nodes[z].size() != l)
      fail(ErrorClass::invalid_argument, "node has the wrong length");
    std::vector<fe_t> part = mat_vec(gf, profile.parity_matrix(z), word.nodes[z]);
    for (std::size_t i = 0; i < syndrome.size(); ++i)
      syndrome[i] = gf.add(syndrome[i], part[i]);
  }
  return std::all_of(syndrome.begin(), syndrome.end(),
                     [](fe_t x) { return x == 0; });
}

std::vector<fe_t> pack_symbols(const FieldContext& gf,
                               std::span<const std::uint8_t> bytes) {
  unsigned w = gf.width();
  fe_t mask = static_cast<fe_t>(gf.order() - 1);
  std::vector<fe_t> out;
  out.reserve((bytes.size() * 8 + w - 1) / w);
  std::uint32_t acc = 0;
  unsigned bits = 0;
  for (std::uint8_t byte : bytes) {
    acc |= static_cast<std::uint32_t>(byte) << bits;
    bits += 8;
    while (bits >= w) {
      out.push_back(static_cast<fe_t>(acc & mask));
      acc >>= w;
      bits -= w;
    }
  }
  if (bits > 0) out.push_back(static_cast<fe_t>(acc & mask));
  return out;
}

std::vector<std::uint8_t> unpack_symbols(const FieldContext& gf,
                                         std::span<const fe_t> symbols,
                                         std::uint64_t original_bytes) {
  unsigned w = gf.width();
  std::vector<std::uint8_t> out;
  out.reserve(original_bytes);
  std::uint32_t acc = 0;
  unsigned bits = 0;
  for (fe_t sym : symbols) {
    if (out.size() >= original_bytes) break;
    acc |= static_cast<std::uint32_t>(sym) << bits;
    bits += w;
    while (bits >= 8 && out.size() < original_bytes) {
      out.push_back(static_cast<std::uint8_t>(acc & 0xFF));
      acc >>= 8;
      bits -= 8;
    }
  }
  if (out.size() != original_bytes)
    fail(ErrorClass::corruption, "symbol stream shorter than the recorded byte length");
  return out;
}

std::vector<Shard> encode_bytes(const CodeProfile& profile,
                                std::span<const std::uint8_t> bytes,
                                unsigned threads) {
  const CodeParams& p = profile.params();
  const FieldContext& gf = profile.field();
  std::uint64_t l = p.ell();
  std::uint64_t stripe_syms = static_cast<std::uint64_t>(p.k) * l;

  std::vector<fe_t> symbols = pack_symbols(gf, bytes);
  std::uint64_t stripes = (symbols.size() + stripe_syms - 1) / stripe_syms;
  symbols.resize(stripes * stripe_syms, 0);

  std::vector<Shard> shards(p.n);
  for (unsigned z = 0; z < p.n; ++z) {
    shards[z].node = z;
    shards[z].profile_digest = profile.digest();
    shards[z].stripe_count = stripes;
    shards[z].original_bytes = bytes.size();
    shards[z].symbols.assign(stripes * l, 0);
  }
  if (stripes == 0) return shards;

  const Matrix& op = encode_operator(profile);
  run_striped(stripes, threads, [&](std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t t = lo; t < hi; ++t) {
      std::span<const fe_t> data(symbols.data() + t * stripe_syms, stripe_syms);
      std::vector<fe_t> parity = mat_vec(gf, op, data);
      for (unsigned z = 0; z < p.k; ++z)
        std::copy_n(data.data() + z * l, l, shards[z].symbols.data() + t * l);
      for (unsigned z = p.k; z < p.n; ++z)
        for (std::uint64_t i = 0; i < l; ++i)
          shards[z].symbols[t * l + i] = gf.neg(parity[(z - p.k) * l + i]);
    }
  });
  return shards;
}

std::vector<std::uint8_t> decode_bytes(const CodeProfile& profile,
                                       std::span<const Shard> shards,
                                       unsigned threads) {
  const CodeParams& p = profile.params();
  const FieldContext& gf = profile.field();
  std::uint64_t l = p.ell();
  if (shards.empty())
    fail(ErrorClass::invalid_argument, "no shards supplied");

  std::vector<const Shard*> by_node(p.n, nullptr);
  std::uint64_t stripes = shards[0].stripe_count;
  std::uint64_t original = shards[0].original_bytes;
  for (const Shard& sh : shards) {
    if (sh.profile_digest != profile.digest())
      fail(ErrorClass::corruption, "shard was built against a different profile");
    if (sh.node >= p.n)
      fail(ErrorClass::invalid_argument, "shard node index out of range");
    if (by_node[sh.node] != nullptr)
      fail(ErrorClass::invalid_argument, "duplicate shard for one node");
    if (sh.stripe_count != stripes || sh.original_bytes != original)
      fail(ErrorClass::corruption, "shards disagree about the payload shape");
    if (sh.symbols.size() != stripes * l)
      fail(ErrorClass::corruption, "shard symbol count does not match its header");
    by_node[sh.node] = &sh;
  }

  std::vector<unsigned> erased;
  for (unsigned z = 0; z < p.n; ++z)
    if (by_node[z] == nullptr) erased.push_back(z);
  if (erased.size() > p.r())
    fail(ErrorClass::too_many_erasures,
         "fewer than k shards were supplied");

  bool data_complete = true;
  for (unsigned z = 0; z < p.k; ++z)
    if (by_node[z] == nullptr) data_complete = false;

  std::vector<fe_t> data(stripes * p.k * l, 0);
  if (data_complete) {
    for (unsigned z = 0; z < p.k; ++z)
      for (std::uint64_t t = 0; t < stripes; ++t)
        std::copy_n(by_node[z]->symbols.data() + t * l, l,
                    data.data() + (t * p.k + z) * l);
  } else {
    // Build the pattern operator once before the stripe loop fans out.
    std::vector<unsigned> pattern = erased;
    for (unsigned z = 0; z < p.n && pattern.size() < p.r(); ++z)
      if (by_node[z] != nullptr &&
          std::find(pattern.begin(), pattern.end(), z) == pattern.end())
        pattern.push_back(z);
    std::sort(pattern.begin(), pattern.end());
    pattern_operator(profile, pattern);
    run_striped(stripes, threads, [&](std::uint64_t lo, std::uint64_t hi) {
      for (std::uint64_t t = lo; t < hi; ++t) {
        Codeword word;
        word.nodes.resize(p.n);
        for (unsigned z = 0; z < p.n; ++z)
          if (by_node[z] != nullptr)
            word.nodes[z].assign(by_node[z]->symbols.begin() + t * l,
                                 by_node[z]->symbols.begin() + (t + 1) * l);
        Codeword full = decode_erasures(profile, word, erased);
        for (unsigned z = 0; z < p.k; ++z)
          std::copy_n(full.nodes[z].data(), l, data.data() + (t * p.k + z) * l);
      }
    });
  }
  return unpack_symbols(gf, data, original);
}

}  // namespace msr
