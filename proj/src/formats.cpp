#include "msr/formats.hpp"

#include <cstring>
#include <fstream>

#include "msr/digest.hpp"
#include "msr/errors.hpp"

namespace msr {

namespace {

constexpr char kProfileMagic[4] = {'M', 'S', 'R', 'P'};
constexpr char kShardMagic[4] = {'M', 'S', 'R', 'S'};
constexpr std::uint16_t kFormatVersion = 1;

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint64_t take(unsigned width_bytes) {
    if (pos_ + width_bytes > bytes_.size())
      fail(ErrorClass::corruption, "file is truncated");
    std::uint64_t out = 0;
    for (unsigned i = 0; i < width_bytes; ++i)
      out |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += width_bytes;
    return out;
  }

  void expect_magic(const char (&magic)[4], const char* kind) {
    if (pos_ + 4 > bytes_.size() ||
        std::memcmp(bytes_.data() + pos_, magic, 4) != 0)
      fail(ErrorClass::corruption,
           std::string("not a ") + kind + " file");
    pos_ += 4;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

class ByteWriter {
 public:
  void put(std::uint64_t value, unsigned width_bytes) {
    for (unsigned i = 0; i < width_bytes; ++i)
      bytes_.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
  void put_magic(const char (&magic)[4]) {
    bytes_.insert(bytes_.end(), magic, magic + 4);
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

}  // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorClass::io, "cannot open " + path.string() + " for reading");
  std::vector<std::uint8_t> bytes(
      (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorClass::io, "read failed on " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    fail(ErrorClass::io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorClass::io, "write failed on " + path.string());
}

void save_profile(const CodeProfile& profile,
                  const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes = profile.canonical_bytes();
  write_file(path, bytes);
}

CodeProfile load_profile(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes = read_file(path);
  if (bytes.size() < 8)
    fail(ErrorClass::corruption, "file is truncated");
  std::uint64_t want = fnv1a64(
      std::span<const std::uint8_t>(bytes.data(), bytes.size() - 8));

  ByteReader r{std::span<const std::uint8_t>(bytes)};
  r.expect_magic(kProfileMagic, "profile");
  if (r.take(2) != kFormatVersion)
    fail(ErrorClass::corruption, "unsupported profile version");
  CodeParams p;
  p.variant = static_cast<Variant>(r.take(1));
  r.take(1);  // reserved
  p.n = static_cast<unsigned>(r.take(2));
  p.k = static_cast<unsigned>(r.take(2));
  p.d = static_cast<unsigned>(r.take(2));
  unsigned width = static_cast<unsigned>(r.take(1));
  r.take(1);  // pad
  std::uint32_t poly = static_cast<std::uint32_t>(r.take(4));
  std::uint64_t count = r.take(4);

  try {
    if (p.variant != Variant::A && p.variant != Variant::B)
      fail(ErrorClass::invalid_argument, "unknown variant");
    p.validate();
    FieldContext gf(width, poly);
    unsigned eb = gf.elem_bytes();
    if (count != p.lambda_count())
      fail(ErrorClass::invalid_argument, "lambda count mismatch");
    std::vector<fe_t> lambdas;
    lambdas.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i)
      lambdas.push_back(static_cast<fe_t>(r.take(eb)));
    std::uint64_t stored = r.take(8);
    if (r.remaining() != 0)
      fail(ErrorClass::invalid_argument, "trailing bytes");
    if (stored != want)
      fail(ErrorClass::invalid_argument, "digest mismatch");
    return CodeProfile::from_lambdas(p, std::move(gf), std::move(lambdas),
                                     Validation::full);
  } catch (const Error& e) {
    if (e.cls() == ErrorClass::corruption) throw;
    fail(ErrorClass::corruption,
         std::string("profile file is not usable: ") + e.what());
  }
}

void save_shard(const CodeProfile& profile, const Shard& shard,
                const std::filesystem::path& path) {
  const CodeParams& p = profile.params();
  std::uint64_t l = p.ell();
  if (shard.node >= p.n)
    fail(ErrorClass::invalid_argument, "shard node index out of range");
  if (shard.profile_digest != profile.digest())
    fail(ErrorClass::invalid_argument,
         "shard does not belong to this profile");
  if (shard.symbols.size() != shard.stripe_count * l)
    fail(ErrorClass::invalid_argument, "shard symbol count is inconsistent");

  ByteWriter w;
  w.put_magic(kShardMagic);
  w.put(kFormatVersion, 2);
  w.put(profile.digest(), 8);
  w.put(shard.node, 2);
  w.put(shard.stripe_count, 8);
  w.put(shard.original_bytes, 8);
  unsigned eb = profile.field().elem_bytes();
  for (fe_t sym : shard.symbols) w.put(sym, eb);
  write_file(path, w.bytes());
}

Shard load_shard(const CodeProfile& profile,
                 const std::filesystem::path& path) {
  const CodeParams& p = profile.params();
  const FieldContext& gf = profile.field();
  std::uint64_t l = p.ell();
  std::vector<std::uint8_t> bytes = read_file(path);
  ByteReader r{std::span<const std::uint8_t>(bytes)};
  r.expect_magic(kShardMagic, "shard");
  if (r.take(2) != kFormatVersion)
    fail(ErrorClass::corruption, "unsupported shard version");
  Shard sh;
  sh.profile_digest = r.take(8);
  if (sh.profile_digest != profile.digest())
    fail(ErrorClass::corruption,
         "shard was built against a different profile");
  sh.node = static_cast<unsigned>(r.take(2));
  if (sh.node >= p.n)
    fail(ErrorClass::corruption, "shard node index out of range");
  sh.stripe_count = r.take(8);
  sh.original_bytes = r.take(8);
  unsigned eb = gf.elem_bytes();
  if (r.remaining() != sh.stripe_count * l * eb)
    fail(ErrorClass::corruption, "shard symbol count does not match its header");
  sh.symbols.reserve(sh.stripe_count * l);
  for (std::uint64_t i = 0; i < sh.stripe_count * l; ++i) {
    std::uint64_t sym = r.take(eb);
    if (sym >= gf.order())
      fail(ErrorClass::corruption, "shard symbol outside the field");
    sh.symbols.push_back(static_cast<fe_t>(sym));
  }
  return sh;
}

std::vector<std::uint8_t> serialize_payload(const CodeProfile& profile,
                                            unsigned node,
                                            std::uint64_t plan_digest,
                                            std::span<const fe_t> elements) {
  const CodeParams& p = profile.params();
  if (node >= p.n)
    fail(ErrorClass::invalid_argument, "payload node index out of range");
  if (elements.size() != p.ell() / p.s())
    fail(ErrorClass::invalid_argument, "payload has the wrong length");
  ByteWriter w;
  w.put(node, 2);
  w.put(plan_digest, 8);
  unsigned eb = profile.field().elem_bytes();
  for (fe_t sym : elements) w.put(sym, eb);
  return std::move(w.bytes());
}

PayloadBlob parse_payload(const CodeProfile& profile,
                          std::span<const std::uint8_t> bytes) {
  const CodeParams& p = profile.params();
  const FieldContext& gf = profile.field();
  ByteReader r(bytes);
  PayloadBlob blob;
  blob.node = static_cast<unsigned>(r.take(2));
  if (blob.node >= p.n)
    fail(ErrorClass::corruption, "payload node index out of range");
  blob.plan_digest = r.take(8);
  unsigned eb = gf.elem_bytes();
  std::uint64_t want = p.ell() / p.s();
  if (r.remaining() != want * eb)
    fail(ErrorClass::corruption, "payload length does not match the profile");
  blob.elements.reserve(want);
  for (std::uint64_t i = 0; i < want; ++i) {
    std::uint64_t sym = r.take(eb);
    if (sym >= gf.order())
      fail(ErrorClass::corruption, "payload symbol outside the field");
    blob.elements.push_back(static_cast<fe_t>(sym));
  }
  return blob;
}

void save_payload(const CodeProfile& profile, unsigned node,
                  std::uint64_t plan_digest, std::span<const fe_t> elements,
                  const std::filesystem::path& path) {
  write_file(path, serialize_payload(profile, node, plan_digest, elements));
}

PayloadBlob load_payload(const CodeProfile& profile,
                         const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes = read_file(path);
  return parse_payload(profile, std::span<const std::uint8_t>(bytes));
}

}  // namespace msr
