#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "msr/codec.hpp"
#include "msr/construction.hpp"
#include "msr/errors.hpp"
#include "msr/formats.hpp"
#include "msr/repair.hpp"
#include "msr/verify.hpp"

namespace {

using namespace msr;
namespace fs = std::filesystem;

std::uint32_t parse_hex(const std::string& text) {
  std::size_t pos = 0;
  unsigned long value = 0;
  try {
    value = std::stoul(text, &pos, 16);
  } catch (const std::exception&) {
    fail(ErrorClass::invalid_argument, "cannot parse " + text + " as hex");
  }
  if (pos != text.size() || value > 0xFFFFFFFFul)
    fail(ErrorClass::invalid_argument, "cannot parse " + text + " as hex");
  return static_cast<std::uint32_t>(value);
}

std::string hex_u64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

struct ProfileArgs {
  std::string variant = "A";
  unsigned n = 0, k = 0, d = 0;
  unsigned width = 0;
  std::string poly;
  std::string path;
};

int run_profile(const ProfileArgs& args) {
  CodeParams p;
  if (args.variant == "A")
    p.variant = Variant::A;
  else if (args.variant == "B")
    p.variant = Variant::B;
  else
    fail(ErrorClass::invalid_argument, "variant must be A or B");
  p.n = args.n;
  p.k = args.k;
  p.d = args.d;
  p.validate();

  unsigned width = args.width ? args.width : CodeParams::default_field_width(p);
  std::uint32_t poly =
      args.poly.empty() ? FieldContext::default_poly(width) : parse_hex(args.poly);
  FieldContext gf(width, poly);
  CodeProfile profile = CodeProfile::build(p, std::move(gf));
  save_profile(profile, args.path);

  std::uint64_t bound = p.lambda_count() + p.subset_collision_bound();
  std::cout << "profile " << args.path << "\n"
            << "  variant " << args.variant << "  n " << p.n << "  k " << p.k
            << "  d " << p.d << "  r " << p.r() << "  s " << p.s() << "\n"
            << "  vector length " << p.ell() << "  group size "
            << p.group_size() << "  groups " << p.group_count() << "\n"
            << "  field GF(2^" << profile.field().width() << ") poly 0x"
            << std::hex << profile.field().poly() << std::dec << "\n"
            << "  lambda count " << p.lambda_count() << "  existence bound q >= "
            << bound
            << (profile.field().order() >= bound ? " (met)" : " (searched below)")
            << "\n"
            << "  digest " << hex_u64(profile.digest()) << "\n";
  return 0;
}

struct EncodeArgs {
  std::string profile;
  std::string input;
  std::string out_dir = ".";
  std::string prefix;
  unsigned threads = 1;
};

int run_encode(const EncodeArgs& args) {
  CodeProfile profile = load_profile(args.profile);
  std::vector<std::uint8_t> bytes = read_file(args.input);
  std::string prefix =
      args.prefix.empty() ? fs::path(args.input).stem().string() : args.prefix;
  std::vector<Shard> shards = encode_bytes(profile, bytes, args.threads);
  fs::path dir(args.out_dir);
  for (const Shard& sh : shards) {
    fs::path path = dir / (prefix + "." + std::to_string(sh.node) + ".msrs");
    save_shard(profile, sh, path);
    std::cout << path.string() << "\n";
  }
  std::cout << shards.front().stripe_count << " stripes, "
            << bytes.size() << " bytes\n";
  std::cerr << "note: the any-r-erasures certification is not recorded in the "
               "profile file; run the verify command to certify it\n";
  return 0;
}

struct DecodeArgs {
  std::string profile;
  std::vector<std::string> shards;
  std::string out;
  unsigned threads = 1;
};

int run_decode(const DecodeArgs& args) {
  CodeProfile profile = load_profile(args.profile);
  std::vector<Shard> shards;
  shards.reserve(args.shards.size());
  for (const std::string& path : args.shards)
    shards.push_back(load_shard(profile, path));
  std::vector<std::uint8_t> bytes = decode_bytes(profile, shards, args.threads);
  write_file(args.out, bytes);
  std::cout << args.out << ": " << bytes.size() << " bytes\n";
  return 0;
}

struct RepairArgs {
  std::string profile;
  unsigned failed = 0;
  std::string helpers;
  std::vector<std::string> shards;
  std::string out;
  std::string payload_dir;
  std::string report = "text";
  unsigned threads = 1;
};

nlohmann::json ledger_json(const RepairPlan& plan, const TransferLedger& ledger,
                           std::uint64_t stripes) {
  nlohmann::json helpers = nlohmann::json::array();
  for (std::size_t i = 0; i < plan.helpers.size(); ++i) {
    const HelperPlan& hp = plan.helpers[i];
    const LedgerEntry& e = ledger.entries[i];
    helpers.push_back({{"node", e.node},
                       {"kind", hp.kind == SendKind::raw ? "raw" : "sums"},
                       {"read_per_stripe", e.read},
                       {"sent_per_stripe", e.sent}});
  }
  return {{"failed", plan.failed},
          {"plan_digest", hex_u64(plan.plan_digest)},
          {"helpers", helpers},
          {"per_stripe", {{"read", ledger.total_read}, {"sent", ledger.total_sent}}},
          {"stripes", stripes},
          {"total",
           {{"read", ledger.total_read * stripes},
            {"sent", ledger.total_sent * stripes}}}};
}

void print_ledger_text(const RepairPlan& plan, const TransferLedger& ledger,
                       std::uint64_t stripes) {
  std::cout << "repair of node " << plan.failed << ", plan "
            << hex_u64(plan.plan_digest) << "\n";
  for (std::size_t i = 0; i < plan.helpers.size(); ++i) {
    const HelperPlan& hp = plan.helpers[i];
    const LedgerEntry& e = ledger.entries[i];
    std::cout << "  helper " << e.node << " ("
              << (hp.kind == SendKind::raw ? "raw" : "sums") << "): read "
              << e.read << ", sent " << e.sent << " per stripe\n";
  }
  std::cout << "  per stripe: read " << ledger.total_read << ", sent "
            << ledger.total_sent << "\n"
            << "  stripes " << stripes << ": read "
            << ledger.total_read * stripes << ", sent "
            << ledger.total_sent * stripes << "\n";
}

int run_repair(const RepairArgs& args) {
  CodeProfile profile = load_profile(args.profile);
  const CodeParams& p = profile.params();
  std::vector<Shard> shards;
  shards.reserve(args.shards.size());
  for (const std::string& path : args.shards)
    shards.push_back(load_shard(profile, path));

  std::vector<unsigned> helpers;
  for (const Shard& sh : shards) helpers.push_back(sh.node);
  if (!args.helpers.empty()) {
    std::vector<unsigned> want;
    std::stringstream list(args.helpers);
    std::string item;
    while (std::getline(list, item, ',')) {
      std::size_t pos = 0;
      unsigned long v = 0;
      try {
        v = std::stoul(item, &pos);
      } catch (const std::exception&) {
        pos = std::string::npos;
      }
      if (pos != item.size() || v > 0xFFFF)
        fail(ErrorClass::invalid_argument,
             "cannot parse helper index " + item);
      want.push_back(static_cast<unsigned>(v));
    }
    std::vector<unsigned> have = helpers;
    std::sort(want.begin(), want.end());
    std::sort(have.begin(), have.end());
    if (want != have)
      fail(ErrorClass::invalid_argument,
           "helper list does not match the supplied shards");
  }

  RepairPlan plan = plan_repair(profile, args.failed, helpers);
  std::uint64_t stripes = shards.front().stripe_count;

  Shard rebuilt;
  if (!args.payload_dir.empty()) {
    // Materialize the wire exchange: one file per helper holding one payload
    // record per stripe, then rebuild from those files alone.
    fs::path dir(args.payload_dir);
    std::uint64_t l = p.ell();
    std::uint64_t lred = l / p.s();
    for (const Shard& sh : shards) {
      std::vector<std::uint8_t> blob;
      for (std::uint64_t t = 0; t < stripes; ++t) {
        std::span<const fe_t> vec(sh.symbols.data() + t * l, l);
        std::vector<fe_t> payload =
            extract_payload(profile, plan, sh.node, vec);
        std::vector<std::uint8_t> rec =
            serialize_payload(profile, sh.node, plan.plan_digest, payload);
        blob.insert(blob.end(), rec.begin(), rec.end());
      }
      write_file(dir / ("payload." + std::to_string(sh.node) + ".bin"), blob);
    }

    std::size_t rec_size = 2 + 8 + lred * profile.field().elem_bytes();
    RepairContext ctx(profile, plan);
    rebuilt.node = plan.failed;
    rebuilt.profile_digest = profile.digest();
    rebuilt.stripe_count = stripes;
    rebuilt.original_bytes = shards.front().original_bytes;
    rebuilt.symbols.assign(stripes * l, 0);
    std::vector<std::vector<std::uint8_t>> files;
    for (const HelperPlan& hp : plan.helpers)
      files.push_back(
          read_file(dir / ("payload." + std::to_string(hp.node) + ".bin")));
    for (std::uint64_t t = 0; t < stripes; ++t) {
      std::vector<std::vector<fe_t>> payloads;
      for (std::size_t i = 0; i < plan.helpers.size(); ++i) {
        std::span<const std::uint8_t> rec(files[i].data() + t * rec_size,
                                          rec_size);
        PayloadBlob blob = parse_payload(profile, rec);
        if (blob.plan_digest != plan.plan_digest)
          fail(ErrorClass::corruption, "payload answers a different plan");
        if (blob.node != plan.helpers[i].node)
          fail(ErrorClass::corruption, "payload from an unexpected node");
        payloads.push_back(std::move(blob.elements));
      }
      std::vector<fe_t> node = ctx.execute(payloads);
      std::copy_n(node.data(), l, rebuilt.symbols.data() + t * l);
    }
  } else {
    rebuilt = repair_shard(profile, plan, shards, args.threads);
  }

  save_shard(profile, rebuilt, args.out);
  TransferLedger ledger = account(p, plan);
  if (args.report == "json")
    std::cout << ledger_json(plan, ledger, stripes).dump(2) << "\n";
  else
    print_ledger_text(plan, ledger, stripes);
  return 0;
}

struct VerifyArgs {
  std::string profile;
  unsigned t_max = 0;
  std::string suites = "local,global,reduction,repair";
  std::uint64_t repair_cap = 0;
  std::uint64_t reduction_cap = 0;
  unsigned words = 25;
  std::uint64_t seed = 0x4d535221;
  std::string report = "text";
};

int run_verify(const VerifyArgs& args) {
  CodeProfile profile = load_profile(args.profile);
  unsigned t_max = args.t_max ? args.t_max : profile.params().r();
  std::vector<SuiteResult> results;
  std::stringstream names(args.suites);
  std::string name;
  while (std::getline(names, name, ',')) {
    if (name == "local")
      results.push_back(run_local_suite(profile));
    else if (name == "global")
      results.push_back(run_global_suite(profile, t_max));
    else if (name == "reduction")
      results.push_back(
          run_reduction_suite(profile, t_max, args.reduction_cap, args.seed));
    else if (name == "repair")
      results.push_back(run_repair_suite(profile, args.repair_cap, args.seed));
    else if (name == "permutation")
      results.push_back(run_permutation_suite(profile, args.words, args.seed));
    else
      fail(ErrorClass::invalid_argument, "unknown suite " + name);
  }
  std::cout << (args.report == "json" ? render_json(results)
                                      : render_text(results));
  bool all = std::all_of(results.begin(), results.end(),
                         [](const SuiteResult& r) { return r.pass; });
  return all ? 0 : 1;
}

struct BenchArgs {
  std::string profile;
  unsigned mib = 4;
  unsigned threads = 1;
  std::uint64_t seed = 1;
  std::string report = "text";
};

int run_bench(const BenchArgs& args) {
  CodeProfile profile = load_profile(args.profile);
  const CodeParams& p = profile.params();
  std::mt19937_64 rng(args.seed);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(args.mib) << 20);
  for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());

  auto mibs = [&](double secs) {
    return secs > 0 ? static_cast<double>(args.mib) / secs : 0.0;
  };
  auto now = [] { return std::chrono::steady_clock::now(); };
  auto secs = [](auto a, auto b) {
    return std::chrono::duration<double>(b - a).count();
  };

  auto t0 = now();
  std::vector<Shard> shards = encode_bytes(profile, bytes, args.threads);
  double enc = secs(t0, now());

  std::vector<Shard> survivors(shards.begin() + p.r(), shards.end());
  t0 = now();
  std::vector<std::uint8_t> round =
      decode_bytes(profile, survivors, args.threads);
  double dec = secs(t0, now());
  if (round != bytes) fail(ErrorClass::corruption, "decode round trip differs");

  std::vector<unsigned> helpers;
  for (unsigned z = 1; z <= p.d; ++z) helpers.push_back(z);
  RepairPlan plan = plan_repair(profile, 0, helpers);
  std::vector<Shard> helper_shards(shards.begin() + 1,
                                   shards.begin() + 1 + p.d);
  t0 = now();
  Shard rebuilt = repair_shard(profile, plan, helper_shards, args.threads);
  double rep = secs(t0, now());
  if (rebuilt.symbols != shards[0].symbols)
    fail(ErrorClass::corruption, "repair round trip differs");

  if (args.report == "json") {
    nlohmann::json doc = {
        {"mib", args.mib},
        {"threads", args.threads},
        {"encode", {{"seconds", enc}, {"mib_per_s", mibs(enc)}}},
        {"decode", {{"seconds", dec}, {"mib_per_s", mibs(dec)}}},
        {"repair", {{"seconds", rep}, {"mib_per_s", mibs(rep)}}}};
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << "bench " << args.mib << " MiB, " << args.threads
              << " thread(s)\n";
    std::printf("  encode  %.3fs  %.1f MiB/s\n", enc, mibs(enc));
    std::printf("  decode  %.3fs  %.1f MiB/s\n", dec, mibs(dec));
    std::printf("  repair  %.3fs  %.1f MiB/s\n", rep, mibs(rep));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MSR array-code toolkit: profiles, shards, repair, verification"};
  app.require_subcommand(1);

  ProfileArgs pa;
  CLI::App* profile = app.add_subcommand("profile", "generate a code profile");
  profile->add_option("--variant", pa.variant, "construction variant (A or B)")
      ->required();
  profile->add_option("-n", pa.n, "total nodes")->required();
  profile->add_option("-k", pa.k, "data nodes")->required();
  profile->add_option("-d", pa.d, "repair degree")->required();
  profile->add_option("--field-width", pa.width, "field width w (default: derived)");
  profile->add_option("--poly", pa.poly, "reduction polynomial, hex");
  profile->add_option("--profile", pa.path, "output profile path")->required();

  EncodeArgs ea;
  CLI::App* encode = app.add_subcommand("encode", "encode a file into n shards");
  encode->add_option("--profile", ea.profile, "profile path")->required();
  encode->add_option("input", ea.input, "input file")->required();
  encode->add_option("--out-dir", ea.out_dir, "output directory");
  encode->add_option("--prefix", ea.prefix, "shard name prefix");
  encode->add_option("--threads", ea.threads, "stripe worker threads");

  DecodeArgs da;
  CLI::App* decode = app.add_subcommand("decode", "rebuild a file from shards");
  decode->add_option("--profile", da.profile, "profile path")->required();
  decode->add_option("shards", da.shards, "shard files")->required();
  decode->add_option("--out", da.out, "output file")->required();
  decode->add_option("--threads", da.threads, "stripe worker threads");

  RepairArgs ra;
  CLI::App* repair = app.add_subcommand("repair", "rebuild one shard from d helpers");
  repair->add_option("--profile", ra.profile, "profile path")->required();
  repair->add_option("--failed", ra.failed, "failed node index")->required();
  repair->add_option("--helpers", ra.helpers,
                     "comma-separated helper node indices");
  repair->add_option("shards", ra.shards, "helper shard files")->required();
  repair->add_option("--out", ra.out, "output shard path")->required();
  repair->add_option("--payload-dir", ra.payload_dir,
                     "directory for materialized helper payload files");
  repair->add_option("--report", ra.report, "ledger format (text or json)");
  repair->add_option("--threads", ra.threads, "stripe worker threads");

  VerifyArgs va;
  CLI::App* verify = app.add_subcommand("verify", "run constraint suites");
  verify->add_option("--profile", va.profile, "profile path")->required();
  verify->add_option("--tmax", va.t_max, "selection size limit (default r)");
  verify->add_option("--suites", va.suites,
                     "comma list: local,global,reduction,repair,permutation");
  verify->add_option("--repair-cap", va.repair_cap,
                     "sample cap for repair cases (0 = exhaustive)");
  verify->add_option("--reduction-cap", va.reduction_cap,
                     "sample cap for reduction selections (0 = exhaustive)");
  verify->add_option("--words", va.words, "codewords per permutation pair");
  verify->add_option("--seed", va.seed, "suite random seed");
  verify->add_option("--report", va.report, "output format (text or json)");

  BenchArgs ba;
  CLI::App* bench = app.add_subcommand("bench", "throughput micro-benchmarks");
  bench->add_option("--profile", ba.profile, "profile path")->required();
  bench->add_option("--mib", ba.mib, "payload size in MiB");
  bench->add_option("--threads", ba.threads, "stripe worker threads");
  bench->add_option("--seed", ba.seed, "payload random seed");
  bench->add_option("--report", ba.report, "output format (text or json)");

  try {
    app.parse(argc, argv);
    if (profile->parsed()) return run_profile(pa);
    if (encode->parsed()) return run_encode(ea);
    if (decode->parsed()) return run_decode(da);
    if (repair->parsed()) return run_repair(ra);
    if (verify->parsed()) return run_verify(va);
    if (bench->parsed()) return run_bench(ba);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: invalid-argument: " << e.what() << "\n";
    return 2;
  } catch (const msr::Error& e) {
    std::cerr << "error: " << error_slug(e.cls()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
