#include "msr/repair.hpp"

#include <algorithm>
#include <functional>
#include <thread>

#include "msr/digest.hpp"
#include "msr/errors.hpp"

namespace msr {

namespace {

struct FailedShape {
  unsigned a = 0;        // group of the failed node
  unsigned b = 0;        // in-group index of the failed node
  bool last = false;     // failed node is a group's extra member
  std::uint64_t lred = 0;  // l / s, the reduced vector length
};

FailedShape shape_of(const CodeParams& p, unsigned failed) {
  FailedShape sh;
  sh.a = failed / p.group_size();
  sh.b = failed % p.group_size();
  sh.last = (p.variant == Variant::B && sh.b == p.s());
  sh.lred = p.ell() / p.s();
  return sh;
}

// Insert digit `value` at position `pos` of a reduced index.
std::uint64_t unreduce(std::uint64_t x, unsigned pos, unsigned value,
                       unsigned s) {
  std::uint64_t radix = 1;
  for (unsigned u = 0; u < pos; ++u) radix *= s;
  std::uint64_t low = x % radix;
  std::uint64_t high = x / radix;
  return low + value * radix + high * radix * s;
}

// Column block of a bystander or helper from another group: the node's
// block-entry law re-read over the m-1 surviving digit positions.
Matrix foreign_block(const CodeProfile& profile, unsigned node,
                     const FailedShape& sh) {
  const CodeParams& p = profile.params();
  unsigned s = p.s();
  unsigned az = node / p.group_size();
  unsigned bz = node % p.group_size();
  unsigned dp = az < sh.a ? az : az - 1;
  unsigned digits = static_cast<unsigned>(p.group_count()) - 1;
  BlockMatrix bm(sh.lred, sh.lred, p.r(), 1);
  for (std::uint64_t i = 0; i < sh.lred; ++i) {
    for (std::uint64_t j = 0; j < sh.lred; ++j) {
      unsigned ja = index_digit(j, dp, s);
      std::uint32_t idx = lambda_index(p, az, bz, ja);
      if (i == j) {
        bm.entry(i, j) = {1, idx};
      } else if (index_digit(i, dp, s) == bz) {
        bool match = true;
        for (unsigned u = 0; u < digits && match; ++u)
          if (u != dp && index_digit(i, u, s) != index_digit(j, u, s))
            match = false;
        if (match) bm.entry(i, j) = {-1, idx};
      }
    }
  }
  return realize(profile.field(), profile.lambdas(), bm);
}

// Column block proportional to one scaled identity row pattern per reduced
// index: rows x*r..x*r+r-1 of column x carry sign * L(lambda).
Matrix diagonal_block(const CodeProfile& profile, std::uint32_t lambda_idx,
                      int sign, const FailedShape& sh) {
  const CodeParams& p = profile.params();
  const FieldContext& gf = profile.field();
  std::vector<fe_t> L =
      build_L(gf, profile.lambda(lambda_idx), p.r());
  Matrix out(sh.lred * p.r(), sh.lred);
  for (std::uint64_t x = 0; x < sh.lred; ++x)
    for (unsigned j = 0; j < p.r(); ++j)
      out.at(x * p.r() + j, x) = sign < 0 ? gf.neg(L[j]) : L[j];
  return out;
}

Matrix node_column(const CodeProfile& profile, unsigned node,
                   const FailedShape& sh) {
  const CodeParams& p = profile.params();
  unsigned az = node / p.group_size();
  unsigned bz = node % p.group_size();
  if (az != sh.a) return foreign_block(profile, node, sh);
  if (sh.last) return diagonal_block(profile, lambda_index(p, sh.a, bz, bz), 1, sh);
  return diagonal_block(profile, lambda_index(p, sh.a, bz, sh.b),
                        bz == sh.b ? 1 : -1, sh);
}

// The failed node enters as s interleaved pieces, one per value of its digit.
Matrix piece_column(const CodeProfile& profile, unsigned piece,
                    const FailedShape& sh) {
  const CodeParams& p = profile.params();
  if (sh.last)
    return diagonal_block(profile, lambda_index(p, sh.a, p.s(), piece), 1, sh);
  return diagonal_block(profile, lambda_index(p, sh.a, sh.b, piece),
                        piece == sh.b ? 1 : -1, sh);
}

}  // namespace

RepairPlan plan_repair(const CodeProfile& profile, unsigned failed,
                       std::vector<unsigned> helpers) {
  const CodeParams& p = profile.params();
  if (failed >= p.n)
    fail(ErrorClass::invalid_argument, "failed node out of range");
  std::sort(helpers.begin(), helpers.end());
  if (helpers.size() != p.d)
    fail(ErrorClass::invalid_argument, "exactly d helper nodes are required");
  if (std::adjacent_find(helpers.begin(), helpers.end()) != helpers.end())
    fail(ErrorClass::invalid_argument, "duplicate helper node");
  for (unsigned z : helpers) {
    if (z >= p.n) fail(ErrorClass::invalid_argument, "helper node out of range");
    if (z == failed)
      fail(ErrorClass::invalid_argument, "failed node cannot help itself");
  }

  FailedShape sh = shape_of(p, failed);
  unsigned s = p.s();
  std::uint64_t l = p.ell();

  RepairPlan plan;
  plan.failed = failed;
  for (unsigned z : helpers) {
    HelperPlan hp;
    hp.node = z;
    hp.send_count = sh.lred;
    unsigned az = z / p.group_size();
    bool foreign = az != sh.a;
    if (sh.last && foreign) {
      hp.kind = SendKind::sums;
      hp.read_indices.resize(l);
      for (std::uint64_t i = 0; i < l; ++i)
        hp.read_indices[i] = static_cast<std::uint32_t>(i);
    } else {
      hp.kind = SendKind::raw;
      unsigned value = sh.last ? z % p.group_size() : sh.b;
      for (std::uint64_t i = 0; i < l; ++i)
        if (index_digit(i, sh.a, s) == value)
          hp.read_indices.push_back(static_cast<std::uint32_t>(i));
    }
    plan.helpers.push_back(std::move(hp));
  }

  std::vector<std::uint8_t> tag;
  for (unsigned shift = 0; shift < 64; shift += 8)
    tag.push_back(static_cast<std::uint8_t>(profile.digest() >> shift));
  tag.push_back(static_cast<std::uint8_t>(failed & 0xFF));
  tag.push_back(static_cast<std::uint8_t>(failed >> 8));
  for (const HelperPlan& hp : plan.helpers) {
    tag.push_back(static_cast<std::uint8_t>(hp.node & 0xFF));
    tag.push_back(static_cast<std::uint8_t>(hp.node >> 8));
  }
  plan.plan_digest = fnv1a64(tag);
  return plan;
}

TransferLedger account(const CodeParams& params, const RepairPlan& plan) {
  (void)params;
  TransferLedger ledger;
  for (const HelperPlan& hp : plan.helpers) {
    LedgerEntry e;
    e.node = hp.node;
    e.read = hp.read_indices.size();
    e.sent = hp.send_count;
    ledger.total_read += e.read;
    ledger.total_sent += e.sent;
    ledger.entries.push_back(e);
  }
  return ledger;
}

std::vector<fe_t> extract_payload(const CodeProfile& profile,
                                  const RepairPlan& plan, unsigned helper,
                                  std::span<const fe_t> node_vector) {
  const CodeParams& p = profile.params();
  const FieldContext& gf = profile.field();
  if (node_vector.size() != p.ell())
    fail(ErrorClass::invalid_argument, "helper vector has the wrong length");
  auto it = std::find_if(plan.helpers.begin(), plan.helpers.end(),
                         [&](const HelperPlan& hp) { return hp.node == helper; });
  if (it == plan.helpers.end())
    fail(ErrorClass::invalid_argument, "node is not a helper in this plan");

  FailedShape sh = shape_of(p, plan.failed);
  std::vector<fe_t> out;
  out.reserve(sh.lred);
  if (it->kind == SendKind::raw) {
    for (std::uint32_t idx : it->read_indices) out.push_back(node_vector[idx]);
  } else {
    for (std::uint64_t x = 0; x < sh.lred; ++x) {
      fe_t acc = 0;
      for (unsigned e = 0; e < p.s(); ++e)
        acc = gf.add(acc, node_vector[unreduce(x, sh.a, e, p.s())]);
      out.push_back(acc);
    }
  }
  return out;
}

RepairContext::RepairContext(const CodeProfile& profile, const RepairPlan& plan)
    : profile_(profile), plan_(plan), op_(0, 0) {
  const CodeParams& p = profile.params();
  FailedShape sh = shape_of(p, plan.failed);

  std::vector<bool> helping(p.n, false);
  for (const HelperPlan& hp : plan_.helpers) helping[hp.node] = true;

  std::vector<Matrix> unknown_cols;
  for (unsigned c = 0; c < p.s(); ++c)
    unknown_cols.push_back(piece_column(profile, c, sh));
  for (unsigned z = 0; z < p.n; ++z)
    if (z != plan_.failed && !helping[z])
      unknown_cols.push_back(node_column(profile, z, sh));

  std::vector<Matrix> known_cols;
  for (const HelperPlan& hp : plan_.helpers)
    known_cols.push_back(node_column(profile, hp.node, sh));

  std::vector<const Matrix*> ptrs;
  for (const Matrix& m : unknown_cols) ptrs.push_back(&m);
  Matrix unknown = hconcat(ptrs);
  ptrs.clear();
  for (const Matrix& m : known_cols) ptrs.push_back(&m);
  Matrix known = hconcat(ptrs);

  Matrix inv(0, 0);
  try {
    inv = inverse(profile.field(), unknown);
  } catch (const Error& e) {
    if (e.cls() == ErrorClass::singular_matrix)
      fail(ErrorClass::repair_failure,
           "reduced repair system is singular for this profile");
    throw;
  }
  op_ = mat_mul(profile.field(), inv, known);
}

std::vector<fe_t> RepairContext::execute(
    std::span<const std::vector<fe_t>> payloads) const {
  const CodeParams& p = profile_.params();
  const FieldContext& gf = profile_.field();
  FailedShape sh = shape_of(p, plan_.failed);
  if (payloads.size() != plan_.helpers.size())
    fail(ErrorClass::invalid_argument, "one payload per helper is required");
  std::vector<fe_t> y;
  y.reserve(plan_.helpers.size() * sh.lred);
  for (const auto& v : payloads) {
    if (v.size() != sh.lred)
      fail(ErrorClass::invalid_argument, "payload has the wrong length");
    y.insert(y.end(), v.begin(), v.end());
  }
  std::vector<fe_t> u = mat_vec(gf, op_, y);
  for (fe_t& x : u) x = gf.neg(x);

  std::vector<fe_t> node(p.ell(), 0);
  for (unsigned c = 0; c < p.s(); ++c)
    for (std::uint64_t x = 0; x < sh.lred; ++x)
      node[unreduce(x, sh.a, c, p.s())] = u[c * sh.lred + x];
  return node;
}

std::vector<fe_t> execute_repair(const CodeProfile& profile,
                                 const RepairPlan& plan,
                                 std::span<const std::vector<fe_t>> payloads) {
  return RepairContext(profile, plan).execute(payloads);
}

Shard repair_shard(const CodeProfile& profile, const RepairPlan& plan,
                   std::span<const Shard> helper_shards, unsigned threads) {
  const CodeParams& p = profile.params();
  std::uint64_t l = p.ell();
  if (helper_shards.size() != plan.helpers.size())
    fail(ErrorClass::invalid_argument, "one shard per helper is required");

  std::vector<const Shard*> by_plan(plan.helpers.size(), nullptr);
  for (const Shard& sh : helper_shards) {
    if (sh.profile_digest != profile.digest())
      fail(ErrorClass::corruption, "shard was built against a different profile");
    for (std::size_t i = 0; i < plan.helpers.size(); ++i)
      if (plan.helpers[i].node == sh.node) {
        if (by_plan[i] != nullptr)
          fail(ErrorClass::invalid_argument, "duplicate shard for one helper");
        by_plan[i] = &sh;
      }
  }
  for (std::size_t i = 0; i < by_plan.size(); ++i)
    if (by_plan[i] == nullptr)
      fail(ErrorClass::invalid_argument, "missing shard for a planned helper");

  std::uint64_t stripes = by_plan[0]->stripe_count;
  std::uint64_t original = by_plan[0]->original_bytes;
  for (const Shard* sh : by_plan) {
    if (sh->stripe_count != stripes || sh->original_bytes != original)
      fail(ErrorClass::corruption, "shards disagree about the payload shape");
    if (sh->symbols.size() != stripes * l)
      fail(ErrorClass::corruption, "shard symbol count does not match its header");
  }

  RepairContext ctx(profile, plan);

  Shard out;
  out.node = plan.failed;
  out.profile_digest = profile.digest();
  out.stripe_count = stripes;
  out.original_bytes = original;
  out.symbols.assign(stripes * l, 0);

  auto body = [&](std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t t = lo; t < hi; ++t) {
      std::vector<std::vector<fe_t>> payloads;
      payloads.reserve(plan.helpers.size());
      for (std::size_t i = 0; i < plan.helpers.size(); ++i) {
        std::span<const fe_t> vec(by_plan[i]->symbols.data() + t * l, l);
        payloads.push_back(
            extract_payload(profile, plan, plan.helpers[i].node, vec));
      }
      std::vector<fe_t> node = ctx.execute(payloads);
      std::copy_n(node.data(), l, out.symbols.data() + t * l);
    }
  };
  if (threads <= 1 || stripes <= 1) {
    body(0, stripes);
  } else {
    unsigned workers =
        static_cast<unsigned>(std::min<std::uint64_t>(threads, stripes));
    std::vector<std::thread> pool;
    std::uint64_t chunk = (stripes + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      std::uint64_t lo = w * chunk;
      std::uint64_t hi = std::min<std::uint64_t>(stripes, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

}  // namespace msr
