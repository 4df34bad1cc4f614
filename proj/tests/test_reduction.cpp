#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "msr/errors.hpp"
#include "msr/linalg.hpp"
#include "msr/reduction.hpp"

using namespace msr;

namespace {

CodeProfile profile_a() {
  CodeParams p;
  p.variant = Variant::A;
  p.n = 6;
  p.k = 2;
  p.d = 4;
  return CodeProfile::build(p, FieldContext(5, 0x25));
}

CodeProfile profile_b() {
  CodeParams p;
  p.variant = Variant::B;
  p.n = 8;
  p.k = 4;
  p.d = 6;
  return CodeProfile::build(p, FieldContext(7, 0x89));
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

}  // namespace

TEST_CASE("residue blocks are singular exactly on the subset's own rows") {
  CodeProfile profile = profile_a();
  EliminationCertificate cert = build_elimination(profile, 0, {0, 1}, 4);
  CHECK(cert.group == 0);
  CHECK(cert.t == 4);
  REQUIRE(cert.f_blocks.size() == profile.params().lambda_count());
  // multipliers 0..5 belong to group 0 kernels 0 and 1; the rest stay regular
  for (unsigned idx = 0; idx < 18; ++idx) {
    CAPTURE(idx);
    CHECK(cert.f_singular[idx] == (idx < 6));
    if (!cert.f_singular[idx]) {
      CHECK(det(profile.field(), cert.f_blocks[idx]) != 0);
    } else {
      CHECK(det(profile.field(), cert.f_blocks[idx]) == 0);
    }
  }
}

TEST_CASE("the annihilator rows are unit-pivoted on the short kernel") {
  CodeProfile profile = profile_a();
  EliminationCertificate cert = build_elimination(profile, 0, {0, 1}, 4);
  // row i has a lone 1 in column i*4 + 2, aligned with the kept prefix
  const Matrix& e = cert.annihilator;
  REQUIRE(e.rows() == 3);
  REQUIRE(e.cols() == 12);
  for (unsigned i = 0; i < 3; ++i) CHECK(e.at(i, i * 4 + 2) == 1);
}

TEST_CASE("elimination construction rejects out-of-range requests") {
  CodeProfile profile = profile_a();
  CHECK_THROWS_AS(build_elimination(profile, 0, {0, 1}, 2), Error);
  CHECK_THROWS_AS(build_elimination(profile, 0, {0, 1}, 5), Error);
  CHECK_THROWS_AS(build_elimination(profile, 0, {}, 4), Error);
  CHECK_THROWS_AS(build_elimination(profile, 0, {0, 3}, 4), Error);
  CHECK_THROWS_AS(build_elimination(profile, 3, {0, 1}, 4), Error);
  try {
    build_elimination(profile, 0, {0, 1}, 2);
  } catch (const Error& e) {
    CHECK(e.cls() == ErrorClass::invalid_argument);
  }
}

TEST_CASE("certificates exist for every group, subset, and length") {
  for (const CodeProfile& profile : {profile_a(), profile_b()}) {
    const CodeParams& p = profile.params();
    unsigned built = 0;
    for (unsigned a = 0; a < p.group_count(); ++a) {
      for (const auto& subset : nonempty_subsets(p.group_size())) {
        for (unsigned t = static_cast<unsigned>(subset.size()) + 1;
             t <= p.r(); ++t) {
          EliminationCertificate cert = build_elimination(profile, a, subset, t);
          CHECK(det(profile.field(), cert.mixer) == 1);
          ++built;
        }
      }
    }
    // groups * sum over subsets of (r - |subset|) slots with t > |subset|
    unsigned expect = 0;
    for (const auto& subset : nonempty_subsets(p.group_size()))
      if (p.r() > subset.size()) expect += p.r() - subset.size();
    expect *= p.group_count();
    CHECK(built == expect);
  }
}

TEST_CASE("triangular reduction certifies every bounded selection") {
  CodeProfile profile = profile_a();
  auto selections = enumerate_global_selections(profile.params(),
                                                profile.params().r());
  REQUIRE(selections.size() == 56);
  for (const GlobalSelection& sel : selections) {
    CAPTURE(sel.describe());
    ReductionReport report = verify_triangular_reduction(profile, sel);
    CHECK(report.pass);
    CHECK(report.direct_det == report.factored_det);
    CHECK(report.direct_det != 0);
    CHECK(report.failure.empty());
  }
}

TEST_CASE("the factored determinant matches a plain cofactor expansion") {
  CodeProfile profile = profile_a();
  GlobalSelection sel;
  sel.picks = {{0, {0, 1}}, {1, {0, 1}}};
  CHECK(sel.describe() == "(a=0,B={0,1})+(a=1,B={0,1})");

  Matrix direct = realize_selection(profile, sel, profile.params().r());
  REQUIRE(direct.rows() == 36);
  REQUIRE(direct.cols() == 36);
  fe_t plain = det(profile.field(), direct);
  CHECK(plain != 0);

  ReductionReport report = verify_triangular_reduction(profile, sel);
  CHECK(report.pass);
  CHECK(report.direct_det == plain);
  CHECK(report.factored_det == plain);
  REQUIRE(!report.steps.empty());
  fe_t product = profile.field().mul(report.steps[0].head_det,
                                     report.steps[0].tail_det);
  CHECK(product == plain);
}

TEST_CASE("reduction validates selection shape") {
  CodeProfile profile = profile_a();
  GlobalSelection unsorted;
  unsorted.picks = {{1, {0}}, {0, {0}}};
  CHECK_THROWS_AS(verify_triangular_reduction(profile, unsorted), Error);
  GlobalSelection heavy;
  heavy.picks = {{0, {0, 1, 2}}, {1, {0, 1, 2}}};
  CHECK_THROWS_AS(verify_triangular_reduction(profile, heavy), Error);
  GlobalSelection empty;
  CHECK_THROWS_AS(verify_triangular_reduction(profile, empty), Error);
}

TEST_CASE("single-group selections reduce to the local certificates") {
  CodeProfile profile = profile_a();
  GlobalSelection sel;
  sel.picks = {{1, {0, 2}}};
  ReductionReport report = verify_triangular_reduction(profile, sel);
  CHECK(report.pass);
  REQUIRE(report.steps.size() >= 1);
  CHECK(report.steps[0].group == 1);
  CHECK(report.steps[0].subset == std::vector<unsigned>{0, 2});

  GlobalSelection outside;
  outside.picks = {{5, {0, 1}}};
  CHECK_THROWS_AS(verify_triangular_reduction(profile, outside), Error);
}

TEST_CASE("larger variant selections factor the same way") {
  CodeProfile profile = profile_b();
  auto selections = enumerate_global_selections(profile.params(),
                                                profile.params().r());
  REQUIRE(selections.size() == 162);
  // exercise a spread of shapes: all singletons, the deepest single group,
  // and every two-group split of the full budget
  unsigned ran = 0;
  for (const GlobalSelection& sel : selections) {
    bool wide = sel.picks.size() == 2 && sel.total() == 4;
    bool deep = sel.picks.size() == 1;
    if (!wide && !deep) continue;
    CAPTURE(sel.describe());
    ReductionReport report = verify_triangular_reduction(profile, sel);
    CHECK(report.pass);
    CHECK(report.direct_det == report.factored_det);
    ++ran;
  }
  CHECK(ran > 50);
}

TEST_CASE("a duplicated multiplier breaks its own certificate") {
  CodeParams p;
  p.variant = Variant::A;
  p.n = 6;
  p.k = 2;
  p.d = 4;
  FieldContext gf(5, 0x25);
  std::vector<fe_t> lambdas = select_lambdas(gf, p);
  lambdas[1] = lambdas[3];  // kernel (0,0) collides with kernel (0,1)
  CodeProfile broken =
      CodeProfile::from_lambdas(p, gf, lambdas, Validation::none);
  GlobalSelection sel;
  sel.picks = {{0, {0, 1}}};
  bool rejected = false;
  try {
    ReductionReport report = verify_triangular_reduction(broken, sel);
    rejected = !report.pass;
  } catch (const Error& e) {
    rejected = e.cls() == ErrorClass::certificate_failure;
  }
  CHECK(rejected);
}
