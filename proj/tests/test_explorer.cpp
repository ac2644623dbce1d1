#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "rollhls/emit.hpp"
#include "rollhls/explorer.hpp"
#include "rollhls/oracle.hpp"
#include "rollhls/parser.hpp"
#include "rollhls/qor.hpp"
#include "support.hpp"

using namespace rollhls;

namespace {

Transform make(Transform::Kind k, std::vector<std::string> loops, int64_t value = 0) {
  Transform t;
  t.kind = k;
  t.loops = std::move(loops);
  t.value = value;
  return t;
}

// Minimum iteration distance between two accesses to the same element where
// at least one is the write w(i) = cw*i + dw; reads are r(i) = cr*i + dr.
int64_t brute_distance(int64_t trip, int64_t cw, int64_t dw, int64_t cr, int64_t dr) {
  int64_t best = 0;
  for (int64_t p = 0; p < trip; ++p)
    for (int64_t q = p + 1; q < trip; ++q) {
      const int64_t wp = cw * p + dw, wq = cw * q + dw, rp = cr * p + dr, rq = cr * q + dr;
      if (wp == rq || rp == wq || wp == wq)
        if (best == 0 || q - p < best) best = q - p;
    }
  return best;
}

std::string nest(int64_t ni, int64_t nj, int64_t shift) {
  // Row width 8 leaves room for the shifted subscript.
  std::ostringstream os;
  os << "void n(const u64 a[64], u64 x[64]) {\n"
     << "  L0: for (u32 i = 0; i < " << ni << "; i += 1) {\n"
     << "    L1: for (u32 j = 0; j < " << nj << "; j += 1) {\n"
     << "      x[8 * i + j + " << 20 + shift << "] = x[8 * i + j + 20] + a[8 * i + j];\n"
     << "    }\n  }\n}\n";
  return os.str();
}

}  // namespace

TEST_CASE("dependence distance matches a brute-force pair scan") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 120; ++t) {
    const int64_t trip = 2 + static_cast<int64_t>(rng() % 7);
    const int64_t cw = 1 + static_cast<int64_t>(rng() % 2), cr = 1 + static_cast<int64_t>(rng() % 2);
    const int64_t dw = static_cast<int64_t>(rng() % 5), dr = static_cast<int64_t>(rng() % 5);
    const int64_t len = std::max(cw, cr) * (trip - 1) + 5;
    std::ostringstream os;
    os << "void d(const u64 a[" << len << "], u64 t[" << len << "]) {\n  L0: for (u32 i = 0; i < " << trip
       << "; i += 1) {\n    t[" << cw << " * i + " << dw << "] = t[" << cr << " * i + " << dr << "] + a[i];\n  }\n}\n";
    CAPTURE(os.str());
    const LoopInfo info = analyze_loops(parse_kernel(os.str()));
    const LoopSummary *l = info.find("L0");
    REQUIRE(l);
    const int64_t want = brute_distance(trip, cw, dw, cr, dr);
    CHECK(l->distance == want);
    CHECK(l->carried == (want > 0));
    CHECK(l->trip == trip);
  }
}

TEST_CASE("loop summaries of the fixture kernels") {
  const LoopInfo add = analyze_loops(load_fixture("add4.slc"));
  CHECK(add.find("L0")->carried);
  CHECK(add.find("L0")->distance == 1);
  CHECK(add.find("L0")->carried_arrays == std::set<std::string>{"cy"});
  const LoopInfo mac = analyze_loops(load_fixture("mac8.slc"));
  CHECK_FALSE(mac.find("L0")->carried);
  CHECK(mac.find("L0")->stride.at("a") == 1);
  const LoopInfo mul = analyze_loops(load_fixture("mul2.slc"));
  CHECK(mul.find("L0")->perfect_nest);
  CHECK(mul.find("L1")->parent == "L0");
  CHECK(mul.find("L1")->depth == 2);
  CHECK(mul.find("L0")->stride.at("hi") == 2);
}

TEST_CASE("interchange is accepted only when the swapped order is equivalent") {
  int accepted = 0, rejected = 0;
  for (int64_t shift : {-9, -8, -7, -1, 0, 1, 7, 8, 9}) {
    const Kernel k = parse_kernel(nest(3, 4, shift));
    const TransformResult r = apply_transform(k, make(Transform::Kind::Interchange, {"L0", "L1"}));
    CAPTURE(shift);
    if (r.ok) {
      ++accepted;
      CHECK(check_equiv(k, r.program, 300, 1).equivalent);
      CHECK(r.program.body[0].loop().var == "j");
    } else {
      ++rejected;
    }
  }
  CHECK(accepted > 0);
  CHECK(rejected > 0);
  // x[8i+j+27] <- x[8i+j+20] crosses rows backwards: (i, j) feeds (i+1, j-1).
  CHECK_FALSE(apply_transform(parse_kernel(nest(3, 4, 7)), make(Transform::Kind::Interchange, {"L0", "L1"})).ok);
}

TEST_CASE("fusion is sound on producer/consumer pairs") {
  int accepted = 0;
  for (int64_t s0 = 0; s0 < 3; ++s0)
    for (int64_t s1 = 0; s1 < 3; ++s1) {
      std::ostringstream os;
      os << "void f(const u64 a[8], u64 t[10], u64 o[8]) {\n"
         << "  L0: for (u32 i = 0; i < 8; i += 1) {\n    t[i + " << s0 << "] = a[i] ^ 3;\n  }\n"
         << "  L1: for (u32 k = 0; k < 8; k += 1) {\n    o[k] = t[k + " << s1 << "] + 1;\n  }\n}\n";
      const Kernel k = parse_kernel(os.str());
      const TransformResult r = apply_transform(k, make(Transform::Kind::Fuse, {"L0", "L1"}));
      CAPTURE(os.str());
      if (!r.ok) continue;
      ++accepted;
      CHECK(loop_count(r.program) == 1);
      CHECK(check_equiv(k, r.program, 300, 2).equivalent);
    }
  CHECK(accepted >= 3);
}

TEST_CASE("tile, pad, perfectize and strength reduction preserve semantics") {
  const Kernel mac = load_fixture("mac8.slc");
  const TransformResult tiled = apply_transform(mac, make(Transform::Kind::Tile, {"L0"}, 4));
  REQUIRE(tiled.ok);
  CHECK(loop_labels(tiled.program) == std::vector<std::string>{"L0", "L0_t"});
  CHECK(check_equiv(mac, tiled.program, 300, 3).equivalent);

  const Kernel seven = parse_kernel(R"(void p(const u64 a[7], u64 o[7]) {
  L0: for (u32 i = 0; i < 7; i += 1) {
    o[i] = a[i] * 8;
  }
}
)");
  const TransformResult padded = apply_transform(seven, make(Transform::Kind::Pad, {"L0"}, 8));
  REQUIRE(padded.ok);
  CHECK(padded.program.body[0].loop().trip_count() == 8);
  CHECK(check_equiv(seven, padded.program, 300, 4).equivalent);

  const TransformResult reduced = apply_transform(seven, make(Transform::Kind::StrengthReduce, {}));
  REQUIRE(reduced.ok);
  CHECK(emit_c(reduced.program).find("<< 3") != std::string::npos);
  CHECK(check_equiv(seven, reduced.program, 300, 5).equivalent);

  const Kernel imperfect = parse_kernel(R"(void q(const u64 a[12], u64 s[3], u64 o[12]) {
  L0: for (u32 i = 0; i < 3; i += 1) {
    s[i] = a[4 * i];
    L1: for (u32 j = 0; j < 4; j += 1) {
      o[4 * i + j] = a[4 * i + j] + 1;
    }
  }
}
)");
  const TransformResult perfect = apply_transform(imperfect, make(Transform::Kind::Perfectize, {"L0"}));
  REQUIRE(perfect.ok);
  CHECK(analyze_loops(perfect.program).find("L0")->perfect_nest);
  CHECK(check_equiv(imperfect, perfect.program, 300, 6).equivalent);
  const TransformResult flat = apply_transform(perfect.program, make(Transform::Kind::BranchEliminate, {"L1"}));
  INFO(flat.reason);
  REQUIRE(flat.ok);
  CHECK(scan_branches(flat.program).clean());
  CHECK_FALSE(analyze_loops(flat.program).find("L1")->has_guards);
  CHECK(check_equiv(imperfect, flat.program, 300, 7).equivalent);
}

TEST_CASE("outlining turns repeated blocks into calls") {
  const Kernel k = parse_kernel(R"(void o(const u64 a[6], const u64 b[6], u64 r[6]) {
  r[0] = a[0] + b[1];
  r[1] = a[1] ^ b[0];
  r[2] = a[2] + b[3];
  r[3] = a[3] ^ b[2];
  r[4] = a[4] + b[5];
  r[5] = a[5] ^ b[4];
}
)");
  const LoopInfo info = analyze_loops(k);
  REQUIRE(info.outline_groups.size() == 1);
  CHECK(info.outline_groups[0].block_size == 2);
  CHECK(info.outline_groups[0].blocks == 3);
  const TransformResult r = apply_transform(k, make(Transform::Kind::Outline, {}, 0));
  REQUIRE(r.ok);
  CHECK(r.program.functions.size() == 1);
  CHECK(check_equiv(k, r.program, 300, 8).equivalent);
}

TEST_CASE("variable bounds become static with predicated writes") {
  const Kernel k = load_fixture("shr8.slc");
  const Kernel s = staticize_bounds(k);
  CHECK(scan_branches(k).variable_bounds == 1);
  CHECK(scan_branches(s).clean());
  CHECK(s.body[0].loop().trip_count() == 8);
  CHECK(check_equiv(k, s, 1000, 9).equivalent);
  CHECK_THROWS_AS(staticize_bounds(parse_kernel(R"(void u(const u64 a[8], u64 o[8], u32 n) {
  L0: for (u32 i = 0; i < n; i += 1) {
    o[i] = a[i];
  }
}
)")),
                  IrError);
}

TEST_CASE("illegal requests are rejected with a reason") {
  const Kernel mac = load_fixture("mac8.slc");
  const TransformResult a = apply_transform(mac, make(Transform::Kind::Tile, {"L0"}, 3));
  CHECK_FALSE(a.ok);
  CHECK_FALSE(a.reason.empty());
  CHECK_FALSE(apply_transform(mac, make(Transform::Kind::Interchange, {"L0", "L1"})).ok);
  CHECK_FALSE(apply_transform(mac, make(Transform::Kind::Pad, {"L0"}, 4)).ok);
}

TEST_CASE("variant enumeration") {
  std::vector<std::string> warnings;
  const auto vars = enumerate_variants(load_fixture("mul2.slc"), {}, &warnings);
  REQUIRE_FALSE(vars.empty());
  CHECK(vars[0].transforms.empty());
  std::set<std::string> forms;
  for (const auto &v : vars) CHECK(forms.insert(canonical_form(v.program)).second);
  CHECK(warnings.empty());

  ExplorerConfig small;
  small.max_variants = 1;
  warnings.clear();
  CHECK(enumerate_variants(load_fixture("mul2.slc"), small, &warnings).size() == 1);
  CHECK_FALSE(warnings.empty());
}

TEST_CASE("pragma enumeration respects divisors and caps") {
  const EstimatorParams params;
  for (const char *name : kFiatKernels) {
    const Kernel k = staticize_bounds(load_fixture(name));
    const LoopInfo info = analyze_loops(k);
    ExplorerConfig cfg;
    cfg.max_unroll = 4;
    const auto sets = enumerate_pragmas(k, info, cfg, params);
    CHECK(!sets.empty());
    CHECK(static_cast<int>(sets.size()) <= cfg.max_pragma_sets);
    std::set<std::string> seen;
    for (const auto &p : sets) {
      CHECK(seen.insert(pragmas_to_json(p).dump()).second);
      for (const auto &[label, d] : p.loops) {
        const LoopSummary *l = info.find(label);
        REQUIRE(l);
        CHECK(d.unroll <= 4);
        CHECK(l->trip % d.unroll == 0);
        if (d.pipeline_ii) CHECK(*d.pipeline_ii >= 1);
      }
      for (const auto &[array, f] : p.partition) {
        const auto shape = k.array_shape(array);
        REQUIRE(shape);
        CHECK(shape->second % f == 0);
      }
    }
  }
  ExplorerConfig tiny;
  tiny.max_pragma_sets = 3;
  std::vector<std::string> warnings;
  const Kernel mul = load_fixture("mul2.slc");
  CHECK(enumerate_pragmas(mul, analyze_loops(mul), tiny, params, &warnings).size() == 3);
  CHECK_FALSE(warnings.empty());
}

TEST_CASE("divisors") {
  CHECK(divisors(12, 16) == std::vector<int64_t>{1, 2, 3, 4, 6, 12});
  CHECK(divisors(12, 4) == std::vector<int64_t>{1, 2, 3, 4});
  CHECK(divisors(7, 16) == std::vector<int64_t>{1, 7});
}

TEST_CASE("design space assembly drops broken variants") {
  const Kernel mac = load_fixture("mac8.slc");
  Variant good{mac, {}};
  Variant bad{parse_kernel(R"(void mac8(const u64 a[8], const u64 b[8], const u64 c[8], u64 o[8]) {
  L0: for (u32 i = 0; i < 8; i += 1) {
    o[i] = c[i] - a[i] * b[i];
  }
}
)"),
              {make(Transform::Kind::Tile, {"L0"}, 2)}};
  ExplorerConfig cfg;
  cfg.vectors = 100;
  const DesignSpace ds = synthesize_design_space(mac, {good, bad}, {{PragmaConfig{}}, {PragmaConfig{}}}, cfg);
  CHECK(ds.dropped_variants == 1);
  CHECK(ds.variants.size() == 1);
  CHECK(ds.points.size() == 1);
  CHECK_FALSE(ds.warnings.empty());
}

TEST_CASE("explore covers every fixture without dropping variants") {
  for (const char *name : kFiatKernels) {
    CAPTURE(name);
    const DesignSpace ds = explore(load_fixture(name), {}, {});
    CHECK(ds.dropped_variants == 0);
    CHECK_FALSE(ds.points.empty());
    std::set<std::string> keys;
    for (const auto &p : ds.points) {
      CHECK(p.qor.has_value());
      CHECK(keys.insert(std::to_string(p.variant) + pragmas_to_json(p.pragmas).dump()).second);
    }
  }
  const DesignSpace flat = explore(parse_kernel("void z(const u64 a[1], u64 o[1]) {\n  o[0] = a[0] + 1;\n}\n"), {}, {});
  CHECK(flat.points.size() == 1);
}
