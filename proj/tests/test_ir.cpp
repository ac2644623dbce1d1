#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rollhls/emit.hpp"
#include "rollhls/explorer.hpp"
#include "rollhls/ir_json.hpp"
#include "rollhls/oracle.hpp"
#include "rollhls/parser.hpp"
#include "support.hpp"

using namespace rollhls;

TEST_CASE("emitted C re-parses to the same structure") {
  for (const char *name : kFiatKernels) {
    CAPTURE(name);
    const ParsedSource src = load_kernel_file(fixture(name));
    const std::string text = emit_c(src.kernel, src.pragmas);
    const ParsedSource again = parse_source(text);
    CHECK(canonical_form(again.kernel) == canonical_form(src.kernel));
    CHECK(emit_c(again.kernel, again.pragmas) == text);
  }
}

TEST_CASE("every explored variant survives an emit/parse round trip") {
  for (const char *name : kFiatKernels) {
    const Kernel k = staticize_bounds(load_fixture(name));
    for (const auto &v : enumerate_variants(k, {})) {
      const std::string text = emit_c(v.program);
      CAPTURE(text);
      CHECK(canonical_form(parse_kernel(text)) == canonical_form(v.program));
    }
  }
}

TEST_CASE("directive lines are emitted verbatim") {
  const ParsedSource src = parse_source(R"(
void k(const u64 a[8], u64 o[8]) {
#pragma HLS array_partition variable=a type=cyclic factor=4
#pragma HLS dependence variable=o type=inter false
  L0: for (u32 i = 0; i < 8; i += 1) {
#pragma HLS pipeline II=2
#pragma HLS unroll factor=4
    o[i] = a[i] + 1;
  }
}
)");
  CHECK(src.pragmas.loop("L0").pipeline_ii == 2);
  CHECK(src.pragmas.loop("L0").unroll == 4);
  CHECK(src.pragmas.partition.at("a") == 4);
  CHECK(src.pragmas.dependence_false.count("o") == 1);
  const std::string out = emit_c(src.kernel, src.pragmas);
  CHECK(out.find("#pragma HLS pipeline II=2\n") != std::string::npos);
  CHECK(out.find("#pragma HLS unroll factor=4\n") != std::string::npos);
  CHECK(out.find("#pragma HLS array_partition variable=a type=cyclic factor=4\n") != std::string::npos);
  CHECK(out.find("#pragma HLS dependence variable=o type=inter false\n") != std::string::npos);
}

TEST_CASE("parser rejects malformed kernels with a location") {
  auto fails_on_line = [](const char *text, int line) {
    try {
      parse_kernel(text);
    } catch (const ParseError &e) {
      CHECK(e.line == line);
      return;
    }
    FAIL("accepted: " << text);
  };
  fails_on_line("void f(const u64 a[2], u64 o[1]) {\n  u64 x = a[0];\n  u64 x = a[1];\n  o[0] = x;\n}", 3);
  fails_on_line("void f(const u64 a[2], u64 o[1]) {\n  o[0] = a[2];\n}", 2);
  fails_on_line("void f(const u64 a[2], u64 o[1]) {\n  a[0] = o[0];\n}", 2);
  fails_on_line("void f(const u64 a[2], u32 o[1]) {\n  o[0] = a[0];\n}", 2);
  fails_on_line("void f(const u64 a[2], u64 o[2]) {\n  L0: for (u32 i = 0; i < 2; i -= 1) {\n    o[i] = a[i];\n  }\n}", 2);
}

TEST_CASE("straight-line validation flags loops and guards") {
  const Kernel k = load_fixture("mac8.slc");
  CHECK_FALSE(validate_straight_line(k).empty());
  CHECK(validate_straight_line(unroll(k)).empty());
}

TEST_CASE("tuple results and casts parse and print") {
  const char *text = R"(void f(const u64 a[2], u64 o[2]) {
  (u64 hi, u64 lo) = mulwide_u64(a[0], a[1]);
  (u64 s, u1 c) = addcarry_u64((u1)0, hi, lo);
  o[0] = cmovznz_u64(c, s, 0xffffffffffffffff);
  o[1] = (u64)(u32)a[1] ^ ~s;
}
)";
  const Kernel k = parse_kernel(text);
  CHECK(statement_count(k) == 4);
  CHECK(canonical_form(parse_kernel(emit_c(k))) == canonical_form(k));
}

TEST_CASE("kernel JSON round trip") {
  for (const char *name : kFiatKernels) {
    const Kernel k = load_fixture(name);
    CHECK(canonical_form(kernel_from_json(kernel_to_json(k))) == canonical_form(k));
  }
}

TEST_CASE("branch scan") {
  for (const char *name : kFiatKernels) {
    const Kernel k = staticize_bounds(load_fixture(name));
    CHECK(scan_emitted(emit_c(k)).clean());
  }
  CHECK(scan_branches(load_fixture("shr8.slc")).variable_bounds == 1);
  const BranchScan bad = scan_emitted("void f(const u64 a[1], u64 o[1]) {\n  o[0] = a[0] ? 1 : 2;\n}\n");
  CHECK(bad.data_dependent_branches > 0);
  CHECK(scan_emitted("void f(u64 o[1]) {\n  while (1) { }\n}\n").data_dependent_branches > 0);
}
