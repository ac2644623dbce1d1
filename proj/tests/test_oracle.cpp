#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <random>

#include "rollhls/explorer.hpp"
#include "rollhls/oracle.hpp"
#include "rollhls/parser.hpp"
#include "support.hpp"

using namespace rollhls;
using boost::multiprecision::cpp_int;

namespace {

cpp_int big(u128 v) {
  cpp_int r = static_cast<uint64_t>(v >> 64);
  r <<= 64;
  r += static_cast<uint64_t>(v);
  return r;
}

cpp_int wrap(const cpp_int &v, int bits) {
  const cpp_int m = cpp_int(1) << bits;
  cpp_int r = v % m;
  if (r < 0) r += m;
  return r;
}

u128 pick(std::mt19937_64 &rng, int bits) {
  // Bias towards edge values so carries and borrows actually fire.
  const u128 mask = bits == 128 ? ~u128(0) : (u128(1) << bits) - 1;
  switch (rng() % 4) {
    case 0: return mask;
    case 1: return rng() % 3;
    default: return ((u128(rng()) << 64) | rng()) & mask;
  }
}

}  // namespace

TEST_CASE("u64 builtins agree with arbitrary-precision arithmetic") {
  const Kernel k = parse_kernel(R"(void ops(const u64 a[1], const u64 b[1], const u1 c[1], u64 o[9], u1 fl[2]) {
  (u64 s, u1 co) = addcarry_u64(c[0], a[0], b[0]);
  (u64 d, u1 bo) = subborrow_u64(c[0], a[0], b[0]);
  (u64 hi, u64 lo) = mulwide_u64(a[0], b[0]);
  o[0] = s;
  o[1] = d;
  o[2] = hi;
  o[3] = lo;
  o[4] = a[0] * b[0];
  o[5] = cmovznz_u64(c[0], a[0], b[0]);
  o[6] = (a[0] >> 7) | (b[0] << 59);
  o[7] = (u64)(u32)a[0] - b[0];
  o[8] = ~a[0] ^ (a[0] & b[0]);
  fl[0] = co;
  fl[1] = bo;
}
)");
  std::mt19937_64 rng(11);
  for (int t = 0; t < 2000; ++t) {
    const u128 a = pick(rng, 64), b = pick(rng, 64), c = rng() & 1;
    const Outputs out = eval(k, InputVector{{{a}, {b}, {c}, {}, {}}});
    const cpp_int A = big(a), B = big(b), C = big(c);
    const cpp_int M64 = (cpp_int(1) << 64) - 1;
    const cpp_int sum = A + B + C, diff = A - B - C, prod = A * B;
    CHECK(big(out[0][0]) == wrap(sum, 64));
    CHECK(big(out[0][1]) == wrap(diff, 64));
    CHECK(big(out[0][2]) == (prod >> 64));
    CHECK(big(out[0][3]) == wrap(prod, 64));
    CHECK(big(out[0][4]) == wrap(prod, 64));
    CHECK(big(out[0][5]) == (C != 0 ? B : A));
    CHECK(big(out[0][6]) == ((A >> 7) | wrap(B << 59, 64)));
    CHECK(big(out[0][7]) == wrap((A & 0xffffffffu) - B, 64));
    CHECK(big(out[0][8]) == ((M64 ^ A) ^ (A & B)));
    CHECK(big(out[1][0]) == (sum >> 64));
    CHECK(big(out[1][1]) == (diff < 0 ? 1 : 0));
  }
}

TEST_CASE("u128 and u32 arithmetic wraps at the declared width") {
  const Kernel k = parse_kernel(R"(void w(const u128 x[2], const u32 y[2], u128 o[3], u32 p[2]) {
  o[0] = x[0] * x[1];
  o[1] = x[0] - x[1];
  o[2] = (u128)y[0] * (u128)y[1] + x[0];
  p[0] = y[0] + y[1];
  p[1] = (u32)(x[0] >> 100);
}
)");
  std::mt19937_64 rng(5);
  for (int t = 0; t < 1000; ++t) {
    const u128 x0 = pick(rng, 128), x1 = pick(rng, 128), y0 = pick(rng, 32), y1 = pick(rng, 32);
    const Outputs out = eval(k, InputVector{{{x0, x1}, {y0, y1}, {}, {}}});
    CHECK(big(out[0][0]) == wrap(big(x0) * big(x1), 128));
    CHECK(big(out[0][1]) == wrap(big(x0) - big(x1), 128));
    CHECK(big(out[0][2]) == wrap(big(y0) * big(y1) + big(x0), 128));
    CHECK(big(out[1][0]) == wrap(big(y0) + big(y1), 32));
    CHECK(big(out[1][1]) == wrap(big(x0) >> 100, 32));
  }
}

TEST_CASE("a kernel is equivalent to itself and to its unrolling") {
  for (const char *name : kFiatKernels) {
    CAPTURE(name);
    const Kernel k = staticize_bounds(load_fixture(name));
    CHECK(check_equiv(k, k, 200, 3).equivalent);
    CHECK(check_equiv(k, unroll(k), 500, 4).equivalent);
  }
}

TEST_CASE("a mutated constant is caught with a counterexample") {
  const Kernel k = load_fixture("mac8.slc");
  const Kernel m = parse_kernel(R"(void mac8(const u64 a[8], const u64 b[8], const u64 c[8], u64 o[8]) {
  L0: for (u32 i = 0; i < 8; i += 1) {
    o[i] = c[i] + a[i] * b[i] + 1;
  }
}
)");
  const EquivVerdict v = check_equiv(k, m, 1000, 9);
  REQUIRE_FALSE(v.equivalent);
  REQUIRE(v.counterexample);
  const Outputs ea = eval(k, v.counterexample->input), eb = eval(m, v.counterexample->input);
  CHECK(ea != eb);
  CHECK(v.counterexample->expected != v.counterexample->actual);
  const auto j = verdict_to_json(v, k);
  CHECK(j.at("equivalent") == false);
  CHECK(j.at("counterexample").contains("location"));
}

TEST_CASE("corner vectors catch a difference random sampling misses") {
  const Kernel a = parse_kernel(R"(void f(const u64 x[1], u64 o[1]) {
  (u64 s, u1 c) = addcarry_u64((u1)0, x[0], 1);
  o[0] = cmovznz_u64(c, 0, s + 5);
}
)");
  const Kernel b = parse_kernel("void f(const u64 x[1], u64 o[1]) {\n  o[0] = 0;\n}\n");
  CHECK_FALSE(check_equiv(a, b, 50, 1).equivalent);
}

TEST_CASE("serial and parallel checks give identical verdicts") {
  const Kernel k = load_fixture("csub4.slc");
  const Kernel m = parse_kernel(R"(void csub4(const u64 a[4], const u64 m[4], u64 o[4]) {
  u64 t[4];
  u1 bw[5];
  bw[0] = (u1)0;
  L0: for (u32 i = 0; i < 4; i += 1) {
    (t[i], bw[i + 1]) = subborrow_u64(bw[i], a[i], m[i]);
  }
  L1: for (u32 i = 0; i < 4; i += 1) {
    o[i] = cmovznz_u64(bw[4], a[i], t[i]);
  }
}
)");
  for (uint64_t seed : {1u, 2u, 3u}) {
    const EquivVerdict p = check_equiv(k, m, 300, seed), s = check_equiv_serial(k, m, 300, seed);
    CHECK(p.equivalent == s.equivalent);
    CHECK(p.vectors_tested == s.vectors_tested);
    CHECK(verdict_to_json(p, k).dump() == verdict_to_json(s, k).dump());
  }
  const EquivVerdict p = check_equiv(k, k, 300, 7), s = check_equiv_serial(k, k, 300, 7);
  CHECK(p.equivalent);
  CHECK(p.vectors_tested == s.vectors_tested);
}

TEST_CASE("signature mismatch is an error, not a verdict") {
  CHECK_THROWS_AS(check_equiv(load_fixture("mac8.slc"), load_fixture("add4.slc")), SignatureMismatch);
}

TEST_CASE("random inputs are reproducible from the seed") {
  const Kernel k = load_fixture("shr8.slc");
  std::mt19937_64 r1(42), r2(42);
  for (int i = 0; i < 20; ++i) {
    const InputVector x = random_input(k, r1), y = random_input(k, r2);
    CHECK(x.values == y.values);
    CHECK(x.values[2][0] <= 8);  // bound parameter stays within its maximum
  }
}
