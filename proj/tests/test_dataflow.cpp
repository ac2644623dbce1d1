#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "rollhls/dataflow.hpp"
#include "rollhls/oracle.hpp"
#include "rollhls/parser.hpp"

using namespace rollhls;

namespace {

const char *kRing = R"(void f(const u64 a[4], const u64 b[4], u64 o[4]) {
  u64 x0 = a[0] * b[0];
  u64 x1 = a[1] * b[1];
  u64 x2 = a[2] * b[2];
  u64 x3 = a[3] * b[3];
  o[0] = x0 + x1;
  o[1] = x1 + x2;
  o[2] = x2 + x3;
  o[3] = x3 + x0;
}
)";

// Straight-line program of `n` locals over random earlier values, then every
// local folded into the outputs so nothing is dead.
std::string random_program(std::mt19937_64 &rng, int n) {
  static const char *ops[] = {"+", "-", "*", "^", "&", "|"};
  std::ostringstream os;
  os << "void g(const u64 a[6], u64 o[3]) {\n";
  std::vector<std::string> pool = {"a[0]", "a[1]", "a[2]", "a[3]", "a[4]", "a[5]"};
  for (int i = 0; i < n; ++i) {
    const std::string l = pool[rng() % pool.size()], r = pool[rng() % pool.size()];
    os << "  u64 x" << i << " = " << l << " " << ops[rng() % 6] << " " << r << ";\n";
    pool.push_back("x" + std::to_string(i));
  }
  for (int j = 0; j < 3; ++j) {
    os << "  o[" << j << "] = ";
    bool first = true;
    for (int i = j; i < n; i += 3) {
      os << (first ? "" : " ^ ") << "x" << i;
      first = false;
    }
    if (first) os << "a[0]";
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace

TEST_CASE("dependence graph of a small ring") {
  const Program p = parse_program(kRing);
  const DDG g = build_ddg(p);
  for (const char *x : {"x0", "x1", "x2", "x3"}) CHECK(g.use_count(x) == 2);
  CHECK(g.last_use("x0") == 7);
  CHECK(g.last_use("x1") == 5);
  CHECK(g.uses.size() == 16);  // 8 input reads plus 8 local reads
  CHECK(single_use_locals(g).empty());
}

TEST_CASE("array assignment packs locals and keeps semantics") {
  const Program p = parse_program(kRing);
  const DDG g = build_ddg(p);
  const auto [q, asg] = assign_arrays(p, g);
  CHECK(q.locals.empty());
  REQUIRE(asg.synthesized.size() == 1);
  CHECK(asg.synthesized[0].length == 4);
  CHECK(asg.groups.at("x2").second == 2);
  CHECK(check_equiv(p, q, 300, 2).equivalent);
}

TEST_CASE("every local read has exactly one earlier definition") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 40; ++t) {
    const std::string text = random_program(rng, 3 + static_cast<int>(rng() % 14));
    CAPTURE(text);
    const Program p = parse_program(text);
    const DDG g = build_ddg(p);
    for (const auto &u : g.uses) {
      REQUIRE(u.def >= 0);
      REQUIRE(static_cast<size_t>(u.def) < g.defs.size());
      CHECK(g.defs[static_cast<size_t>(u.def)].stmt < u.stmt);
    }
    for (const auto &[name, def] : g.local_def) {
      int counted = 0;
      for (const auto &u : g.uses) counted += u.def == def;
      CHECK(counted == g.use_count(name));
    }
    const auto [q, asg] = assign_arrays(p, g);
    CHECK(asg.groups.size() == p.locals.size());
    CHECK(check_equiv(p, q, 200, static_cast<uint64_t>(t)).equivalent);
  }
}

TEST_CASE("dot output names every definition") {
  const Program p = parse_program(kRing);
  const std::string dot = ddg_to_dot(p, build_ddg(p));
  CHECK(dot.rfind("digraph", 0) == 0);
  for (const char *x : {"x0", "x3", "o[2]"}) CHECK(dot.find(x) != std::string::npos);
}
