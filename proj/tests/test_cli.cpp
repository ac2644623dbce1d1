#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "rollhls/emit.hpp"
#include "rollhls/oracle.hpp"
#include "rollhls/output.hpp"
#include "rollhls/parser.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace rollhls;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string &args) {
  const std::string cmd = std::string(ROLLHLS_BIN) + " " + args + " 2>/dev/null";
  Run r;
  FILE *p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string &tag) {
  static std::mt19937_64 rng(std::random_device{}());
  fs::path d = fs::temp_directory_path() / ("rollhls_cli_" + tag + "_" + std::to_string(rng() % 1000000000));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write(const fs::path &p, const std::string &text) {
  std::ofstream(p) << text;
}

const char *kUnrolledMac = R"(void mac(const u64 a[8], const u64 b[8], const u64 c[8], u64 o[8]) {
  o[0] = c[0] + a[0] * b[0];
  o[1] = c[1] + a[1] * b[1];
  o[2] = c[2] + a[2] * b[2];
  o[3] = c[3] + a[3] * b[3];
  o[4] = c[4] + a[4] * b[4];
  o[5] = c[5] + a[5] * b[5];
  o[6] = c[6] + a[6] * b[6];
  o[7] = c[7] + a[7] * b[7];
}
)";

}  // namespace

TEST_CASE("roll re-rolls the unrolled MAC") {
  const fs::path d = scratch("roll");
  write(d / "mac.slc", kUnrolledMac);
  const Run r = run("roll " + (d / "mac.slc").string() + " -o " + (d / "out").string());
  CHECK(r.code == 0);
  CHECK(r.out.find("statements: 8 -> 1") != std::string::npos);
  const Kernel k = load_kernel_file((d / "out" / "rolled.slc").string()).kernel;
  CHECK(loop_count(k) == 1);
  CHECK(k.body[0].loop().trip_count() == 8);
  const auto rep = nlohmann::json::parse(read_file((d / "out" / "roll_report.json").string()));
  CHECK(rep.at("equivalent") == true);
  CHECK(rep.at("seed") == 1);
  fs::remove_all(d);
}

TEST_CASE("roll leaves minimal or excluded programs alone") {
  const fs::path d = scratch("minimal");
  write(d / "one.slc", "void one(const u64 a[1], u64 o[1]) {\n  o[0] = a[0] ^ 5;\n}\n");
  REQUIRE(run("roll " + (d / "one.slc").string() + " -o " + d.string()).code == 0);
  const Kernel one = load_kernel_file((d / "one.slc").string()).kernel;
  const Kernel same = load_kernel_file((d / "rolled.slc").string()).kernel;
  CHECK(statement_count(same) == 1);
  CHECK(loop_count(same) == 0);
  CHECK(check_equiv(one, same, 100, 1).equivalent);

  write(d / "mac.slc", kUnrolledMac);
  REQUIRE(run("roll " + (d / "mac.slc").string() + " --min-seq-len 100 -o " + d.string()).code == 0);
  CHECK(loop_count(load_kernel_file((d / "rolled.slc").string()).kernel) == 0);
  fs::remove_all(d);
}

TEST_CASE("parse errors exit 2 without writing") {
  const fs::path d = scratch("bad");
  write(d / "bad.slc", "void bad(const u64 a[1], u64 o[1]) {\n  o[0] = a[3];\n}\n");
  CHECK(run("roll " + (d / "bad.slc").string() + " -o " + (d / "out").string()).code == 2);
  CHECK_FALSE(fs::exists(d / "out" / "rolled.slc"));
  CHECK(run("explore").code == 2);
  CHECK(run("explore " + fixture("mac8.slc") + " --weights 0.5 -o " + d.string()).code == 2);
  CHECK(run("explore " + fixture("mac8.slc") + " --device nosuch -o " + d.string()).code == 2);
  CHECK(run("frobnicate").code == 2);
  fs::remove_all(d);
}

TEST_CASE("explore writes every artifact, deterministically") {
  const fs::path d = scratch("explore");
  const std::string in = fixture("csub4.slc");
  REQUIRE(run("explore " + in + " --refine 2 --seed 5 -o " + (d / "a").string()).code == 0);
  REQUIRE(run("explore " + in + " --refine 2 --seed 5 -o " + (d / "b").string()).code == 0);
  for (const char *f : {"design_space.json", "pareto.csv", "pareto.svg", "best.c", "report.md"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(d / "a" / f));
    CHECK(read_file((d / "a" / f).string()) == read_file((d / "b" / f).string()));
  }
  const std::string csv = read_file((d / "a" / "pareto.csv").string());
  CHECK(csv.rfind("# seed=5\ndesign_id,latency_cycles,dsp,lut,ff,bram,r_percent,npi\n", 0) == 0);
  const auto j = nlohmann::json::parse(read_file((d / "a" / "design_space.json").string()));
  CHECK(j.at("seed") == 5);
  CHECK(j.at("refine_hypervolume").size() == 3);
  const std::string best = read_file((d / "a" / "best.c").string());
  CHECK(scan_emitted(best).clean());
  const ParsedSource parsed = parse_source(best);
  CHECK(parsed.kernel.name == "csub4");
  const std::string svg = read_file((d / "a" / "pareto.svg").string());
  CHECK(svg.find("width=\"800\" height=\"600\"") != std::string::npos);

  // report regenerates the same markdown from the JSON alone.
  fs::remove(d / "a" / "report.md");
  REQUIRE(run("report " + (d / "a").string()).code == 0);
  CHECK(read_file((d / "a" / "report.md").string()) == read_file((d / "b" / "report.md").string()));
  fs::remove_all(d);
}

TEST_CASE("a loop-free kernel has a single design point") {
  const fs::path d = scratch("flat");
  write(d / "flat.slc", "void flat(const u64 a[2], u64 o[1]) {\n  o[0] = a[0] * a[1];\n}\n");
  REQUIRE(run("explore " + (d / "flat.slc").string() + " -o " + d.string()).code == 0);
  const auto j = nlohmann::json::parse(read_file((d / "design_space.json").string()));
  CHECK(j.at("points").size() == 1);
  CHECK(j.at("front").size() == 1);
  fs::remove_all(d);
}

TEST_CASE("check exit codes") {
  const std::string mac = fixture("mac8.slc");
  const Run same = run("check " + mac + " " + mac);
  CHECK(same.code == 0);
  CHECK(nlohmann::json::parse(same.out).at("equivalent") == true);

  const fs::path d = scratch("check");
  std::string text = read_file(mac);
  text.replace(text.find("c[i] +"), 6, "c[i] + 2 +");
  write(d / "mut.slc", text);
  const Run diff = run("check " + mac + " " + (d / "mut.slc").string() + " --vectors 50");
  CHECK(diff.code == 1);
  CHECK(nlohmann::json::parse(diff.out).contains("counterexample"));
  CHECK(run("check " + mac + " " + fixture("add4.slc")).code == 2);
  fs::remove_all(d);
}

TEST_CASE("combine sums resources, takes the slowest latency, and enforces budgets") {
  const fs::path d = scratch("combine");
  fs::create_directories(d / "x25519_a");
  fs::create_directories(d / "x25519_b");
  write(d / "x25519_a" / "pareto.csv", "# seed=1\ndesign_id,latency_cycles,dsp,lut,ff,bram,r_percent,npi\n3,67,428,0,0,0,0,0\n");
  write(d / "x25519_b" / "pareto.csv", "# seed=1\ndesign_id,latency_cycles,dsp,lut,ff,bram,r_percent,npi\n9,52,174,0,0,0,0,0\n");
  const std::string files = (d / "x25519_a" / "pareto.csv").string() + " " + (d / "x25519_b" / "pareto.csv").string();
  REQUIRE(run("combine " + files + " -o " + d.string()).code == 0);
  auto j = nlohmann::json::parse(read_file((d / "combined.json").string()));
  const auto &chosen = j.at("selection").at("design");
  CHECK(chosen.at("latency_cycles") == 67);
  CHECK(chosen.at("dsp") == 602);
  CHECK(chosen.at("selection").at("x25519_a") == 3);
  CHECK(chosen.at("selection").at("x25519_b") == 9);

  CHECK(run("combine " + files + " --dsp-budget 100 -o " + d.string()).code == 3);
  j = nlohmann::json::parse(read_file((d / "combined.json").string()));
  CHECK(j.at("selection").at("feasible") == false);
  CHECK(j.at("selection").at("witness").at("dsp") == 602);
  CHECK(run("combine " + files + " --mode fastest -o " + d.string()).code == 2);
  fs::remove_all(d);
}

TEST_CASE("combine reads design_space.json as well") {
  const fs::path d = scratch("combine_json");
  REQUIRE(run("explore " + fixture("mac8.slc") + " -o " + (d / "mac").string()).code == 0);
  REQUIRE(run("explore " + fixture("mul2.slc") + " -o " + (d / "mul").string()).code == 0);
  const Run r = run("combine " + (d / "mac" / "design_space.json").string() + " " + (d / "mul" / "pareto.csv").string() +
                    " --mode npi -o " + d.string());
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(read_file((d / "combined.json").string()));
  CHECK(j.at("kernels")[0].at("name") == "mac8");
  CHECK(j.at("kernels")[1].at("name") == "mul");
  CHECK(j.at("selection").at("feasible") == true);
  fs::remove_all(d);
}
