#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "rollhls/explorer.hpp"
#include "rollhls/parser.hpp"
#include "rollhls/qor.hpp"
#include "support.hpp"

using namespace rollhls;

namespace {

PragmaConfig loop_pragma(const std::string &label, int unroll, std::optional<int> ii = std::nullopt) {
  PragmaConfig p;
  p.loops[label].unroll = unroll;
  p.loops[label].pipeline_ii = ii;
  return p;
}

std::vector<Objective> brute_front(const std::vector<Objective> &pts) {
  std::vector<Objective> out;
  for (const auto &p : pts) {
    bool dominated = false;
    for (const auto &q : pts) {
      const bool weak = q.latency <= p.latency && q.r <= p.r;
      const bool strict = q.latency < p.latency || q.r < p.r;
      const bool same_lower_id = q.latency == p.latency && q.r == p.r && q.id < p.id;
      if ((weak && strict) || same_lower_id) dominated = true;
    }
    if (!dominated) out.push_back(p);
  }
  std::sort(out.begin(), out.end(), [](const Objective &a, const Objective &b) { return a.latency < b.latency; });
  return out;
}

double grid_hypervolume(const std::vector<Objective> &pts, double lref, double rref) {
  std::vector<double> xs = {lref}, ys = {rref};
  for (const auto &p : pts) {
    if (p.latency < lref) xs.push_back(p.latency);
    if (p.r < rref) ys.push_back(p.r);
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  double area = 0;
  for (size_t i = 0; i + 1 < xs.size(); ++i)
    for (size_t j = 0; j + 1 < ys.size(); ++j) {
      bool covered = false;
      for (const auto &p : pts) covered = covered || (p.latency <= xs[i] && p.r <= ys[j]);
      if (covered) area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
    }
  return area;
}

}  // namespace

TEST_CASE("multiplier tiling") {
  const EstimatorParams p;
  CHECK(mul_dsp(64, p) == 12);  // ceil(64/27) * ceil(64/18) = 3 * 4
  CHECK(mul_dsp(32, p) == 4);
  CHECK(mul_dsp(18, p) == 1);
}

TEST_CASE("hand-derived loop estimates") {
  // mul (4) then two adds (1 + 1): body latency 6.
  const Kernel k = parse_kernel(R"(void p(const u64 a[10], const u64 b[10], const u64 c[10], u64 o[10]) {
  L0: for (u32 i = 0; i < 10; i += 1) {
    o[i] = (a[i] * b[i] + c[i]) + a[i];
  }
}
)");
  const EstimatorParams params;
  CHECK(estimate(k, {}, params).latency == 60);
  CHECK(estimate(k, loop_pragma("L0", 1, 1), params).latency == 15);  // 1*9 + 6

  const Kernel mac = load_fixture("mac8.slc");
  CHECK(estimate(mac, {}, params).dsp == 12);
  CHECK(estimate(mac, loop_pragma("L0", 4), params).dsp == 48);
  CHECK(estimate(mac, {}, params).latency == 40);       // 8 * (4 + 1)
  CHECK(estimate(mac, loop_pragma("L0", 8), params).latency == 5);
  CHECK(estimate(mac, loop_pragma("L0", 8), params).dsp == 96);

  const Kernel empty = parse_kernel("void e(const u64 a[1], u64 o[1]) {\n}\n");
  CHECK(estimate(empty, {}, params) == QoR{});
}

TEST_CASE("carry chains bound the initiation interval") {
  const Kernel add = load_fixture("add4.slc");
  const LoopInfo info = analyze_loops(add);
  const EstimatorParams params;
  CHECK(min_ii(add, info, "L0", 1, {}, params) == 1);
  CHECK(min_ii(add, info, "L0", 2, {}, params) == 2);
  CHECK(min_ii(add, info, "L0", 4, {}, params) == 4);
  // Unrolling a recurrence lengthens the body instead of shortening the loop.
  CHECK(estimate(add, loop_pragma("L0", 4), params).latency == estimate(add, {}, params).latency);
}

TEST_CASE("unrolling a loop free of carried dependences never slows it down or shrinks it") {
  const EstimatorParams params;
  for (const char *name : {"mac8.slc", "mul2.slc", "shr8.slc"}) {
    const Kernel k = staticize_bounds(load_fixture(name));
    const LoopInfo info = analyze_loops(k);
    for (const auto &l : info.loops) {
      if (l.carried) continue;
      QoR prev = estimate(k, {}, params, &info);
      for (int64_t f : divisors(l.trip, 16)) {
        const QoR q = estimate(k, loop_pragma(l.label, static_cast<int>(f)), params, &info);
        INFO(name << " " << l.label << " unroll " << f);
        CHECK(q.latency <= prev.latency);
        CHECK(q.dsp >= prev.dsp);
        prev = q;
      }
    }
  }
}

TEST_CASE("resource percentage") {
  const DeviceProfile dev;
  CHECK(resource_percent({0, 630, 68520, 137040, 228}, dev) == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(resource_percent({}, dev) == 0.0);
  CHECK(resource_percent({7, dev.dsp, dev.lut, dev.ff, dev.bram}, dev) == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("normalized performance index") {
  const Weights w;
  const NpiRange range{100, 200, 5, 10};
  CHECK(std::abs(npi(100, 10, range, w) - 0.5) < 1e-12);
  CHECK(std::abs(npi(200, 5, range, w) - 0.5) < 1e-12);
  CHECK(npi(100, 5, range, w) == 0.0);
  CHECK(std::abs(npi(200, 10, range, w) - 1.0) < 1e-12);
  CHECK(npi(150, 7, NpiRange{150, 150, 7, 7}, w) == 0.0);  // degenerate terms contribute nothing

  std::mt19937_64 rng(8);
  const DeviceProfile dev;
  for (int t = 0; t < 50; ++t) {
    std::vector<QoR> pop;
    for (int i = 0; i < 20; ++i)
      pop.push_back({static_cast<int64_t>(rng() % 1000), static_cast<int64_t>(rng() % 300),
                     static_cast<int64_t>(rng() % 50000), static_cast<int64_t>(rng() % 50000), static_cast<int64_t>(rng() % 40)});
    const NpiRange r = npi_range(pop, dev);
    const double a = 0.5 + static_cast<double>(rng() % 100) / 7.0, b = static_cast<double>(rng() % 1000) - 500.0;
    const NpiRange scaled{a * r.l_min + b, a * r.l_max + b, r.r_min, r.r_max};
    for (const auto &q : pop) {
      const double rq = resource_percent(q, dev);
      const double v = npi(static_cast<double>(q.latency), rq, r, w);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0 + 1e-12);
      CHECK(std::abs(npi(a * static_cast<double>(q.latency) + b, rq, scaled, w) - v) < 1e-12);
      CHECK(npi(q, pop, dev, w) == v);
    }
  }
}

TEST_CASE("pareto filter matches the dominance oracle") {
  CHECK(pareto_filter({{0, 10, 5}, {1, 5, 10}, {2, 7, 7}, {3, 10, 10}}).size() == 3);
  CHECK(pareto_filter({{4, 1, 1}}).size() == 1);
  std::mt19937_64 rng(99);
  for (int t = 0; t < 200; ++t) {
    std::vector<Objective> pts;
    const size_t n = 1 + rng() % 200;
    for (size_t i = 0; i < n; ++i)
      pts.push_back({static_cast<int>(i), static_cast<double>(rng() % 40), static_cast<double>(rng() % 40) / 4.0});
    std::shuffle(pts.begin(), pts.end(), rng);
    const auto got = pareto_filter(pts), want = brute_front(pts);
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].id == want[i].id);
      if (i > 0) CHECK(got[i].r < got[i - 1].r);
    }
  }
}

TEST_CASE("hypervolume matches a grid decomposition") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    std::vector<Objective> pts;
    for (int i = 0; i < 1 + static_cast<int>(rng() % 30); ++i)
      pts.push_back({i, static_cast<double>(rng() % 50), static_cast<double>(rng() % 50) / 3.0});
    const auto front = pareto_filter(pts);
    CHECK(hypervolume(front, 45, 15) == doctest::Approx(grid_hypervolume(front, 45, 15)).epsilon(1e-12));
  }
  CHECK(hypervolume({}, 10, 10) == 0.0);
  CHECK(hypervolume({{0, 2, 3}}, 10, 10) == doctest::Approx(56.0));
}

TEST_CASE("parallel and serial estimation agree") {
  for (const char *name : kFiatKernels) {
    DesignSpace a = explore(load_fixture(name), {}, {});
    DesignSpace b = a;
    for (auto &p : a.points) p.qor.reset();
    for (auto &p : b.points) p.qor.reset();
    estimate_all(a, {});
    estimate_all_serial(b, {});
    for (size_t i = 0; i < a.points.size(); ++i) CHECK(*a.points[i].qor == *b.points[i].qor);
  }
}

TEST_CASE("refinement never shrinks the front hypervolume") {
  const DeviceProfile dev;
  for (const char *name : kFiatKernels) {
    CAPTURE(name);
    DesignSpace ds = explore(load_fixture(name), {}, {});
    const auto before = pareto_filter(objectives(ds, dev));
    const size_t n0 = ds.points.size();

    DesignSpace same = ds;
    CHECK(refine(same, {}, dev, 0, {}).added == 0);
    CHECK(same.points.size() == n0);

    const RefineTrace tr = refine(ds, {}, dev, 3, {});
    REQUIRE(tr.hypervolume.size() == 4);
    for (size_t i = 1; i < tr.hypervolume.size(); ++i) CHECK(tr.hypervolume[i] >= tr.hypervolume[i - 1]);
    CHECK(ds.points.size() == n0 + static_cast<size_t>(tr.added));

    // Every original front point is matched or dominated by the refined front.
    const auto after = pareto_filter(objectives(ds, dev));
    for (const auto &p : before) {
      bool covered = false;
      for (const auto &q : after) covered = covered || (q.latency <= p.latency && q.r <= p.r);
      CHECK(covered);
    }
    std::set<std::string> keys;
    for (const auto &p : ds.points) CHECK(keys.insert(std::to_string(p.variant) + pragmas_to_json(p.pragmas).dump()).second);
  }
}

TEST_CASE("parameter and device files") {
  EstimatorParams p;
  p.latency["mul"] = 3;
  p.dsp_a = 25;
  const EstimatorParams q = params_from_json(params_to_json(p));
  CHECK(q.latency.at("mul") == 3);
  CHECK(q.dsp_a == 25);
  CHECK(params_from_json(nlohmann::json::object()).latency.at("mulwide") == 5);

  CHECK(device_by_name("xczu9eg").dsp == 2520);
  CHECK(device_by_name("zu9eg").bram == 912);
  CHECK_THROWS_AS(device_by_name("nope"), std::invalid_argument);
  const DeviceProfile d = device_from_json({{"name", "tiny"}, {"dsp", 10}, {"lut", 100}, {"ff", 200}, {"bram", 2}});
  CHECK(device_to_json(d).at("lut") == 100);
}
