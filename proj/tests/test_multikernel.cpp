#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "rollhls/multikernel.hpp"

using namespace rollhls;

namespace {

KernelFront random_front(std::mt19937_64 &rng, const std::string &name, size_t n) {
  KernelFront f{name, {}};
  for (size_t i = 0; i < n; ++i)
    f.points.push_back({static_cast<int>(i) * 3 + 1,
                        {static_cast<int64_t>(10 + rng() % 200), static_cast<int64_t>(rng() % 500),
                         static_cast<int64_t>(rng() % 20000), static_cast<int64_t>(rng() % 30000), static_cast<int64_t>(rng() % 20)}});
  return f;
}

}  // namespace

TEST_CASE("two single-point fronts combine by max latency and summed resources") {
  const DeviceProfile dev;
  const std::vector<KernelFront> fronts = {{"a", {{1, {67, 428, 1000, 2000, 4}}}}, {"b", {{2, {52, 174, 500, 700, 2}}}}};
  const CombineResult res = combine_fronts(fronts, dev, {});
  REQUIRE(res.all.size() == 1);
  REQUIRE(res.front.size() == 1);
  const CombinedDesign &d = res.front[0];
  CHECK(d.total == QoR{67, 602, 1500, 2700, 6});
  CHECK(d.selection == std::vector<int>{1, 2});
  const auto j = combined_to_json(d, fronts);
  CHECK(j.at("selection").at("a") == 1);
  CHECK(j.at("latency_cycles") == 67);
  CHECK(j.at("dsp") == 602);
}

TEST_CASE("combination laws and enumeration order") {
  const DeviceProfile dev;
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    std::vector<KernelFront> fronts;
    const size_t k = 1 + rng() % 3;
    for (size_t i = 0; i < k; ++i) fronts.push_back(random_front(rng, "k" + std::to_string(i), 1 + rng() % 5));
    const auto all = enumerate_combinations(fronts, dev, {});
    size_t expect = 1;
    for (const auto &f : fronts) expect *= f.points.size();
    REQUIRE(all.size() == expect);
    for (size_t idx = 0; idx < all.size(); ++idx) {
      // Decode the mixed-radix index with the last kernel fastest.
      size_t rest = idx;
      std::vector<const KernelPoint *> members(k);
      for (size_t m = k; m-- > 0;) {
        members[m] = &fronts[m].points[rest % fronts[m].points.size()];
        rest /= fronts[m].points.size();
      }
      QoR want;
      for (const auto *p : members) {
        want.latency = std::max(want.latency, p->qor.latency);
        want.dsp += p->qor.dsp;
        want.lut += p->qor.lut;
        want.ff += p->qor.ff;
        want.bram += p->qor.bram;
      }
      CHECK(all[idx].total == want);
      CHECK(all[idx].r == resource_percent(want, dev));
      for (size_t m = 0; m < k; ++m) CHECK(all[idx].selection[m] == members[m]->id);
    }
    const auto serial = enumerate_combinations_serial(fronts, dev, {});
    REQUIRE(serial.size() == all.size());
    for (size_t i = 0; i < all.size(); ++i) {
      CHECK(serial[i].total == all[i].total);
      CHECK(serial[i].npi == all[i].npi);
    }
  }
}

TEST_CASE("combined front is non-dominated and covers every combination") {
  const DeviceProfile dev;
  std::mt19937_64 rng(13);
  for (int t = 0; t < 30; ++t) {
    const std::vector<KernelFront> fronts = {random_front(rng, "x", 2), random_front(rng, "y", 3), random_front(rng, "z", 4)};
    const CombineResult res = combine_fronts(fronts, dev, {});
    CHECK(res.all.size() == 24);
    CHECK(res.front.size() <= 24);
    for (const auto &a : res.front)
      for (const auto &b : res.front) {
        const bool dominates = b.total.latency <= a.total.latency && b.r <= a.r && (b.total.latency < a.total.latency || b.r < a.r);
        CHECK_FALSE(dominates);
      }
    for (const auto &c : res.all) {
      bool covered = false;
      for (const auto &f : res.front) covered = covered || (f.total.latency <= c.total.latency && f.r <= c.r);
      CHECK(covered);
    }
  }
}

TEST_CASE("budgeted selection equals an exhaustive scan") {
  const DeviceProfile dev;
  std::mt19937_64 rng(21);
  for (int t = 0; t < 100; ++t) {
    const std::vector<KernelFront> fronts = {random_front(rng, "p", 1 + rng() % 6), random_front(rng, "q", 1 + rng() % 6)};
    const auto all = enumerate_combinations(fronts, dev, {});
    const int64_t budget = static_cast<int64_t>(rng() % 1000);

    const CombinedDesign *lat = nullptr, *np = nullptr, *cheapest = nullptr;
    for (const auto &d : all) {
      if (!cheapest || d.total.dsp < cheapest->total.dsp ||
          (d.total.dsp == cheapest->total.dsp && std::tie(d.total.latency, d.selection) < std::tie(cheapest->total.latency, cheapest->selection)))
        cheapest = &d;
      if (d.total.dsp > budget) continue;
      auto key = [](const CombinedDesign &c) { return std::tie(c.total.latency, c.total.dsp, c.selection); };
      if (!lat || key(d) < key(*lat)) lat = &d;
      if (!np || d.npi < np->npi || (d.npi == np->npi && key(d) < key(*np))) np = &d;
    }
    const Selection sl = select_under_budget(all, budget, SelectMode::Latency);
    const Selection sn = select_under_budget(all, budget, SelectMode::Npi);
    CHECK(sl.feasible == (lat != nullptr));
    CHECK(sn.feasible == (np != nullptr));
    if (lat) {
      CHECK(sl.design.selection == lat->selection);
      CHECK(sn.design.selection == np->selection);
    } else {
      CHECK(sl.design.selection == cheapest->selection);
    }
  }
}

TEST_CASE("a larger front never worsens the best latency under a budget") {
  const DeviceProfile dev;
  std::mt19937_64 rng(31);
  for (int t = 0; t < 40; ++t) {
    const KernelFront a = random_front(rng, "a", 3), b = random_front(rng, "b", 3);
    KernelFront bigger = a;
    const KernelFront extra = random_front(rng, "a", 2);
    for (auto p : extra.points) {
      p.id += 1000;
      bigger.points.push_back(p);
    }
    const int64_t budget = 400 + static_cast<int64_t>(rng() % 600);
    const Selection s0 = select_under_budget(enumerate_combinations({a, b}, dev, {}), budget, SelectMode::Latency);
    const Selection s1 = select_under_budget(enumerate_combinations({bigger, b}, dev, {}), budget, SelectMode::Latency);
    if (s0.feasible) {
      CHECK(s1.feasible);
      CHECK(s1.design.total.latency <= s0.design.total.latency);
    }
  }
}

TEST_CASE("oversized products are pruned per front") {
  const DeviceProfile dev;
  std::mt19937_64 rng(41);
  const std::vector<KernelFront> fronts = {random_front(rng, "a", 40), random_front(rng, "b", 40)};
  const CombineResult res = combine_fronts(fronts, dev, {}, 1000, 16);
  CHECK(res.pruned);
  CHECK(res.all.size() == 256);
  const auto pruned = prune_fronts(fronts, 16, dev, {});
  REQUIRE(pruned.size() == 2);
  CHECK(pruned[0].points.size() == 16);
  CHECK_FALSE(combine_fronts(fronts, dev, {}).pruned);
}

TEST_CASE("degenerate inputs") {
  const DeviceProfile dev;
  CHECK_THROWS_AS(combine_fronts({}, dev, {}), std::invalid_argument);
  CHECK_THROWS_AS(combine_fronts({{"a", {}}}, dev, {}), std::invalid_argument);
  CHECK_THROWS_AS(select_under_budget({}, 10, SelectMode::Latency), std::invalid_argument);
  const std::vector<KernelFront> one = {{"solo", {{1, {10, 5, 1, 1, 1}}, {2, {5, 10, 1, 1, 1}}}}};
  CHECK(combine_fronts(one, dev, {}).front.size() == 2);
  const Selection s = select_under_budget(combine_fronts(one, dev, {}).all, 1, SelectMode::Latency);
  CHECK_FALSE(s.feasible);
  CHECK(s.design.selection == std::vector<int>{1});
}
