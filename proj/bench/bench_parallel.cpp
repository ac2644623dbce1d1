// OpenMP kernels against their serial references.
#include <benchmark/benchmark.h>

#include <random>

#include "rollhls/explorer.hpp"
#include "rollhls/multikernel.hpp"
#include "rollhls/oracle.hpp"
#include "rollhls/parser.hpp"
#include "rollhls/qor.hpp"

using namespace rollhls;

namespace {

const char *kCsub = R"(void csub4(const u64 a[4], const u64 m[4], u64 o[4]) {
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
)";

const char *kMul = R"(void mul(const u64 a[4], const u64 b[4], u64 hi[16], u64 lo[16]) {
  L0: for (u32 i = 0; i < 4; i += 1) {
    L1: for (u32 j = 0; j < 4; j += 1) {
      (hi[4 * i + j], lo[4 * i + j]) = mulwide_u64(a[i], b[j]);
    }
  }
}
)";

std::vector<KernelFront> fronts(size_t per_front) {
  std::mt19937_64 rng(1);
  std::vector<KernelFront> out;
  for (const char *name : {"a", "b", "c"}) {
    KernelFront f{name, {}};
    for (size_t i = 0; i < per_front; ++i)
      f.points.push_back({static_cast<int>(i),
                          {static_cast<int64_t>(rng() % 500), static_cast<int64_t>(rng() % 800),
                           static_cast<int64_t>(rng() % 90000), static_cast<int64_t>(rng() % 90000),
                           static_cast<int64_t>(rng() % 60)}});
    out.push_back(f);
  }
  return out;
}

void BM_CheckEquiv(benchmark::State &st) {
  const Kernel k = parse_kernel(kCsub);
  const Program u = unroll(k);
  for (auto _ : st) benchmark::DoNotOptimize(check_equiv(k, u, static_cast<int>(st.range(0)), 1));
}

void BM_CheckEquivSerial(benchmark::State &st) {
  const Kernel k = parse_kernel(kCsub);
  const Program u = unroll(k);
  for (auto _ : st) benchmark::DoNotOptimize(check_equiv_serial(k, u, static_cast<int>(st.range(0)), 1));
}

DesignSpace unestimated() {
  DesignSpace ds = explore(parse_kernel(kMul), {}, {});
  for (auto &p : ds.points) p.qor.reset();
  return ds;
}

void BM_EstimateAll(benchmark::State &st) {
  const DesignSpace base = unestimated();
  for (auto _ : st) {
    DesignSpace ds = base;
    estimate_all(ds, {});
    benchmark::DoNotOptimize(ds.points.back().qor);
  }
}

void BM_EstimateAllSerial(benchmark::State &st) {
  const DesignSpace base = unestimated();
  for (auto _ : st) {
    DesignSpace ds = base;
    estimate_all_serial(ds, {});
    benchmark::DoNotOptimize(ds.points.back().qor);
  }
}

void BM_Combine(benchmark::State &st) {
  const auto f = fronts(static_cast<size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(enumerate_combinations(f, {}, {}));
}

void BM_CombineSerial(benchmark::State &st) {
  const auto f = fronts(static_cast<size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(enumerate_combinations_serial(f, {}, {}));
}

}  // namespace

BENCHMARK(BM_CheckEquiv)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CheckEquivSerial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EstimateAll)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EstimateAllSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Combine)->Arg(16)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CombineSerial)->Arg(16)->Arg(40)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
