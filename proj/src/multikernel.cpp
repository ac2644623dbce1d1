#include "rollhls/multikernel.hpp"

#include <algorithm>
#include <tuple>
#include <stdexcept>

namespace rollhls {

CombinedDesign combine(const std::vector<const KernelPoint *> &members, const DeviceProfile &dev) {
  CombinedDesign d;
  for (const KernelPoint *p : members) {
    d.selection.push_back(p->id);
    d.total.latency = std::max(d.total.latency, p->qor.latency);
    d.total.dsp += p->qor.dsp;
    d.total.lut += p->qor.lut;
    d.total.ff += p->qor.ff;
    d.total.bram += p->qor.bram;
  }
  d.r = resource_percent(d.total, dev);
  return d;
}

namespace {

uint64_t product_size(const std::vector<KernelFront> &fronts) {
  uint64_t n = 1;
  for (const auto &f : fronts) {
    const uint64_t s = f.points.size();
    if (s != 0 && n > UINT64_MAX / s) return UINT64_MAX;
    n *= s;
  }
  return n;
}

CombinedDesign decode(const std::vector<KernelFront> &fronts, uint64_t idx, const DeviceProfile &dev) {
  std::vector<const KernelPoint *> members(fronts.size());
  for (size_t k = fronts.size(); k-- > 0;) {
    const uint64_t s = fronts[k].points.size();
    members[k] = &fronts[k].points[idx % s];
    idx /= s;
  }
  return combine(members, dev);
}

void fill_npi(std::vector<CombinedDesign> &all, const Weights &w) {
  if (all.empty()) return;
  NpiRange range;
  range.l_min = range.l_max = static_cast<double>(all[0].total.latency);
  range.r_min = range.r_max = all[0].r;
  for (const auto &d : all) {
    range.l_min = std::min(range.l_min, static_cast<double>(d.total.latency));
    range.l_max = std::max(range.l_max, static_cast<double>(d.total.latency));
    range.r_min = std::min(range.r_min, d.r);
    range.r_max = std::max(range.r_max, d.r);
  }
  for (auto &d : all) d.npi = npi(static_cast<double>(d.total.latency), d.r, range, w);
}

void require_fronts(const std::vector<KernelFront> &fronts) {
  if (fronts.empty()) throw std::invalid_argument("no kernel fronts");
  for (const auto &f : fronts)
    if (f.points.empty()) throw std::invalid_argument("empty front for kernel " + f.name);
}

}  // namespace

std::vector<CombinedDesign> enumerate_combinations(const std::vector<KernelFront> &fronts, const DeviceProfile &dev,
                                                   const Weights &w) {
  require_fronts(fronts);
  const int64_t n = static_cast<int64_t>(product_size(fronts));
  std::vector<CombinedDesign> out(static_cast<size_t>(n));
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) out[static_cast<size_t>(i)] = decode(fronts, static_cast<uint64_t>(i), dev);
  fill_npi(out, w);
  return out;
}

std::vector<CombinedDesign> enumerate_combinations_serial(const std::vector<KernelFront> &fronts, const DeviceProfile &dev,
                                                          const Weights &w) {
  require_fronts(fronts);
  const uint64_t n = product_size(fronts);
  std::vector<CombinedDesign> out;
  out.reserve(n);
  for (uint64_t i = 0; i < n; ++i) out.push_back(decode(fronts, i, dev));
  fill_npi(out, w);
  return out;
}

std::vector<KernelFront> prune_fronts(const std::vector<KernelFront> &fronts, size_t k, const DeviceProfile &dev,
                                      const Weights &w) {
  std::vector<KernelFront> out;
  for (const auto &f : fronts) {
    if (f.points.size() <= k) {
      out.push_back(f);
      continue;
    }
    std::vector<QoR> pop;
    for (const auto &p : f.points) pop.push_back(p.qor);
    const NpiRange range = npi_range(pop, dev);
    std::vector<std::pair<double, size_t>> scored;
    for (size_t i = 0; i < f.points.size(); ++i)
      scored.emplace_back(npi(static_cast<double>(f.points[i].qor.latency), resource_percent(f.points[i].qor, dev), range, w), i);
    std::sort(scored.begin(), scored.end(), [&](const auto &a, const auto &b) {
      return a.first != b.first ? a.first < b.first : f.points[a.second].id < f.points[b.second].id;
    });
    std::vector<size_t> keep;
    for (size_t i = 0; i < k; ++i) keep.push_back(scored[i].second);
    std::sort(keep.begin(), keep.end());
    KernelFront pruned{f.name, {}};
    for (size_t i : keep) pruned.points.push_back(f.points[i]);
    out.push_back(std::move(pruned));
  }
  return out;
}

CombineResult combine_fronts(const std::vector<KernelFront> &fronts, const DeviceProfile &dev, const Weights &w,
                             uint64_t limit, size_t prune_to) {
  require_fronts(fronts);
  CombineResult res;
  std::vector<KernelFront> use = fronts;
  if (product_size(fronts) > limit) {
    use = prune_fronts(fronts, prune_to, dev, w);
    res.pruned = true;
  }
  res.all = enumerate_combinations(use, dev, w);
  std::vector<Objective> obj;
  for (size_t i = 0; i < res.all.size(); ++i)
    obj.push_back({static_cast<int>(i), static_cast<double>(res.all[i].total.latency), res.all[i].r});
  for (const auto &o : pareto_filter(std::move(obj))) res.front.push_back(res.all[static_cast<size_t>(o.id)]);
  return res;
}

Selection select_under_budget(const std::vector<CombinedDesign> &combined, int64_t dsp_budget, SelectMode mode) {
  if (combined.empty()) throw std::invalid_argument("no combined designs");
  auto by_latency = [](const CombinedDesign &a, const CombinedDesign &b) {
    return std::tie(a.total.latency, a.total.dsp, a.selection) < std::tie(b.total.latency, b.total.dsp, b.selection);
  };
  auto by_npi = [&](const CombinedDesign &a, const CombinedDesign &b) {
    return a.npi != b.npi ? a.npi < b.npi : by_latency(a, b);
  };
  const CombinedDesign *best = nullptr;
  for (const auto &d : combined) {
    if (d.total.dsp > dsp_budget) continue;
    if (!best || (mode == SelectMode::Latency ? by_latency(d, *best) : by_npi(d, *best))) best = &d;
  }
  if (best) return {true, *best};
  const CombinedDesign *witness = &combined[0];
  for (const auto &d : combined)
    if (std::tie(d.total.dsp, d.total.latency, d.selection) <
        std::tie(witness->total.dsp, witness->total.latency, witness->selection))
      witness = &d;
  return {false, *witness};
}

nlohmann::json combined_to_json(const CombinedDesign &d, const std::vector<KernelFront> &fronts) {
  nlohmann::json sel = nlohmann::json::object();
  for (size_t i = 0; i < d.selection.size() && i < fronts.size(); ++i) sel[fronts[i].name] = d.selection[i];
  return {{"selection", sel},
          {"latency_cycles", d.total.latency},
          {"dsp", d.total.dsp},
          {"lut", d.total.lut},
          {"ff", d.total.ff},
          {"bram", d.total.bram},
          {"r_percent", d.r},
          {"npi", d.npi}};
}

}  // namespace rollhls
