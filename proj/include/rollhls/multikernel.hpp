#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rollhls/qor.hpp"

namespace rollhls {

struct KernelPoint {
  int id = 0;
  QoR qor;
};

struct KernelFront {
  std::string name;
  std::vector<KernelPoint> points;
};

/// One design per kernel deployed side by side: resources add up, the
/// slowest kernel sets the latency.
struct CombinedDesign {
  std::vector<int> selection;  // point id per kernel, in front order
  QoR total;
  double r = 0;
  double npi = 0;  // over the combination population
};

CombinedDesign combine(const std::vector<const KernelPoint *> &members, const DeviceProfile &dev);

/// Every selection, in mixed-radix order with the last kernel varying
/// fastest. NPI is filled in over the returned population.
std::vector<CombinedDesign> enumerate_combinations(const std::vector<KernelFront> &fronts, const DeviceProfile &dev,
                                                   const Weights &w);
std::vector<CombinedDesign> enumerate_combinations_serial(const std::vector<KernelFront> &fronts, const DeviceProfile &dev,
                                                          const Weights &w);

/// Keep the k lowest-NPI points of each front (NPI over that front).
std::vector<KernelFront> prune_fronts(const std::vector<KernelFront> &fronts, size_t k, const DeviceProfile &dev,
                                      const Weights &w);

struct CombineResult {
  std::vector<CombinedDesign> all;    // every enumerated selection
  std::vector<CombinedDesign> front;  // non-dominated on (latency, r)
  bool pruned = false;
};

/// Throws std::invalid_argument on an empty list or an empty front.
CombineResult combine_fronts(const std::vector<KernelFront> &fronts, const DeviceProfile &dev, const Weights &w,
                             uint64_t limit = 1000000, size_t prune_to = 16);

enum class SelectMode { Latency, Npi };

struct Selection {
  bool feasible = false;
  CombinedDesign design;  // the choice, or the minimum-DSP witness when infeasible
};

Selection select_under_budget(const std::vector<CombinedDesign> &combined, int64_t dsp_budget, SelectMode mode);

nlohmann::json combined_to_json(const CombinedDesign &d, const std::vector<KernelFront> &fronts);

}  // namespace rollhls
