#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rollhls/explorer.hpp"

namespace rollhls {

/// Per-operation cost at a given width.
struct OpCost {
  int latency = 0;  // cycles
  int64_t lut = 0;
  int64_t dsp = 0;
};

/// Latency table keyed by operation class; LUT costs are per result bit.
struct EstimatorParams {
  std::map<std::string, int> latency = {
      {"add", 1}, {"sub", 1},     {"logic", 1},   {"not", 1},       {"cmov", 1},     {"addcarry", 1},
      {"subborrow", 1}, {"mul", 4}, {"mulwide", 5}, {"shift", 0}, {"varshift", 1}, {"cast", 0},
  };
  std::map<std::string, double> lut_per_bit = {
      {"add", 1.0},      {"sub", 1.0},       {"logic", 1.0}, {"not", 1.0},   {"cmov", 1.0},     {"addcarry", 1.0},
      {"subborrow", 1.0}, {"mul", 1.0},      {"mulwide", 2.0}, {"shift", 0.0}, {"varshift", 6.0}, {"cast", 0.0},
  };
  int dsp_a = 27;  // multiplier tile input widths
  int dsp_b = 18;
  int64_t mux_lut = 32;
  int64_t bram_bits = 18432;
  int memory_ports = 2;
};

EstimatorParams params_from_json(const nlohmann::json &j);
nlohmann::json params_to_json(const EstimatorParams &p);

struct DeviceProfile {
  std::string name = "zu9eg";
  int64_t dsp = 2520;
  int64_t lut = 274080;
  int64_t ff = 548160;
  int64_t bram = 912;
};

DeviceProfile device_from_json(const nlohmann::json &j);
nlohmann::json device_to_json(const DeviceProfile &d);
/// Built-in profile by name; throws std::invalid_argument if unknown.
DeviceProfile device_by_name(const std::string &name);

struct Weights {
  double latency = 0.5;
  double resource = 0.5;
};

/// Operation class used as the key into the tables, or empty for leaves.
std::string op_class(const Expr &e);
/// Cost of the operation at the root of `e` (leaves cost nothing).
OpCost op_cost(const Expr &e, const EstimatorParams &p);
int64_t mul_dsp(int width, const EstimatorParams &p);

/// Analytical estimate. `info` may be passed to avoid recomputing it.
QoR estimate(const StructuredProgram &s, const PragmaConfig &pragmas, const EstimatorParams &params,
             const LoopInfo *info = nullptr);

/// Smallest initiation interval the model accepts for a loop pipelined at the
/// given unroll factor: the recurrence bound ceil(R * f / d) and the memory
/// port bound over every array the body touches.
int64_t min_ii(const StructuredProgram &s, const LoopInfo &info, const std::string &label, int64_t unroll,
               const PragmaConfig &pragmas, const EstimatorParams &params);

/// Fill in every point's QoR; parallel over points.
void estimate_all(DesignSpace &ds, const EstimatorParams &params);
void estimate_all_serial(DesignSpace &ds, const EstimatorParams &params);

/// 25 * (DSP_u/DSP_t + LUT_u/LUT_t + FF_u/FF_t + BRAM_u/BRAM_t).
double resource_percent(const QoR &q, const DeviceProfile &dev);

struct NpiRange {
  double l_min = 0, l_max = 0;
  double r_min = 0, r_max = 0;
};

NpiRange npi_range(const std::vector<QoR> &population, const DeviceProfile &dev);
double npi(double latency, double r, const NpiRange &range, const Weights &w);
double npi(const QoR &q, const std::vector<QoR> &population, const DeviceProfile &dev, const Weights &w);

struct Objective {
  int id = 0;
  double latency = 0;
  double r = 0;
};

/// Non-dominated subset, ordered by latency. Exact duplicates keep the
/// lowest id.
std::vector<Objective> pareto_filter(std::vector<Objective> points);

/// Area dominated by the front inside the box bounded by the reference point.
double hypervolume(const std::vector<Objective> &front, double l_ref, double r_ref);

std::vector<Objective> objectives(const DesignSpace &ds, const DeviceProfile &dev);

struct RefineTrace {
  std::vector<double> hypervolume;  // before round 1, then after each round
  int added = 0;
};

/// Feedback rounds: neighbours of every front point (unroll one divisor step
/// up or down, II one step up or down, one partition toggled) are estimated
/// and merged into the design space. The reference point for the
/// hypervolume trace is the population maxima before the first round.
RefineTrace refine(DesignSpace &ds, const EstimatorParams &params, const DeviceProfile &dev, int rounds,
                   const ExplorerConfig &cfg);

}  // namespace rollhls
