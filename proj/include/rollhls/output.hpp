#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rollhls/multikernel.hpp"
#include "rollhls/qor.hpp"

namespace rollhls {

/// Scores of an estimated design space: NPI over every point, the
/// (latency, r) front and the minimum-NPI point.
struct Scored {
  std::vector<Objective> all;    // in point order
  std::vector<double> npi;       // parallel to `all`
  std::vector<Objective> front;  // by latency
  int best = -1;                 // id of the minimum-NPI point (lowest id on ties)
};

Scored score(const DesignSpace &ds, const DeviceProfile &dev, const Weights &w);

struct RunInfo {
  uint64_t seed = 1;
  std::string input;
  DeviceProfile device;
  Weights weights;
  std::vector<double> hypervolume;  // refinement trace, empty without --refine
};

nlohmann::json design_space_to_json(const DesignSpace &ds, const Scored &s, const RunInfo &run);
std::string pareto_csv(const DesignSpace &ds, const Scored &s, uint64_t seed);
/// 800x600 scatter of (latency, r); front points highlighted and joined.
std::string pareto_svg(const Scored &s, const std::string &title);
/// Markdown summary built from a design_space.json document.
std::string report_markdown(const nlohmann::json &design_space);

/// Front points from a pareto.csv or design_space.json file.
KernelFront load_front(const std::string &path);

/// Write through a temporary file and rename into place.
void write_atomic(const std::string &path, const std::string &content);
std::string read_file(const std::string &path);

}  // namespace rollhls
