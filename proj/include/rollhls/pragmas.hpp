#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

namespace rollhls {

struct LoopDirectives {
  std::optional<int> pipeline_ii;
  int unroll = 1;  // 1 = no unroll directive

  bool operator==(const LoopDirectives &) const = default;
  auto operator<=>(const LoopDirectives &) const = default;
};

/// Synthesis directives attached to a structured program. Loops are keyed by
/// label and arrays by name.
struct PragmaConfig {
  std::map<std::string, LoopDirectives> loops;
  std::map<std::string, int> partition;  // cyclic factor
  std::set<std::string> dependence_false;

  bool empty() const;
  const LoopDirectives &loop(const std::string &label) const;
  /// Drop entries that carry no directive.
  void normalize();
  std::string describe() const;

  bool operator==(const PragmaConfig &) const = default;
  auto operator<=>(const PragmaConfig &) const = default;
};

nlohmann::json pragmas_to_json(const PragmaConfig &p);
PragmaConfig pragmas_from_json(const nlohmann::json &j);

}  // namespace rollhls
