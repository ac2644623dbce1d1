#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "rollhls/dataflow.hpp"
#include "rollhls/oracle.hpp"
#include "rollhls/saturator.hpp"
#include "rollhls/templater.hpp"

namespace rollhls {

struct RollOptions {
  SaturationConfig saturation;
  int vectors = 1000;
  uint64_t seed = 1;
};

struct RollResult {
  Program arrayed;  // locals mapped onto synthesized arrays
  DDG ddg;
  ArrayAssignment assignment;
  Abstraction abstraction;
  RTerm extracted;
  bool truncated = false;
  int iterations = 0;
  int rewrites = 0;
  nlohmann::json egraph;
  StructuredProgram rolled;
  EquivVerdict verdict;
  size_t statements_before = 0;
  size_t statements_after = 0;
  size_t loops = 0;
};

/// Straight-line program to loops: dependence graph, array assignment,
/// template abstraction, saturation, extraction, lowering, and an equivalence
/// check of the result against the input.
RollResult roll(const Program &p, const RollOptions &opt = {});

nlohmann::json roll_report(const RollResult &r);

}  // namespace rollhls
