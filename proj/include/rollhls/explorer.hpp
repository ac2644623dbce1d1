#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "rollhls/ir.hpp"
#include "rollhls/oracle.hpp"
#include "rollhls/pragmas.hpp"

namespace rollhls {

struct LoopSummary {
  std::string label;
  std::string var;
  std::string parent;  // enclosing loop label, empty at top level
  int64_t trip = 0;
  int depth = 1;
  bool carried = false;
  int64_t distance = 0;  // minimum carried distance in iterations; 0 when not carried
  std::set<std::string> carried_arrays;
  std::set<std::string> read_arrays;
  std::set<std::string> written_arrays;
  std::map<std::string, int64_t> stride;  // affine coefficient of this loop's variable per array
  std::set<std::string> non_affine;       // arrays with an index that is not affine
  bool perfect_nest = false;
  bool has_guards = false;
  bool defines_locals = false;
};

/// Consecutive top-level statement blocks with identical shape whose only
/// differences are array subscripts.
struct OutlineGroup {
  size_t first = 0;       // index of the first statement in the kernel body
  size_t block_size = 0;  // statements per block
  size_t blocks = 0;
};

struct LoopInfo {
  std::vector<LoopSummary> loops;  // preorder
  std::vector<OutlineGroup> outline_groups;

  const LoopSummary *find(const std::string &label) const;
};

/// Dependence and access-pattern analysis. Affine accesses are tested
/// exactly by enumerating iterations; a written array with any non-affine
/// subscript is treated as carried with distance 1.
LoopInfo analyze_loops(const StructuredProgram &s);

/// Replace variable loop bounds by their declared maxima, turning writes of
/// the extra iterations into cmovznz selections that keep the old value.
/// Throws IrError for a variable bound with no declared maximum.
StructuredProgram staticize_bounds(const StructuredProgram &s);

struct Transform {
  enum class Kind { Outline, Interchange, Pad, Fuse, Perfectize, BranchEliminate, StrengthReduce, Tile };
  Kind kind = Kind::Tile;
  std::vector<std::string> loops;  // labels involved
  int64_t value = 0;               // Pad: new trip; Tile: factor; Outline: group index

  std::string describe() const;
  nlohmann::json to_json() const;
};

const char *transform_name(Transform::Kind k);

struct TransformResult {
  bool ok = false;
  std::string reason;  // why the transform was rejected
  StructuredProgram program;
};

/// Apply one transform if its legality conditions hold.
TransformResult apply_transform(const StructuredProgram &s, const Transform &t);

struct ExplorerConfig {
  int max_variants = 64;
  int max_pragma_sets = 256;
  int max_unroll = 16;
  std::vector<int64_t> tile_factors = {2, 4};
  int vectors = 1000;
  uint64_t seed = 1;
};

struct Variant {
  StructuredProgram program;
  std::vector<Transform> transforms;
};

/// Stages in order: outline, interchange, pad, fuse, perfectize,
/// branch-eliminate, strength-reduce (each skipped or applied everywhere it
/// is legal), then at most one tile factor. Structural duplicates are
/// dropped; the untransformed program always comes first.
std::vector<Variant> enumerate_variants(const StructuredProgram &s, const ExplorerConfig &cfg,
                                        std::vector<std::string> *warnings = nullptr);

struct EstimatorParams;

/// Cross product of per-loop choices (unroll factor dividing the trip count,
/// pipelined or not). Partition factors follow the unroll factors; pipelined
/// loops get the smallest legal II and dependence-false on arrays proven free
/// of carried dependences. Evenly sampled down to cfg.max_pragma_sets.
std::vector<PragmaConfig> enumerate_pragmas(const StructuredProgram &v, const LoopInfo &info, const ExplorerConfig &cfg,
                                            const EstimatorParams &params, std::vector<std::string> *warnings = nullptr);

struct QoR {
  int64_t latency = 0;
  int64_t dsp = 0;
  int64_t lut = 0;
  int64_t ff = 0;
  int64_t bram = 0;

  bool operator==(const QoR &) const = default;
};

struct DesignPoint {
  int id = 0;
  int variant = 0;
  std::vector<Transform> transforms;
  PragmaConfig pragmas;
  std::string program_digest;
  std::optional<QoR> qor;
};

struct DesignSpace {
  StructuredProgram source;
  std::vector<Variant> variants;
  std::vector<LoopInfo> infos;  // per variant
  std::vector<DesignPoint> points;
  std::vector<std::string> warnings;
  int dropped_variants = 0;  // failed the equivalence check
};

/// One point per (variant, pragma set). Every variant is checked against the
/// source once (in parallel); variants that fail are dropped with a warning.
DesignSpace synthesize_design_space(const StructuredProgram &source, std::vector<Variant> variants,
                                    const std::vector<std::vector<PragmaConfig>> &pragma_sets, const ExplorerConfig &cfg);

/// Whole explorer stage: staticize, enumerate variants and pragma sets,
/// synthesize the design space.
DesignSpace explore(const StructuredProgram &source, const ExplorerConfig &cfg, const EstimatorParams &params);

/// Divisors of n up to limit, ascending.
std::vector<int64_t> divisors(int64_t n, int64_t limit);

}  // namespace rollhls
