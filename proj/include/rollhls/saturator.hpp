#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rollhls/ir.hpp"
#include "rollhls/templater.hpp"

namespace rollhls {

/// Term language for loop saturation.
struct RTerm {
  enum class Kind : uint8_t { Const, Range, Op, Seq };
  Kind kind = Kind::Seq;
  int template_id = -1;  // Op
  bool frozen = false;   // Op from an excluded sequence; never merged
  int64_t value = 0;     // Const
  int64_t start = 0, stop = 0, step = 1;  // Range (inclusive stop)
  std::vector<RTerm> children;            // Seq children or Op arguments

  static RTerm constant(int64_t v);
  static RTerm range(int64_t start, int64_t stop, int64_t step);
  static RTerm op(int template_id, std::vector<RTerm> args, bool frozen = false);
  static RTerm seq(std::vector<RTerm> children);

  int64_t trip_count() const;  // Range only
  /// Shared trip count of an Op's ranges; 1 when it has none. Throws on
  /// inconsistent counts.
  int64_t op_trip_count() const;
  std::string to_string() const;

  bool operator==(const RTerm &o) const;
  bool operator<(const RTerm &o) const;
};

/// Cost model for extraction: Const 1, Range 3, Op 1 + args, Seq 1 + children.
int64_t term_cost(const RTerm &t);

/// Expand ranges into one (template, constants) pair per represented statement.
std::vector<std::pair<int, std::vector<int64_t>>> unfold(const RTerm &t);

struct SaturationConfig {
  int max_iterations = 64;
  int max_enodes = 50000;
  int min_sequence_ops = 2;
  bool verify_rewrites = false;  // check every rewrite by unfolding
};

/// Mark sequences shorter than cfg.min_sequence_ops as excluded.
void select_targets(Abstraction &a, const SaturationConfig &cfg);

/// One Op per instance in program order; ops of excluded sequences are frozen.
RTerm to_term(const Abstraction &a);

struct ENode {
  enum class Kind : uint8_t { Nil, Cons, Op, Const, Range };
  Kind kind = Kind::Nil;
  int template_id = -1;
  bool frozen = false;
  int64_t a = 0, b = 0, c = 0;  // Const value or Range (start, stop, step)
  std::vector<int> kids;         // Cons: (head, tail); Op: argument classes

  auto operator<=>(const ENode &) const = default;
};

/// E-graph with hash-consing and union-find. Sequences are stored as cons
/// lists so every suffix of a sequence is its own class.
class EGraph {
 public:
  int add(ENode n);
  int find(int cls) const;
  bool merge(int a, int b);
  /// Restore congruence after merges.
  void rebuild();

  std::vector<int> classes() const;
  const std::vector<ENode> &nodes(int cls) const { return nodes_[find(cls)]; }
  size_t node_count() const;
  size_t class_count() const { return classes().size(); }

  int add_term(const RTerm &t);

 private:
  mutable std::vector<int> parent_;
  std::vector<std::vector<ENode>> nodes_;
  std::map<ENode, int> memo_;

  ENode canonical(ENode n) const;
};

struct SaturationResult {
  EGraph graph;
  int root = -1;
  bool truncated = false;
  int iterations = 0;
  int rewrites = 0;
};

SaturationResult saturate(const RTerm &t, const SaturationConfig &cfg = {});

/// Minimal-cost term of a class. Ties: fewer sequence children, then the
/// lexicographically smallest term.
RTerm extract_best(const EGraph &g, int root);

/// Turn ranged Ops into loops `L<k>: for (i<k> = 0; i<k> < n; ++i<k>)` whose
/// holes are affine in the loop variable. `base` supplies the signature and
/// arrays; its body is replaced.
StructuredProgram lower_to_loops(const RTerm &t, const Abstraction &a, const Program &base);

nlohmann::json egraph_summary(const SaturationResult &r, const RTerm &extracted);

}  // namespace rollhls
