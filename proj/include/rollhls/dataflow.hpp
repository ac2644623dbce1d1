#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rollhls/ir.hpp"

namespace rollhls {

/// One assigned value: a local, an array element written by a statement, or
/// an input-array element (stmt == -1) read before any write.
struct DefNode {
  std::string name;  // "x0" or "t[3]"
  bool is_local = false;
  int stmt = -1;
  int result = 0;  // which result of a two-result builtin
  ScalarType type;
  int use_count = 0;
};

struct UseEdge {
  int def = 0;
  int stmt = 0;
  int position = 0;  // preorder position among the statement's operand reads
};

struct DDG {
  std::vector<DefNode> defs;
  std::vector<UseEdge> uses;
  std::map<std::string, int> local_def;  // local name -> def index

  int use_count(const std::string &local) const;
  /// Index of the statement holding the last use of a local, or -1.
  int last_use(const std::string &local) const;
};

DDG build_ddg(const Program &p);

/// Locals whose value is read exactly once.
std::set<std::string> single_use_locals(const DDG &g);

struct ArrayAssignment {
  std::map<std::string, std::pair<std::string, int64_t>> groups;  // local -> (array, index)
  std::vector<LocalArray> synthesized;
};

/// Rewrite every local into an element of a per-type synthesized array.
/// Single-use locals reuse slots whose previous occupant is dead, preferring
/// the indices of input elements read by the defining statement.
std::pair<Program, ArrayAssignment> assign_arrays(const Program &p, const DDG &g);

std::string ddg_to_dot(const Program &p, const DDG &g);

}  // namespace rollhls
