#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rollhls/ir.hpp"

namespace rollhls {

/// Statement shape whose holes (Op::Hole, numbered in traversal order) stand
/// for constants. Index-context holes have width 0, data holes carry the
/// literal's width.
struct Template {
  int id = 0;
  Statement shape;
  int hole_count = 0;
  std::string key;
};

struct Instance {
  int line_no = 0;  // statement index in the program
  std::vector<int64_t> consts;
};

struct AbstractSequence {
  int template_id = 0;
  std::vector<Instance> instances;
  bool excluded = false;  // kept straight-line by select_targets
};

struct Abstraction {
  std::vector<Template> templates;
  std::vector<AbstractSequence> sequences;
};

/// Sort operands of commutative operators by a structural key (index
/// literals ignored first, then the full tree). No folding.
Expr canonicalize(const Expr &e);
Statement canonicalize(const Statement &s);

/// Group maximal runs of consecutive statements with the same literal-free
/// skeleton. Within a run, array indices and shift amounts always become
/// holes; other literals become holes only when they vary along the run.
Abstraction abstract_program(const Program &p);

/// Fill a template's holes with constants.
Statement instantiate(const Template &t, const std::vector<int64_t> &consts);

/// Visit every literal position of a statement in hole order: targets first,
/// then the right-hand side in preorder. `index_ctx` is true for array
/// subscripts and shift amounts.
void walk_literals(Statement &s, const std::function<void(Expr &lit, bool index_ctx)> &fn);

std::string statement_key(const Statement &s);

nlohmann::json abstraction_to_json(const Abstraction &a);

}  // namespace rollhls
