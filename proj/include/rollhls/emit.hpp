#pragma once

#include <string>
#include <vector>

#include "rollhls/ir.hpp"
#include "rollhls/pragmas.hpp"

namespace rollhls {

/// Render a kernel as `.slc` text with synthesis directives. Output is
/// deterministic and re-parses to the same structure (locals may be renamed
/// by later canonicalization, never by this function).
/// Throws IrError when a directive names a loop label or array that does not exist.
std::string emit_c(const Kernel &k, const PragmaConfig &pragmas = {});

/// Expression in source syntax; index-context nodes (width 0) print as integers.
std::string expr_to_c(const Expr &e);

/// Result of scanning a program for control flow that could depend on data.
struct BranchScan {
  int data_dependent_branches = 0;
  int variable_bounds = 0;
  std::vector<std::string> findings;

  bool clean() const { return data_dependent_branches == 0 && variable_bounds == 0; }
};

/// AST scan: guards must test an enclosing loop variable and loops must have
/// constant bounds.
BranchScan scan_branches(const Kernel &k);

/// Scan emitted text: re-parse it and run scan_branches, and additionally
/// reject control-flow keywords the input language never produces.
BranchScan scan_emitted(const std::string &text);

}  // namespace rollhls
