#pragma once

#include <string>
#include <vector>

#include "rollhls/ir.hpp"
#include "rollhls/pragmas.hpp"

namespace rollhls {

/// Syntax or semantic error with a 1-based source position (0 when the
/// error comes from a programmatically built kernel).
struct ParseError : IrError {
  int line = 0;
  int column = 0;
  ParseError(const std::string &msg, int line, int column);
};

struct ParsedSource {
  Kernel kernel;
  PragmaConfig pragmas;
};

/// Parse `.slc` text. Loops, guards and calls are accepted; see
/// parse_program for the straight-line entry point.
ParsedSource parse_source(const std::string &text);
Kernel parse_kernel(const std::string &text);

/// Parse and require straight-line form (no loops, branches or calls).
Program parse_program(const std::string &text);

/// Load a kernel from `.slc` or `.json` (IR schema) by file extension.
ParsedSource load_kernel_file(const std::string &path);

/// Semantic checks shared by the parser and JSON loader: names resolve,
/// widths agree, single assignment, use after definition, loop-variable
/// scoping, constant indices in range. Throws ParseError.
void check_kernel(const Kernel &k);

struct Violation {
  std::string message;
  int line = 0;
};

/// Diagnostics for anything that is not straight-line: loops, branches,
/// calls to non-builtin functions. Empty iff straight-line.
std::vector<Violation> validate_straight_line(const Kernel &k);

}  // namespace rollhls
