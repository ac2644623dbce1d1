#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace rollhls {

using u128 = unsigned __int128;

/// Unsigned fixed-width scalar. Width 1 is reserved for carry/borrow flags.
struct ScalarType {
  int bits = 64;

  static bool valid_width(int bits);
  u128 mask() const;
  std::string name() const { return "u" + std::to_string(bits); }
  bool operator==(const ScalarType &) const = default;
};

enum class Op : uint8_t {
  Const,
  Local,    // read of a scalar local
  Scalar,   // read of a bound parameter
  LoopVar,  // loop variable or outlined-function index parameter
  Load,     // array element read; args = {index}
  Hole,     // template placeholder; value = hole number
  Not,
  Trunc,
  ZExt,
  Add,
  Sub,
  Mul,
  Shl,  // args = {value, amount}; amount is an index expression
  Shr,
  And,
  Or,
  Xor,
  AddCarry,   // args = {carry_in, a, b}; results (sum, carry)
  SubBorrow,  // args = {borrow_in, a, b}; results (diff, borrow)
  MulWide,    // args = {a, b}; results (high, low)
  CmovNZ,     // args = {flag, a, b}; b if flag != 0 else a
};

const char *op_name(Op op);
bool is_commutative(Op op);
bool is_binary(Op op);
bool is_builtin(Op op);
/// Number of values produced by an expression rooted at `op`.
int result_count(Op op);

/// Expression tree. Data expressions carry an explicit result width; index
/// expressions (array subscripts, shift amounts) use width 0 and integer
/// semantics.
struct Expr {
  Op op = Op::Const;
  int width = 0;
  u128 value = 0;
  std::string name;
  std::vector<Expr> args;

  bool operator==(const Expr &) const = default;

  static Expr constant(u128 v, int width = 0);
  static Expr local(std::string name, int width);
  static Expr scalar(std::string name, int width);
  static Expr loop_var(std::string name, int width = 0);
  static Expr load(std::string array, Expr index, int width);
  static Expr hole(int id, int width = 0);
  static Expr unary(Op op, Expr a, int width);
  static Expr binary(Op op, Expr a, Expr b);
  static Expr shift(Op op, Expr value, Expr amount);
  static Expr call(Op op, std::vector<Expr> args, int width);

  bool is_const() const { return op == Op::Const; }
};

/// Widths of every value an expression produces (two entries for the
/// two-result builtins).
std::vector<int> result_widths(const Expr &e);

struct LValue {
  enum class Kind : uint8_t { Local, Element };
  Kind kind = Kind::Local;
  std::string name;
  Expr index;  // Element only
  int width = 0;

  bool operator==(const LValue &) const = default;

  static LValue local(std::string name, int width);
  static LValue element(std::string array, Expr index, int width);
};

struct Statement {
  std::vector<LValue> targets;
  Expr rhs;
  int line = 0;
};

struct Node;

struct LoopBound {
  int64_t constant = 0;
  std::string param;  // non-empty: bound by a scalar parameter

  bool is_param() const { return !param.empty(); }
};

struct Loop {
  std::string label;
  std::string var;
  int64_t start = 0;
  LoopBound stop;
  int64_t step = 1;
  std::vector<Node> body;
  int line = 0;

  bool constant_bounds() const { return !stop.is_param(); }
  /// Iteration count for constant bounds.
  int64_t trip_count() const;
  int64_t value_at(int64_t iteration) const { return start + iteration * step; }
};

enum class GuardCmp : uint8_t { Lt, Eq };

/// Conditional on a loop variable compared against a compile-time constant.
/// Never depends on runtime data.
struct Guard {
  std::string var;
  GuardCmp cmp = GuardCmp::Lt;
  int64_t value = 0;
  std::vector<Node> body;
  int line = 0;
};

struct CallSite {
  std::string callee;
  std::vector<int64_t> args;
  int line = 0;
};

struct Node {
  std::variant<Statement, Loop, Guard, CallSite> v;

  bool is_statement() const { return std::holds_alternative<Statement>(v); }
  bool is_loop() const { return std::holds_alternative<Loop>(v); }
  bool is_guard() const { return std::holds_alternative<Guard>(v); }
  bool is_call() const { return std::holds_alternative<CallSite>(v); }
  Statement &stmt() { return std::get<Statement>(v); }
  const Statement &stmt() const { return std::get<Statement>(v); }
  Loop &loop() { return std::get<Loop>(v); }
  const Loop &loop() const { return std::get<Loop>(v); }
  Guard &guard() { return std::get<Guard>(v); }
  const Guard &guard() const { return std::get<Guard>(v); }
  CallSite &call() { return std::get<CallSite>(v); }
  const CallSite &call() const { return std::get<CallSite>(v); }
};

/// Outlined reusable body. Index parameters behave like loop variables.
struct Function {
  std::string name;
  std::vector<std::string> index_params;
  std::vector<Node> body;
};

enum class ParamKind : uint8_t { InArray, OutArray, Bound };

struct Param {
  std::string name;
  ParamKind kind = ParamKind::InArray;
  ScalarType type;
  int64_t length = 1;              // arrays
  std::optional<int64_t> max;      // bound scalars: declared maximum

  bool is_array() const { return kind != ParamKind::Bound; }
  bool operator==(const Param &) const = default;
};

struct LocalVar {
  std::string name;
  ScalarType type;
  bool operator==(const LocalVar &) const = default;
};

struct LocalArray {
  std::string name;
  ScalarType elem;
  int64_t length = 1;
  bool operator==(const LocalArray &) const = default;
};

/// A kernel: one function over array parameters. Straight-line programs are
/// kernels whose body holds statements only; structured programs may also
/// contain loops, guards and calls to outlined functions.
struct Kernel {
  std::string name;
  std::vector<Param> params;
  std::vector<LocalVar> locals;
  std::vector<LocalArray> arrays;
  std::vector<Function> functions;
  std::vector<Node> body;

  const Param *find_param(const std::string &n) const;
  const LocalVar *find_local(const std::string &n) const;
  const LocalArray *find_array(const std::string &n) const;
  const Function *find_function(const std::string &n) const;
  /// Element type and length of any array (parameter or local); nullopt if unknown.
  std::optional<std::pair<ScalarType, int64_t>> array_shape(const std::string &n) const;
  bool has_name(const std::string &n) const;
};

using Program = Kernel;
using StructuredProgram = Kernel;

struct IrError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- traversal helpers ------------------------------------------------------

/// Visit every statement, descending into loops, guards (not function bodies).
template <typename Fn> void for_each_statement(const std::vector<Node> &body, Fn &&fn) {
  for (const auto &n : body) {
    if (n.is_statement()) fn(n.stmt());
    else if (n.is_loop()) for_each_statement(n.loop().body, fn);
    else if (n.is_guard()) for_each_statement(n.guard().body, fn);
  }
}

template <typename Fn> void for_each_statement(std::vector<Node> &body, Fn &&fn) {
  for (auto &n : body) {
    if (n.is_statement()) fn(n.stmt());
    else if (n.is_loop()) for_each_statement(n.loop().body, fn);
    else if (n.is_guard()) for_each_statement(n.guard().body, fn);
  }
}

template <typename Fn> void for_each_loop(const std::vector<Node> &body, Fn &&fn, int depth = 1) {
  for (const auto &n : body) {
    if (n.is_loop()) {
      fn(n.loop(), depth);
      for_each_loop(n.loop().body, fn, depth + 1);
    } else if (n.is_guard()) {
      for_each_loop(n.guard().body, fn, depth);
    }
  }
}

/// Pre-order expression visitor.
template <typename Fn> void visit_expr(const Expr &e, Fn &&fn) {
  fn(e);
  for (const auto &a : e.args) visit_expr(a, fn);
}

template <typename Fn> void rewrite_expr(Expr &e, Fn &&fn) {
  for (auto &a : e.args) rewrite_expr(a, fn);
  fn(e);
}

Loop *find_loop(std::vector<Node> &body, const std::string &label);
const Loop *find_loop(const std::vector<Node> &body, const std::string &label);
std::vector<std::string> loop_labels(const Kernel &k);
size_t statement_count(const Kernel &k);
size_t loop_count(const Kernel &k);

/// Replace every LoopVar named `var` (index and data contexts) by `replacement`.
/// Data-context occurrences receive the replacement truncated to their width.
void substitute_loop_var(std::vector<Node> &body, const std::string &var, const Expr &replacement);
void substitute_loop_var(Expr &e, const std::string &var, const Expr &replacement);

/// Evaluate a closed index expression (no free loop variables).
std::optional<int64_t> fold_index(const Expr &e);
/// Fold constant subexpressions of index contexts throughout a body.
void fold_indices(std::vector<Node> &body);

/// Affine form c0 + sum(coeff * var) of an index expression, if it is affine.
struct AffineIndex {
  int64_t constant = 0;
  std::vector<std::pair<std::string, int64_t>> terms;  // sorted by name, nonzero coeffs
  int64_t coeff(const std::string &var) const;
};
std::optional<AffineIndex> as_affine(const Expr &index);

/// Index expression `start + step * var` in canonical printed form.
Expr affine_expr(int64_t start, int64_t step, const std::string &var, int width = 0);

/// Canonical text used for structural comparison: locals renamed in
/// definition order, source lines omitted.
std::string canonical_form(const Kernel &k);
bool structurally_equal(const Kernel &a, const Kernel &b);

/// FNV-1a 64-bit digest, hex encoded.
std::string digest_hex(const std::string &text);

std::string to_string_u128(u128 v);
std::string to_hex_u128(u128 v);
u128 parse_u128(const std::string &text);

}  // namespace rollhls
