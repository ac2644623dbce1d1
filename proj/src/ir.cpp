#include "rollhls/ir.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "rollhls/ir_json.hpp"

namespace rollhls {

bool ScalarType::valid_width(int bits) {
  return bits == 1 || bits == 8 || bits == 32 || bits == 64 || bits == 128;
}

u128 ScalarType::mask() const {
  if (bits >= 128) return ~u128{0};
  return (u128{1} << bits) - 1;
}

const char *op_name(Op op) {
  switch (op) {
    case Op::Const: return "const";
    case Op::Local: return "local";
    case Op::Scalar: return "scalar";
    case Op::LoopVar: return "loopvar";
    case Op::Load: return "load";
    case Op::Hole: return "hole";
    case Op::Not: return "not";
    case Op::Trunc: return "trunc";
    case Op::ZExt: return "zext";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Shl: return "shl";
    case Op::Shr: return "shr";
    case Op::And: return "and";
    case Op::Or: return "or";
    case Op::Xor: return "xor";
    case Op::AddCarry: return "addcarry";
    case Op::SubBorrow: return "subborrow";
    case Op::MulWide: return "mulwide";
    case Op::CmovNZ: return "cmovznz";
  }
  return "?";
}

bool is_commutative(Op op) {
  return op == Op::Add || op == Op::Mul || op == Op::And || op == Op::Or || op == Op::Xor;
}

bool is_binary(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Shl:
    case Op::Shr:
    case Op::And:
    case Op::Or:
    case Op::Xor: return true;
    default: return false;
  }
}

bool is_builtin(Op op) {
  return op == Op::AddCarry || op == Op::SubBorrow || op == Op::MulWide || op == Op::CmovNZ;
}

int result_count(Op op) {
  return (op == Op::AddCarry || op == Op::SubBorrow || op == Op::MulWide) ? 2 : 1;
}

Expr Expr::constant(u128 v, int width) {
  Expr e;
  e.op = Op::Const;
  e.value = v;
  e.width = width;
  return e;
}

Expr Expr::local(std::string name, int width) {
  Expr e;
  e.op = Op::Local;
  e.name = std::move(name);
  e.width = width;
  return e;
}

Expr Expr::scalar(std::string name, int width) {
  Expr e;
  e.op = Op::Scalar;
  e.name = std::move(name);
  e.width = width;
  return e;
}

Expr Expr::loop_var(std::string name, int width) {
  Expr e;
  e.op = Op::LoopVar;
  e.name = std::move(name);
  e.width = width;
  return e;
}

Expr Expr::load(std::string array, Expr index, int width) {
  Expr e;
  e.op = Op::Load;
  e.name = std::move(array);
  e.width = width;
  e.args.push_back(std::move(index));
  return e;
}

Expr Expr::hole(int id, int width) {
  Expr e;
  e.op = Op::Hole;
  e.value = static_cast<u128>(id);
  e.width = width;
  return e;
}

Expr Expr::unary(Op op, Expr a, int width) {
  Expr e;
  e.op = op;
  e.width = width;
  e.args.push_back(std::move(a));
  return e;
}

Expr Expr::binary(Op op, Expr a, Expr b) {
  Expr e;
  e.op = op;
  e.width = a.width ? a.width : b.width;
  e.args.push_back(std::move(a));
  e.args.push_back(std::move(b));
  return e;
}

Expr Expr::shift(Op op, Expr value, Expr amount) {
  Expr e;
  e.op = op;
  e.width = value.width;
  e.args.push_back(std::move(value));
  e.args.push_back(std::move(amount));
  return e;
}

Expr Expr::call(Op op, std::vector<Expr> args, int width) {
  Expr e;
  e.op = op;
  e.width = width;
  e.args = std::move(args);
  return e;
}

std::vector<int> result_widths(const Expr &e) {
  switch (e.op) {
    case Op::AddCarry:
    case Op::SubBorrow: return {e.width, 1};
    case Op::MulWide: return {e.width, e.width};
    default: return {e.width};
  }
}

LValue LValue::local(std::string name, int width) {
  LValue lv;
  lv.kind = Kind::Local;
  lv.name = std::move(name);
  lv.width = width;
  return lv;
}

LValue LValue::element(std::string array, Expr index, int width) {
  LValue lv;
  lv.kind = Kind::Element;
  lv.name = std::move(array);
  lv.index = std::move(index);
  lv.width = width;
  return lv;
}

int64_t Loop::trip_count() const {
  if (stop.is_param()) throw IrError("trip count of variable-bound loop " + label);
  const int64_t end = stop.constant;
  if (step > 0) return end > start ? (end - start + step - 1) / step : 0;
  if (step < 0) return start > end ? (start - end + (-step) - 1) / (-step) : 0;
  throw IrError("zero loop step in " + label);
}

const Param *Kernel::find_param(const std::string &n) const {
  for (const auto &p : params)
    if (p.name == n) return &p;
  return nullptr;
}

const LocalVar *Kernel::find_local(const std::string &n) const {
  for (const auto &l : locals)
    if (l.name == n) return &l;
  return nullptr;
}

const LocalArray *Kernel::find_array(const std::string &n) const {
  for (const auto &a : arrays)
    if (a.name == n) return &a;
  return nullptr;
}

const Function *Kernel::find_function(const std::string &n) const {
  for (const auto &f : functions)
    if (f.name == n) return &f;
  return nullptr;
}

std::optional<std::pair<ScalarType, int64_t>> Kernel::array_shape(const std::string &n) const {
  if (const auto *p = find_param(n); p && p->is_array()) return std::make_pair(p->type, p->length);
  if (const auto *a = find_array(n)) return std::make_pair(a->elem, a->length);
  return std::nullopt;
}

bool Kernel::has_name(const std::string &n) const {
  return find_param(n) || find_local(n) || find_array(n) || find_function(n);
}

Loop *find_loop(std::vector<Node> &body, const std::string &label) {
  for (auto &n : body) {
    if (n.is_loop()) {
      if (n.loop().label == label) return &n.loop();
      if (auto *l = find_loop(n.loop().body, label)) return l;
    } else if (n.is_guard()) {
      if (auto *l = find_loop(n.guard().body, label)) return l;
    }
  }
  return nullptr;
}

const Loop *find_loop(const std::vector<Node> &body, const std::string &label) {
  return find_loop(const_cast<std::vector<Node> &>(body), label);
}

std::vector<std::string> loop_labels(const Kernel &k) {
  std::vector<std::string> out;
  for_each_loop(k.body, [&](const Loop &l, int) { out.push_back(l.label); });
  return out;
}

size_t statement_count(const Kernel &k) {
  size_t n = 0;
  for_each_statement(k.body, [&](const Statement &) { ++n; });
  return n;
}

size_t loop_count(const Kernel &k) {
  size_t n = 0;
  for_each_loop(k.body, [&](const Loop &, int) { ++n; });
  return n;
}

static void substitute_in_index(Expr &e, const std::string &var, const Expr &replacement);

void substitute_loop_var(Expr &e, const std::string &var, const Expr &replacement) {
  if (e.op == Op::LoopVar && e.name == var) {
    const int w = e.width;
    e = replacement;
    if (w != 0) {
      // Data context: the replacement is an index expression; give it the
      // width of the use site.
      if (auto v = fold_index(e)) {
        e = Expr::constant(static_cast<u128>(*v) & ScalarType{w}.mask(), w);
      } else {
        std::function<void(Expr &)> widen = [&](Expr &x) {
          if (x.op == Op::Const || x.op == Op::LoopVar) {
            x.width = w;
            if (x.op == Op::Const) x.value &= ScalarType{w}.mask();
            return;
          }
          if (x.op == Op::Shl || x.op == Op::Shr) {
            widen(x.args[0]);
            x.width = w;
            return;
          }
          for (auto &a : x.args) widen(a);
          x.width = w;
        };
        widen(e);
      }
    }
    return;
  }
  if (e.op == Op::Load) {
    substitute_in_index(e.args[0], var, replacement);
    return;
  }
  if (e.op == Op::Shl || e.op == Op::Shr) {
    substitute_loop_var(e.args[0], var, replacement);
    substitute_in_index(e.args[1], var, replacement);
    return;
  }
  for (auto &a : e.args) substitute_loop_var(a, var, replacement);
}

static void substitute_in_index(Expr &e, const std::string &var, const Expr &replacement) {
  if (e.op == Op::LoopVar && e.name == var) {
    e = replacement;
    return;
  }
  for (auto &a : e.args) substitute_in_index(a, var, replacement);
}

void substitute_loop_var(std::vector<Node> &body, const std::string &var, const Expr &replacement) {
  for (auto &n : body) {
    if (n.is_statement()) {
      auto &s = n.stmt();
      for (auto &t : s.targets)
        if (t.kind == LValue::Kind::Element) substitute_in_index(t.index, var, replacement);
      substitute_loop_var(s.rhs, var, replacement);
    } else if (n.is_loop()) {
      substitute_loop_var(n.loop().body, var, replacement);
    } else if (n.is_guard()) {
      substitute_loop_var(n.guard().body, var, replacement);
    }
  }
}

std::optional<int64_t> fold_index(const Expr &e) {
  switch (e.op) {
    case Op::Const: return static_cast<int64_t>(e.value);
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::And:
    case Op::Or:
    case Op::Xor:
    case Op::Shl:
    case Op::Shr: {
      auto a = fold_index(e.args[0]);
      auto b = fold_index(e.args[1]);
      if (!a || !b) return std::nullopt;
      switch (e.op) {
        case Op::Add: return *a + *b;
        case Op::Sub: return *a - *b;
        case Op::Mul: return *a * *b;
        case Op::And: return *a & *b;
        case Op::Or: return *a | *b;
        case Op::Xor: return *a ^ *b;
        case Op::Shl: return *a << *b;
        default: return *a >> *b;
      }
    }
    default: return std::nullopt;
  }
}

static void fold_index_in_place(Expr &e) {
  if (auto v = fold_index(e); v && e.op != Op::Const) e = Expr::constant(static_cast<u128>(*v), 0);
}

static void fold_expr_indices(Expr &e) {
  if (e.op == Op::Load) fold_index_in_place(e.args[0]);
  if (e.op == Op::Shl || e.op == Op::Shr) fold_index_in_place(e.args[1]);
  for (auto &a : e.args) fold_expr_indices(a);
}

void fold_indices(std::vector<Node> &body) {
  for (auto &n : body) {
    if (n.is_statement()) {
      for (auto &t : n.stmt().targets)
        if (t.kind == LValue::Kind::Element) fold_index_in_place(t.index);
      fold_expr_indices(n.stmt().rhs);
    } else if (n.is_loop()) {
      fold_indices(n.loop().body);
    } else if (n.is_guard()) {
      fold_indices(n.guard().body);
    }
  }
}

int64_t AffineIndex::coeff(const std::string &var) const {
  for (const auto &[n, c] : terms)
    if (n == var) return c;
  return 0;
}

std::optional<AffineIndex> as_affine(const Expr &index) {
  switch (index.op) {
    case Op::Const: {
      AffineIndex a;
      a.constant = static_cast<int64_t>(index.value);
      return a;
    }
    case Op::LoopVar: {
      AffineIndex a;
      a.terms.emplace_back(index.name, 1);
      return a;
    }
    case Op::Add:
    case Op::Sub: {
      auto l = as_affine(index.args[0]);
      auto r = as_affine(index.args[1]);
      if (!l || !r) return std::nullopt;
      const int64_t sign = index.op == Op::Add ? 1 : -1;
      std::map<std::string, int64_t> acc;
      for (const auto &[n, c] : l->terms) acc[n] += c;
      for (const auto &[n, c] : r->terms) acc[n] += sign * c;
      AffineIndex out;
      out.constant = l->constant + sign * r->constant;
      for (const auto &[n, c] : acc)
        if (c != 0) out.terms.emplace_back(n, c);
      return out;
    }
    case Op::Mul: {
      auto l = as_affine(index.args[0]);
      auto r = as_affine(index.args[1]);
      if (!l || !r) return std::nullopt;
      if (!l->terms.empty() && !r->terms.empty()) return std::nullopt;
      const AffineIndex &var_side = l->terms.empty() ? *r : *l;
      const int64_t k = l->terms.empty() ? l->constant : r->constant;
      AffineIndex out;
      out.constant = var_side.constant * k;
      for (const auto &[n, c] : var_side.terms)
        if (c * k != 0) out.terms.emplace_back(n, c * k);
      return out;
    }
    case Op::Shl: {
      auto l = as_affine(index.args[0]);
      auto r = fold_index(index.args[1]);
      if (!l || !r || *r < 0 || *r > 62) return std::nullopt;
      const int64_t k = int64_t{1} << *r;
      AffineIndex out;
      out.constant = l->constant * k;
      for (const auto &[n, c] : l->terms) out.terms.emplace_back(n, c * k);
      return out;
    }
    default: return std::nullopt;
  }
}

Expr affine_expr(int64_t start, int64_t step, const std::string &var, int width) {
  auto c = [&](int64_t v) {
    u128 raw = static_cast<u128>(static_cast<__int128>(v));
    if (width) raw &= ScalarType{width}.mask();
    return Expr::constant(raw, width);
  };
  const int64_t mag = step < 0 ? -step : step;
  Expr scaled = mag == 1 ? Expr::loop_var(var, width) : Expr::binary(Op::Mul, c(mag), Expr::loop_var(var, width));
  scaled.width = width;
  Expr out;
  if (step == 0) return c(start);
  if (step > 0) {
    if (start == 0) return scaled;
    out = Expr::binary(Op::Add, c(start), std::move(scaled));
  } else {
    out = Expr::binary(Op::Sub, c(start), std::move(scaled));
  }
  out.width = width;
  return out;
}

std::string canonical_form(const Kernel &k) {
  Kernel copy = k;
  std::map<std::string, std::string> rename;
  auto fix_expr = [&](Expr &root) {
    rewrite_expr(root, [&](Expr &e) {
      if (e.op == Op::Local) e.name = rename.at(e.name);
    });
  };
  std::function<void(std::vector<Node> &)> fix = [&](std::vector<Node> &body) {
    for (auto &n : body) {
      if (n.is_statement()) {
        auto &s = n.stmt();
        s.line = 0;
        for (auto &t : s.targets)
          if (t.kind == LValue::Kind::Local) t.name = rename.at(t.name);
        fix_expr(s.rhs);
      } else if (n.is_loop()) {
        n.loop().line = 0;
        fix(n.loop().body);
      } else if (n.is_guard()) {
        n.guard().line = 0;
        fix(n.guard().body);
      } else {
        n.call().line = 0;
      }
    }
  };
  // Locals must be listed in definition order for the rename to be canonical.
  std::vector<std::string> order;
  for_each_statement(k.body, [&](const Statement &s) {
    for (const auto &t : s.targets)
      if (t.kind == LValue::Kind::Local) order.push_back(t.name);
  });
  for (const auto &f : k.functions)
    for_each_statement(f.body, [&](const Statement &s) {
      for (const auto &t : s.targets)
        if (t.kind == LValue::Kind::Local) order.push_back(t.name);
    });
  rename.clear();
  for (size_t i = 0; i < order.size(); ++i) rename.emplace(order[i], "%" + std::to_string(i));
  copy.locals.clear();
  for (const auto &name : order) {
    const LocalVar *lv = k.find_local(name);
    copy.locals.push_back({rename.at(name), lv ? lv->type : ScalarType{}});
  }
  fix(copy.body);
  for (auto &f : copy.functions) fix(f.body);
  return kernel_to_json(copy).dump();
}

bool structurally_equal(const Kernel &a, const Kernel &b) { return canonical_form(a) == canonical_form(b); }

std::string digest_hex(const std::string &text) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char *hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hex[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string to_string_u128(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

std::string to_hex_u128(u128 v) {
  static const char *hex = "0123456789abcdef";
  if (v == 0) return "0x0";
  std::string s;
  while (v) {
    s.push_back(hex[static_cast<int>(v & 0xf)]);
    v >>= 4;
  }
  s += "x0";
  std::reverse(s.begin(), s.end());
  return s;
}

u128 parse_u128(const std::string &text) {
  u128 v = 0;
  size_t i = 0;
  int base = 10;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    base = 16;
    i = 2;
  }
  if (i >= text.size()) throw IrError("bad integer literal '" + text + "'");
  for (; i < text.size(); ++i) {
    const char c = text[i];
    int d;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (base == 16 && c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else if (base == 16 && c >= 'A' && c <= 'F') d = c - 'A' + 10;
    else throw IrError("bad integer literal '" + text + "'");
    const u128 next = v * static_cast<unsigned>(base) + static_cast<unsigned>(d);
    if (next / static_cast<unsigned>(base) != v) throw IrError("integer literal out of range '" + text + "'");
    v = next;
  }
  return v;
}

}  // namespace rollhls
