#include "rollhls/parser.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rollhls/ir_json.hpp"

namespace rollhls {

ParseError::ParseError(const std::string &msg, int l, int c)
    : IrError(l > 0 ? "line " + std::to_string(l) + ":" + std::to_string(c) + ": " + msg : msg), line(l), column(c) {}

namespace {

// ---- lexer ------------------------------------------------------------------

enum class Tok { End, Ident, Int, Punct, Pragma };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 0;
  int col = 0;
};

std::vector<Token> lex(const std::string &src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      const int l0 = line, c0 = col;
      advance(2);
      while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) advance(1);
      if (i + 1 >= src.size()) throw ParseError("unterminated comment", l0, c0);
      advance(2);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (c == '#') {
      size_t j = i;
      while (j < src.size() && src[j] != '\n') ++j;
      t.kind = Tok::Pragma;
      t.text = src.substr(i, j - i);
      while (!t.text.empty() && std::isspace(static_cast<unsigned char>(t.text.back()))) t.text.pop_back();
      advance(j - i);
      out.push_back(t);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Tok::Ident;
      t.text = src.substr(i, j - i);
      advance(j - i);
      out.push_back(t);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      if (c == '0' && j + 1 < src.size() && (src[j + 1] == 'x' || src[j + 1] == 'X')) j += 2;
      while (j < src.size() && std::isxdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Tok::Int;
      t.text = src.substr(i, j - i);
      // Accept and ignore C integer suffixes.
      while (j < src.size() && (src[j] == 'u' || src[j] == 'U' || src[j] == 'l' || src[j] == 'L')) ++j;
      advance(j - i);
      out.push_back(t);
      continue;
    }
    static const char *two[] = {"<<", ">>", "<=", "==", "+=", "-=", "!="};
    t.kind = Tok::Punct;
    bool matched = false;
    for (const char *p : two) {
      if (src.compare(i, 2, p) == 0) {
        t.text = p;
        advance(2);
        matched = true;
        break;
      }
    }
    if (!matched) {
      if (std::string("()[]{},;=+-*&|^~<>:").find(c) == std::string::npos)
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
      t.text = std::string(1, c);
      advance(1);
    }
    out.push_back(t);
  }
  Token end;
  end.kind = Tok::End;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

int type_width(const std::string &s) {
  if (s == "u1") return 1;
  if (s == "u8") return 8;
  if (s == "u32") return 32;
  if (s == "u64") return 64;
  if (s == "u128") return 128;
  return 0;
}

struct BuiltinName {
  Op op;
  int width;
};

std::optional<BuiltinName> builtin_name(const std::string &s) {
  static const std::pair<const char *, Op> prefixes[] = {
      {"addcarry_u", Op::AddCarry}, {"subborrow_u", Op::SubBorrow}, {"mulwide_u", Op::MulWide}, {"cmovznz_u", Op::CmovNZ}};
  for (const auto &[p, op] : prefixes) {
    const std::string pre(p);
    if (s.rfind(pre, 0) == 0) {
      const int w = type_width("u" + s.substr(pre.size()));
      if (w > 1) return BuiltinName{op, w};
    }
  }
  return std::nullopt;
}

// ---- width inference ----------------------------------------------------------

int natural_width(const Expr &e) {
  switch (e.op) {
    case Op::Not: return natural_width(e.args[0]);
    case Op::Shl:
    case Op::Shr: return natural_width(e.args[0]);
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::And:
    case Op::Or:
    case Op::Xor: {
      const int a = natural_width(e.args[0]);
      return a ? a : natural_width(e.args[1]);
    }
    default: return e.width;
  }
}

std::string wname(int w) { return w ? "u" + std::to_string(w) : "<literal>"; }

// ---- parser -------------------------------------------------------------------

class Parser {
 public:
  explicit Parser(const std::string &text) : toks_(lex(text)) {}

  ParsedSource run() {
    parse_kernel_header();
    expect("{");
    kernel_.body = parse_block_items(/*top=*/true);
    expect("}");
    while (peek_is("static")) parse_function();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "' after kernel");
    ParsedSource out{std::move(kernel_), std::move(pragmas_)};
    out.pragmas.normalize();
    check_kernel(out.kernel);
    for (const auto &[label, _] : out.pragmas.loops)
      if (!find_loop(out.kernel.body, label)) fail("directive for unknown loop " + label);
    return out;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  Kernel kernel_;
  PragmaConfig pragmas_;
  std::vector<std::string> index_vars_;
  std::vector<std::string> loop_labels_;
  std::map<std::string, int> local_types_;

  const Token &peek(size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  bool peek_is(const std::string &s, size_t ahead = 0) const {
    const Token &t = peek(ahead);
    return (t.kind == Tok::Punct || t.kind == Tok::Ident) && t.text == s;
  }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  [[noreturn]] void fail(const std::string &msg) const { throw ParseError(msg, peek().line, peek().col); }
  [[noreturn]] void fail_at(const Token &t, const std::string &msg) const { throw ParseError(msg, t.line, t.col); }
  void expect(const std::string &s) {
    if (!peek_is(s)) fail("expected '" + s + "' but found '" + peek().text + "'");
    next();
  }
  std::string ident() {
    if (peek().kind != Tok::Ident) fail("expected identifier but found '" + peek().text + "'");
    return next().text;
  }
  int64_t signed_int() {
    bool neg = false;
    if (peek_is("-")) {
      next();
      neg = true;
    }
    if (peek().kind != Tok::Int) fail("expected integer but found '" + peek().text + "'");
    const u128 v = parse_u128(next().text);
    if (v > static_cast<u128>(INT64_MAX)) fail("integer out of range");
    return neg ? -static_cast<int64_t>(v) : static_cast<int64_t>(v);
  }
  bool is_type(const Token &t) const { return t.kind == Tok::Ident && type_width(t.text) != 0; }
  int type() {
    const Token t = next();
    const int w = type_width(t.text);
    if (!w) fail_at(t, "expected type but found '" + t.text + "'");
    return w;
  }
  bool is_index_var(const std::string &n) const {
    for (const auto &v : index_vars_)
      if (v == n) return true;
    return false;
  }

  void parse_kernel_header() {
    if (!peek_is("void")) fail("expected 'void' kernel definition");
    next();
    kernel_.name = ident();
    expect("(");
    if (!peek_is(")")) {
      do {
        Param p;
        bool is_const = false;
        if (peek_is("const")) {
          next();
          is_const = true;
        }
        p.type = ScalarType{type()};
        const Token name_tok = peek();
        p.name = ident();
        if (kernel_.has_name(p.name)) fail_at(name_tok, "duplicate parameter " + p.name);
        if (peek_is("[")) {
          next();
          p.length = signed_int();
          expect("]");
          p.kind = is_const ? ParamKind::InArray : ParamKind::OutArray;
        } else {
          p.kind = ParamKind::Bound;
          p.length = 1;
          if (peek_is("<=")) {
            next();
            p.max = signed_int();
          }
        }
        kernel_.params.push_back(p);
      } while (peek_is(",") && (next(), true));
    }
    expect(")");
  }

  void parse_function() {
    next();  // static
    expect("void");
    Function f;
    f.name = ident();
    if (kernel_.find_function(f.name)) fail("duplicate function " + f.name);
    expect("(");
    if (!peek_is(")")) {
      do {
        if (!peek_is("u32")) fail("function parameters must be u32 indices");
        next();
        f.index_params.push_back(ident());
      } while (peek_is(",") && (next(), true));
    }
    expect(")");
    expect("{");
    index_vars_ = f.index_params;
    f.body = parse_block_items(false);
    index_vars_.clear();
    expect("}");
    kernel_.functions.push_back(std::move(f));
  }

  std::vector<Node> parse_block_items(bool top) {
    std::vector<Node> out;
    while (!peek_is("}") && peek().kind != Tok::End) {
      if (peek().kind == Tok::Pragma) {
        parse_pragma(top);
        continue;
      }
      if (auto n = parse_item()) out.push_back(std::move(*n));
    }
    return out;
  }

  void parse_pragma(bool top) {
    const Token t = next();
    std::istringstream is(t.text);
    std::string hash, hls, kind;
    is >> hash >> hls >> kind;
    if (hash != "#pragma" || hls != "HLS") return;  // other preprocessor lines are ignored
    std::map<std::string, std::string> kv;
    std::vector<std::string> words;
    std::string w;
    while (is >> w) {
      auto eq = w.find('=');
      if (eq == std::string::npos) words.push_back(w);
      else kv[w.substr(0, eq)] = w.substr(eq + 1);
    }
    auto num = [&](const std::string &key) {
      auto it = kv.find(key);
      if (it == kv.end()) fail_at(t, "directive missing " + key);
      return static_cast<int>(parse_u128(it->second));
    };
    if (kind == "pipeline" || kind == "unroll") {
      if (loop_labels_.empty() || loop_labels_.back().empty()) fail_at(t, kind + " directive outside a labeled loop");
      auto &d = pragmas_.loops[loop_labels_.back()];
      if (kind == "pipeline") d.pipeline_ii = num("II");
      else d.unroll = num("factor");
    } else if (kind == "array_partition") {
      const std::string var = kv["variable"];
      if (!kernel_.array_shape(var)) fail_at(t, "directive for unknown array " + var);
      pragmas_.partition[var] = num("factor");
    } else if (kind == "dependence") {
      const std::string var = kv["variable"];
      if (!kernel_.array_shape(var)) fail_at(t, "directive for unknown array " + var);
      pragmas_.dependence_false.insert(var);
    } else {
      fail_at(t, "unsupported directive " + kind);
    }
    (void)top;
  }

  std::optional<Node> parse_item() {
    const Token start = peek();
    if (peek_is("for") || (peek().kind == Tok::Ident && peek_is(":", 1))) return parse_loop();
    if (peek_is("if")) return parse_guard();
    if (peek_is("(")) return parse_tuple_assign();
    if (is_type(peek())) {
      // declaration forms
      const int w = type();
      const Token name_tok = peek();
      const std::string name = ident();
      if (peek_is("[")) {
        next();
        const int64_t len = signed_int();
        expect("]");
        expect(";");
        if (kernel_.has_name(name)) fail_at(name_tok, "redeclaration of " + name);
        kernel_.arrays.push_back({name, ScalarType{w}, len});
        return std::nullopt;
      }
      declare_local(name_tok, name, w);
      if (peek_is(";")) {
        next();
        return std::nullopt;
      }
      expect("=");
      Statement s;
      s.line = start.line;
      s.targets.push_back(LValue::local(name, w));
      s.rhs = parse_rhs(w);
      expect(";");
      check_single(s, start);
      return Node{std::move(s)};
    }
    if (peek().kind == Tok::Ident && peek_is("(", 1) && !builtin_name(peek().text)) {
      CallSite c;
      c.line = start.line;
      c.callee = ident();
      expect("(");
      if (!peek_is(")")) {
        do c.args.push_back(signed_int());
        while (peek_is(",") && (next(), true));
      }
      expect(")");
      expect(";");
      return Node{std::move(c)};
    }
    Statement s;
    s.line = start.line;
    s.targets.push_back(parse_target(/*allow_decl=*/false));
    expect("=");
    s.rhs = parse_rhs(s.targets[0].width);
    expect(";");
    check_single(s, start);
    return Node{std::move(s)};
  }

  void declare_local(const Token &at, const std::string &name, int w) {
    if (local_types_.count(name)) fail_at(at, "reassignment of " + name);
    if (kernel_.has_name(name) || is_index_var(name)) fail_at(at, "redeclaration of " + name);
    local_types_[name] = w;
    kernel_.locals.push_back({name, ScalarType{w}});
  }

  void check_single(const Statement &s, const Token &at) {
    if (result_count(s.rhs.op) != 1) fail_at(at, std::string(op_name(s.rhs.op)) + " produces two results; use a tuple assignment");
  }

  LValue parse_target(bool allow_decl) {
    const Token t = peek();
    if (allow_decl && is_type(t)) {
      const int w = type();
      const Token name_tok = peek();
      const std::string name = ident();
      declare_local(name_tok, name, w);
      return LValue::local(name, w);
    }
    const std::string name = ident();
    if (peek_is("[")) {
      next();
      Expr idx = parse_index();
      expect("]");
      auto shape = kernel_.array_shape(name);
      if (!shape) fail_at(t, "unknown array " + name);
      return LValue::element(name, std::move(idx), shape->first.bits);
    }
    auto it = local_types_.find(name);
    if (it == local_types_.end()) fail_at(t, "assignment to undeclared " + name);
    return LValue::local(name, it->second);
  }

  Node parse_tuple_assign() {
    const Token start = peek();
    expect("(");
    Statement s;
    s.line = start.line;
    s.targets.push_back(parse_target(true));
    expect(",");
    s.targets.push_back(parse_target(true));
    expect(")");
    expect("=");
    s.rhs = parse_rhs(0);
    expect(";");
    if (result_count(s.rhs.op) != 2) fail_at(start, "tuple assignment requires addcarry, subborrow or mulwide");
    return Node{std::move(s)};
  }

  Node parse_loop() {
    Loop l;
    l.line = peek().line;
    if (!peek_is("for")) {
      l.label = ident();
      expect(":");
    }
    expect("for");
    expect("(");
    if (!peek_is("u32")) fail("loop variable must be declared u32");
    next();
    const Token var_tok = peek();
    l.var = ident();
    if (is_index_var(l.var) || kernel_.has_name(l.var) || local_types_.count(l.var))
      fail_at(var_tok, "loop variable " + l.var + " shadows another name");
    expect("=");
    l.start = signed_int();
    expect(";");
    if (ident() != l.var) fail("loop condition must test " + l.var);
    bool descending = false;
    if (peek_is("<")) next();
    else if (peek_is(">")) {
      next();
      descending = true;
    } else fail("expected '<' or '>' in loop condition");
    if (peek().kind == Tok::Ident) {
      const Token b = peek();
      l.stop.param = ident();
      const Param *p = kernel_.find_param(l.stop.param);
      if (!p || p->kind != ParamKind::Bound) fail_at(b, "loop bound " + l.stop.param + " is not a bound parameter");
    } else {
      l.stop.constant = signed_int();
    }
    expect(";");
    if (ident() != l.var) fail("loop increment must update " + l.var);
    if (peek_is("+=")) {
      next();
      l.step = signed_int();
    } else if (peek_is("-=")) {
      next();
      l.step = -signed_int();
    } else {
      fail("expected '+=' or '-=' in loop increment");
    }
    if (l.step == 0 || (l.step < 0) != descending) fail("loop step direction does not match its condition");
    expect(")");
    expect("{");
    index_vars_.push_back(l.var);
    loop_labels_.push_back(l.label);
    l.body = parse_block_items(false);
    loop_labels_.pop_back();
    index_vars_.pop_back();
    expect("}");
    return Node{std::move(l)};
  }

  Node parse_guard() {
    Guard g;
    const Token t = peek();
    g.line = t.line;
    expect("if");
    expect("(");
    const Token v = peek();
    g.var = ident();
    if (!is_index_var(g.var)) fail_at(v, "branch on " + g.var + " which is not a loop variable");
    if (peek_is("<")) {
      next();
      g.cmp = GuardCmp::Lt;
    } else if (peek_is("==")) {
      next();
      g.cmp = GuardCmp::Eq;
    } else {
      fail("expected '<' or '==' in branch condition");
    }
    g.value = signed_int();
    expect(")");
    expect("{");
    g.body = parse_block_items(false);
    expect("}");
    return Node{std::move(g)};
  }

  // ---- data expressions ---------------------------------------------------------

  Expr parse_rhs(int expected) {
    const Token at = peek();
    Expr e = parse_or();
    int want = expected;
    if (is_builtin(e.op)) want = e.width;
    resolve(e, want, at);
    return e;
  }

  Expr parse_or() {
    Expr e = parse_xor();
    while (peek_is("|")) {
      next();
      e = Expr::binary(Op::Or, std::move(e), parse_xor());
      e.width = 0;
    }
    return e;
  }
  Expr parse_xor() {
    Expr e = parse_and();
    while (peek_is("^")) {
      next();
      e = Expr::binary(Op::Xor, std::move(e), parse_and());
      e.width = 0;
    }
    return e;
  }
  Expr parse_and() {
    Expr e = parse_shift();
    while (peek_is("&")) {
      next();
      e = Expr::binary(Op::And, std::move(e), parse_shift());
      e.width = 0;
    }
    return e;
  }
  Expr parse_shift() {
    Expr e = parse_additive();
    while (peek_is("<<") || peek_is(">>")) {
      const Op op = next().text == "<<" ? Op::Shl : Op::Shr;
      Expr amount = parse_index_additive();
      if (auto v = fold_index(amount)) amount = Expr::constant(static_cast<u128>(*v), 0);
      e = Expr::shift(op, std::move(e), std::move(amount));
      e.width = 0;
    }
    return e;
  }
  Expr parse_additive() {
    Expr e = parse_mul();
    while (peek_is("+") || peek_is("-")) {
      const Op op = next().text == "+" ? Op::Add : Op::Sub;
      e = Expr::binary(op, std::move(e), parse_mul());
      e.width = 0;
    }
    return e;
  }
  Expr parse_mul() {
    Expr e = parse_unary();
    while (peek_is("*")) {
      next();
      e = Expr::binary(Op::Mul, std::move(e), parse_unary());
      e.width = 0;
    }
    return e;
  }
  Expr parse_unary() {
    if (peek_is("~")) {
      next();
      Expr inner = parse_unary();
      Expr e = Expr::unary(Op::Not, std::move(inner), 0);
      return e;
    }
    if (peek_is("(") && is_type(peek(1)) && peek_is(")", 2)) {
      next();
      const int w = type();
      expect(")");
      const Token at = peek();
      Expr inner = parse_unary();
      return make_cast(std::move(inner), w, at);
    }
    return parse_primary();
  }

  Expr make_cast(Expr inner, int w, const Token &at) {
    if (inner.op == Op::LoopVar) {
      inner.width = w;
      return inner;
    }
    const int nat = natural_width(inner);
    if (nat == 0) {
      resolve(inner, w, at);
      return inner;
    }
    resolve(inner, nat, at);
    if (nat == w) return inner;
    return Expr::unary(nat > w ? Op::Trunc : Op::ZExt, std::move(inner), w);
  }

  Expr parse_primary() {
    const Token t = peek();
    if (t.kind == Tok::Int) {
      next();
      return Expr::constant(parse_u128(t.text), 0);
    }
    if (peek_is("(")) {
      next();
      Expr e = parse_or();
      expect(")");
      return e;
    }
    if (t.kind != Tok::Ident) fail("expected expression but found '" + t.text + "'");
    next();
    if (auto b = builtin_name(t.text)) {
      expect("(");
      std::vector<Expr> args;
      if (!peek_is(")")) {
        do args.push_back(parse_or());
        while (peek_is(",") && (next(), true));
      }
      expect(")");
      const size_t want = b->op == Op::MulWide ? 2 : 3;
      if (args.size() != want) fail_at(t, t.text + " expects " + std::to_string(want) + " arguments");
      if (b->op == Op::MulWide && b->width > 64) fail_at(t, "mulwide is limited to 64-bit operands");
      return Expr::call(b->op, std::move(args), b->width);
    }
    if (peek_is("(")) fail_at(t, "non-builtin call " + t.text + " in expression");
    if (peek_is("[")) {
      next();
      Expr idx = parse_index();
      expect("]");
      auto shape = kernel_.array_shape(t.text);
      if (!shape) fail_at(t, "unknown array " + t.text);
      return Expr::load(t.text, std::move(idx), shape->first.bits);
    }
    if (is_index_var(t.text)) return Expr::loop_var(t.text, 32);
    if (auto it = local_types_.find(t.text); it != local_types_.end()) return Expr::local(t.text, it->second);
    if (const Param *p = kernel_.find_param(t.text); p && p->kind == ParamKind::Bound)
      return Expr::scalar(t.text, p->type.bits);
    fail_at(t, "use of undeclared " + t.text);
  }

  void resolve(Expr &e, int expected, const Token &at) {
    auto need = [&](Expr &child, int w) {
      resolve(child, w, at);
      if (child.width != w) fail_at(at, "width mismatch: " + wname(child.width) + " vs " + wname(w));
    };
    switch (e.op) {
      case Op::Const:
        if (e.width == 0) {
          if (expected == 0) fail_at(at, "cannot infer literal width");
          e.width = expected;
        }
        if (e.value > ScalarType{e.width}.mask()) fail_at(at, "literal " + to_string_u128(e.value) + " does not fit " + wname(e.width));
        return;
      case Op::Not: {
        const int w = natural_width(e.args[0]) ? natural_width(e.args[0]) : expected;
        need(e.args[0], w);
        e.width = w;
        return;
      }
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::And:
      case Op::Or:
      case Op::Xor: {
        const int w = natural_width(e) ? natural_width(e) : expected;
        need(e.args[0], w);
        need(e.args[1], w);
        e.width = w;
        return;
      }
      case Op::Shl:
      case Op::Shr: {
        const int w = natural_width(e.args[0]) ? natural_width(e.args[0]) : expected;
        need(e.args[0], w);
        e.width = w;
        if (e.args[1].is_const() && e.args[1].value >= static_cast<u128>(w))
          fail_at(at, "shift amount " + to_string_u128(e.args[1].value) + " exceeds width " + wname(w));
        return;
      }
      case Op::AddCarry:
      case Op::SubBorrow:
        need(e.args[0], 1);
        need(e.args[1], e.width);
        need(e.args[2], e.width);
        return;
      case Op::MulWide:
        need(e.args[0], e.width);
        need(e.args[1], e.width);
        return;
      case Op::CmovNZ: {
        const int fw = natural_width(e.args[0]) ? natural_width(e.args[0]) : e.width;
        need(e.args[0], fw);
        need(e.args[1], e.width);
        need(e.args[2], e.width);
        return;
      }
      default: return;
    }
  }

  // ---- index expressions --------------------------------------------------------

  Expr parse_index() {
    Expr e = parse_index_or();
    if (auto v = fold_index(e)) return Expr::constant(static_cast<u128>(*v), 0);
    return e;
  }
  Expr parse_index_or() {
    Expr e = parse_index_xor();
    while (peek_is("|")) {
      next();
      e = Expr::binary(Op::Or, std::move(e), parse_index_xor());
    }
    return e;
  }
  Expr parse_index_xor() {
    Expr e = parse_index_and();
    while (peek_is("^")) {
      next();
      e = Expr::binary(Op::Xor, std::move(e), parse_index_and());
    }
    return e;
  }
  Expr parse_index_and() {
    Expr e = parse_index_shift();
    while (peek_is("&")) {
      next();
      e = Expr::binary(Op::And, std::move(e), parse_index_shift());
    }
    return e;
  }
  Expr parse_index_shift() {
    Expr e = parse_index_additive();
    while (peek_is("<<") || peek_is(">>")) {
      const Op op = next().text == "<<" ? Op::Shl : Op::Shr;
      e = Expr::binary(op, std::move(e), parse_index_additive());
    }
    return e;
  }
  Expr parse_index_additive() {
    Expr e = parse_index_mul();
    while (peek_is("+") || peek_is("-")) {
      const Op op = next().text == "+" ? Op::Add : Op::Sub;
      e = Expr::binary(op, std::move(e), parse_index_mul());
    }
    return e;
  }
  Expr parse_index_mul() {
    Expr e = parse_index_primary();
    while (peek_is("*")) {
      next();
      e = Expr::binary(Op::Mul, std::move(e), parse_index_primary());
    }
    return e;
  }
  Expr parse_index_primary() {
    const Token t = peek();
    if (t.kind == Tok::Int) {
      next();
      const u128 v = parse_u128(t.text);
      if (v > static_cast<u128>(INT64_MAX)) fail_at(t, "index literal out of range");
      return Expr::constant(v, 0);
    }
    if (peek_is("(")) {
      next();
      Expr e = parse_index_or();
      expect(")");
      return e;
    }
    if (t.kind == Tok::Ident) {
      next();
      if (is_index_var(t.text)) return Expr::loop_var(t.text, 0);
      fail_at(t, "non-constant array index " + t.text);
    }
    fail("expected index expression but found '" + t.text + "'");
  }
};

// ---- semantic checks ------------------------------------------------------------

class Checker {
 public:
  explicit Checker(const Kernel &k) : k_(k) {}

  void run() {
    std::set<std::string> names;
    auto unique = [&](const std::string &n, const char *what) {
      if (n.empty()) fail(std::string("empty ") + what + " name");
      if (!names.insert(n).second) fail("duplicate name " + n);
    };
    for (const auto &p : k_.params) {
      unique(p.name, "parameter");
      if (!ScalarType::valid_width(p.type.bits)) fail("invalid type for " + p.name);
      if (p.is_array() && p.length <= 0) fail("array " + p.name + " must have positive length");
      if (p.max && *p.max < 0) fail("negative maximum for " + p.name);
    }
    for (const auto &l : k_.locals) {
      unique(l.name, "local");
      if (!ScalarType::valid_width(l.type.bits)) fail("invalid type for " + l.name);
    }
    for (const auto &a : k_.arrays) {
      unique(a.name, "array");
      if (!ScalarType::valid_width(a.elem.bits) || a.length <= 0) fail("invalid array " + a.name);
    }
    for (const auto &f : k_.functions) unique(f.name, "function");

    scopes_.emplace_back();
    check_body(k_.body);
    scopes_.pop_back();
    for (const auto &f : k_.functions) {
      index_vars_ = f.index_params;
      scopes_.emplace_back();
      check_body(f.body);
      scopes_.pop_back();
      index_vars_.clear();
    }
  }

 private:
  const Kernel &k_;
  std::vector<std::set<std::string>> scopes_;
  std::set<std::string> assigned_;
  std::vector<std::string> index_vars_;
  int line_ = 0;

  [[noreturn]] void fail(const std::string &msg) const { throw ParseError(msg, line_, line_ ? 1 : 0); }

  bool in_scope(const std::string &local) const {
    for (const auto &s : scopes_)
      if (s.count(local)) return true;
    return false;
  }
  bool is_index_var(const std::string &n) const {
    for (const auto &v : index_vars_)
      if (v == n) return true;
    return false;
  }

  void check_body(const std::vector<Node> &body) {
    for (const auto &n : body) {
      if (n.is_statement()) {
        check_statement(n.stmt());
      } else if (n.is_loop()) {
        const Loop &l = n.loop();
        line_ = l.line;
        if (l.var.empty() || is_index_var(l.var) || k_.has_name(l.var)) fail("invalid loop variable " + l.var);
        if (l.step == 0) fail("zero loop step");
        if (l.stop.is_param()) {
          const Param *p = k_.find_param(l.stop.param);
          if (!p || p->kind != ParamKind::Bound) fail("loop bound " + l.stop.param + " is not a bound parameter");
        }
        index_vars_.push_back(l.var);
        scopes_.emplace_back();
        check_body(l.body);
        scopes_.pop_back();
        index_vars_.pop_back();
      } else if (n.is_guard()) {
        const Guard &g = n.guard();
        line_ = g.line;
        if (!is_index_var(g.var)) fail("branch on " + g.var + " which is not a loop variable");
        scopes_.emplace_back();
        check_body(g.body);
        scopes_.pop_back();
      } else {
        const CallSite &c = n.call();
        line_ = c.line;
        if (const Function *f = k_.find_function(c.callee); f && f->index_params.size() != c.args.size())
          fail("call to " + c.callee + " has wrong argument count");
      }
    }
  }

  void check_statement(const Statement &s) {
    line_ = s.line;
    check_expr(s.rhs);
    const auto widths = result_widths(s.rhs);
    if (s.targets.size() != widths.size())
      fail(std::string(op_name(s.rhs.op)) + " produces " + std::to_string(widths.size()) + " result(s)");
    for (size_t i = 0; i < s.targets.size(); ++i) {
      const LValue &t = s.targets[i];
      if (t.width != widths[i]) fail("width mismatch assigning " + wname(widths[i]) + " to " + wname(t.width) + " " + t.name);
      if (t.kind == LValue::Kind::Local) {
        const LocalVar *lv = k_.find_local(t.name);
        if (!lv) fail("assignment to undeclared " + t.name);
        if (lv->type.bits != t.width) fail("width mismatch for " + t.name);
        if (!assigned_.insert(t.name).second) fail("reassignment of " + t.name);
        scopes_.back().insert(t.name);
      } else {
        const Param *p = k_.find_param(t.name);
        if (p && p->kind == ParamKind::InArray) fail("write to input array " + t.name);
        check_element(t.name, t.index, t.width);
      }
    }
    if (s.targets.size() == 2 && s.targets[0].kind == LValue::Kind::Local && s.targets[1].kind == LValue::Kind::Local &&
        s.targets[0].name == s.targets[1].name)
      fail("reassignment of " + s.targets[0].name);
  }

  void check_element(const std::string &array, const Expr &index, int width) {
    auto shape = k_.array_shape(array);
    if (!shape) fail("unknown array " + array);
    if (shape->first.bits != width) fail("width mismatch on " + array);
    check_index(index);
    if (auto v = fold_index(index); v && (*v < 0 || *v >= shape->second))
      fail("index " + std::to_string(*v) + " out of bounds for " + array);
  }

  void check_index(const Expr &e) {
    switch (e.op) {
      case Op::Const: return;
      case Op::LoopVar:
        if (!is_index_var(e.name)) fail("non-constant array index " + e.name);
        return;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::And:
      case Op::Or:
      case Op::Xor:
      case Op::Shl:
      case Op::Shr:
        check_index(e.args[0]);
        check_index(e.args[1]);
        return;
      default: fail(std::string("invalid index expression (") + op_name(e.op) + ")");
    }
  }

  void check_expr(const Expr &e) {
    for (const auto &a : e.args)
      if (result_count(a.op) != 1) fail(std::string(op_name(a.op)) + " result used as an operand");
    auto same = [&](const Expr &c, int w) {
      if (c.width != w) fail("width mismatch: " + wname(c.width) + " vs " + wname(w));
    };
    if (e.op != Op::Load && !ScalarType::valid_width(e.width)) fail(std::string("missing width on ") + op_name(e.op));
    switch (e.op) {
      case Op::Const:
        if (e.value > ScalarType{e.width}.mask()) fail("literal does not fit " + wname(e.width));
        return;
      case Op::Local: {
        const LocalVar *lv = k_.find_local(e.name);
        if (!lv) fail("use of undeclared " + e.name);
        if (lv->type.bits != e.width) fail("width mismatch for " + e.name);
        if (!in_scope(e.name)) fail("use of " + e.name + " before assignment");
        return;
      }
      case Op::Scalar: {
        const Param *p = k_.find_param(e.name);
        if (!p || p->kind != ParamKind::Bound) fail("unknown scalar " + e.name);
        if (p->type.bits != e.width) fail("width mismatch for " + e.name);
        return;
      }
      case Op::LoopVar:
        if (!is_index_var(e.name)) fail("loop variable " + e.name + " out of scope");
        return;
      case Op::Load: check_element(e.name, e.args[0], e.width); return;
      case Op::Hole: fail("template hole in program");
      case Op::Not:
        check_expr(e.args[0]);
        same(e.args[0], e.width);
        return;
      case Op::Trunc:
      case Op::ZExt:
        check_expr(e.args[0]);
        if ((e.op == Op::Trunc) != (e.args[0].width > e.width) || e.args[0].width == e.width)
          fail(std::string("invalid ") + op_name(e.op));
        return;
      case Op::Shl:
      case Op::Shr:
        check_expr(e.args[0]);
        same(e.args[0], e.width);
        check_index(e.args[1]);
        if (auto v = fold_index(e.args[1]); v && (*v < 0 || *v >= e.width)) fail("shift amount exceeds width");
        return;
      case Op::AddCarry:
      case Op::SubBorrow:
        for (const auto &a : e.args) check_expr(a);
        same(e.args[0], 1);
        same(e.args[1], e.width);
        same(e.args[2], e.width);
        return;
      case Op::MulWide:
        if (e.width > 64) fail("mulwide is limited to 64-bit operands");
        for (const auto &a : e.args) check_expr(a);
        same(e.args[0], e.width);
        same(e.args[1], e.width);
        return;
      case Op::CmovNZ:
        for (const auto &a : e.args) check_expr(a);
        same(e.args[1], e.width);
        same(e.args[2], e.width);
        return;
      default:
        check_expr(e.args[0]);
        check_expr(e.args[1]);
        same(e.args[0], e.width);
        same(e.args[1], e.width);
        return;
    }
  }
};

void collect_violations(const Kernel &k, const std::vector<Node> &body, std::vector<Violation> &out) {
  for (const auto &n : body) {
    if (n.is_loop()) {
      out.push_back({"loop at line " + std::to_string(n.loop().line), n.loop().line});
      collect_violations(k, n.loop().body, out);
    } else if (n.is_guard()) {
      out.push_back({"branch at line " + std::to_string(n.guard().line), n.guard().line});
      collect_violations(k, n.guard().body, out);
    } else if (n.is_call()) {
      out.push_back({"non-builtin call " + n.call().callee + " at line " + std::to_string(n.call().line), n.call().line});
    }
  }
}

}  // namespace

ParsedSource parse_source(const std::string &text) { return Parser(text).run(); }

Kernel parse_kernel(const std::string &text) { return parse_source(text).kernel; }

Program parse_program(const std::string &text) {
  Kernel k = parse_kernel(text);
  auto v = validate_straight_line(k);
  if (!v.empty()) throw ParseError("not straight-line: " + v.front().message, v.front().line, 1);
  return k;
}

ParsedSource load_kernel_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IrError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::exception &e) {
      throw IrError(path + ": " + e.what());
    }
    ParsedSource out;
    out.kernel = kernel_from_json(j);
    if (j.contains("pragmas")) out.pragmas = pragmas_from_json(j.at("pragmas"));
    return out;
  }
  return parse_source(ss.str());
}

void check_kernel(const Kernel &k) { Checker(k).run(); }

std::vector<Violation> validate_straight_line(const Kernel &k) {
  std::vector<Violation> out;
  collect_violations(k, k.body, out);
  return out;
}

}  // namespace rollhls
