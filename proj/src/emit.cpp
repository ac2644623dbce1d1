#include "rollhls/emit.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "rollhls/parser.hpp"

namespace rollhls {

namespace {

int precedence(Op op) {
  switch (op) {
    case Op::Or: return 1;
    case Op::Xor: return 2;
    case Op::And: return 3;
    case Op::Shl:
    case Op::Shr: return 4;
    case Op::Add:
    case Op::Sub: return 5;
    case Op::Mul: return 6;
    default: return 8;
  }
}

const char *symbol(Op op) {
  switch (op) {
    case Op::Or: return "|";
    case Op::Xor: return "^";
    case Op::And: return "&";
    case Op::Shl: return "<<";
    case Op::Shr: return ">>";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    default: return "?";
  }
}

// Width the parser would assign to this subtree without outside context.
int printed_width(const Expr &e) {
  switch (e.op) {
    case Op::Const: return 0;
    case Op::Not:
    case Op::Shl:
    case Op::Shr: return printed_width(e.args[0]);
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::And:
    case Op::Or:
    case Op::Xor: {
      const int a = printed_width(e.args[0]);
      return a ? a : printed_width(e.args[1]);
    }
    default: return e.width;
  }
}

std::string literal(u128 v) { return v > 0xffff ? to_hex_u128(v) : to_string_u128(v); }

std::string index_text(const Expr &e, int min_prec) {
  std::string s;
  int prec = 8;
  if (e.op == Op::Const) {
    const auto v = static_cast<int64_t>(e.value);
    if (v < 0) return "(0 - " + std::to_string(-v) + ")";
    return std::to_string(v);
  }
  if (e.op == Op::LoopVar) return e.name;
  if (e.op == Op::Hole) return "$" + std::to_string(static_cast<int>(e.value));
  if (e.args.size() == 2) {
    prec = precedence(e.op);
    s = index_text(e.args[0], prec) + " " + symbol(e.op) + " " + index_text(e.args[1], prec + 1);
  } else {
    throw IrError(std::string("unexpected ") + op_name(e.op) + " in index expression");
  }
  return prec < min_prec ? "(" + s + ")" : s;
}

// `ctx` is the width the parser will infer for this position from context
// (0 when there is none); nodes whose own width would be lost get a cast.
std::string data_text(const Expr &e, int ctx, int min_prec) {
  if (e.width != 0 && printed_width(e) == 0 && ctx != e.width) {
    return "(" + ScalarType{e.width}.name() + ")(" + data_text(e, e.width, 0) + ")";
  }
  std::string s;
  int prec = 8;
  switch (e.op) {
    case Op::Const: return literal(e.value);
    case Op::Local:
    case Op::Scalar: return e.name;
    case Op::LoopVar: return e.width == 32 ? e.name : "(" + ScalarType{e.width}.name() + ")" + e.name;
    case Op::Load: return e.name + "[" + index_text(e.args[0], 0) + "]";
    case Op::Hole: return "$" + std::to_string(static_cast<int>(e.value));
    case Op::Not: s = "~" + data_text(e.args[0], e.width, 7); prec = 7; break;
    case Op::Trunc:
    case Op::ZExt: s = "(" + ScalarType{e.width}.name() + ")" + data_text(e.args[0], 0, 7); prec = 7; break;
    case Op::Shl:
    case Op::Shr:
      prec = 4;
      s = data_text(e.args[0], e.width, prec) + " " + symbol(e.op) + " " + index_text(e.args[1], 5);
      break;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::And:
    case Op::Or:
    case Op::Xor:
      prec = precedence(e.op);
      s = data_text(e.args[0], e.width, prec) + " " + symbol(e.op) + " " + data_text(e.args[1], e.width, prec + 1);
      break;
    case Op::AddCarry:
    case Op::SubBorrow:
    case Op::MulWide:
    case Op::CmovNZ: {
      s = std::string(op_name(e.op)) + "_u" + std::to_string(e.width) + "(";
      for (size_t i = 0; i < e.args.size(); ++i) {
        int want = e.width;
        if (i == 0 && (e.op == Op::AddCarry || e.op == Op::SubBorrow)) want = 1;
        if (i > 0) s += ", ";
        s += data_text(e.args[i], want, 0);
      }
      return s + ")";
    }
  }
  return prec < min_prec ? "(" + s + ")" : s;
}

class Emitter {
 public:
  Emitter(const Kernel &k, const PragmaConfig &p) : k_(k), p_(p) {}

  std::string run() {
    validate();
    os_ << "void " << k_.name << "(";
    for (size_t i = 0; i < k_.params.size(); ++i) {
      const Param &p = k_.params[i];
      if (i) os_ << ", ";
      if (p.kind == ParamKind::InArray) os_ << "const ";
      os_ << p.type.name() << " " << p.name;
      if (p.is_array()) os_ << "[" << p.length << "]";
      else if (p.max) os_ << " <= " << *p.max;
    }
    os_ << ") {\n";
    for (const auto &a : k_.arrays) os_ << "  " << a.elem.name() << " " << a.name << "[" << a.length << "];\n";
    for (const auto &[name, f] : p_.partition)
      os_ << "#pragma HLS array_partition variable=" << name << " type=cyclic factor=" << f << "\n";
    for (const auto &name : top_level_dependence_) os_ << "#pragma HLS dependence variable=" << name << " type=inter false\n";
    body(k_.body, 1);
    os_ << "}\n";
    for (const auto &f : k_.functions) {
      os_ << "static void " << f.name << "(";
      for (size_t i = 0; i < f.index_params.size(); ++i) os_ << (i ? ", " : "") << "u32 " << f.index_params[i];
      os_ << ") {\n";
      body(f.body, 1);
      os_ << "}\n";
    }
    return os_.str();
  }

 private:
  const Kernel &k_;
  const PragmaConfig &p_;
  std::ostringstream os_;
  std::set<std::string> top_level_dependence_;
  std::map<std::string, std::vector<std::string>> loop_dependence_;

  static void direct_arrays(const std::vector<Node> &body, std::set<std::string> &out) {
    for (const auto &n : body) {
      if (n.is_statement()) {
        for (const auto &t : n.stmt().targets)
          if (t.kind == LValue::Kind::Element) out.insert(t.name);
        visit_expr(n.stmt().rhs, [&](const Expr &e) {
          if (e.op == Op::Load) out.insert(e.name);
        });
      } else if (n.is_guard()) {
        direct_arrays(n.guard().body, out);
      }
    }
  }

  void validate() {
    std::set<std::string> labels;
    auto collect = [&](const std::vector<Node> &b) {
      for_each_loop(b, [&](const Loop &l, int) {
        if (!l.label.empty()) labels.insert(l.label);
      });
    };
    collect(k_.body);
    for (const auto &f : k_.functions) collect(f.body);
    for (const auto &[label, _] : p_.loops)
      if (!labels.count(label)) throw IrError("directive references unknown loop " + label);
    for (const auto &[name, _] : p_.partition)
      if (!k_.array_shape(name)) throw IrError("directive references unknown array " + name);
    std::set<std::string> placed;
    auto place = [&](const std::vector<Node> &b) {
      for_each_loop(b, [&](const Loop &l, int) {
        std::set<std::string> used;
        direct_arrays(l.body, used);
        for (const auto &name : p_.dependence_false)
          if (used.count(name) && !l.label.empty()) {
            loop_dependence_[l.label].push_back(name);
            placed.insert(name);
          }
      });
    };
    place(k_.body);
    for (const auto &f : k_.functions) place(f.body);
    for (const auto &name : p_.dependence_false) {
      if (!k_.array_shape(name)) throw IrError("directive references unknown array " + name);
      if (!placed.count(name)) top_level_dependence_.insert(name);
    }
  }

  void indent(int depth) {
    for (int i = 0; i < depth; ++i) os_ << "  ";
  }

  std::string target(const LValue &t) {
    if (t.kind == LValue::Kind::Element) return t.name + "[" + index_text(t.index, 0) + "]";
    return ScalarType{t.width}.name() + " " + t.name;
  }

  void body(const std::vector<Node> &nodes, int depth) {
    for (const auto &n : nodes) {
      if (n.is_statement()) {
        const Statement &s = n.stmt();
        indent(depth);
        if (s.targets.size() == 2) {
          os_ << "(" << target(s.targets[0]) << ", " << target(s.targets[1]) << ") = " << data_text(s.rhs, 0, 0) << ";\n";
        } else {
          os_ << target(s.targets[0]) << " = " << data_text(s.rhs, s.targets[0].width, 0) << ";\n";
        }
      } else if (n.is_loop()) {
        const Loop &l = n.loop();
        indent(depth);
        if (!l.label.empty()) os_ << l.label << ": ";
        const std::string stop = l.stop.is_param() ? l.stop.param : std::to_string(l.stop.constant);
        os_ << "for (u32 " << l.var << " = " << l.start << "; " << l.var << (l.step > 0 ? " < " : " > ") << stop << "; "
            << l.var << (l.step > 0 ? " += " : " -= ") << (l.step > 0 ? l.step : -l.step) << ") {\n";
        if (!l.label.empty()) {
          const LoopDirectives &d = p_.loop(l.label);
          if (d.pipeline_ii) os_ << "#pragma HLS pipeline II=" << *d.pipeline_ii << "\n";
          if (d.unroll > 1) os_ << "#pragma HLS unroll factor=" << d.unroll << "\n";
          if (auto it = loop_dependence_.find(l.label); it != loop_dependence_.end())
            for (const auto &name : it->second) os_ << "#pragma HLS dependence variable=" << name << " type=inter false\n";
        }
        body(l.body, depth + 1);
        indent(depth);
        os_ << "}\n";
      } else if (n.is_guard()) {
        const Guard &g = n.guard();
        indent(depth);
        os_ << "if (" << g.var << (g.cmp == GuardCmp::Lt ? " < " : " == ") << g.value << ") {\n";
        body(g.body, depth + 1);
        indent(depth);
        os_ << "}\n";
      } else {
        const CallSite &c = n.call();
        indent(depth);
        os_ << c.callee << "(";
        for (size_t i = 0; i < c.args.size(); ++i) os_ << (i ? ", " : "") << c.args[i];
        os_ << ");\n";
      }
    }
  }
};

void scan_body(const std::vector<Node> &body, std::vector<std::string> &vars, BranchScan &out) {
  for (const auto &n : body) {
    if (n.is_loop()) {
      const Loop &l = n.loop();
      if (l.stop.is_param()) {
        ++out.variable_bounds;
        out.findings.push_back("loop " + l.label + " bounded by " + l.stop.param);
      }
      vars.push_back(l.var);
      scan_body(l.body, vars, out);
      vars.pop_back();
    } else if (n.is_guard()) {
      const Guard &g = n.guard();
      bool ok = false;
      for (const auto &v : vars) ok = ok || v == g.var;
      if (!ok) {
        ++out.data_dependent_branches;
        out.findings.push_back("branch on " + g.var);
      }
      scan_body(g.body, vars, out);
    }
  }
}

}  // namespace

std::string expr_to_c(const Expr &e) { return e.width ? data_text(e, e.width, 0) : index_text(e, 0); }

std::string emit_c(const Kernel &k, const PragmaConfig &pragmas) { return Emitter(k, pragmas).run(); }

BranchScan scan_branches(const Kernel &k) {
  BranchScan out;
  std::vector<std::string> vars;
  scan_body(k.body, vars, out);
  for (const auto &f : k.functions) {
    vars = f.index_params;
    scan_body(f.body, vars, out);
  }
  return out;
}

BranchScan scan_emitted(const std::string &text) {
  BranchScan out;
  std::istringstream is(text);
  std::string word;
  static const std::set<std::string> banned = {"while", "switch", "goto", "else", "do", "?"};
  for (std::string line; std::getline(is, line);) {
    if (line.rfind("#pragma", 0) == 0) continue;
    std::string tok;
    for (char c : line + " ") {
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
        tok += c;
        continue;
      }
      if (banned.count(tok)) {
        ++out.data_dependent_branches;
        out.findings.push_back("control-flow keyword '" + tok + "'");
      }
      tok.clear();
      if (c == '?') {
        ++out.data_dependent_branches;
        out.findings.push_back("conditional operator");
      }
    }
  }
  try {
    BranchScan ast = scan_branches(parse_kernel(text));
    out.data_dependent_branches += ast.data_dependent_branches;
    out.variable_bounds += ast.variable_bounds;
    out.findings.insert(out.findings.end(), ast.findings.begin(), ast.findings.end());
  } catch (const IrError &e) {
    // A guard on anything but a loop variable is rejected by the parser.
    ++out.data_dependent_branches;
    out.findings.push_back(std::string("unparseable: ") + e.what());
  }
  return out;
}

}  // namespace rollhls
