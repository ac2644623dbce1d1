#include "rollhls/ir_json.hpp"

#include "rollhls/parser.hpp"

namespace rollhls {

using nlohmann::json;

namespace {

std::string type_name(int w) { return w ? "u" + std::to_string(w) : ""; }

int parse_type(const std::string &s) {
  if (s.empty()) return 0;
  if (s.size() < 2 || s[0] != 'u') throw IrError("bad type '" + s + "'");
  const int w = std::stoi(s.substr(1));
  if (!ScalarType::valid_width(w)) throw IrError("bad type '" + s + "'");
  return w;
}

Op op_from_name(const std::string &n) {
  static const Op all[] = {Op::Not, Op::Trunc, Op::ZExt, Op::Add, Op::Sub, Op::Mul,
                           Op::Shl, Op::Shr, Op::And, Op::Or, Op::Xor, Op::AddCarry,
                           Op::SubBorrow, Op::MulWide, Op::CmovNZ};
  for (Op op : all)
    if (n == op_name(op)) return op;
  throw IrError("unknown op '" + n + "'");
}

json lvalue_to_json(const LValue &lv) {
  if (lv.kind == LValue::Kind::Local) return {{"local", lv.name}, {"type", type_name(lv.width)}};
  return {{"array", lv.name}, {"index", expr_to_json(lv.index)}, {"type", type_name(lv.width)}};
}

LValue lvalue_from_json(const json &j) {
  const int w = parse_type(j.value("type", ""));
  if (j.contains("local")) return LValue::local(j.at("local").get<std::string>(), w);
  return LValue::element(j.at("array").get<std::string>(), expr_from_json(j.at("index")), w);
}

json body_to_json(const std::vector<Node> &body);
std::vector<Node> body_from_json(const json &j);

json node_to_json(const Node &n) {
  if (n.is_statement()) {
    const auto &s = n.stmt();
    json targets = json::array();
    for (const auto &t : s.targets) targets.push_back(lvalue_to_json(t));
    json out = {{"kind", "assign"}, {"targets", targets}, {"rhs", expr_to_json(s.rhs)}};
    if (s.line) out["line"] = s.line;
    return out;
  }
  if (n.is_loop()) {
    const auto &l = n.loop();
    json out = {{"kind", "for"}, {"label", l.label}, {"var", l.var}, {"start", l.start}, {"step", l.step},
                {"body", body_to_json(l.body)}};
    if (l.stop.is_param()) out["stop"] = l.stop.param;
    else out["stop"] = l.stop.constant;
    if (l.line) out["line"] = l.line;
    return out;
  }
  if (n.is_guard()) {
    const auto &g = n.guard();
    json out = {{"kind", "guard"}, {"var", g.var}, {"cmp", g.cmp == GuardCmp::Lt ? "lt" : "eq"},
                {"value", g.value}, {"body", body_to_json(g.body)}};
    if (g.line) out["line"] = g.line;
    return out;
  }
  const auto &c = n.call();
  json out = {{"kind", "call"}, {"callee", c.callee}, {"args", c.args}};
  if (c.line) out["line"] = c.line;
  return out;
}

Node node_from_json(const json &j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "assign") {
    Statement s;
    for (const auto &t : j.at("targets")) s.targets.push_back(lvalue_from_json(t));
    s.rhs = expr_from_json(j.at("rhs"));
    s.line = j.value("line", 0);
    return Node{s};
  }
  if (kind == "for") {
    Loop l;
    l.label = j.value("label", "");
    l.var = j.at("var").get<std::string>();
    l.start = j.at("start").get<int64_t>();
    l.step = j.value("step", int64_t{1});
    if (j.at("stop").is_string()) l.stop.param = j.at("stop").get<std::string>();
    else l.stop.constant = j.at("stop").get<int64_t>();
    l.body = body_from_json(j.at("body"));
    l.line = j.value("line", 0);
    return Node{std::move(l)};
  }
  if (kind == "guard") {
    Guard g;
    g.var = j.at("var").get<std::string>();
    g.cmp = j.at("cmp").get<std::string>() == "eq" ? GuardCmp::Eq : GuardCmp::Lt;
    g.value = j.at("value").get<int64_t>();
    g.body = body_from_json(j.at("body"));
    g.line = j.value("line", 0);
    return Node{std::move(g)};
  }
  if (kind == "call") {
    CallSite c;
    c.callee = j.at("callee").get<std::string>();
    c.args = j.at("args").get<std::vector<int64_t>>();
    c.line = j.value("line", 0);
    return Node{std::move(c)};
  }
  throw IrError("unknown node kind '" + kind + "'");
}

json body_to_json(const std::vector<Node> &body) {
  json out = json::array();
  for (const auto &n : body) out.push_back(node_to_json(n));
  return out;
}

std::vector<Node> body_from_json(const json &j) {
  std::vector<Node> out;
  for (const auto &n : j) out.push_back(node_from_json(n));
  return out;
}

}  // namespace

json expr_to_json(const Expr &e) {
  switch (e.op) {
    case Op::Const: return {{"const", to_hex_u128(e.value)}, {"type", type_name(e.width)}};
    case Op::Local: return {{"var", e.name}, {"type", type_name(e.width)}};
    case Op::Scalar: return {{"scalar", e.name}, {"type", type_name(e.width)}};
    case Op::LoopVar: return {{"loopvar", e.name}, {"type", type_name(e.width)}};
    case Op::Hole: return {{"hole", static_cast<int>(e.value)}, {"type", type_name(e.width)}};
    case Op::Load: return {{"load", e.name}, {"index", expr_to_json(e.args[0])}, {"type", type_name(e.width)}};
    default: {
      json args = json::array();
      for (const auto &a : e.args) args.push_back(expr_to_json(a));
      return {{"op", op_name(e.op)}, {"type", type_name(e.width)}, {"args", args}};
    }
  }
}

Expr expr_from_json(const json &j) {
  const int w = parse_type(j.value("type", ""));
  if (j.contains("const")) return Expr::constant(parse_u128(j.at("const").get<std::string>()), w);
  if (j.contains("var")) return Expr::local(j.at("var").get<std::string>(), w);
  if (j.contains("scalar")) return Expr::scalar(j.at("scalar").get<std::string>(), w);
  if (j.contains("loopvar")) return Expr::loop_var(j.at("loopvar").get<std::string>(), w);
  if (j.contains("hole")) return Expr::hole(j.at("hole").get<int>(), w);
  if (j.contains("load")) return Expr::load(j.at("load").get<std::string>(), expr_from_json(j.at("index")), w);
  Expr e;
  e.op = op_from_name(j.at("op").get<std::string>());
  e.width = w;
  for (const auto &a : j.at("args")) e.args.push_back(expr_from_json(a));
  return e;
}

json kernel_to_json(const Kernel &k) {
  json params = json::array();
  for (const auto &p : k.params) {
    json jp = {{"name", p.name}, {"type", p.type.name()}};
    switch (p.kind) {
      case ParamKind::InArray: jp["dir"] = "in"; jp["length"] = p.length; break;
      case ParamKind::OutArray: jp["dir"] = "out"; jp["length"] = p.length; break;
      case ParamKind::Bound:
        jp["dir"] = "bound";
        if (p.max) jp["max"] = *p.max;
        break;
    }
    params.push_back(jp);
  }
  json locals = json::array();
  for (const auto &l : k.locals) locals.push_back({{"name", l.name}, {"type", l.type.name()}});
  json out = {{"name", k.name}, {"params", params}, {"locals", locals}, {"body", body_to_json(k.body)}};
  if (!k.arrays.empty()) {
    json arrays = json::array();
    for (const auto &a : k.arrays)
      arrays.push_back({{"name", a.name}, {"type", a.elem.name()}, {"length", a.length}});
    out["arrays"] = arrays;
  }
  if (!k.functions.empty()) {
    json fns = json::array();
    for (const auto &f : k.functions)
      fns.push_back({{"name", f.name}, {"params", f.index_params}, {"body", body_to_json(f.body)}});
    out["functions"] = fns;
  }
  return out;
}

Kernel kernel_from_json(const json &j) {
  Kernel k;
  try {
    k.name = j.at("name").get<std::string>();
    for (const auto &jp : j.at("params")) {
      Param p;
      p.name = jp.at("name").get<std::string>();
      p.type = ScalarType{parse_type(jp.at("type").get<std::string>())};
      const std::string dir = jp.at("dir").get<std::string>();
      if (dir == "in") p.kind = ParamKind::InArray;
      else if (dir == "out") p.kind = ParamKind::OutArray;
      else if (dir == "bound") p.kind = ParamKind::Bound;
      else throw IrError("bad param direction '" + dir + "'");
      if (p.is_array()) p.length = jp.at("length").get<int64_t>();
      if (jp.contains("max")) p.max = jp.at("max").get<int64_t>();
      k.params.push_back(p);
    }
    for (const auto &jl : j.at("locals"))
      k.locals.push_back({jl.at("name").get<std::string>(), ScalarType{parse_type(jl.at("type").get<std::string>())}});
    if (j.contains("arrays"))
      for (const auto &ja : j.at("arrays"))
        k.arrays.push_back({ja.at("name").get<std::string>(), ScalarType{parse_type(ja.at("type").get<std::string>())},
                            ja.at("length").get<int64_t>()});
    if (j.contains("functions"))
      for (const auto &jf : j.at("functions"))
        k.functions.push_back({jf.at("name").get<std::string>(), jf.at("params").get<std::vector<std::string>>(),
                               body_from_json(jf.at("body"))});
    k.body = body_from_json(j.at("body"));
  } catch (const json::exception &e) {
    throw IrError(std::string("malformed IR JSON: ") + e.what());
  }
  check_kernel(k);
  return k;
}

}  // namespace rollhls
