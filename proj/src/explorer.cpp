#include "rollhls/explorer.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "rollhls/parser.hpp"
#include "rollhls/qor.hpp"
#include "rollhls/templater.hpp"

namespace rollhls {

const LoopSummary *LoopInfo::find(const std::string &label) const {
  for (const auto &l : loops)
    if (l.label == label) return &l;
  return nullptr;
}

std::vector<int64_t> divisors(int64_t n, int64_t limit) {
  std::vector<int64_t> out;
  if (n <= 1) return {1};
  for (int64_t d = 1; d <= std::min(n, limit); ++d)
    if (n % d == 0) out.push_back(d);
  return out;
}

namespace {

using Env = std::map<std::string, int64_t>;
using Element = std::pair<std::string, int64_t>;

constexpr int kRead = 1, kWrite = 2;
constexpr int64_t kDefaultBoundLimit = 16;

std::optional<int64_t> eval_index(const Expr &e, const Env &env) {
  switch (e.op) {
    case Op::Const: return static_cast<int64_t>(e.value);
    case Op::LoopVar: {
      auto it = env.find(e.name);
      if (it == env.end()) return std::nullopt;
      return it->second;
    }
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::And:
    case Op::Or:
    case Op::Xor:
    case Op::Shl:
    case Op::Shr: {
      auto a = eval_index(e.args[0], env), b = eval_index(e.args[1], env);
      if (!a || !b) return std::nullopt;
      switch (e.op) {
        case Op::Add: return *a + *b;
        case Op::Sub: return *a - *b;
        case Op::Mul: return *a * *b;
        case Op::And: return *a & *b;
        case Op::Or: return *a | *b;
        case Op::Xor: return *a ^ *b;
        case Op::Shl:
          if (*b < 0 || *b > 62) return std::nullopt;
          return *a << *b;
        default:
          if (*b < 0 || *b > 62) return std::nullopt;
          return *a >> *b;
      }
    }
    default: return std::nullopt;
  }
}

int64_t loop_limit(const Kernel &k, const Loop &l) {
  if (l.constant_bounds()) return l.stop.constant;
  const Param *p = k.find_param(l.stop.param);
  return p && p->max ? *p->max : kDefaultBoundLimit;
}

std::vector<int64_t> loop_values(const Kernel &k, const Loop &l) {
  std::vector<int64_t> out;
  const int64_t stop = l.constant_bounds() ? l.stop.constant : (l.step > 0 ? loop_limit(k, l) : 0);
  if (l.step > 0)
    for (int64_t v = l.start; v < stop; v += l.step) out.push_back(v);
  else
    for (int64_t v = l.start; v > stop; v += l.step) out.push_back(v);
  return out;
}

bool guard_holds(const Guard &g, const Env &env) {
  const int64_t v = env.at(g.var);
  return g.cmp == GuardCmp::Lt ? v < g.value : v == g.value;
}

/// Element accesses of executed statements, in execution order.
struct Touches {
  const Kernel &k;
  bool ignore_guards = false;
  std::vector<std::tuple<std::string, int64_t, int>> out;

  int64_t index(const std::string &array, const Expr &e, const Env &env) const {
    auto v = eval_index(e, env);
    if (!v) throw IrError("cannot evaluate subscript of " + array);
    return *v;
  }

  void statement(const Statement &s, const Env &env) {
    visit_expr(s.rhs, [&](const Expr &e) {
      if (e.op == Op::Load) out.emplace_back(e.name, index(e.name, e.args[0], env), kRead);
    });
    for (const auto &t : s.targets)
      if (t.kind == LValue::Kind::Element) out.emplace_back(t.name, index(t.name, t.index, env), kWrite);
  }

  void body(const std::vector<Node> &b, Env &env) {
    for (const auto &n : b) {
      if (n.is_statement()) {
        statement(n.stmt(), env);
      } else if (n.is_loop()) {
        const Loop &l = n.loop();
        for (int64_t v : loop_values(k, l)) {
          env[l.var] = v;
          body(l.body, env);
        }
        env.erase(l.var);
      } else if (n.is_guard()) {
        if (ignore_guards || guard_holds(n.guard(), env)) body(n.guard().body, env);
      } else {
        const CallSite &c = n.call();
        const Function *f = k.find_function(c.callee);
        if (!f) throw IrError("unknown function " + c.callee);
        Env fenv;
        for (size_t i = 0; i < f->index_params.size(); ++i) fenv[f->index_params[i]] = c.args[i];
        body(f->body, fenv);
      }
    }
  }
};

using AccessMap = std::map<Element, int>;

AccessMap touches_of(const Kernel &k, const std::vector<Node> &b, Env env, bool ignore_guards = false) {
  Touches t{k, ignore_guards, {}};
  t.body(b, env);
  AccessMap m;
  for (const auto &[a, i, f] : t.out) m[{a, i}] |= f;
  return m;
}

/// Per-iteration access maps of one dynamic instance of `l`.
std::vector<AccessMap> iteration_maps(const Kernel &k, const Loop &l, Env env) {
  std::vector<AccessMap> out;
  for (int64_t v : loop_values(k, l)) {
    env[l.var] = v;
    out.push_back(touches_of(k, l.body, env));
  }
  return out;
}

/// Call `fn` for every dynamic instance of every loop, with the enclosing
/// loop variables bound.
void for_each_instance(const Kernel &k, const std::vector<Node> &body, Env &env,
                       const std::function<void(const Loop &, const Env &)> &fn) {
  for (const auto &n : body) {
    if (n.is_loop()) {
      const Loop &l = n.loop();
      fn(l, env);
      for (int64_t v : loop_values(k, l)) {
        env[l.var] = v;
        for_each_instance(k, l.body, env, fn);
      }
      env.erase(l.var);
    } else if (n.is_guard()) {
      if (guard_holds(n.guard(), env)) for_each_instance(k, n.guard().body, env, fn);
    } else if (n.is_call()) {
      const CallSite &c = n.call();
      const Function *f = k.find_function(c.callee);
      if (!f) continue;
      Env fenv;
      for (size_t i = 0; i < f->index_params.size(); ++i) fenv[f->index_params[i]] = c.args[i];
      for_each_instance(k, f->body, fenv, fn);
    }
  }
}

void for_each_instance_of(const Kernel &k, const std::string &label, const std::function<void(const Loop &, const Env &)> &fn) {
  Env env;
  for_each_instance(k, k.body, env, [&](const Loop &l, const Env &e) {
    if (l.label == label) fn(l, e);
  });
}

// ---- static access summaries -----------------------------------------------------

struct StaticAccess {
  std::string array;
  const Expr *index;
  bool write;
};

void static_accesses(const Kernel &k, const std::vector<Node> &body, std::vector<StaticAccess> &out,
                     std::set<std::string> &seen_functions) {
  for (const auto &n : body) {
    if (n.is_statement()) {
      const Statement &s = n.stmt();
      visit_expr(s.rhs, [&](const Expr &e) {
        if (e.op == Op::Load) out.push_back({e.name, &e.args[0], false});
      });
      for (const auto &t : s.targets)
        if (t.kind == LValue::Kind::Element) out.push_back({t.name, &t.index, true});
    } else if (n.is_loop()) {
      static_accesses(k, n.loop().body, out, seen_functions);
    } else if (n.is_guard()) {
      static_accesses(k, n.guard().body, out, seen_functions);
    } else if (const Function *f = k.find_function(n.call().callee); f && seen_functions.insert(f->name).second) {
      static_accesses(k, f->body, out, seen_functions);
    }
  }
}

std::vector<StaticAccess> static_accesses(const Kernel &k, const std::vector<Node> &body) {
  std::vector<StaticAccess> out;
  std::set<std::string> seen;
  static_accesses(k, body, out, seen);
  return out;
}

bool contains_guard(const std::vector<Node> &body, const std::string *var = nullptr) {
  for (const auto &n : body) {
    if (n.is_guard() && (!var || n.guard().var == *var)) return true;
    if (n.is_guard() && contains_guard(n.guard().body, var)) return true;
    if (n.is_loop() && contains_guard(n.loop().body, var)) return true;
  }
  return false;
}

bool contains_loop(const std::vector<Node> &body) {
  for (const auto &n : body) {
    if (n.is_loop()) return true;
    if (n.is_guard() && contains_loop(n.guard().body)) return true;
  }
  return false;
}

bool defines_locals(const std::vector<Node> &body) {
  bool found = false;
  for_each_statement(body, [&](const Statement &s) {
    for (const auto &t : s.targets) found = found || t.kind == LValue::Kind::Local;
  });
  return found;
}

bool perfect(const Loop &l) {
  if (!contains_loop(l.body)) return true;
  return l.body.size() == 1 && l.body[0].is_loop() && perfect(l.body[0].loop());
}

std::set<std::string> non_affine_written(const Kernel &k, const std::vector<Node> &body) {
  const auto acc = static_accesses(k, body);
  std::set<std::string> written, non_affine, out;
  for (const auto &a : acc) {
    if (a.write) written.insert(a.array);
    if (!as_affine(*a.index)) non_affine.insert(a.array);
  }
  for (const auto &a : non_affine)
    if (written.count(a)) out.insert(a);
  return out;
}

// ---- outline groups --------------------------------------------------------------

std::string outline_key(const Node &n) {
  if (!n.is_statement()) return {};
  Statement s = n.stmt();
  bool uses_local = false;
  for (const auto &t : s.targets) uses_local = uses_local || t.kind == LValue::Kind::Local;
  visit_expr(s.rhs, [&](const Expr &e) { uses_local = uses_local || e.op == Op::Local; });
  if (uses_local) return {};
  walk_literals(s, [](Expr &lit, bool index_ctx) {
    if (index_ctx && lit.op == Op::Const) lit = Expr::hole(0, 0);
  });
  return statement_key(s);
}

std::vector<OutlineGroup> find_outline_groups(const Kernel &k) {
  constexpr size_t kMaxBlock = 8;
  std::vector<std::string> keys;
  for (const auto &n : k.body) keys.push_back(outline_key(n));
  const size_t n = keys.size();
  std::vector<OutlineGroup> out;
  size_t i = 0;
  while (i < n) {
    size_t best_g = 0, best_m = 0;
    for (size_t g = 1; g <= kMaxBlock && i + g <= n; ++g) {
      bool eligible = true;
      for (size_t j = i; j < i + g; ++j) eligible = eligible && !keys[j].empty();
      if (!eligible) break;
      size_t m = 1;
      while (i + (m + 1) * g <= n && std::equal(keys.begin() + i, keys.begin() + i + g, keys.begin() + i + m * g)) ++m;
      if (m >= 2 && g * m > best_g * best_m) best_g = g, best_m = m;
    }
    if (best_m) {
      out.push_back({i, best_g, best_m});
      i += best_g * best_m;
    } else {
      ++i;
    }
  }
  return out;
}

// ---- names -----------------------------------------------------------------------

void collect_names(const std::vector<Node> &body, std::set<std::string> &out) {
  for (const auto &n : body) {
    if (n.is_loop()) {
      out.insert(n.loop().label);
      out.insert(n.loop().var);
      collect_names(n.loop().body, out);
    } else if (n.is_guard()) {
      collect_names(n.guard().body, out);
    }
  }
}

std::set<std::string> all_names(const Kernel &k) {
  std::set<std::string> out;
  for (const auto &p : k.params) out.insert(p.name);
  for (const auto &l : k.locals) out.insert(l.name);
  for (const auto &a : k.arrays) out.insert(a.name);
  for (const auto &f : k.functions) {
    out.insert(f.name);
    for (const auto &p : f.index_params) out.insert(p);
    collect_names(f.body, out);
  }
  collect_names(k.body, out);
  return out;
}

std::string fresh(std::set<std::string> &names, std::string base) {
  while (names.count(base)) base += "_";
  names.insert(base);
  return base;
}

// ---- locating loops --------------------------------------------------------------

struct Site {
  std::vector<Node> *body = nullptr;
  size_t index = 0;
  Loop &loop() const { return (*body)[index].loop(); }
};

std::optional<Site> find_site(std::vector<Node> &body, const std::string &label) {
  for (size_t i = 0; i < body.size(); ++i) {
    Node &n = body[i];
    if (n.is_loop()) {
      if (n.loop().label == label) return Site{&body, i};
      if (auto s = find_site(n.loop().body, label)) return s;
    } else if (n.is_guard()) {
      if (auto s = find_site(n.guard().body, label)) return s;
    }
  }
  return std::nullopt;
}

std::optional<Site> find_site(Kernel &k, const std::string &label) {
  if (auto s = find_site(k.body, label)) return s;
  for (auto &f : k.functions)
    if (auto s = find_site(f.body, label)) return s;
  return std::nullopt;
}

TransformResult reject(std::string reason) { return {false, std::move(reason), {}}; }

TransformResult accept(Kernel k) {
  check_kernel(k);
  return {true, {}, std::move(k)};
}

void rename_guards(std::vector<Node> &body, const std::string &from, const std::string &to) {
  for (auto &n : body) {
    if (n.is_guard()) {
      if (n.guard().var == from) n.guard().var = to;
      rename_guards(n.guard().body, from, to);
    } else if (n.is_loop()) {
      rename_guards(n.loop().body, from, to);
    }
  }
}

bool has_loop_var(const std::vector<Node> &body, const std::string &var) {
  for (const auto &n : body) {
    if (n.is_loop() && (n.loop().var == var || has_loop_var(n.loop().body, var))) return true;
    if (n.is_guard() && has_loop_var(n.guard().body, var)) return true;
  }
  return false;
}

Expr index_sum(int64_t constant, const std::vector<std::pair<int64_t, std::string>> &terms) {
  std::optional<Expr> e;
  for (const auto &[c, v] : terms) {
    if (c == 0) continue;
    const int64_t mag = c < 0 ? -c : c;
    Expr t = mag == 1 ? Expr::loop_var(v) : Expr::binary(Op::Mul, Expr::constant(static_cast<u128>(mag)), Expr::loop_var(v));
    if (!e) e = c > 0 ? t : Expr::binary(Op::Sub, Expr::constant(0), t);
    else e = Expr::binary(c > 0 ? Op::Add : Op::Sub, *e, t);
  }
  if (!e) return Expr::constant(static_cast<u128>(static_cast<__int128>(constant)));
  if (constant > 0) e = Expr::binary(Op::Add, *e, Expr::constant(static_cast<u128>(constant)));
  if (constant < 0) e = Expr::binary(Op::Sub, *e, Expr::constant(static_cast<u128>(-constant)));
  return *e;
}

// ---- predication -----------------------------------------------------------------

/// Condition under which a statement's writes take effect.
struct Predicate {
  enum class Kind { Lt, Eq, BelowParam, AboveParam } kind;
  std::string var;
  int64_t value = 0;
  std::string param;
  int param_width = 32;
};

Expr var64(const std::string &v) { return Expr::loop_var(v, 64); }
Expr c64(int64_t v) { return Expr::constant(static_cast<u128>(static_cast<uint64_t>(v)), 64); }

Expr param64(const Predicate &p) {
  Expr n = Expr::scalar(p.param, p.param_width);
  if (p.param_width < 64) return Expr::unary(Op::ZExt, n, 64);
  if (p.param_width > 64) return Expr::unary(Op::Trunc, n, 64);
  return n;
}

Expr sign_bit(Expr diff) { return Expr::shift(Op::Shr, std::move(diff), Expr::constant(63)); }

/// cmovznz selecting `val` when the predicate holds and `old` otherwise.
Expr select(const Predicate &p, Expr old, Expr val, int width) {
  switch (p.kind) {
    case Predicate::Kind::Lt:
      return Expr::call(Op::CmovNZ, {sign_bit(Expr::binary(Op::Sub, var64(p.var), c64(p.value))), old, val}, width);
    case Predicate::Kind::Eq:
      return Expr::call(Op::CmovNZ, {Expr::binary(Op::Xor, var64(p.var), c64(p.value)), val, old}, width);
    case Predicate::Kind::BelowParam:
      return Expr::call(Op::CmovNZ, {sign_bit(Expr::binary(Op::Sub, var64(p.var), param64(p))), old, val}, width);
    case Predicate::Kind::AboveParam:
      return Expr::call(Op::CmovNZ, {sign_bit(Expr::binary(Op::Sub, param64(p), var64(p.var))), old, val}, width);
  }
  return val;
}

std::vector<Statement> predicate(const Statement &s, const std::vector<Predicate> &preds, Kernel &k,
                                 std::set<std::string> &names) {
  if (preds.empty()) return {s};
  bool any_element = false;
  for (const auto &t : s.targets) any_element = any_element || t.kind == LValue::Kind::Element;
  if (!any_element) return {s};  // locals are private to the guarded scope

  auto guarded = [&](const LValue &t, Expr val) {
    Expr old = Expr::load(t.name, t.index, t.width);
    for (auto it = preds.rbegin(); it != preds.rend(); ++it) val = select(*it, old, val, t.width);
    return val;
  };

  if (s.targets.size() == 1) {
    Statement out = s;
    out.rhs = guarded(s.targets[0], s.rhs);
    return {out};
  }
  Statement first = s;
  std::vector<Statement> out;
  std::vector<Statement> stores;
  for (auto &t : first.targets) {
    if (t.kind != LValue::Kind::Element) continue;
    const std::string tmp = fresh(names, "p_" + t.name);
    k.locals.push_back({tmp, ScalarType{t.width}});
    Statement st;
    st.targets = {t};
    st.rhs = guarded(t, Expr::local(tmp, t.width));
    st.line = s.line;
    stores.push_back(std::move(st));
    t = LValue::local(tmp, t.width);
  }
  out.push_back(std::move(first));
  for (auto &st : stores) out.push_back(std::move(st));
  return out;
}

/// Rewrite guards as predicated writes (when `drop_guards`) and apply the
/// accumulated predicates to every statement.
void predicate_body(std::vector<Node> &body, std::vector<Predicate> &preds, bool drop_guards, Kernel &k,
                    std::set<std::string> &names) {
  std::vector<Node> out;
  for (auto &n : body) {
    if (n.is_statement()) {
      for (auto &s : predicate(n.stmt(), preds, k, names)) out.push_back(Node{std::move(s)});
    } else if (n.is_loop()) {
      predicate_body(n.loop().body, preds, drop_guards, k, names);
      out.push_back(std::move(n));
    } else if (n.is_guard()) {
      Guard &g = n.guard();
      if (drop_guards) {
        preds.push_back({g.cmp == GuardCmp::Lt ? Predicate::Kind::Lt : Predicate::Kind::Eq, g.var, g.value, {}, 0});
        predicate_body(g.body, preds, drop_guards, k, names);
        preds.pop_back();
        for (auto &inner : g.body) out.push_back(std::move(inner));
      } else {
        predicate_body(g.body, preds, drop_guards, k, names);
        out.push_back(std::move(n));
      }
    } else {
      out.push_back(std::move(n));
    }
  }
  body = std::move(out);
}

bool all_in_bounds(const Kernel &k, const std::vector<Node> &body, const Env &env, bool ignore_guards) {
  const auto m = touches_of(k, body, env, ignore_guards);
  for (const auto &[el, _] : m) {
    auto shape = k.array_shape(el.first);
    if (!shape || el.second < 0 || el.second >= shape->second) return false;
  }
  return true;
}

// ---- individual transforms -------------------------------------------------------

TransformResult do_interchange(const Kernel &src, const Transform &t) {
  Kernel k = src;
  auto site = find_site(k, t.loops.at(0));
  if (!site) return reject("unknown loop " + t.loops[0]);
  Loop &outer = site->loop();
  if (outer.body.size() != 1 || !outer.body[0].is_loop()) return reject("not a perfect nest");
  Loop &inner = outer.body[0].loop();
  if (t.loops.size() > 1 && inner.label != t.loops[1]) return reject(t.loops[1] + " is not directly nested in " + outer.label);
  if (!outer.constant_bounds() || !inner.constant_bounds()) return reject("variable loop bound");
  if (auto bad = non_affine_written(k, outer.body); !bad.empty()) return reject("non-affine subscript on " + *bad.begin());

  bool legal = true;
  std::string blocker;
  for_each_instance_of(src, outer.label, [&](const Loop &l, const Env &env0) {
    if (!legal) return;
    const Loop &in = l.body[0].loop();
    Env env = env0;
    std::map<Element, std::vector<std::tuple<int64_t, int64_t, int>>> seen;  // element -> (a, b, flags)
    const auto ov = loop_values(src, l);
    for (size_t a = 0; a < ov.size(); ++a) {
      env[l.var] = ov[a];
      const auto iv = loop_values(src, in);
      for (size_t b = 0; b < iv.size(); ++b) {
        env[in.var] = iv[b];
        for (const auto &[el, f] : touches_of(src, in.body, env)) {
          for (const auto &[pa, pb, pf] : seen[el])
            if (((pf | f) & kWrite) && pa < static_cast<int64_t>(a) && pb > static_cast<int64_t>(b)) {
              legal = false;
              blocker = el.first;
            }
          seen[el].emplace_back(a, b, f);
        }
      }
    }
  });
  if (!legal) return reject("interchange reverses a dependence on " + blocker);

  std::swap(outer.label, inner.label);
  std::swap(outer.var, inner.var);
  std::swap(outer.start, inner.start);
  std::swap(outer.stop, inner.stop);
  std::swap(outer.step, inner.step);
  return accept(std::move(k));
}

TransformResult do_pad(const Kernel &src, const Transform &t) {
  Kernel k = src;
  auto site = find_site(k, t.loops.at(0));
  if (!site) return reject("unknown loop " + t.loops[0]);
  Loop &l = site->loop();
  if (!l.constant_bounds()) return reject("variable loop bound");
  if (l.step <= 0) return reject("padding needs an ascending loop");
  const int64_t trip = l.trip_count();
  if (trip == 0 || t.value <= trip) return reject("new trip count must exceed " + std::to_string(trip));
  Guard g;
  g.var = l.var;
  g.cmp = GuardCmp::Lt;
  g.value = l.stop.constant;
  g.body = std::move(l.body);
  g.line = l.line;
  l.body.clear();
  l.body.push_back(Node{std::move(g)});
  l.stop.constant = l.start + t.value * l.step;
  return accept(std::move(k));
}

TransformResult do_fuse(const Kernel &src, const Transform &t) {
  if (t.loops.size() != 2) return reject("fusion needs two loops");
  Kernel k = src;
  auto site = find_site(k, t.loops[0]);
  if (!site) return reject("unknown loop " + t.loops[0]);
  std::vector<Node> &body = *site->body;
  const size_t i = site->index;
  if (i + 1 >= body.size() || !body[i + 1].is_loop() || body[i + 1].loop().label != t.loops[1])
    return reject(t.loops[1] + " does not immediately follow " + t.loops[0]);
  Loop &a = body[i].loop();
  Loop b = body[i + 1].loop();
  if (!a.constant_bounds() || !b.constant_bounds()) return reject("variable loop bound");
  if (a.trip_count() != b.trip_count()) return reject("trip counts differ");
  if (has_loop_var(b.body, a.var)) return reject("loop variable " + a.var + " reused inside " + b.label);

  {
    std::vector<Node> both = a.body;
    for (const auto &n : b.body) both.push_back(n);
    auto acc_a = static_accesses(k, a.body), acc_b = static_accesses(k, b.body);
    std::set<std::string> arrays_a, arrays_b;
    for (const auto &x : acc_a) arrays_a.insert(x.array);
    for (const auto &x : acc_b) arrays_b.insert(x.array);
    for (const auto &arr : non_affine_written(k, both))
      if (arrays_a.count(arr) && arrays_b.count(arr)) return reject("non-affine subscript on " + arr);
  }

  bool legal = true;
  std::string blocker;
  for_each_instance_of(src, a.label, [&](const Loop &la, const Env &env) {
    if (!legal) return;
    // The sibling shares the enclosing environment.
    const auto ma = iteration_maps(src, la, env);
    const auto mb = iteration_maps(src, b, env);
    for (size_t x = 0; x < ma.size() && legal; ++x)
      for (size_t y = 0; y < x && legal; ++y)
        for (const auto &[el, f] : ma[x]) {
          auto it = mb[y].find(el);
          if (it != mb[y].end() && ((f | it->second) & kWrite)) {
            legal = false;
            blocker = el.first;
            break;
          }
        }
  });
  if (!legal) return reject("fusion-preventing dependence on " + blocker);

  if (a.start == b.start && a.step == b.step) {
    substitute_loop_var(b.body, b.var, Expr::loop_var(a.var));
    rename_guards(b.body, b.var, a.var);
  } else if (a.start == 0 && a.step == 1 && !contains_guard(b.body, &b.var)) {
    substitute_loop_var(b.body, b.var, affine_expr(b.start, b.step, a.var));
  } else {
    return reject("iteration spaces are not aligned");
  }
  for (auto &n : b.body) a.body.push_back(std::move(n));
  body.erase(body.begin() + static_cast<std::ptrdiff_t>(i) + 1);
  return accept(std::move(k));
}

TransformResult do_perfectize(const Kernel &src, const Transform &t) {
  Kernel k = src;
  auto site = find_site(k, t.loops.at(0));
  if (!site) return reject("unknown loop " + t.loops[0]);
  Loop &l = site->loop();
  size_t inner_at = l.body.size();
  for (size_t i = 0; i < l.body.size(); ++i) {
    const Node &n = l.body[i];
    if (n.is_loop()) {
      if (inner_at != l.body.size()) return reject("more than one inner loop");
      inner_at = i;
    } else if (!n.is_statement()) {
      return reject("body holds branches or calls");
    }
  }
  if (inner_at == l.body.size()) return reject("no inner loop");
  if (l.body.size() == 1) return reject("already a perfect nest");
  Loop inner = l.body[inner_at].loop();
  if (!inner.constant_bounds() || inner.trip_count() == 0) return reject("inner loop needs a constant nonzero trip count");
  std::vector<Node> pre(l.body.begin(), l.body.begin() + static_cast<std::ptrdiff_t>(inner_at));
  std::vector<Node> post(l.body.begin() + static_cast<std::ptrdiff_t>(inner_at) + 1, l.body.end());
  if (defines_locals(pre) || defines_locals(post)) return reject("statements outside the inner loop define locals");

  std::vector<Node> body;
  if (!pre.empty()) body.push_back(Node{Guard{inner.var, GuardCmp::Eq, inner.start, std::move(pre), l.line}});
  for (auto &n : inner.body) body.push_back(std::move(n));
  if (!post.empty())
    body.push_back(Node{Guard{inner.var, GuardCmp::Eq, inner.value_at(inner.trip_count() - 1), std::move(post), l.line}});
  inner.body = std::move(body);
  l.body.clear();
  l.body.push_back(Node{std::move(inner)});
  return accept(std::move(k));
}

bool guards_hold_only_statements(const std::vector<Node> &body, bool inside_guard) {
  for (const auto &n : body) {
    if (n.is_guard() && !guards_hold_only_statements(n.guard().body, true)) return false;
    if (n.is_loop() && (inside_guard || !guards_hold_only_statements(n.loop().body, false))) return false;
    if (n.is_call() && inside_guard) return false;
  }
  return true;
}

TransformResult do_branch_eliminate(const Kernel &src, const Transform &t) {
  Kernel k = src;
  auto site = find_site(k, t.loops.at(0));
  if (!site) return reject("unknown loop " + t.loops[0]);
  Loop &l = site->loop();
  if (!contains_guard(l.body)) return reject("no branches");
  if (!guards_hold_only_statements(l.body, false)) return reject("branch encloses a loop or call");
  bool in_bounds = true;
  for_each_instance_of(src, l.label, [&](const Loop &inst, const Env &env) {
    std::vector<Node> one{Node{inst}};
    in_bounds = in_bounds && all_in_bounds(src, one, env, true);
  });
  if (!in_bounds) return reject("a predicated access would leave array bounds");
  auto names = all_names(k);
  std::vector<Predicate> preds;
  predicate_body(l.body, preds, true, k, names);
  return accept(std::move(k));
}

bool power_of_two(u128 v, int &log2) {
  if (v < 2 || (v & (v - 1)) != 0) return false;
  log2 = 0;
  while ((u128{1} << log2) != v) ++log2;
  return true;
}

int reduce_strength(std::vector<Node> &body) {
  int changed = 0;
  auto fix = [&](Expr &e) {
    if (e.op != Op::Mul || e.width == 0) return;
    int sh = 0;
    for (int side = 0; side < 2; ++side) {
      const Expr &c = e.args[side];
      if (c.op == Op::Const && power_of_two(c.value, sh)) {
        Expr other = e.args[1 - side];
        e = Expr::shift(Op::Shl, std::move(other), Expr::constant(static_cast<u128>(sh)));
        ++changed;
        return;
      }
    }
  };
  for_each_statement(body, [&](Statement &s) { rewrite_expr(s.rhs, fix); });
  return changed;
}

TransformResult do_strength_reduce(const Kernel &src, const Transform &) {
  Kernel k = src;
  int changed = reduce_strength(k.body);
  for (auto &f : k.functions) changed += reduce_strength(f.body);
  if (!changed) return reject("no multiplication by a power of two");
  return accept(std::move(k));
}

TransformResult do_tile(const Kernel &src, const Transform &t) {
  Kernel k = src;
  auto site = find_site(k, t.loops.at(0));
  if (!site) return reject("unknown loop " + t.loops[0]);
  Loop &l = site->loop();
  if (!l.constant_bounds()) return reject("variable loop bound");
  const int64_t trip = l.trip_count(), f = t.value;
  if (f < 2 || f >= trip || trip % f != 0) return reject("tile factor must divide the trip count");
  if (contains_guard(l.body, &l.var)) return reject("body branches on " + l.var);

  auto names = all_names(k);
  Loop inner;
  inner.label = fresh(names, l.label + "_t");
  inner.var = fresh(names, l.var + "_t");
  inner.start = 0;
  inner.stop.constant = f;
  inner.step = 1;
  inner.line = l.line;
  inner.body = std::move(l.body);
  substitute_loop_var(inner.body, l.var, index_sum(l.start, {{l.step * f, l.var}, {l.step, inner.var}}));
  l.body.clear();
  l.body.push_back(Node{std::move(inner)});
  l.start = 0;
  l.stop.constant = trip / f;
  l.step = 1;
  return accept(std::move(k));
}

TransformResult do_outline(const Kernel &src, const Transform &t) {
  const auto groups = find_outline_groups(src);
  if (t.value < 0 || t.value >= static_cast<int64_t>(groups.size())) return reject("no outline group " + std::to_string(t.value));
  const OutlineGroup &g = groups[static_cast<size_t>(t.value)];
  Kernel k = src;
  auto names = all_names(k);

  // Subscript literals of every block, in walk order.
  std::vector<std::vector<int64_t>> lits(g.blocks);
  for (size_t b = 0; b < g.blocks; ++b)
    for (size_t j = 0; j < g.block_size; ++j) {
      Statement s = src.body[g.first + b * g.block_size + j].stmt();
      walk_literals(s, [&](Expr &lit, bool idx) {
        if (idx && lit.op == Op::Const) lits[b].push_back(static_cast<int64_t>(lit.value));
      });
    }
  const size_t ncol = lits[0].size();
  std::map<std::vector<int64_t>, size_t> param_of;
  std::vector<std::vector<int64_t>> param_cols;
  std::vector<int> col_param(ncol, -1);
  for (size_t c = 0; c < ncol; ++c) {
    std::vector<int64_t> col;
    for (size_t b = 0; b < g.blocks; ++b) col.push_back(lits[b][c]);
    if (std::all_of(col.begin(), col.end(), [&](int64_t v) { return v == col[0]; })) continue;
    auto [it, inserted] = param_of.emplace(col, param_cols.size());
    if (inserted) param_cols.push_back(col);
    col_param[c] = static_cast<int>(it->second);
  }

  Function fn;
  fn.name = fresh(names, "fn" + std::to_string(k.functions.size()));
  for (size_t p = 0; p < param_cols.size(); ++p) fn.index_params.push_back(fresh(names, "p" + std::to_string(p)));
  size_t c = 0;
  for (size_t j = 0; j < g.block_size; ++j) {
    Statement s = src.body[g.first + j].stmt();
    walk_literals(s, [&](Expr &lit, bool idx) {
      if (!idx || lit.op != Op::Const) return;
      if (col_param[c] >= 0) lit = Expr::loop_var(fn.index_params[static_cast<size_t>(col_param[c])]);
      ++c;
    });
    fn.body.push_back(Node{std::move(s)});
  }

  std::vector<Node> body(k.body.begin(), k.body.begin() + static_cast<std::ptrdiff_t>(g.first));
  for (size_t b = 0; b < g.blocks; ++b) {
    CallSite call;
    call.callee = fn.name;
    for (const auto &col : param_cols) call.args.push_back(col[b]);
    call.line = src.body[g.first + b * g.block_size].stmt().line;
    body.push_back(Node{std::move(call)});
  }
  for (size_t i = g.first + g.blocks * g.block_size; i < k.body.size(); ++i) body.push_back(k.body[i]);
  k.body = std::move(body);
  k.functions.push_back(std::move(fn));
  return accept(std::move(k));
}

// ---- loop summaries --------------------------------------------------------------

void summarize(const Kernel &k, const std::vector<Node> &body, const std::string &parent, int depth,
               std::vector<LoopSummary> &out) {
  for (const auto &n : body) {
    if (n.is_guard()) {
      summarize(k, n.guard().body, parent, depth, out);
      continue;
    }
    if (!n.is_loop()) continue;
    const Loop &l = n.loop();
    LoopSummary s;
    s.label = l.label;
    s.var = l.var;
    s.parent = parent;
    s.depth = depth;
    s.trip = static_cast<int64_t>(loop_values(k, l).size());
    s.perfect_nest = perfect(l);
    s.has_guards = contains_guard(l.body);
    s.defines_locals = defines_locals(l.body);
    for (const auto &a : static_accesses(k, l.body)) {
      (a.write ? s.written_arrays : s.read_arrays).insert(a.array);
      auto aff = as_affine(*a.index);
      if (!aff) {
        s.non_affine.insert(a.array);
      } else if (const int64_t c = aff->coeff(l.var); c != 0 && !s.stride.count(a.array)) {
        s.stride[a.array] = c;
      }
    }
    for (const auto &a : s.non_affine)
      if (s.written_arrays.count(a)) s.carried_arrays.insert(a);
    if (!s.carried_arrays.empty()) {
      s.carried = true;
      s.distance = 1;
    }
    out.push_back(std::move(s));
    summarize(k, l.body, l.label, depth + 1, out);
  }
}

}  // namespace

LoopInfo analyze_loops(const StructuredProgram &s) {
  LoopInfo info;
  summarize(s, s.body, "", 1, info.loops);
  for (const auto &f : s.functions) summarize(s, f.body, "", 1, info.loops);
  std::map<std::string, size_t> at;
  for (size_t i = 0; i < info.loops.size(); ++i) at[info.loops[i].label] = i;

  Env env;
  for_each_instance(s, s.body, env, [&](const Loop &l, const Env &outer) {
    LoopSummary &sum = info.loops[at.at(l.label)];
    const auto maps = iteration_maps(s, l, outer);
    std::map<Element, std::vector<std::pair<size_t, int>>> by_element;
    for (size_t it = 0; it < maps.size(); ++it)
      for (const auto &[el, f] : maps[it]) by_element[el].emplace_back(it, f);
    for (const auto &[el, hits] : by_element)
      for (size_t x = 0; x < hits.size(); ++x)
        for (size_t y = x + 1; y < hits.size(); ++y) {
          if (!((hits[x].second | hits[y].second) & kWrite)) continue;
          const int64_t d = static_cast<int64_t>(hits[y].first - hits[x].first);
          sum.carried = true;
          sum.carried_arrays.insert(el.first);
          sum.distance = sum.distance == 0 ? d : std::min(sum.distance, d);
        }
  });
  info.outline_groups = find_outline_groups(s);
  return info;
}

StructuredProgram staticize_bounds(const StructuredProgram &s) {
  bool variable = false;
  std::function<void(const std::vector<Node> &)> scan = [&](const std::vector<Node> &b) {
    for (const auto &n : b) {
      if (n.is_loop()) {
        variable = variable || !n.loop().constant_bounds();
        scan(n.loop().body);
      } else if (n.is_guard()) {
        scan(n.guard().body);
      }
    }
  };
  scan(s.body);
  for (const auto &f : s.functions) scan(f.body);
  if (!variable) return s;

  Kernel k = s;
  auto names = all_names(k);
  std::vector<Predicate> preds;
  std::function<void(std::vector<Node> &)> walk = [&](std::vector<Node> &body) {
    std::vector<Node> out;
    for (auto &n : body) {
      if (n.is_statement()) {
        for (auto &st : predicate(n.stmt(), preds, k, names)) out.push_back(Node{std::move(st)});
        continue;
      }
      if (n.is_loop()) {
        Loop &l = n.loop();
        bool pushed = false;
        if (l.stop.is_param()) {
          const Param *p = k.find_param(l.stop.param);
          if (!p || !p->max) throw IrError("variable bound " + l.stop.param + " has no declared maximum");
          preds.push_back({l.step > 0 ? Predicate::Kind::BelowParam : Predicate::Kind::AboveParam, l.var, 0, p->name,
                           p->type.bits});
          l.stop = LoopBound{l.step > 0 ? *p->max : 0, {}};
          pushed = true;
        }
        walk(l.body);
        if (pushed) preds.pop_back();
      } else if (n.is_guard()) {
        walk(n.guard().body);
      }
      out.push_back(std::move(n));
    }
    body = std::move(out);
  };
  walk(k.body);
  for (auto &f : k.functions) walk(f.body);
  if (!all_in_bounds(k, k.body, {}, false)) throw IrError("extra iterations after staticizing would leave array bounds");
  check_kernel(k);
  return k;
}

const char *transform_name(Transform::Kind k) {
  switch (k) {
    case Transform::Kind::Outline: return "outline";
    case Transform::Kind::Interchange: return "interchange";
    case Transform::Kind::Pad: return "pad";
    case Transform::Kind::Fuse: return "fuse";
    case Transform::Kind::Perfectize: return "perfectize";
    case Transform::Kind::BranchEliminate: return "branch-eliminate";
    case Transform::Kind::StrengthReduce: return "strength-reduce";
    case Transform::Kind::Tile: return "tile";
  }
  return "?";
}

std::string Transform::describe() const {
  std::string out = transform_name(kind);
  std::vector<std::string> args = loops;
  if (kind == Kind::Pad || kind == Kind::Tile || kind == Kind::Outline) args.push_back(std::to_string(value));
  if (args.empty()) return out;
  out += "(";
  for (size_t i = 0; i < args.size(); ++i) out += (i ? "," : "") + args[i];
  return out + ")";
}

nlohmann::json Transform::to_json() const {
  nlohmann::json j = {{"kind", transform_name(kind)}, {"loops", loops}};
  if (kind == Kind::Pad || kind == Kind::Tile || kind == Kind::Outline) j["value"] = value;
  return j;
}

TransformResult apply_transform(const StructuredProgram &s, const Transform &t) {
  if (t.kind != Transform::Kind::StrengthReduce && t.kind != Transform::Kind::Outline && t.loops.empty())
    return reject("no loop given");
  switch (t.kind) {
    case Transform::Kind::Outline: return do_outline(s, t);
    case Transform::Kind::Interchange: return do_interchange(s, t);
    case Transform::Kind::Pad: return do_pad(s, t);
    case Transform::Kind::Fuse: return do_fuse(s, t);
    case Transform::Kind::Perfectize: return do_perfectize(s, t);
    case Transform::Kind::BranchEliminate: return do_branch_eliminate(s, t);
    case Transform::Kind::StrengthReduce: return do_strength_reduce(s, t);
    case Transform::Kind::Tile: return do_tile(s, t);
  }
  return reject("unknown transform");
}

// ---- variant enumeration ---------------------------------------------------------

namespace {

using Kind = Transform::Kind;

bool try_apply(StructuredProgram &p, const Transform &t, std::vector<Transform> &log) {
  auto r = apply_transform(p, t);
  if (!r.ok) return false;
  p = std::move(r.program);
  log.push_back(t);
  return true;
}

/// Sibling loop pairs (adjacent nodes) anywhere in the program.
void adjacent_pairs(const std::vector<Node> &body, std::vector<std::pair<const Loop *, const Loop *>> &out) {
  for (size_t i = 0; i < body.size(); ++i) {
    const Node &n = body[i];
    if (n.is_loop()) {
      if (i + 1 < body.size() && body[i + 1].is_loop()) out.emplace_back(&n.loop(), &body[i + 1].loop());
      adjacent_pairs(n.loop().body, out);
    } else if (n.is_guard()) {
      adjacent_pairs(n.guard().body, out);
    }
  }
}

std::vector<Transform> apply_stage(StructuredProgram &p, Kind stage) {
  std::vector<Transform> log;
  switch (stage) {
    case Kind::Outline: {
      const auto groups = find_outline_groups(p);
      for (size_t g = groups.size(); g-- > 0;) try_apply(p, {Kind::Outline, {}, static_cast<int64_t>(g)}, log);
      std::reverse(log.begin(), log.end());
      break;
    }
    case Kind::Interchange: {
      std::set<std::string> touched;
      for (const auto &l : analyze_loops(p).loops) {
        if (touched.count(l.label)) continue;
        auto site = find_site(p, l.label);
        if (!site || site->loop().body.size() != 1 || !site->loop().body[0].is_loop()) continue;
        const std::string inner = site->loop().body[0].loop().label;
        if (try_apply(p, {Kind::Interchange, {l.label, inner}, 0}, log)) touched.insert(inner);
      }
      break;
    }
    case Kind::Pad: {
      std::vector<std::pair<const Loop *, const Loop *>> pairs;
      adjacent_pairs(p.body, pairs);
      std::vector<Transform> todo;
      for (const auto &[a, b] : pairs) {
        if (!a->constant_bounds() || !b->constant_bounds()) continue;
        const int64_t ta = a->trip_count(), tb = b->trip_count();
        if (ta == tb || ta == 0 || tb == 0) continue;
        todo.push_back(ta < tb ? Transform{Kind::Pad, {a->label}, tb} : Transform{Kind::Pad, {b->label}, ta});
      }
      for (const auto &t : todo) try_apply(p, t, log);
      break;
    }
    case Kind::Fuse: {
      std::set<std::pair<std::string, std::string>> rejected;
      for (bool progress = true; progress;) {
        progress = false;
        std::vector<std::pair<const Loop *, const Loop *>> pairs;
        adjacent_pairs(p.body, pairs);
        for (const auto &[a, b] : pairs) {
          std::pair<std::string, std::string> key{a->label, b->label};
          if (rejected.count(key)) continue;
          const Transform t{Kind::Fuse, {a->label, b->label}, 0};
          if (try_apply(p, t, log)) {
            progress = true;
            break;
          }
          rejected.insert(key);
        }
      }
      break;
    }
    case Kind::Perfectize:
    case Kind::BranchEliminate: {
      for (const auto &label : loop_labels(p)) try_apply(p, {stage, {label}, 0}, log);
      break;
    }
    case Kind::StrengthReduce: try_apply(p, {Kind::StrengthReduce, {}, 0}, log); break;
    case Kind::Tile: break;
  }
  return log;
}

std::vector<Transform> apply_tiling(StructuredProgram &p, int64_t factor) {
  std::vector<Transform> log;
  std::vector<std::string> innermost;
  for_each_loop(p.body, [&](const Loop &l, int) {
    if (!contains_loop(l.body)) innermost.push_back(l.label);
  });
  for (const auto &label : innermost) try_apply(p, {Kind::Tile, {label}, factor}, log);
  return log;
}

}  // namespace

std::vector<Variant> enumerate_variants(const StructuredProgram &s, const ExplorerConfig &cfg,
                                        std::vector<std::string> *warnings) {
  static const Kind stages[] = {Kind::Outline,    Kind::Interchange,     Kind::Pad,           Kind::Fuse,
                                Kind::Perfectize, Kind::BranchEliminate, Kind::StrengthReduce};
  constexpr size_t kStages = sizeof(stages) / sizeof(stages[0]);
  std::vector<Variant> out;
  std::set<std::string> seen;
  bool capped = false;

  auto emit = [&](const StructuredProgram &p, const std::vector<Transform> &log) {
    if (static_cast<int>(out.size()) >= cfg.max_variants) {
      capped = true;
      return;
    }
    if (seen.insert(canonical_form(p)).second) out.push_back({p, log});
  };

  // Skip-before-apply depth-first order: the untransformed program comes first.
  std::function<void(size_t, const StructuredProgram &, const std::vector<Transform> &)> dfs =
      [&](size_t stage, const StructuredProgram &p, const std::vector<Transform> &log) {
        if (capped) return;
        if (stage == kStages) {
          emit(p, log);
          for (int64_t f : cfg.tile_factors) {
            StructuredProgram q = p;
            auto applied = apply_tiling(q, f);
            if (applied.empty()) continue;
            auto full = log;
            full.insert(full.end(), applied.begin(), applied.end());
            emit(q, full);
          }
          return;
        }
        dfs(stage + 1, p, log);
        StructuredProgram q = p;
        auto applied = apply_stage(q, stages[stage]);
        if (applied.empty()) return;
        auto full = log;
        full.insert(full.end(), applied.begin(), applied.end());
        dfs(stage + 1, q, full);
      };
  dfs(0, s, {});
  if (capped && warnings) warnings->push_back("variant cap of " + std::to_string(cfg.max_variants) + " reached");
  return out;
}

// ---- pragma enumeration ----------------------------------------------------------

std::vector<PragmaConfig> enumerate_pragmas(const StructuredProgram &v, const LoopInfo &info, const ExplorerConfig &cfg,
                                            const EstimatorParams &params, std::vector<std::string> *warnings) {
  struct Choice {
    int64_t unroll;
    bool pipeline;
  };
  std::vector<std::vector<Choice>> options;
  for (const auto &l : info.loops) {
    std::vector<Choice> opts;
    for (int64_t f : divisors(l.trip, cfg.max_unroll)) {
      opts.push_back({f, false});
      opts.push_back({f, true});
    }
    options.push_back(std::move(opts));
  }

  // Arrays touched by some loop that carries a dependence are never marked.
  std::set<std::string> carried_anywhere;
  for (const auto &l : info.loops) carried_anywhere.insert(l.carried_arrays.begin(), l.carried_arrays.end());

  u128 total = 1;
  const u128 saturate = u128{1} << 100;
  for (const auto &o : options) total = std::min(saturate, total * o.size());
  const u128 cap = static_cast<u128>(std::max(1, cfg.max_pragma_sets));
  const u128 count = std::min(total, cap);
  if (total > cap && warnings)
    warnings->push_back("pragma cap of " + std::to_string(cfg.max_pragma_sets) + " reached for " + v.name + " (" +
                        to_string_u128(total) + " combinations sampled)");

  std::vector<PragmaConfig> out;
  std::set<PragmaConfig> seen;
  for (u128 k = 0; k < count; ++k) {
    u128 idx = total > cap ? k * total / cap : k;
    std::vector<Choice> pick(options.size());
    for (size_t li = options.size(); li-- > 0;) {
      const u128 radix = options[li].size();
      pick[li] = options[li][static_cast<size_t>(idx % radix)];
      idx /= radix;
    }
    PragmaConfig cfg_k;
    for (size_t li = 0; li < pick.size(); ++li) {
      const LoopSummary &l = info.loops[li];
      if (pick[li].unroll > 1) cfg_k.loops[l.label].unroll = static_cast<int>(pick[li].unroll);
      if (pick[li].unroll <= 1) continue;
      std::set<std::string> arrays = l.read_arrays;
      arrays.insert(l.written_arrays.begin(), l.written_arrays.end());
      for (const auto &a : arrays) {
        auto shape = v.array_shape(a);
        if (!shape || shape->second % pick[li].unroll != 0 || shape->second <= 1) continue;
        int &p = cfg_k.partition[a];
        p = std::max(p, static_cast<int>(pick[li].unroll));
      }
    }
    for (size_t li = 0; li < pick.size(); ++li) {
      if (!pick[li].pipeline) continue;
      const LoopSummary &l = info.loops[li];
      cfg_k.loops[l.label].pipeline_ii = static_cast<int>(min_ii(v, info, l.label, pick[li].unroll, cfg_k, params));
      for (const auto &a : l.written_arrays)
        if (l.read_arrays.count(a) && !carried_anywhere.count(a)) cfg_k.dependence_false.insert(a);
    }
    cfg_k.normalize();
    if (seen.insert(cfg_k).second) out.push_back(std::move(cfg_k));
  }
  return out;
}

// ---- design space ----------------------------------------------------------------

DesignSpace synthesize_design_space(const StructuredProgram &source, std::vector<Variant> variants,
                                    const std::vector<std::vector<PragmaConfig>> &pragma_sets, const ExplorerConfig &cfg) {
  DesignSpace ds;
  ds.source = source;
  const int n = static_cast<int>(variants.size());
  std::vector<char> ok(static_cast<size_t>(n), 0);
  std::vector<std::string> why(static_cast<size_t>(n));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      const auto v = check_equiv_serial(source, variants[static_cast<size_t>(i)].program, cfg.vectors, cfg.seed);
      ok[static_cast<size_t>(i)] = v.equivalent;
      if (!v.equivalent) why[static_cast<size_t>(i)] = "mismatch at " + v.counterexample->location;
    } catch (const std::exception &e) {
      why[static_cast<size_t>(i)] = e.what();
    }
  }

  int next_id = 0;
  for (int i = 0; i < n; ++i) {
    const size_t ui = static_cast<size_t>(i);
    if (!ok[ui]) {
      ++ds.dropped_variants;
      std::string desc;
      for (const auto &t : variants[ui].transforms) desc += (desc.empty() ? "" : " ") + t.describe();
      ds.warnings.push_back("variant " + std::to_string(i) + " [" + desc + "] dropped: " + why[ui]);
      continue;
    }
    const int vi = static_cast<int>(ds.variants.size());
    const std::string digest = digest_hex(canonical_form(variants[ui].program));
    std::vector<PragmaConfig> sets = ui < pragma_sets.size() ? pragma_sets[ui] : std::vector<PragmaConfig>{};
    if (sets.empty()) sets.emplace_back();
    for (const auto &p : sets) {
      DesignPoint d;
      d.id = next_id++;
      d.variant = vi;
      d.transforms = variants[ui].transforms;
      d.pragmas = p;
      d.program_digest = digest;
      ds.points.push_back(std::move(d));
    }
    ds.infos.push_back(analyze_loops(variants[ui].program));
    ds.variants.push_back(std::move(variants[ui]));
  }
  return ds;
}

DesignSpace explore(const StructuredProgram &source, const ExplorerConfig &cfg, const EstimatorParams &params) {
  std::vector<std::string> warnings;
  const StructuredProgram base = staticize_bounds(source);
  auto variants = enumerate_variants(base, cfg, &warnings);
  const int n = static_cast<int>(variants.size());
  std::vector<std::vector<PragmaConfig>> sets(static_cast<size_t>(n));
  std::vector<std::vector<std::string>> local_warnings(static_cast<size_t>(n));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    const size_t ui = static_cast<size_t>(i);
    const LoopInfo info = analyze_loops(variants[ui].program);
    sets[ui] = enumerate_pragmas(variants[ui].program, info, cfg, params, &local_warnings[ui]);
  }
  for (const auto &w : local_warnings) warnings.insert(warnings.end(), w.begin(), w.end());
  DesignSpace ds = synthesize_design_space(source, std::move(variants), sets, cfg);
  ds.warnings.insert(ds.warnings.begin(), warnings.begin(), warnings.end());
  estimate_all(ds, params);
  return ds;
}

}  // namespace rollhls
