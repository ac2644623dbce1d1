#include "rollhls/oracle.hpp"

#include <climits>
#include <map>
#include <set>

#include "rollhls/parser.hpp"

namespace rollhls {

namespace {

struct CIndex {
  Op op = Op::Const;
  int64_t value = 0;
  int slot = -1;
  std::vector<CIndex> args;
};

struct CExpr {
  Op op = Op::Const;
  int width = 0;
  u128 mask = 0;
  u128 value = 0;
  int slot = -1;   // register, scalar or index-variable slot
  int array = -1;  // Load
  CIndex index;    // Load index or shift amount
  std::vector<CExpr> args;
};

struct CTarget {
  bool element = false;
  int slot = -1;
  int array = -1;
  CIndex index;
};

struct CNode {
  enum class Kind { Stmt, Loop, Guard, Call } kind = Kind::Stmt;
  std::vector<CTarget> targets;
  CExpr rhs;
  int var = -1;
  int64_t start = 0, step = 1, stop = 0, value = 0;
  int stop_scalar = -1;
  GuardCmp cmp = GuardCmp::Lt;
  int fn = -1;
  std::vector<int64_t> args;
  std::vector<CNode> body;
};

struct CArray {
  std::string name;
  int64_t offset = 0;
  int64_t length = 0;
  u128 mask = 0;
};

struct CFunction {
  std::vector<int> params;
  std::vector<CNode> body;
};

struct State {
  std::vector<u128> regs;
  std::vector<u128> mem;
  std::vector<u128> scalars;
  std::vector<int64_t> ivars;
};

int64_t eval_index(const CIndex &e, const State &s) {
  switch (e.op) {
    case Op::Const: return e.value;
    case Op::LoopVar: return s.ivars[e.slot];
    default: break;
  }
  const int64_t a = eval_index(e.args[0], s);
  const int64_t b = eval_index(e.args[1], s);
  switch (e.op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::And: return a & b;
    case Op::Or: return a | b;
    case Op::Xor: return a ^ b;
    case Op::Shl: return b >= 63 || b < 0 ? 0 : a << b;
    case Op::Shr: return b >= 63 || b < 0 ? (a < 0 ? -1 : 0) : a >> b;
    default: throw IrError("bad index expression");
  }
}

}  // namespace

struct CompiledKernel::Impl {
  std::vector<CArray> arrays;
  std::vector<int> param_array;   // per param: array id or -1
  std::vector<int> param_scalar;  // per param: scalar slot or -1
  std::vector<CFunction> functions;
  std::vector<CNode> body;
  size_t regs = 0, mem = 0, ivars = 0, scalars = 0;

  std::map<std::string, int> reg_slot, ivar_slot, array_id, scalar_slot, fn_id;

  int ivar(const std::string &n) {
    auto [it, inserted] = ivar_slot.emplace(n, static_cast<int>(ivar_slot.size()));
    (void)inserted;
    ivars = ivar_slot.size();
    return it->second;
  }

  CIndex index(const Expr &e) {
    CIndex c;
    c.op = e.op;
    if (e.op == Op::Const) c.value = static_cast<int64_t>(e.value);
    else if (e.op == Op::LoopVar) c.slot = ivar(e.name);
    else
      for (const auto &a : e.args) c.args.push_back(index(a));
    return c;
  }

  CExpr expr(const Expr &e) {
    CExpr c;
    c.op = e.op;
    c.width = e.width;
    c.mask = ScalarType{e.width ? e.width : 128}.mask();
    c.value = e.value;
    switch (e.op) {
      case Op::Local: c.slot = reg_slot.at(e.name); break;
      case Op::Scalar: c.slot = scalar_slot.at(e.name); break;
      case Op::LoopVar: c.slot = ivar(e.name); break;
      case Op::Load:
        c.array = array_id.at(e.name);
        c.index = index(e.args[0]);
        break;
      case Op::Hole: throw IrError("cannot evaluate a template hole");
      case Op::Shl:
      case Op::Shr:
        c.args.push_back(expr(e.args[0]));
        c.index = index(e.args[1]);
        break;
      default:
        for (const auto &a : e.args) c.args.push_back(expr(a));
    }
    return c;
  }

  std::vector<CNode> block(const std::vector<Node> &nodes) {
    std::vector<CNode> out;
    for (const auto &n : nodes) {
      CNode c;
      if (n.is_statement()) {
        c.kind = CNode::Kind::Stmt;
        for (const auto &t : n.stmt().targets) {
          CTarget ct;
          ct.element = t.kind == LValue::Kind::Element;
          if (ct.element) {
            ct.array = array_id.at(t.name);
            ct.index = index(t.index);
          } else {
            ct.slot = reg_slot.at(t.name);
          }
          c.targets.push_back(std::move(ct));
        }
        c.rhs = expr(n.stmt().rhs);
      } else if (n.is_loop()) {
        const Loop &l = n.loop();
        c.kind = CNode::Kind::Loop;
        c.var = ivar(l.var);
        c.start = l.start;
        c.step = l.step;
        if (l.stop.is_param()) c.stop_scalar = scalar_slot.at(l.stop.param);
        else c.stop = l.stop.constant;
        c.body = block(l.body);
      } else if (n.is_guard()) {
        const Guard &g = n.guard();
        c.kind = CNode::Kind::Guard;
        c.var = ivar(g.var);
        c.cmp = g.cmp;
        c.value = g.value;
        c.body = block(g.body);
      } else {
        c.kind = CNode::Kind::Call;
        auto it = fn_id.find(n.call().callee);
        if (it == fn_id.end()) throw IrError("call to undefined function " + n.call().callee);
        c.fn = it->second;
        c.args = n.call().args;
      }
      out.push_back(std::move(c));
    }
    return out;
  }

  explicit Impl(const Kernel &k) {
    for (const auto &l : k.locals) reg_slot.emplace(l.name, static_cast<int>(reg_slot.size()));
    regs = reg_slot.size();
    auto add_array = [&](const std::string &name, ScalarType t, int64_t len) {
      array_id[name] = static_cast<int>(arrays.size());
      arrays.push_back({name, static_cast<int64_t>(mem), len, t.mask()});
      mem += static_cast<size_t>(len);
      return static_cast<int>(arrays.size()) - 1;
    };
    for (const auto &p : k.params) {
      if (p.is_array()) {
        param_array.push_back(add_array(p.name, p.type, p.length));
        param_scalar.push_back(-1);
      } else {
        param_array.push_back(-1);
        scalar_slot[p.name] = static_cast<int>(scalars);
        param_scalar.push_back(static_cast<int>(scalars++));
      }
    }
    for (const auto &a : k.arrays) add_array(a.name, a.elem, a.length);
    for (size_t i = 0; i < k.functions.size(); ++i) fn_id[k.functions[i].name] = static_cast<int>(i);
    functions.resize(k.functions.size());
    for (size_t i = 0; i < k.functions.size(); ++i) {
      for (const auto &p : k.functions[i].index_params) functions[i].params.push_back(ivar(p));
      functions[i].body = block(k.functions[i].body);
    }
    body = block(k.body);
  }

  int64_t element(int array, const CIndex &idx, const State &s) const {
    const int64_t i = eval_index(idx, s);
    const CArray &a = arrays[array];
    if (i < 0 || i >= a.length)
      throw IrError("index " + std::to_string(i) + " out of bounds for " + a.name + "[" + std::to_string(a.length) + "]");
    return a.offset + i;
  }

  u128 value(const CExpr &e, State &s) const {
    switch (e.op) {
      case Op::Const: return e.value;
      case Op::Local: return s.regs[e.slot];
      case Op::Scalar: return s.scalars[e.slot];
      case Op::LoopVar: return static_cast<u128>(static_cast<__int128>(s.ivars[e.slot])) & e.mask;
      case Op::Load: return s.mem[element(e.array, e.index, s)];
      case Op::Not: return ~value(e.args[0], s) & e.mask;
      case Op::Trunc: return value(e.args[0], s) & e.mask;
      case Op::ZExt: return value(e.args[0], s);
      case Op::Add: return (value(e.args[0], s) + value(e.args[1], s)) & e.mask;
      case Op::Sub: return (value(e.args[0], s) - value(e.args[1], s)) & e.mask;
      case Op::Mul: return (value(e.args[0], s) * value(e.args[1], s)) & e.mask;
      case Op::And: return value(e.args[0], s) & value(e.args[1], s);
      case Op::Or: return value(e.args[0], s) | value(e.args[1], s);
      case Op::Xor: return value(e.args[0], s) ^ value(e.args[1], s);
      case Op::Shl:
      case Op::Shr: {
        const u128 v = value(e.args[0], s);
        const int64_t amt = eval_index(e.index, s);
        if (amt < 0 || amt >= e.width) return 0;
        return e.op == Op::Shl ? (v << amt) & e.mask : v >> amt;
      }
      case Op::CmovNZ: {
        const u128 f = value(e.args[0], s);
        return f != 0 ? value(e.args[2], s) : value(e.args[1], s);
      }
      default: throw IrError(std::string(op_name(e.op)) + " used as a single value");
    }
  }

  void pair(const CExpr &e, State &s, u128 &r0, u128 &r1) const {
    const u128 m = e.mask;
    if (e.op == Op::MulWide) {
      const u128 a = value(e.args[0], s), b = value(e.args[1], s);
      const u128 p = a * b;  // W <= 64, so the product fits in 128 bits
      r0 = p >> e.width;
      r1 = p & m;
      return;
    }
    const u128 c = value(e.args[0], s) & 1;
    const u128 a = value(e.args[1], s), b = value(e.args[2], s);
    if (e.op == Op::AddCarry) {
      const u128 s1 = (a + b) & m;
      const bool c1 = s1 < a;
      const u128 s2 = (s1 + c) & m;
      const bool c2 = s2 < s1;
      r0 = s2;
      r1 = (c1 || c2) ? 1 : 0;
    } else {
      const u128 d1 = (a - b) & m;
      const bool b1 = a < b;
      const u128 d2 = (d1 - c) & m;
      const bool b2 = d1 < c;
      r0 = d2;
      r1 = (b1 || b2) ? 1 : 0;
    }
  }

  void store(const CTarget &t, u128 v, State &s) const {
    if (t.element) s.mem[element(t.array, t.index, s)] = v;
    else s.regs[t.slot] = v;
  }

  void exec(const std::vector<CNode> &nodes, State &s) const {
    for (const auto &n : nodes) {
      switch (n.kind) {
        case CNode::Kind::Stmt:
          if (n.targets.size() == 2) {
            u128 r0, r1;
            pair(n.rhs, s, r0, r1);
            store(n.targets[0], r0, s);
            store(n.targets[1], r1, s);
          } else {
            store(n.targets[0], value(n.rhs, s), s);
          }
          break;
        case CNode::Kind::Loop: {
          const int64_t stop = n.stop_scalar >= 0 ? static_cast<int64_t>(s.scalars[n.stop_scalar]) : n.stop;
          for (int64_t v = n.start; n.step > 0 ? v < stop : v > stop; v += n.step) {
            s.ivars[n.var] = v;
            exec(n.body, s);
          }
          break;
        }
        case CNode::Kind::Guard: {
          const int64_t v = s.ivars[n.var];
          if (n.cmp == GuardCmp::Lt ? v < n.value : v == n.value) exec(n.body, s);
          break;
        }
        case CNode::Kind::Call: {
          const CFunction &f = functions[n.fn];
          std::vector<int64_t> saved;
          for (size_t i = 0; i < f.params.size(); ++i) {
            saved.push_back(s.ivars[f.params[i]]);
            s.ivars[f.params[i]] = n.args[i];
          }
          exec(f.body, s);
          for (size_t i = f.params.size(); i-- > 0;) s.ivars[f.params[i]] = saved[i];
          break;
        }
      }
    }
  }
};

CompiledKernel::CompiledKernel(const Kernel &k) : impl_(std::make_unique<Impl>(k)) {}
CompiledKernel::~CompiledKernel() = default;
CompiledKernel::CompiledKernel(CompiledKernel &&) noexcept = default;
CompiledKernel &CompiledKernel::operator=(CompiledKernel &&) noexcept = default;

Outputs CompiledKernel::run(const InputVector &x) const {
  const Impl &m = *impl_;
  if (x.values.size() != m.param_array.size()) throw IrError("input vector does not match the kernel signature");
  State s;
  s.regs.assign(m.regs, 0);
  s.mem.assign(m.mem, 0);
  s.scalars.assign(m.scalars, 0);
  s.ivars.assign(m.ivars, 0);
  for (size_t i = 0; i < x.values.size(); ++i) {
    const auto &vals = x.values[i];
    if (m.param_scalar[i] >= 0) {
      if (vals.size() != 1) throw IrError("bound parameter needs exactly one value");
      s.scalars[m.param_scalar[i]] = vals[0];
      continue;
    }
    const CArray &a = m.arrays[m.param_array[i]];
    if (vals.empty()) continue;  // output array
    if (static_cast<int64_t>(vals.size()) != a.length) throw IrError("wrong element count for " + a.name);
    for (int64_t j = 0; j < a.length; ++j) {
      if (vals[j] > a.mask) throw IrError("input value out of range for " + a.name);
      s.mem[a.offset + j] = vals[j];
    }
  }
  m.exec(m.body, s);
  Outputs out;
  for (size_t i = 0; i < m.param_array.size(); ++i) {
    if (m.param_array[i] < 0 || !x.values[i].empty()) continue;
    const CArray &a = m.arrays[m.param_array[i]];
    out.emplace_back(s.mem.begin() + a.offset, s.mem.begin() + a.offset + a.length);
  }
  return out;
}

Outputs eval(const Kernel &k, const InputVector &x) { return CompiledKernel(k).run(x); }

namespace {

u128 random_value(std::mt19937_64 &rng, int width) {
  u128 v = rng();
  if (width > 64) v = (v << 64) | rng();
  return v & ScalarType{width}.mask();
}

int64_t bound_limit(const Param &p) { return p.max ? *p.max : 16; }

}  // namespace

InputVector random_input(const Kernel &k, std::mt19937_64 &rng) {
  InputVector x;
  for (const auto &p : k.params) {
    std::vector<u128> vals;
    if (p.kind == ParamKind::InArray) {
      for (int64_t i = 0; i < p.length; ++i) vals.push_back(random_value(rng, p.type.bits));
    } else if (p.kind == ParamKind::Bound) {
      vals.push_back(static_cast<u128>(rng() % static_cast<uint64_t>(bound_limit(p) + 1)) & p.type.mask());
    }
    x.values.push_back(std::move(vals));
  }
  return x;
}

std::vector<InputVector> corner_inputs(const Kernel &k) {
  auto fill = [&](auto element, bool zero_bound) {
    InputVector x;
    for (const auto &p : k.params) {
      std::vector<u128> vals;
      if (p.kind == ParamKind::InArray)
        for (int64_t i = 0; i < p.length; ++i) vals.push_back(element(p.type) & p.type.mask());
      else if (p.kind == ParamKind::Bound)
        vals.push_back(zero_bound ? 0 : static_cast<u128>(bound_limit(p)) & p.type.mask());
      x.values.push_back(std::move(vals));
    }
    return x;
  };
  std::vector<InputVector> out;
  bool has_bound = false;
  int widest = 0;
  for (const auto &p : k.params) {
    has_bound = has_bound || p.kind == ParamKind::Bound;
    if (p.kind == ParamKind::InArray) widest = std::max(widest, p.type.bits);
  }
  out.push_back(fill([](ScalarType) { return u128{0}; }, false));
  if (has_bound) out.push_back(fill([](ScalarType) { return u128{0}; }, true));
  out.push_back(fill([](ScalarType t) { return t.mask(); }, false));
  for (int b = 0; b < widest; ++b) out.push_back(fill([b](ScalarType) { return u128{1} << b; }, false));
  return out;
}

void require_same_signature(const Kernel &a, const Kernel &b) {
  bool same = a.params.size() == b.params.size();
  for (size_t i = 0; same && i < a.params.size(); ++i) {
    const Param &p = a.params[i], &q = b.params[i];
    same = p.kind == q.kind && p.type == q.type && (!p.is_array() || p.length == q.length);
  }
  if (!same) throw SignatureMismatch("kernel signatures differ: " + a.name + " vs " + b.name);
}

namespace {

std::vector<InputVector> test_vectors(const Kernel &k, int n, uint64_t seed) {
  std::vector<InputVector> xs = corner_inputs(k);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n; ++i) xs.push_back(random_input(k, rng));
  return xs;
}

// Evaluate one vector on both kernels; true when outputs agree.
bool agree(const CompiledKernel &a, const CompiledKernel &b, const InputVector &x) {
  try {
    return a.run(x) == b.run(x);
  } catch (const IrError &) {
    return false;
  }
}

Counterexample explain(const Kernel &ka, const CompiledKernel &a, const CompiledKernel &b, const InputVector &x) {
  Counterexample c;
  c.input = x;
  Outputs oa, ob;
  try {
    oa = a.run(x);
  } catch (const IrError &e) {
    c.location = std::string("first program failed: ") + e.what();
    return c;
  }
  try {
    ob = b.run(x);
  } catch (const IrError &e) {
    c.location = std::string("second program failed: ") + e.what();
    return c;
  }
  size_t out_idx = 0;
  for (const auto &p : ka.params) {
    if (p.kind != ParamKind::OutArray) continue;
    for (size_t j = 0; j < oa[out_idx].size(); ++j)
      if (oa[out_idx][j] != ob[out_idx][j]) {
        c.location = p.name + "[" + std::to_string(j) + "]";
        c.expected = oa[out_idx][j];
        c.actual = ob[out_idx][j];
        return c;
      }
    ++out_idx;
  }
  return c;
}

}  // namespace

EquivVerdict check_equiv(const Kernel &ka, const Kernel &kb, int n_vectors, uint64_t seed) {
  require_same_signature(ka, kb);
  const CompiledKernel a(ka), b(kb);
  const auto xs = test_vectors(ka, n_vectors, seed);
  const int total = static_cast<int>(xs.size());
  int first = INT_MAX;
#pragma omp parallel for schedule(dynamic, 8) reduction(min : first)
  for (int i = 0; i < total; ++i) {
    if (!agree(a, b, xs[i])) first = std::min(first, i);
  }
  EquivVerdict v;
  v.seed = seed;
  if (first == INT_MAX) {
    v.vectors_tested = total;
    return v;
  }
  v.equivalent = false;
  v.vectors_tested = first + 1;
  v.counterexample = explain(ka, a, b, xs[first]);
  return v;
}

EquivVerdict check_equiv_serial(const Kernel &ka, const Kernel &kb, int n_vectors, uint64_t seed) {
  require_same_signature(ka, kb);
  const CompiledKernel a(ka), b(kb);
  const auto xs = test_vectors(ka, n_vectors, seed);
  EquivVerdict v;
  v.seed = seed;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (!agree(a, b, xs[i])) {
      v.equivalent = false;
      v.vectors_tested = static_cast<int>(i) + 1;
      v.counterexample = explain(ka, a, b, xs[i]);
      return v;
    }
  }
  v.vectors_tested = static_cast<int>(xs.size());
  return v;
}

nlohmann::json verdict_to_json(const EquivVerdict &v, const Kernel &k) {
  nlohmann::json j = {{"equivalent", v.equivalent}, {"vectors_tested", v.vectors_tested}, {"seed", v.seed}};
  if (v.counterexample) {
    const Counterexample &c = *v.counterexample;
    nlohmann::json input = nlohmann::json::object();
    for (size_t i = 0; i < k.params.size() && i < c.input.values.size(); ++i) {
      if (k.params[i].kind == ParamKind::OutArray) continue;
      nlohmann::json vals = nlohmann::json::array();
      for (u128 x : c.input.values[i]) vals.push_back(to_hex_u128(x));
      input[k.params[i].name] = vals;
    }
    j["counterexample"] = {{"input", input},
                           {"location", c.location},
                           {"expected", to_hex_u128(c.expected)},
                           {"actual", to_hex_u128(c.actual)}};
  }
  return j;
}

// ---- unrolling --------------------------------------------------------------

namespace {

// Substitutes loop and call-parameter values and decides guards statically.
// Each iteration or call becomes a pseudo-loop scope ("#iter"/"#call") so the
// flattening pass can give its locals fresh names.
class GuardAwareUnroller {
 public:
  explicit GuardAwareUnroller(const Kernel &k) : k_(k) {}

  std::vector<Node> flatten(const std::vector<Node> &body, std::map<std::string, int64_t> &env) {
    std::vector<Node> out;
    for (const auto &n : body) {
      if (n.is_statement()) {
        Statement s = n.stmt();
        for (const auto &[var, v] : env) {
          for (auto &t : s.targets)
            if (t.kind == LValue::Kind::Element) substitute_loop_var(t.index, var, Expr::constant(static_cast<u128>(v), 0));
          substitute_loop_var(s.rhs, var, Expr::constant(static_cast<u128>(v), 0));
        }
        out.push_back(Node{std::move(s)});
      } else if (n.is_loop()) {
        const Loop &l = n.loop();
        if (l.stop.is_param()) throw IrError("cannot unroll loop " + l.label + " with variable bound " + l.stop.param);
        const int64_t trips = l.trip_count();
        std::vector<Node> iterations;
        for (int64_t it = 0; it < trips; ++it) {
          env[l.var] = l.value_at(it);
          auto flat = flatten(l.body, env);
          Node marker{Loop{}};
          marker.loop().label = "#iter";
          marker.loop().body = std::move(flat);
          iterations.push_back(std::move(marker));
        }
        env.erase(l.var);
        out.insert(out.end(), std::make_move_iterator(iterations.begin()), std::make_move_iterator(iterations.end()));
      } else if (n.is_guard()) {
        const Guard &g = n.guard();
        auto it = env.find(g.var);
        if (it == env.end()) throw IrError("guard on unbound variable " + g.var);
        const bool taken = g.cmp == GuardCmp::Lt ? it->second < g.value : it->second == g.value;
        if (taken) {
          auto flat = flatten(g.body, env);
          out.insert(out.end(), std::make_move_iterator(flat.begin()), std::make_move_iterator(flat.end()));
        }
      } else {
        const CallSite &c = n.call();
        const Function *f = k_.find_function(c.callee);
        if (!f) throw IrError("call to undefined function " + c.callee);
        if (++depth_ > 64) throw IrError("call nesting too deep");
        std::map<std::string, int64_t> inner;
        for (size_t i = 0; i < f->index_params.size(); ++i) inner[f->index_params[i]] = c.args[i];
        Node marker{Loop{}};
        marker.loop().label = "#call";
        marker.loop().body = flatten(f->body, inner);
        --depth_;
        out.push_back(std::move(marker));
      }
    }
    return out;
  }

 private:
  const Kernel &k_;
  int depth_ = 0;
};

}  // namespace

Program unroll(const StructuredProgram &s) {
  GuardAwareUnroller g(s);
  std::map<std::string, int64_t> env;
  Kernel staged = s;
  staged.body = g.flatten(s.body, env);
  staged.functions.clear();

  struct Flattener {
    std::set<std::string> taken;
    std::vector<LocalVar> locals;
    int scope_counter = 0;

    std::string fresh(const std::string &base, const std::string &suffix) {
      std::string name = suffix.empty() ? base : base + suffix;
      while (taken.count(name)) name += "_";
      taken.insert(name);
      return name;
    }

    void run(const std::vector<Node> &body, std::map<std::string, std::string> rename, const std::string &suffix,
             std::vector<Node> &out) {
      int iter = 0;
      for (const auto &n : body) {
        if (n.is_statement()) {
          Statement st = n.stmt();
          st.line = 0;
          rewrite_expr(st.rhs, [&](Expr &x) {
            if (x.op == Op::Local)
              if (auto it = rename.find(x.name); it != rename.end()) x.name = it->second;
          });
          for (auto &t : st.targets) {
            if (t.kind != LValue::Kind::Local) continue;
            const std::string name = fresh(t.name, suffix);
            locals.push_back({name, ScalarType{t.width}});
            rename[t.name] = name;
            t.name = name;
          }
          out.push_back(Node{std::move(st)});
        } else {
          const Loop &scope = n.loop();
          const std::string tag = scope.label == "#call" ? "_c" + std::to_string(scope_counter++) : "_" + std::to_string(iter++);
          run(scope.body, scope.label == "#call" ? std::map<std::string, std::string>{} : rename, suffix + tag, out);
        }
      }
    }
  };
  Flattener f;
  for (const auto &p : s.params) f.taken.insert(p.name);
  for (const auto &a : s.arrays) f.taken.insert(a.name);
  Program out;
  out.name = s.name;
  out.params = s.params;
  out.arrays = s.arrays;
  f.run(staged.body, {}, "", out.body);
  out.locals = std::move(f.locals);
  fold_indices(out.body);
  check_kernel(out);
  return out;
}

}  // namespace rollhls
