#include "rollhls/saturator.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "rollhls/parser.hpp"

namespace rollhls {

// ---- terms ------------------------------------------------------------------

RTerm RTerm::constant(int64_t v) {
  RTerm t;
  t.kind = Kind::Const;
  t.value = v;
  return t;
}

RTerm RTerm::range(int64_t start, int64_t stop, int64_t step) {
  if (step == 0 || (stop - start) % step != 0 || (stop - start) / step < 1) throw IrError("malformed range");
  RTerm t;
  t.kind = Kind::Range;
  t.start = start;
  t.stop = stop;
  t.step = step;
  return t;
}

RTerm RTerm::op(int template_id, std::vector<RTerm> args, bool frozen) {
  RTerm t;
  t.kind = Kind::Op;
  t.template_id = template_id;
  t.frozen = frozen;
  t.children = std::move(args);
  return t;
}

RTerm RTerm::seq(std::vector<RTerm> children) {
  RTerm t;
  t.kind = Kind::Seq;
  t.children = std::move(children);
  return t;
}

int64_t RTerm::trip_count() const { return (stop - start) / step + 1; }

int64_t RTerm::op_trip_count() const {
  int64_t n = 1;
  for (const auto &a : children) {
    if (a.kind != Kind::Range) continue;
    if (n != 1 && a.trip_count() != n) throw IrError("ranges of one operation disagree on trip count");
    n = a.trip_count();
  }
  return n;
}

std::string RTerm::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Const: os << value; break;
    case Kind::Range: os << "Range(" << start << "," << stop << "," << step << ")"; break;
    case Kind::Op:
    case Kind::Seq:
      os << (kind == Kind::Op ? "Op(T" + std::to_string(template_id) : std::string("Seq("));
      for (size_t i = 0; i < children.size(); ++i) os << (kind == Kind::Op || i ? "," : "") << children[i].to_string();
      os << ")";
      break;
  }
  return os.str();
}

bool RTerm::operator==(const RTerm &o) const {
  return kind == o.kind && template_id == o.template_id && frozen == o.frozen && value == o.value &&
         start == o.start && stop == o.stop && step == o.step && children == o.children;
}

bool RTerm::operator<(const RTerm &o) const {
  if (std::tie(kind, template_id, frozen, value, start, stop, step) !=
      std::tie(o.kind, o.template_id, o.frozen, o.value, o.start, o.stop, o.step))
    return std::tie(kind, template_id, frozen, value, start, stop, step) <
           std::tie(o.kind, o.template_id, o.frozen, o.value, o.start, o.stop, o.step);
  return std::lexicographical_compare(children.begin(), children.end(), o.children.begin(), o.children.end());
}

int64_t term_cost(const RTerm &t) {
  switch (t.kind) {
    case RTerm::Kind::Const: return 1;
    case RTerm::Kind::Range: return 3;
    default: {
      int64_t c = 1;
      for (const auto &ch : t.children) c += term_cost(ch);
      return c;
    }
  }
}

std::vector<std::pair<int, std::vector<int64_t>>> unfold(const RTerm &t) {
  std::vector<std::pair<int, std::vector<int64_t>>> out;
  if (t.kind == RTerm::Kind::Seq) {
    for (const auto &c : t.children) {
      auto part = unfold(c);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  if (t.kind != RTerm::Kind::Op) throw IrError("only sequences and operations unfold");
  const int64_t n = t.op_trip_count();
  for (int64_t i = 0; i < n; ++i) {
    std::vector<int64_t> consts;
    for (const auto &a : t.children) consts.push_back(a.kind == RTerm::Kind::Range ? a.start + i * a.step : a.value);
    out.emplace_back(t.template_id, std::move(consts));
  }
  return out;
}

void select_targets(Abstraction &a, const SaturationConfig &cfg) {
  for (auto &s : a.sequences) s.excluded = static_cast<int>(s.instances.size()) < cfg.min_sequence_ops;
}

RTerm to_term(const Abstraction &a) {
  std::vector<RTerm> ops;
  for (const auto &s : a.sequences)
    for (const auto &inst : s.instances) {
      std::vector<RTerm> args;
      for (int64_t c : inst.consts) args.push_back(RTerm::constant(c));
      ops.push_back(RTerm::op(s.template_id, std::move(args), s.excluded));
    }
  return RTerm::seq(std::move(ops));
}

// ---- e-graph ----------------------------------------------------------------

int EGraph::find(int cls) const {
  while (parent_[cls] != cls) {
    parent_[cls] = parent_[parent_[cls]];
    cls = parent_[cls];
  }
  return cls;
}

ENode EGraph::canonical(ENode n) const {
  for (auto &k : n.kids) k = find(k);
  return n;
}

int EGraph::add(ENode n) {
  n = canonical(std::move(n));
  if (auto it = memo_.find(n); it != memo_.end()) return find(it->second);
  const int id = static_cast<int>(parent_.size());
  parent_.push_back(id);
  nodes_.push_back({n});
  memo_.emplace(std::move(n), id);
  return id;
}

bool EGraph::merge(int a, int b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (b < a) std::swap(a, b);
  parent_[b] = a;
  auto &dst = nodes_[a];
  dst.insert(dst.end(), nodes_[b].begin(), nodes_[b].end());
  nodes_[b].clear();
  return true;
}

void EGraph::rebuild() {
  bool changed = true;
  while (changed) {
    changed = false;
    memo_.clear();
    for (int cls = 0; cls < static_cast<int>(parent_.size()); ++cls) {
      if (find(cls) != cls) continue;
      std::set<ENode> uniq;
      for (const auto &n : nodes_[cls]) uniq.insert(canonical(n));
      nodes_[cls].assign(uniq.begin(), uniq.end());
    }
    for (int cls = 0; cls < static_cast<int>(parent_.size()); ++cls) {
      if (find(cls) != cls) continue;
      for (const auto &n : std::vector<ENode>(nodes_[cls])) {
        auto [it, inserted] = memo_.emplace(n, cls);
        if (!inserted && find(it->second) != find(cls)) {
          merge(it->second, cls);
          changed = true;
        }
      }
    }
  }
}

std::vector<int> EGraph::classes() const {
  std::vector<int> out;
  for (int cls = 0; cls < static_cast<int>(parent_.size()); ++cls)
    if (find(cls) == cls) out.push_back(cls);
  return out;
}

size_t EGraph::node_count() const {
  size_t n = 0;
  for (int cls : classes()) n += nodes_[cls].size();
  return n;
}

int EGraph::add_term(const RTerm &t) {
  ENode n;
  switch (t.kind) {
    case RTerm::Kind::Const:
      n.kind = ENode::Kind::Const;
      n.a = t.value;
      return add(n);
    case RTerm::Kind::Range:
      n.kind = ENode::Kind::Range;
      n.a = t.start;
      n.b = t.stop;
      n.c = t.step;
      return add(n);
    case RTerm::Kind::Op:
      n.kind = ENode::Kind::Op;
      n.template_id = t.template_id;
      n.frozen = t.frozen;
      for (const auto &a : t.children) n.kids.push_back(add_term(a));
      return add(n);
    case RTerm::Kind::Seq: {
      int tail = add(ENode{});
      for (size_t i = t.children.size(); i-- > 0;) {
        ENode cons;
        cons.kind = ENode::Kind::Cons;
        cons.kids = {add_term(t.children[i]), tail};
        tail = add(cons);
      }
      return tail;
    }
  }
  return -1;
}

// ---- saturation -------------------------------------------------------------

namespace {

// Argument of an Op as (is_range, start, stop, step); constants use start only.
struct Arg {
  bool range = false;
  int64_t start = 0, stop = 0, step = 0;
};

std::vector<Arg> op_args(const EGraph &g, const ENode &op) {
  std::vector<Arg> out;
  for (int k : op.kids) {
    const ENode &leaf = g.nodes(k).front();
    if (leaf.kind == ENode::Kind::Range) out.push_back({true, leaf.a, leaf.b, leaf.c});
    else out.push_back({false, leaf.a, leaf.a, 0});
  }
  return out;
}

const ENode *single_op(const EGraph &g, int cls) {
  const auto &ns = g.nodes(cls);
  for (const auto &n : ns)
    if (n.kind == ENode::Kind::Op) return &n;
  return nullptr;
}

bool has_range(const std::vector<Arg> &args) {
  for (const auto &a : args)
    if (a.range) return true;
  return false;
}

RTerm op_term(int template_id, const std::vector<Arg> &args) {
  std::vector<RTerm> kids;
  for (const auto &a : args) kids.push_back(a.range ? RTerm::range(a.start, a.stop, a.step) : RTerm::constant(a.start));
  return RTerm::op(template_id, std::move(kids));
}

// R1: two single-statement ops with at least one differing position.
std::optional<std::vector<Arg>> pair_merge(const std::vector<Arg> &x, const std::vector<Arg> &y) {
  if (x.size() != y.size() || has_range(x) || has_range(y)) return std::nullopt;
  std::vector<Arg> out;
  bool differs = false;
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i].start == y[i].start) {
      out.push_back(x[i]);
    } else {
      differs = true;
      out.push_back({true, x[i].start, y[i].start, y[i].start - x[i].start});
    }
  }
  if (!differs) return std::nullopt;
  return out;
}

// R2: ranged op followed by the next progression element.
std::optional<std::vector<Arg>> absorb_after(const std::vector<Arg> &r, const std::vector<Arg> &e) {
  if (r.size() != e.size() || !has_range(r) || has_range(e)) return std::nullopt;
  std::vector<Arg> out = r;
  for (size_t i = 0; i < r.size(); ++i) {
    if (r[i].range) {
      if (e[i].start != r[i].stop + r[i].step) return std::nullopt;
      out[i].stop = e[i].start;
    } else if (e[i].start != r[i].start) {
      return std::nullopt;
    }
  }
  return out;
}

// R3: progression element followed by a ranged op.
std::optional<std::vector<Arg>> absorb_before(const std::vector<Arg> &e, const std::vector<Arg> &r) {
  if (r.size() != e.size() || !has_range(r) || has_range(e)) return std::nullopt;
  std::vector<Arg> out = r;
  for (size_t i = 0; i < r.size(); ++i) {
    if (r[i].range) {
      if (e[i].start != r[i].start - r[i].step) return std::nullopt;
      out[i].start = e[i].start;
    } else if (e[i].start != r[i].start) {
      return std::nullopt;
    }
  }
  return out;
}

struct Match {
  int cls;
  int tmpl;
  std::vector<Arg> args;
  int tail;
  std::vector<Arg> x, y;  // operands, kept for verification
};

}  // namespace

SaturationResult saturate(const RTerm &t, const SaturationConfig &cfg) {
  if (cfg.max_iterations <= 0 || cfg.max_enodes <= 0 || cfg.min_sequence_ops <= 0)
    throw IrError("saturation limits must be positive");
  SaturationResult r;
  r.root = r.graph.add_term(t);
  EGraph &g = r.graph;
  bool saturated = false;
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    std::vector<Match> matches;
    for (int cls : g.classes()) {
      for (const auto &cons : g.nodes(cls)) {
        if (cons.kind != ENode::Kind::Cons) continue;
        const ENode *x = single_op(g, cons.kids[0]);
        if (!x || x->frozen) continue;
        const auto xa = op_args(g, *x);
        for (const auto &next : g.nodes(cons.kids[1])) {
          if (next.kind != ENode::Kind::Cons) continue;
          const ENode *y = single_op(g, next.kids[0]);
          if (!y || y->frozen || y->template_id != x->template_id) continue;
          const auto ya = op_args(g, *y);
          std::optional<std::vector<Arg>> merged = pair_merge(xa, ya);
          if (!merged) merged = absorb_after(xa, ya);
          if (!merged) merged = absorb_before(xa, ya);
          if (merged) matches.push_back({cls, x->template_id, std::move(*merged), next.kids[1], xa, ya});
        }
      }
    }
    const size_t before_nodes = g.node_count();
    bool changed = false;
    for (const auto &m : matches) {
      if (cfg.verify_rewrites) {
        auto lhs = unfold(op_term(m.tmpl, m.x));
        auto rhs_y = unfold(op_term(m.tmpl, m.y));
        lhs.insert(lhs.end(), rhs_y.begin(), rhs_y.end());
        if (unfold(op_term(m.tmpl, m.args)) != lhs) throw IrError("unsound rewrite at class " + std::to_string(m.cls));
      }
      const int op = g.add_term(op_term(m.tmpl, m.args));
      ENode cons;
      cons.kind = ENode::Kind::Cons;
      cons.kids = {op, m.tail};
      const int c = g.add(cons);
      if (g.merge(m.cls, c)) {
        changed = true;
        ++r.rewrites;
      }
    }
    g.rebuild();
    r.iterations = iter + 1;
    if (!changed && g.node_count() == before_nodes) {
      saturated = true;
      break;
    }
    if (static_cast<int>(g.node_count()) > cfg.max_enodes) break;
  }
  r.root = g.find(r.root);
  r.truncated = !saturated;
  return r;
}

// ---- extraction -------------------------------------------------------------

namespace {

struct Best {
  int64_t cost = 0;
  int64_t len = 0;  // sequence children
  int node = -1;
  bool done = false;
};

class Extractor {
 public:
  explicit Extractor(const EGraph &g) : g_(g) {}

  RTerm term(int cls) {
    cls = g_.find(cls);
    const Best &b = best(cls);
    const ENode &n = g_.nodes(cls)[b.node];
    return build(n);
  }

 private:
  const EGraph &g_;
  std::map<int, Best> memo_;

  RTerm build(const ENode &n) {
    switch (n.kind) {
      case ENode::Kind::Const: return RTerm::constant(n.a);
      case ENode::Kind::Range: return RTerm::range(n.a, n.b, n.c);
      case ENode::Kind::Op: {
        std::vector<RTerm> args;
        for (int k : n.kids) args.push_back(term(k));
        return RTerm::op(n.template_id, std::move(args), n.frozen);
      }
      case ENode::Kind::Nil: return RTerm::seq({});
      case ENode::Kind::Cons: {
        RTerm head = term(n.kids[0]);
        RTerm tail = term(n.kids[1]);
        tail.children.insert(tail.children.begin(), std::move(head));
        return tail;
      }
    }
    return {};
  }

  std::pair<int64_t, int64_t> node_cost(const ENode &n) {
    switch (n.kind) {
      case ENode::Kind::Const: return {1, 0};
      case ENode::Kind::Range: return {3, 0};
      case ENode::Kind::Nil: return {1, 0};
      case ENode::Kind::Op: {
        int64_t c = 1;
        for (int k : n.kids) c += best(g_.find(k)).cost;
        return {c, 0};
      }
      case ENode::Kind::Cons: {
        const Best &h = best(g_.find(n.kids[0]));
        const Best &t = best(g_.find(n.kids[1]));
        return {h.cost + t.cost, t.len + 1};
      }
    }
    return {0, 0};
  }

  const Best &best(int cls) {
    auto it = memo_.find(cls);
    if (it != memo_.end()) {
      if (!it->second.done) throw IrError("cycle in e-graph during extraction");
      return it->second;
    }
    memo_[cls] = Best{};
    const auto &ns = g_.nodes(cls);
    Best b;
    std::optional<RTerm> best_term;
    for (size_t i = 0; i < ns.size(); ++i) {
      const auto [cost, len] = node_cost(ns[i]);
      const Best cand{cost, len, static_cast<int>(i), true};
      if (b.node < 0 || std::pair(cost, len) < std::pair(b.cost, b.len)) {
        b = cand;
        best_term.reset();
      } else if (std::pair(cost, len) == std::pair(b.cost, b.len)) {
        if (!best_term) best_term = build(ns[b.node]);
        RTerm t = build(ns[i]);
        if (t < *best_term) {
          b = cand;
          best_term = std::move(t);
        }
      }
    }
    memo_[cls] = b;
    return memo_[cls];
  }
};

}  // namespace

RTerm extract_best(const EGraph &g, int root) { return Extractor(g).term(root); }

// ---- lowering -----------------------------------------------------------------

StructuredProgram lower_to_loops(const RTerm &t, const Abstraction &a, const Program &base) {
  if (t.kind != RTerm::Kind::Seq) throw IrError("lowering expects a sequence");
  StructuredProgram out = base;
  out.body.clear();
  out.locals = base.locals;
  int loop_id = 0;
  for (const auto &op : t.children) {
    if (op.kind != RTerm::Kind::Op) throw IrError("sequence child is not an operation");
    if (op.template_id < 0 || op.template_id >= static_cast<int>(a.templates.size()))
      throw IrError("unknown template " + std::to_string(op.template_id));
    const Template &tmpl = a.templates[op.template_id];
    if (static_cast<int>(op.children.size()) != tmpl.hole_count) throw IrError("operation arity does not match template");
    const int64_t n = op.op_trip_count();
    bool ranged = false;
    for (const auto &arg : op.children) ranged = ranged || arg.kind == RTerm::Kind::Range;
    if (!ranged) {
      std::vector<int64_t> consts;
      for (const auto &arg : op.children) consts.push_back(arg.value);
      out.body.push_back(Node{instantiate(tmpl, consts)});
      continue;
    }
    Loop loop;
    const std::string suffix = std::to_string(loop_id++);
    std::string var = "i" + suffix;
    while (base.has_name(var)) var += "_";
    loop.label = "L" + suffix;
    loop.var = var;
    loop.start = 0;
    loop.stop.constant = n;
    loop.step = 1;
    Statement s = tmpl.shape;
    walk_literals(s, [&](Expr &lit, bool) {
      if (lit.op != Op::Hole) return;
      const RTerm &arg = op.children[static_cast<size_t>(lit.value)];
      if (arg.kind == RTerm::Kind::Range) {
        lit = affine_expr(arg.start, arg.step, var, lit.width);
      } else {
        u128 raw = static_cast<u128>(static_cast<__int128>(arg.value));
        if (lit.width) raw &= ScalarType{lit.width}.mask();
        lit = Expr::constant(raw, lit.width);
      }
    });
    loop.body.push_back(Node{std::move(s)});
    out.body.push_back(Node{std::move(loop)});
  }
  check_kernel(out);
  return out;
}

nlohmann::json egraph_summary(const SaturationResult &r, const RTerm &extracted) {
  return {{"classes", r.graph.class_count()},
          {"nodes", r.graph.node_count()},
          {"iterations", r.iterations},
          {"rewrites", r.rewrites},
          {"truncated", r.truncated},
          {"extracted", extracted.to_string()},
          {"extracted_cost", term_cost(extracted)}};
}

}  // namespace rollhls
