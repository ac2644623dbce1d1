#include "rollhls/qor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

namespace rollhls {

// ---- tables ----------------------------------------------------------------------

EstimatorParams params_from_json(const nlohmann::json &j) {
  EstimatorParams p;
  if (j.contains("latency"))
    for (const auto &[k, v] : j.at("latency").items()) p.latency[k] = v.get<int>();
  if (j.contains("lut_per_bit"))
    for (const auto &[k, v] : j.at("lut_per_bit").items()) p.lut_per_bit[k] = v.get<double>();
  p.dsp_a = j.value("dsp_a", p.dsp_a);
  p.dsp_b = j.value("dsp_b", p.dsp_b);
  p.mux_lut = j.value("mux_lut", p.mux_lut);
  p.bram_bits = j.value("bram_bits", p.bram_bits);
  p.memory_ports = j.value("memory_ports", p.memory_ports);
  for (const auto &[k, v] : p.latency)
    if (v < 0) throw std::invalid_argument("negative latency for " + k);
  for (const auto &[k, v] : p.lut_per_bit)
    if (v < 0) throw std::invalid_argument("negative LUT cost for " + k);
  if (p.dsp_a <= 0 || p.dsp_b <= 0 || p.bram_bits <= 0 || p.memory_ports <= 0)
    throw std::invalid_argument("estimator sizes must be positive");
  return p;
}

nlohmann::json params_to_json(const EstimatorParams &p) {
  return {{"latency", p.latency},     {"lut_per_bit", p.lut_per_bit}, {"dsp_a", p.dsp_a},
          {"dsp_b", p.dsp_b},         {"mux_lut", p.mux_lut},         {"bram_bits", p.bram_bits},
          {"memory_ports", p.memory_ports}};
}

DeviceProfile device_from_json(const nlohmann::json &j) {
  DeviceProfile d;
  d.name = j.value("name", std::string("custom"));
  d.dsp = j.at("dsp").get<int64_t>();
  d.lut = j.at("lut").get<int64_t>();
  d.ff = j.at("ff").get<int64_t>();
  d.bram = j.at("bram").get<int64_t>();
  if (d.dsp <= 0 || d.lut <= 0 || d.ff <= 0 || d.bram <= 0) throw std::invalid_argument("device totals must be positive");
  return d;
}

nlohmann::json device_to_json(const DeviceProfile &d) {
  return {{"name", d.name}, {"dsp", d.dsp}, {"lut", d.lut}, {"ff", d.ff}, {"bram", d.bram}};
}

DeviceProfile device_by_name(const std::string &name) {
  if (name == "zu9eg" || name == "xczu9eg" || name == "xczu9eg-ffvb1156-2-e") return DeviceProfile{};
  throw std::invalid_argument("unknown device " + name);
}

int64_t mul_dsp(int width, const EstimatorParams &p) {
  return ((width + p.dsp_a - 1) / p.dsp_a) * ((width + p.dsp_b - 1) / p.dsp_b);
}

namespace {

bool is_narrow_zext(const Expr &e) { return e.op == Op::ZExt && e.args[0].width <= 64; }

/// 128-bit product of two zero-extended 64-bit values maps onto one wide multiplier.
bool wide_product(const Expr &e) { return e.op == Op::Mul && e.width > 64 && is_narrow_zext(e.args[0]) && is_narrow_zext(e.args[1]); }

int lookup(const EstimatorParams &p, const std::string &cls) {
  auto it = p.latency.find(cls);
  if (it == p.latency.end()) throw IrError("no latency entry for " + cls);
  return it->second;
}

int64_t lut_cost(const EstimatorParams &p, const std::string &cls, int width) {
  auto it = p.lut_per_bit.find(cls);
  if (it == p.lut_per_bit.end()) throw IrError("no LUT entry for " + cls);
  return static_cast<int64_t>(std::ceil(it->second * width));
}

}  // namespace

std::string op_class(const Expr &e) {
  switch (e.op) {
    case Op::Not: return "not";
    case Op::Trunc:
    case Op::ZExt: return "cast";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return wide_product(e) ? "mulwide" : "mul";
    case Op::Shl:
    case Op::Shr: return fold_index(e.args[1]) ? "shift" : "varshift";
    case Op::And:
    case Op::Or:
    case Op::Xor: return "logic";
    case Op::AddCarry: return "addcarry";
    case Op::SubBorrow: return "subborrow";
    case Op::MulWide: return "mulwide";
    case Op::CmovNZ: return "cmov";
    default: return {};
  }
}

OpCost op_cost(const Expr &e, const EstimatorParams &p) {
  const std::string cls = op_class(e);
  if (cls.empty()) return {};
  OpCost c;
  if (e.op == Op::Mul && !wide_product(e) && e.width > 64) {
    // Low half of a full-width product: one wide multiply plus two truncated cross products.
    c.latency = lookup(p, "mulwide") + lookup(p, "add");
    c.dsp = 3 * mul_dsp(64, p);
    c.lut = lut_cost(p, "mul", e.width);
    return c;
  }
  const int w = cls == "mulwide" && e.op == Op::Mul ? e.args[0].args[0].width : e.width;
  c.latency = lookup(p, cls);
  c.lut = lut_cost(p, cls, w);
  if (cls == "mul" || cls == "mulwide") c.dsp = mul_dsp(w, p);
  return c;
}

// ---- estimator -------------------------------------------------------------------

namespace {

struct Usage {
  int64_t latency = 0;
  std::map<std::string, int64_t> units;      // concurrently allocated operators per kind
  std::map<std::string, int64_t> instances;  // static operator count per kind
  std::map<std::string, OpCost> cost;
  std::map<std::string, int64_t> accesses;  // array accesses per execution of the region
  int64_t ff = 0;

  void then(const Usage &o) {
    latency += o.latency;
    for (const auto &[k, v] : o.units) units[k] = std::max(units[k], v);
    for (const auto &[k, v] : o.instances) instances[k] += v;
    for (const auto &[k, v] : o.cost) cost[k] = v;
    for (const auto &[k, v] : o.accesses) accesses[k] += v;
    ff += o.ff;
  }

  Usage replicated(int64_t f) const {
    Usage u = *this;
    for (auto &[_, v] : u.units) v *= f;
    for (auto &[_, v] : u.instances) v *= f;
    for (auto &[_, v] : u.accesses) v *= f;
    u.ff *= f;
    return u;
  }

  int64_t lut(const EstimatorParams &p) const {
    int64_t out = 0;
    for (const auto &[k, n] : units) out += n * cost.at(k).lut;
    for (const auto &[k, n] : instances) out += p.mux_lut * std::max<int64_t>(0, n - units.at(k));
    return out;
  }
};

int64_t ceil_div(int64_t a, int64_t b) { return b <= 0 ? a : (a + b - 1) / b; }

bool may_alias(const std::optional<AffineIndex> &a, const std::optional<AffineIndex> &b) {
  if (!a || !b) return true;
  if (a->terms == b->terms) return a->constant == b->constant;
  return true;
}

/// ASAP schedule of a straight-line region.
class Segment {
 public:
  explicit Segment(const EstimatorParams &p) : p_(&p) {}

  bool empty() const { return !any_; }

  void add(const Statement &s) {
    any_ = true;
    const int64_t t = ready(s.rhs);
    finish_ = std::max(finish_, t);
    for (const auto &lv : s.targets) {
      usage_.ff += lv.width;
      if (lv.kind == LValue::Kind::Local) {
        local_ready_[lv.name] = t;
      } else {
        writes_.push_back({lv.name, as_affine(lv.index), t});
        ++usage_.accesses[lv.name];
      }
    }
  }

  Usage take() {
    Usage u = std::move(usage_);
    u.latency = finish_;
    for (const auto &[kind, per_cycle] : issue_) {
      int64_t peak = 0, total = 0;
      for (const auto &[_, n] : per_cycle) {
        peak = std::max(peak, n);
        total += n;
      }
      u.units[kind] = peak;
      u.instances[kind] = total;
    }
    *this = Segment(*p_);
    return u;
  }

 private:
  struct Write {
    std::string array;
    std::optional<AffineIndex> index;
    int64_t time;
  };

  const EstimatorParams *p_;
  bool any_ = false;
  int64_t finish_ = 0;
  std::map<std::string, int64_t> local_ready_;
  std::vector<Write> writes_;
  std::map<std::string, std::map<int64_t, int64_t>> issue_;
  Usage usage_;

  int64_t ready(const Expr &e) {
    switch (e.op) {
      case Op::Const:
      case Op::Scalar:
      case Op::LoopVar:
      case Op::Hole: return 0;
      case Op::Local: {
        auto it = local_ready_.find(e.name);
        return it == local_ready_.end() ? 0 : it->second;
      }
      case Op::Load: {
        ++usage_.accesses[e.name];
        const auto idx = as_affine(e.args[0]);
        int64_t t = 0;
        for (const auto &w : writes_)
          if (w.array == e.name && may_alias(w.index, idx)) t = std::max(t, w.time);
        return t;
      }
      default: break;
    }
    int64_t t = 0;
    const size_t data_args = (e.op == Op::Shl || e.op == Op::Shr) ? 1 : e.args.size();
    for (size_t i = 0; i < data_args; ++i) t = std::max(t, ready(e.args[i]));
    const OpCost c = op_cost(e, *p_);
    if (c.lut > 0 || c.dsp > 0) {
      const std::string kind = op_class(e) + std::to_string(e.width);
      ++issue_[kind][t];
      usage_.cost[kind] = c;
    }
    return t + c.latency;
  }
};

bool holds_loops_or_calls(const std::vector<Node> &body) {
  for (const auto &n : body) {
    if (n.is_loop() || n.is_call()) return true;
    if (n.is_guard() && holds_loops_or_calls(n.guard().body)) return true;
  }
  return false;
}

void collect_statements(const std::vector<Node> &body, std::vector<const Statement *> &out) {
  for (const auto &n : body) {
    if (n.is_statement()) out.push_back(&n.stmt());
    else if (n.is_guard()) collect_statements(n.guard().body, out);
  }
}

/// Longest operator path from a load of a carried array to a store into it,
/// within one iteration. Nullopt when the body holds loops or calls.
std::optional<int64_t> recurrence(const std::vector<Node> &body, const std::set<std::string> &carried,
                                  const EstimatorParams &p) {
  if (holds_loops_or_calls(body)) return std::nullopt;
  std::vector<const Statement *> stmts;
  collect_statements(body, stmts);
  int64_t best = 0;
  for (const auto &x : carried) {
    std::map<std::string, int64_t> local_path, array_path;
    std::function<int64_t(const Expr &)> path = [&](const Expr &e) -> int64_t {
      switch (e.op) {
        case Op::Load: {
          if (e.name == x) return 0;
          auto it = array_path.find(e.name);
          return it == array_path.end() ? -1 : it->second;
        }
        case Op::Local: {
          auto it = local_path.find(e.name);
          return it == local_path.end() ? -1 : it->second;
        }
        case Op::Const:
        case Op::Scalar:
        case Op::LoopVar:
        case Op::Hole: return -1;
        default: break;
      }
      int64_t m = -1;
      const size_t data_args = (e.op == Op::Shl || e.op == Op::Shr) ? 1 : e.args.size();
      for (size_t i = 0; i < data_args; ++i) m = std::max(m, path(e.args[i]));
      return m < 0 ? -1 : m + op_cost(e, p).latency;
    };
    for (const Statement *s : stmts) {
      const int64_t t = path(s->rhs);
      for (const auto &lv : s->targets) {
        if (lv.kind == LValue::Kind::Local) local_path[lv.name] = t;
        else if (lv.name == x) best = std::max(best, t);
        else if (t >= 0) array_path[lv.name] = std::max(array_path.count(lv.name) ? array_path[lv.name] : -1, t);
      }
    }
  }
  return std::max<int64_t>(best, 1);
}

class Estimator {
 public:
  Estimator(const Kernel &k, const PragmaConfig &pr, const EstimatorParams &p, const LoopInfo &info)
      : k_(k), pragmas_(pr), p_(p), info_(info) {}

  Usage body(const std::vector<Node> &nodes, bool flatten) {
    Usage total;
    Segment seg(p_);
    auto flush = [&] {
      if (!seg.empty()) total.then(seg.take());
    };
    std::function<void(const std::vector<Node> &)> visit = [&](const std::vector<Node> &ns) {
      for (const auto &n : ns) {
        if (n.is_statement()) {
          seg.add(n.stmt());
        } else if (n.is_guard()) {
          if (holds_loops_or_calls(n.guard().body)) {
            flush();
            total.then(body(n.guard().body, flatten));
          } else {
            visit(n.guard().body);
          }
        } else if (n.is_loop()) {
          flush();
          total.then(loop(n.loop(), flatten));
        } else {
          flush();
          total.then(call(n.call(), flatten));
        }
      }
    };
    visit(nodes);
    flush();
    return total;
  }

  struct LoopModel {
    Usage body;
    int64_t trip = 0;
    int64_t b = 1;  // body latency
    int64_t r = 1;  // recurrence latency
    bool carried = false;
    int64_t distance = 1;
  };

  /// `flatten`: an enclosing loop is pipelined, so this loop is fully unrolled.
  LoopModel model(const Loop &l, bool flatten_body) {
    LoopModel m;
    m.trip = l.constant_bounds() ? l.trip_count() : static_cast<int64_t>(bound_max(l));
    m.body = body(l.body, flatten_body);
    m.b = std::max<int64_t>(1, m.body.latency);
    if (const LoopSummary *s = info_.find(l.label); s && s->carried) {
      m.carried = true;
      m.distance = std::max<int64_t>(1, s->distance);
      m.r = recurrence(l.body, s->carried_arrays, p_).value_or(m.b);
    }
    return m;
  }

  int64_t chained(const LoopModel &m, int64_t f) const {
    return m.carried ? m.b + (ceil_div(f, m.distance) - 1) * m.r : m.b;
  }

  int64_t ii_bound(const LoopModel &m, int64_t f) const {
    int64_t ii = m.carried ? ceil_div(m.r * f, m.distance) : 1;
    for (const auto &[arr, n] : m.body.accesses) {
      const auto it = pragmas_.partition.find(arr);
      const int64_t banks = it == pragmas_.partition.end() ? 1 : it->second;
      ii = std::max(ii, ceil_div(n * f, p_.memory_ports * banks));
    }
    return std::max<int64_t>(1, ii);
  }

  Usage loop(const Loop &l, bool flatten) {
    const LoopDirectives &d = pragmas_.loop(l.label);
    const bool pipelined = !flatten && d.pipeline_ii.has_value();
    LoopModel m = model(l, flatten || pipelined);
    if (m.trip == 0) return {};
    const int64_t f = flatten ? m.trip : std::clamp<int64_t>(d.unroll, 1, m.trip);
    Usage u = m.body.replicated(f);
    const int64_t bf = chained(m, f);
    const int64_t iters = ceil_div(m.trip, f);
    if (flatten) {
      u.latency = bf;
    } else if (pipelined) {
      const int64_t ii = std::max<int64_t>(*d.pipeline_ii, ii_bound(m, f));
      // Shared units issue one iteration's operations over several cycles.
      int64_t spread = 1;
      for (auto &[kind, n] : u.units) {
        const int64_t inst = u.instances.at(kind);
        n = std::max<int64_t>(1, ceil_div(inst, ii));
        spread = std::max(spread, ceil_div(inst, n));
      }
      u.latency = ii * (iters - 1) + bf + spread - 1;
      u.ff += u.lut(p_);
    } else {
      u.latency = iters * bf;
    }
    return u;
  }

  Usage call(const CallSite &c, bool flatten) {
    const Function *f = k_.find_function(c.callee);
    if (!f) throw IrError("unknown function " + c.callee);
    auto it = functions_.find(f->name);
    if (it == functions_.end()) {
      Usage u = body(f->body, flatten);
      functions_[f->name] = u;
      return u;
    }
    // Later calls reuse the same hardware.
    Usage u = it->second;
    u.instances.clear();
    for (const auto &[kind, _] : u.units) u.instances[kind] = 0;
    u.ff = 0;
    return u;
  }

  int64_t min_ii(const Loop &l, int64_t f) {
    LoopModel m = model(l, true);
    return ii_bound(m, std::max<int64_t>(1, f));
  }

 private:
  const Kernel &k_;
  const PragmaConfig &pragmas_;
  const EstimatorParams &p_;
  const LoopInfo &info_;
  std::map<std::string, Usage> functions_;

  int64_t bound_max(const Loop &l) const {
    const Param *p = k_.find_param(l.stop.param);
    const int64_t stop = p && p->max ? *p->max : 16;
    return l.step > 0 ? std::max<int64_t>(0, ceil_div(stop - l.start, l.step)) : std::max<int64_t>(0, ceil_div(l.start, -l.step));
  }
};

// Arrays never read or written get no memory.
int64_t bram_of(const Kernel &k, const PragmaConfig &pr, const EstimatorParams &p) {
  std::set<std::string> used;
  auto note = [&](const Statement &st) {
    for (const auto &t : st.targets)
      if (t.kind == LValue::Kind::Element) used.insert(t.name);
    visit_expr(st.rhs, [&](const Expr &e) {
      if (e.op == Op::Load) used.insert(e.name);
    });
  };
  for_each_statement(k.body, note);
  for (const auto &f : k.functions) for_each_statement(f.body, note);
  int64_t total = 0;
  auto add = [&](const std::string &name, int bits, int64_t length) {
    if (!used.count(name)) return;
    auto it = pr.partition.find(name);
    const int64_t banks = it == pr.partition.end() ? 1 : it->second;
    total += banks * ceil_div(bits * length, banks * p.bram_bits);
  };
  for (const auto &prm : k.params)
    if (prm.is_array()) add(prm.name, prm.type.bits, prm.length);
  for (const auto &a : k.arrays) add(a.name, a.elem.bits, a.length);
  return total;
}

const Loop *find_any_loop(const Kernel &k, const std::string &label) {
  if (const Loop *l = find_loop(k.body, label)) return l;
  for (const auto &f : k.functions)
    if (const Loop *l = find_loop(f.body, label)) return l;
  return nullptr;
}

}  // namespace

QoR estimate(const StructuredProgram &s, const PragmaConfig &pragmas, const EstimatorParams &params, const LoopInfo *info) {
  LoopInfo local;
  if (!info) {
    local = analyze_loops(s);
    info = &local;
  }
  Estimator est(s, pragmas, params, *info);
  const Usage u = est.body(s.body, false);
  QoR q;
  q.latency = u.latency;
  for (const auto &[kind, n] : u.units) q.dsp += n * u.cost.at(kind).dsp;
  q.lut = u.lut(params);
  q.ff = u.ff;
  q.bram = bram_of(s, pragmas, params);
  return q;
}

int64_t min_ii(const StructuredProgram &s, const LoopInfo &info, const std::string &label, int64_t unroll,
               const PragmaConfig &pragmas, const EstimatorParams &params) {
  const Loop *l = find_any_loop(s, label);
  if (!l) throw IrError("unknown loop " + label);
  Estimator est(s, pragmas, params, info);
  return est.min_ii(*l, unroll);
}

void estimate_all(DesignSpace &ds, const EstimatorParams &params) {
  const int n = static_cast<int>(ds.points.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    DesignPoint &d = ds.points[static_cast<size_t>(i)];
    const size_t v = static_cast<size_t>(d.variant);
    d.qor = estimate(ds.variants[v].program, d.pragmas, params, &ds.infos[v]);
  }
}

void estimate_all_serial(DesignSpace &ds, const EstimatorParams &params) {
  for (auto &d : ds.points) {
    const size_t v = static_cast<size_t>(d.variant);
    d.qor = estimate(ds.variants[v].program, d.pragmas, params, &ds.infos[v]);
  }
}

// ---- scoring ---------------------------------------------------------------------

double resource_percent(const QoR &q, const DeviceProfile &dev) {
  return 25.0 * (static_cast<double>(q.dsp) / static_cast<double>(dev.dsp) +
                 static_cast<double>(q.lut) / static_cast<double>(dev.lut) +
                 static_cast<double>(q.ff) / static_cast<double>(dev.ff) +
                 static_cast<double>(q.bram) / static_cast<double>(dev.bram));
}

NpiRange npi_range(const std::vector<QoR> &population, const DeviceProfile &dev) {
  if (population.empty()) throw std::invalid_argument("empty NPI population");
  NpiRange r;
  r.l_min = r.l_max = static_cast<double>(population[0].latency);
  r.r_min = r.r_max = resource_percent(population[0], dev);
  for (const auto &q : population) {
    const double l = static_cast<double>(q.latency), rp = resource_percent(q, dev);
    r.l_min = std::min(r.l_min, l);
    r.l_max = std::max(r.l_max, l);
    r.r_min = std::min(r.r_min, rp);
    r.r_max = std::max(r.r_max, rp);
  }
  return r;
}

double npi(double latency, double r, const NpiRange &range, const Weights &w) {
  double out = 0;
  if (range.l_max != range.l_min) out += w.latency * (latency - range.l_min) / (range.l_max - range.l_min);
  if (range.r_max != range.r_min) out += w.resource * (r - range.r_min) / (range.r_max - range.r_min);
  return out;
}

double npi(const QoR &q, const std::vector<QoR> &population, const DeviceProfile &dev, const Weights &w) {
  return npi(static_cast<double>(q.latency), resource_percent(q, dev), npi_range(population, dev), w);
}

std::vector<Objective> pareto_filter(std::vector<Objective> points) {
  std::sort(points.begin(), points.end(), [](const Objective &a, const Objective &b) {
    return std::tie(a.latency, a.r, a.id) < std::tie(b.latency, b.r, b.id);
  });
  std::vector<Objective> front;
  double best_r = std::numeric_limits<double>::infinity();
  for (const auto &p : points)
    if (p.r < best_r) {
      front.push_back(p);
      best_r = p.r;
    }
  return front;
}

double hypervolume(const std::vector<Objective> &front, double l_ref, double r_ref) {
  std::vector<Objective> pts;
  for (const auto &p : pareto_filter(front))
    if (p.latency < l_ref && p.r < r_ref) pts.push_back(p);
  double hv = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    const double next = i + 1 < pts.size() ? pts[i + 1].latency : l_ref;
    hv += (next - pts[i].latency) * (r_ref - pts[i].r);
  }
  return hv;
}

std::vector<Objective> objectives(const DesignSpace &ds, const DeviceProfile &dev) {
  std::vector<Objective> out;
  for (const auto &d : ds.points)
    if (d.qor) out.push_back({d.id, static_cast<double>(d.qor->latency), resource_percent(*d.qor, dev)});
  return out;
}

// ---- refinement ------------------------------------------------------------------

namespace {

/// Partition factors and dependence flags implied by the loop directives.
void retie(PragmaConfig &c, const StructuredProgram &prog, const LoopInfo &info, const EstimatorParams &params) {
  c.partition.clear();
  c.dependence_false.clear();
  std::set<std::string> carried;
  for (const auto &l : info.loops) carried.insert(l.carried_arrays.begin(), l.carried_arrays.end());
  for (const auto &l : info.loops) {
    const int f = c.loop(l.label).unroll;
    if (f <= 1) continue;
    std::set<std::string> arrays = l.read_arrays;
    arrays.insert(l.written_arrays.begin(), l.written_arrays.end());
    for (const auto &a : arrays) {
      auto shape = prog.array_shape(a);
      if (shape && shape->second > 1 && shape->second % f == 0) c.partition[a] = std::max(c.partition[a], f);
    }
  }
  for (const auto &l : info.loops) {
    auto it = c.loops.find(l.label);
    if (it == c.loops.end() || !it->second.pipeline_ii) continue;
    const int64_t lo = min_ii(prog, info, l.label, it->second.unroll, c, params);
    it->second.pipeline_ii = static_cast<int>(std::max<int64_t>(*it->second.pipeline_ii, lo));
    for (const auto &a : l.written_arrays)
      if (l.read_arrays.count(a) && !carried.count(a)) c.dependence_false.insert(a);
  }
  c.normalize();
}

std::vector<PragmaConfig> neighbours(const PragmaConfig &base, const StructuredProgram &prog, const LoopInfo &info,
                                     const EstimatorParams &params, const ExplorerConfig &cfg) {
  std::vector<PragmaConfig> out;
  for (const auto &l : info.loops) {
    const LoopDirectives cur = base.loop(l.label);
    const auto divs = divisors(l.trip, cfg.max_unroll);
    const auto at = std::find(divs.begin(), divs.end(), static_cast<int64_t>(cur.unroll)) - divs.begin();
    for (int delta : {-1, 1}) {
      const auto j = at + delta;
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(divs.size())) continue;
      PragmaConfig c = base;
      c.loops[l.label].unroll = static_cast<int>(divs[static_cast<size_t>(j)]);
      if (c.loops[l.label].pipeline_ii) c.loops[l.label].pipeline_ii = 1;
      retie(c, prog, info, params);
      out.push_back(std::move(c));
    }
    const int64_t lo = min_ii(prog, info, l.label, cur.unroll, base, params);
    if (!cur.pipeline_ii) {
      PragmaConfig c = base;
      c.loops[l.label].pipeline_ii = static_cast<int>(lo);
      retie(c, prog, info, params);
      out.push_back(std::move(c));
    } else {
      PragmaConfig up = base;
      up.loops[l.label].pipeline_ii = *cur.pipeline_ii + 1;
      up.normalize();
      out.push_back(std::move(up));
      PragmaConfig down = base;
      if (*cur.pipeline_ii - 1 >= lo) down.loops[l.label].pipeline_ii = *cur.pipeline_ii - 1;
      else down.loops[l.label].pipeline_ii.reset();
      down.normalize();
      out.push_back(std::move(down));
    }
    // One partition toggled.
    std::set<std::string> arrays = l.read_arrays;
    arrays.insert(l.written_arrays.begin(), l.written_arrays.end());
    for (const auto &a : arrays) {
      PragmaConfig c = base;
      if (c.partition.count(a)) {
        c.partition.erase(a);
      } else {
        auto shape = prog.array_shape(a);
        if (cur.unroll <= 1 || !shape || shape->second % cur.unroll != 0 || shape->second <= 1) continue;
        c.partition[a] = cur.unroll;
      }
      for (auto &[label, d] : c.loops)
        if (d.pipeline_ii) {
          const int64_t need = min_ii(prog, info, label, d.unroll, c, params);
          d.pipeline_ii = static_cast<int>(std::max<int64_t>(*d.pipeline_ii, need));
        }
      c.normalize();
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace

RefineTrace refine(DesignSpace &ds, const EstimatorParams &params, const DeviceProfile &dev, int rounds,
                   const ExplorerConfig &cfg) {
  RefineTrace trace;
  const auto initial = objectives(ds, dev);
  double l_ref = 0, r_ref = 0;
  for (const auto &o : initial) {
    l_ref = std::max(l_ref, o.latency);
    r_ref = std::max(r_ref, o.r);
  }
  trace.hypervolume.push_back(hypervolume(initial, l_ref, r_ref));

  std::set<std::pair<int, PragmaConfig>> seen;
  for (const auto &d : ds.points) seen.insert({d.variant, d.pragmas});
  int next_id = 0;
  for (const auto &d : ds.points) next_id = std::max(next_id, d.id + 1);

  for (int round = 0; round < rounds; ++round) {
    std::vector<DesignPoint> fresh;
    const auto front = pareto_filter(objectives(ds, dev));
    for (const auto &o : front) {
      const DesignPoint &p = *std::find_if(ds.points.begin(), ds.points.end(), [&](const DesignPoint &d) { return d.id == o.id; });
      const size_t v = static_cast<size_t>(p.variant);
      for (auto &c : neighbours(p.pragmas, ds.variants[v].program, ds.infos[v], params, cfg)) {
        if (!seen.insert({p.variant, c}).second) continue;
        DesignPoint d;
        d.id = next_id++;
        d.variant = p.variant;
        d.transforms = p.transforms;
        d.pragmas = std::move(c);
        d.program_digest = p.program_digest;
        fresh.push_back(std::move(d));
      }
    }
    const int n = static_cast<int>(fresh.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
      DesignPoint &d = fresh[static_cast<size_t>(i)];
      const size_t v = static_cast<size_t>(d.variant);
      d.qor = estimate(ds.variants[v].program, d.pragmas, params, &ds.infos[v]);
    }
    trace.added += n;
    for (auto &d : fresh) ds.points.push_back(std::move(d));
    trace.hypervolume.push_back(hypervolume(objectives(ds, dev), l_ref, r_ref));
  }
  return trace;
}

}  // namespace rollhls
