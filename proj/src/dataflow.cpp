#include "rollhls/dataflow.hpp"

#include <sstream>

#include "rollhls/parser.hpp"

namespace rollhls {

int DDG::use_count(const std::string &local) const {
  auto it = local_def.find(local);
  return it == local_def.end() ? 0 : defs[it->second].use_count;
}

int DDG::last_use(const std::string &local) const {
  auto it = local_def.find(local);
  if (it == local_def.end()) return -1;
  int last = -1;
  for (const auto &u : uses)
    if (u.def == it->second) last = std::max(last, u.stmt);
  return last;
}

namespace {

std::vector<const Statement *> statements(const Program &p) {
  if (!validate_straight_line(p).empty()) throw IrError("data-dependence analysis needs a straight-line program");
  std::vector<const Statement *> out;
  for (const auto &n : p.body) out.push_back(&n.stmt());
  return out;
}

std::string element_name(const std::string &array, const Expr &index) {
  auto v = fold_index(index);
  if (!v) throw IrError("non-constant array index on " + array);
  return array + "[" + std::to_string(*v) + "]";
}

}  // namespace

DDG build_ddg(const Program &p) {
  DDG g;
  std::map<std::string, int> current;  // reaching def per location
  const auto stmts = statements(p);
  for (size_t si = 0; si < stmts.size(); ++si) {
    const Statement &s = *stmts[si];
    int pos = 0;
    visit_expr(s.rhs, [&](const Expr &e) {
      if (e.op != Op::Local && e.op != Op::Load) return;
      const std::string loc = e.op == Op::Local ? e.name : element_name(e.name, e.args[0]);
      auto it = current.find(loc);
      int def;
      if (it != current.end()) {
        def = it->second;
      } else {
        // First read of an element nobody wrote: input value or zero-initialized storage.
        def = static_cast<int>(g.defs.size());
        g.defs.push_back({loc, false, -1, 0, ScalarType{e.width}, 0});
        current[loc] = def;
      }
      g.uses.push_back({def, static_cast<int>(si), pos++});
      ++g.defs[def].use_count;
    });
    for (size_t ti = 0; ti < s.targets.size(); ++ti) {
      const LValue &t = s.targets[ti];
      const bool local = t.kind == LValue::Kind::Local;
      const std::string loc = local ? t.name : element_name(t.name, t.index);
      const int def = static_cast<int>(g.defs.size());
      g.defs.push_back({loc, local, static_cast<int>(si), static_cast<int>(ti), ScalarType{t.width}, 0});
      current[loc] = def;
      if (local) g.local_def[loc] = def;
    }
  }
  return g;
}

std::set<std::string> single_use_locals(const DDG &g) {
  std::set<std::string> out;
  for (const auto &d : g.defs)
    if (d.is_local && d.use_count == 1) out.insert(d.name);
  return out;
}

std::pair<Program, ArrayAssignment> assign_arrays(const Program &p, const DDG &g) {
  const auto stmts = statements(p);
  ArrayAssignment asg;
  const auto single = single_use_locals(g);

  struct Slot {
    bool used = false;
    bool shareable = false;
    int last_use = -1;
  };
  std::map<int, std::vector<Slot>> slots;  // width -> slots
  std::map<int, std::string> array_of;     // width -> synthesized array name

  auto array_name = [&](int w) {
    auto it = array_of.find(w);
    if (it != array_of.end()) return it->second;
    std::string name = "t_u" + std::to_string(w);
    auto taken = [&](const std::string &n) {
      if (p.has_name(n)) return true;
      for (const auto &[_, other] : array_of)
        if (other == n) return true;
      return false;
    };
    while (taken(name)) name += "_";
    array_of[w] = name;
    return name;
  };

  for (size_t si = 0; si < stmts.size(); ++si) {
    const Statement &s = *stmts[si];
    const int i = static_cast<int>(si);
    std::vector<int64_t> preferred;
    visit_expr(s.rhs, [&](const Expr &e) {
      if (e.op != Op::Load) return;
      const Param *prm = p.find_param(e.name);
      if (!prm || prm->kind != ParamKind::InArray) return;
      if (auto v = fold_index(e.args[0])) preferred.push_back(*v);
    });
    for (const auto &t : s.targets) {
      if (t.kind != LValue::Kind::Local) continue;
      auto &vec = slots[t.width];
      auto is_free = [&](int64_t k) {
        if (k >= static_cast<int64_t>(vec.size())) return true;
        const Slot &sl = vec[k];
        return !sl.used || (sl.shareable && sl.last_use <= i);
      };
      int64_t chosen = -1;
      const bool share = single.count(t.name) > 0;
      if (share) {
        for (int64_t k : preferred)
          if (is_free(k)) {
            chosen = k;
            break;
          }
        if (chosen < 0)
          for (int64_t k = 0;; ++k)
            if (is_free(k)) {
              chosen = k;
              break;
            }
      } else {
        for (int64_t k = 0;; ++k)
          if (k >= static_cast<int64_t>(vec.size()) || !vec[k].used) {
            chosen = k;
            break;
          }
      }
      if (chosen >= static_cast<int64_t>(vec.size())) vec.resize(chosen + 1);
      vec[chosen] = {true, share, share ? g.last_use(t.name) : INT32_MAX};
      asg.groups[t.name] = {array_name(t.width), chosen};
    }
  }

  for (const auto &[w, vec] : slots)
    asg.synthesized.push_back({array_of.at(w), ScalarType{w}, static_cast<int64_t>(vec.size())});

  Program out = p;
  out.locals.clear();
  for (const auto &l : p.locals)
    if (!asg.groups.count(l.name)) out.locals.push_back(l);
  for (const auto &a : asg.synthesized) out.arrays.push_back(a);
  for (auto &n : out.body) {
    Statement &s = n.stmt();
    rewrite_expr(s.rhs, [&](Expr &e) {
      if (e.op != Op::Local) return;
      const auto &[arr, idx] = asg.groups.at(e.name);
      e = Expr::load(arr, Expr::constant(static_cast<u128>(idx), 0), e.width);
    });
    for (auto &t : s.targets) {
      if (t.kind != LValue::Kind::Local) continue;
      const auto &[arr, idx] = asg.groups.at(t.name);
      t = LValue::element(arr, Expr::constant(static_cast<u128>(idx), 0), t.width);
    }
  }
  check_kernel(out);
  return {std::move(out), std::move(asg)};
}

std::string ddg_to_dot(const Program &p, const DDG &g) {
  std::ostringstream os;
  os << "digraph \"" << p.name << "\" {\n  rankdir=TB;\n";
  for (size_t i = 0; i < g.defs.size(); ++i) {
    const DefNode &d = g.defs[i];
    os << "  d" << i << " [label=\"" << d.name << " : " << d.type.name();
    if (d.stmt >= 0) os << "\\ns" << d.stmt;
    os << "\\nuses=" << d.use_count << "\"" << (d.stmt < 0 ? ", shape=box" : "") << "];\n";
  }
  // A use edge points from the consumed def to every def of the consuming statement.
  for (const auto &u : g.uses)
    for (size_t j = 0; j < g.defs.size(); ++j)
      if (g.defs[j].stmt == u.stmt) os << "  d" << u.def << " -> d" << j << " [label=\"" << u.position << "\"];\n";
  os << "}\n";
  return os.str();
}

}  // namespace rollhls
