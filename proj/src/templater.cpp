#include "rollhls/templater.hpp"

#include <map>

#include "rollhls/emit.hpp"

namespace rollhls {

namespace {

void key_into(const Expr &e, bool hole_literals, std::string &out) {
  out += op_name(e.op);
  out += ':';
  out += std::to_string(e.width);
  if (e.op == Op::Const) {
    out += hole_literals ? "?" : to_hex_u128(e.value);
  } else if (e.op == Op::Hole) {
    out += "H" + std::to_string(static_cast<int>(e.value));
  } else if (!e.name.empty()) {
    out += e.name;
  }
  if (!e.args.empty()) {
    out += '(';
    for (size_t i = 0; i < e.args.size(); ++i) {
      if (i) out += ',';
      key_into(e.args[i], hole_literals, out);
    }
    out += ')';
  }
}

std::string key(const Expr &e, bool hole_literals) {
  std::string s;
  key_into(e, hole_literals, s);
  return s;
}

std::string skeleton_key(const Statement &s) {
  std::string out;
  for (const auto &t : s.targets) {
    out += t.kind == LValue::Kind::Local ? "L:" + t.name : "E:" + t.name + "[" + key(t.index, true) + "]";
    out += ":" + std::to_string(t.width) + ";";
  }
  out += "=";
  key_into(s.rhs, true, out);
  return out;
}

void walk_expr(Expr &e, bool index_ctx, const std::function<void(Expr &, bool)> &fn) {
  if (e.op == Op::Const || e.op == Op::Hole) {
    fn(e, index_ctx);
    return;
  }
  if (e.op == Op::Load) {
    walk_expr(e.args[0], true, fn);
    return;
  }
  if (e.op == Op::Shl || e.op == Op::Shr) {
    walk_expr(e.args[0], index_ctx, fn);
    walk_expr(e.args[1], true, fn);
    return;
  }
  for (auto &a : e.args) walk_expr(a, index_ctx, fn);
}

}  // namespace

void walk_literals(Statement &s, const std::function<void(Expr &, bool)> &fn) {
  for (auto &t : s.targets)
    if (t.kind == LValue::Kind::Element) walk_expr(t.index, true, fn);
  walk_expr(s.rhs, false, fn);
}

Expr canonicalize(const Expr &e) {
  Expr out = e;
  for (auto &a : out.args) a = canonicalize(a);
  if (is_commutative(out.op)) {
    const std::string sa = key(out.args[0], true), sb = key(out.args[1], true);
    if (sb < sa || (sb == sa && key(out.args[1], false) < key(out.args[0], false))) std::swap(out.args[0], out.args[1]);
  }
  return out;
}

Statement canonicalize(const Statement &s) {
  Statement out = s;
  out.rhs = canonicalize(s.rhs);
  return out;
}

std::string statement_key(const Statement &s) {
  std::string out;
  for (const auto &t : s.targets) {
    out += t.kind == LValue::Kind::Local ? "L:" + t.name : "E:" + t.name + "[" + key(t.index, false) + "]";
    out += ":" + std::to_string(t.width) + ";";
  }
  out += "=";
  key_into(s.rhs, false, out);
  return out;
}

Statement instantiate(const Template &t, const std::vector<int64_t> &consts) {
  if (static_cast<int>(consts.size()) != t.hole_count) throw IrError("instance does not match template hole count");
  Statement s = t.shape;
  walk_literals(s, [&](Expr &lit, bool) {
    if (lit.op != Op::Hole) return;
    const int64_t v = consts[static_cast<size_t>(lit.value)];
    u128 raw = static_cast<u128>(static_cast<__int128>(v));
    if (lit.width) raw &= ScalarType{lit.width}.mask();
    lit = Expr::constant(raw, lit.width);
  });
  return s;
}

Abstraction abstract_program(const Program &p) {
  Abstraction out;
  std::vector<Statement> canon;
  for (const auto &n : p.body) {
    if (!n.is_statement()) throw IrError("abstraction needs a straight-line program");
    canon.push_back(canonicalize(n.stmt()));
  }
  std::map<std::string, int> template_ids;

  size_t i = 0;
  while (i < canon.size()) {
    const std::string skel = skeleton_key(canon[i]);
    auto literals = [&](size_t k) {
      std::vector<std::pair<u128, bool>> lits;  // (value, index_ctx)
      walk_literals(canon[k], [&](Expr &lit, bool idx) { lits.emplace_back(lit.value, idx); });
      return lits;
    };
    // Literals too wide for a hole must match the run's first statement.
    std::vector<std::vector<std::pair<u128, bool>>> cols = {literals(i)};
    size_t j = i + 1;
    for (; j < canon.size() && skeleton_key(canon[j]) == skel; ++j) {
      auto row = literals(j);
      bool fits = true;
      for (size_t c = 0; c < row.size() && fits; ++c) {
        const u128 a = cols[0][c].first, b = row[c].first;
        fits = row[c].second || a == b || (a < (u128{1} << 63) && b < (u128{1} << 63));
      }
      if (!fits) break;
      cols.push_back(std::move(row));
    }
    const size_t nlit = cols[0].size();
    std::vector<bool> hole(nlit, false);
    for (size_t c = 0; c < nlit; ++c) {
      if (cols[0][c].second) {
        hole[c] = true;
        continue;
      }
      bool varies = false, small = true;
      for (const auto &row : cols) {
        varies = varies || row[c].first != cols[0][c].first;
        small = small && row[c].first < (u128{1} << 63);
      }
      hole[c] = varies && small;
    }

    Template t;
    t.shape = canon[i];
    t.shape.line = 0;
    int next_hole = 0;
    size_t c = 0;
    walk_literals(t.shape, [&](Expr &lit, bool) {
      if (hole[c++]) lit = Expr::hole(next_hole++, lit.width);
    });
    t.hole_count = next_hole;
    t.key = statement_key(t.shape);
    auto [it, inserted] = template_ids.emplace(t.key, static_cast<int>(out.templates.size()));
    if (inserted) {
      t.id = it->second;
      out.templates.push_back(t);
    }

    AbstractSequence seq;
    seq.template_id = it->second;
    for (size_t k = i; k < j; ++k) {
      Instance inst;
      inst.line_no = static_cast<int>(k);
      for (size_t col = 0; col < nlit; ++col)
        if (hole[col]) inst.consts.push_back(static_cast<int64_t>(cols[k - i][col].first));
      seq.instances.push_back(std::move(inst));
    }
    out.sequences.push_back(std::move(seq));
    i = j;
  }
  return out;
}

nlohmann::json abstraction_to_json(const Abstraction &a) {
  nlohmann::json templates = nlohmann::json::array();
  for (const auto &t : a.templates) {
    std::string text;
    for (size_t i = 0; i < t.shape.targets.size(); ++i) {
      const LValue &lv = t.shape.targets[i];
      if (i) text += ", ";
      text += lv.kind == LValue::Kind::Local ? lv.name : lv.name + "[" + expr_to_c(lv.index) + "]";
    }
    text += " = " + expr_to_c(t.shape.rhs);
    templates.push_back({{"id", t.id}, {"holes", t.hole_count}, {"shape", text}});
  }
  nlohmann::json seqs = nlohmann::json::array();
  for (const auto &s : a.sequences) {
    nlohmann::json inst = nlohmann::json::array();
    for (const auto &i : s.instances) inst.push_back({{"line", i.line_no}, {"consts", i.consts}});
    seqs.push_back({{"template", s.template_id}, {"excluded", s.excluded}, {"instances", inst}});
  }
  return {{"templates", templates}, {"sequences", seqs}};
}

}  // namespace rollhls
