#include "rollhls/pipeline.hpp"

#include "rollhls/parser.hpp"

namespace rollhls {

RollResult roll(const Program &p, const RollOptions &opt) {
  if (auto v = validate_straight_line(p); !v.empty()) throw IrError("not straight-line: " + v.front().message);
  RollResult r;
  r.statements_before = statement_count(p);
  r.ddg = build_ddg(p);
  std::tie(r.arrayed, r.assignment) = assign_arrays(p, r.ddg);
  r.abstraction = abstract_program(r.arrayed);
  select_targets(r.abstraction, opt.saturation);
  const RTerm term = to_term(r.abstraction);
  SaturationResult sat = saturate(term, opt.saturation);
  r.truncated = sat.truncated;
  r.iterations = sat.iterations;
  r.rewrites = sat.rewrites;
  r.extracted = extract_best(sat.graph, sat.root);
  r.egraph = egraph_summary(sat, r.extracted);
  r.rolled = lower_to_loops(r.extracted, r.abstraction, r.arrayed);
  r.statements_after = statement_count(r.rolled);
  r.loops = loop_count(r.rolled);
  r.verdict = check_equiv(p, r.rolled, opt.vectors, opt.seed);
  return r;
}

nlohmann::json roll_report(const RollResult &r) {
  nlohmann::json groups = nlohmann::json::object();
  for (const auto &[local, slot] : r.assignment.groups) groups[local] = slot.first + "[" + std::to_string(slot.second) + "]";
  return {{"statements_before", r.statements_before},
          {"statements_after", r.statements_after},
          {"loops", r.loops},
          {"saturation", {{"truncated", r.truncated}, {"iterations", r.iterations}, {"rewrites", r.rewrites}}},
          {"egraph", r.egraph},
          {"array_assignment", groups},
          {"equivalent", r.verdict.equivalent},
          {"vectors_tested", r.verdict.vectors_tested},
          {"seed", r.verdict.seed}};
}

}  // namespace rollhls
