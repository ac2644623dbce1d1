#include "rollhls/pragmas.hpp"

#include <sstream>

namespace rollhls {

bool PragmaConfig::empty() const {
  for (const auto &[_, d] : loops)
    if (d.pipeline_ii || d.unroll > 1) return false;
  return partition.empty() && dependence_false.empty();
}

const LoopDirectives &PragmaConfig::loop(const std::string &label) const {
  static const LoopDirectives none;
  auto it = loops.find(label);
  return it == loops.end() ? none : it->second;
}

void PragmaConfig::normalize() {
  for (auto it = loops.begin(); it != loops.end();) {
    if (!it->second.pipeline_ii && it->second.unroll <= 1) it = loops.erase(it);
    else ++it;
  }
  for (auto it = partition.begin(); it != partition.end();) {
    if (it->second <= 1) it = partition.erase(it);
    else ++it;
  }
}

std::string PragmaConfig::describe() const {
  std::ostringstream os;
  bool first = true;
  auto sep = [&] {
    if (!first) os << ' ';
    first = false;
  };
  for (const auto &[label, d] : loops) {
    if (d.pipeline_ii) {
      sep();
      os << label << ":ii=" << *d.pipeline_ii;
    }
    if (d.unroll > 1) {
      sep();
      os << label << ":unroll=" << d.unroll;
    }
  }
  for (const auto &[a, f] : partition) {
    sep();
    os << a << ":cyclic=" << f;
  }
  for (const auto &a : dependence_false) {
    sep();
    os << a << ":dep=false";
  }
  return first ? "-" : os.str();
}

nlohmann::json pragmas_to_json(const PragmaConfig &p) {
  nlohmann::json loops = nlohmann::json::object();
  for (const auto &[label, d] : p.loops) {
    nlohmann::json jd = nlohmann::json::object();
    if (d.pipeline_ii) jd["pipeline_ii"] = *d.pipeline_ii;
    if (d.unroll > 1) jd["unroll"] = d.unroll;
    loops[label] = jd;
  }
  nlohmann::json part = nlohmann::json::object();
  for (const auto &[a, f] : p.partition) part[a] = f;
  return {{"loops", loops},
          {"partition", part},
          {"dependence_false", std::vector<std::string>(p.dependence_false.begin(), p.dependence_false.end())}};
}

PragmaConfig pragmas_from_json(const nlohmann::json &j) {
  PragmaConfig p;
  if (j.contains("loops"))
    for (const auto &[label, jd] : j.at("loops").items()) {
      LoopDirectives d;
      if (jd.contains("pipeline_ii")) d.pipeline_ii = jd.at("pipeline_ii").get<int>();
      d.unroll = jd.value("unroll", 1);
      p.loops[label] = d;
    }
  if (j.contains("partition"))
    for (const auto &[a, f] : j.at("partition").items()) p.partition[a] = f.get<int>();
  if (j.contains("dependence_false"))
    for (const auto &a : j.at("dependence_false")) p.dependence_false.insert(a.get<std::string>());
  p.normalize();
  return p;
}

}  // namespace rollhls
