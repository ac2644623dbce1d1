#include "rollhls/output.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rollhls {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

nlohmann::json qor_json(const QoR &q) {
  return {{"latency_cycles", q.latency}, {"dsp", q.dsp}, {"lut", q.lut}, {"ff", q.ff}, {"bram", q.bram}};
}

const DesignPoint &point_by_id(const DesignSpace &ds, int id) {
  for (const auto &d : ds.points)
    if (d.id == id) return d;
  throw std::out_of_range("no design point " + std::to_string(id));
}

}  // namespace

Scored score(const DesignSpace &ds, const DeviceProfile &dev, const Weights &w) {
  Scored s;
  s.all = objectives(ds, dev);
  if (s.all.empty()) return s;
  std::vector<QoR> pop;
  for (const auto &d : ds.points)
    if (d.qor) pop.push_back(*d.qor);
  const NpiRange range = npi_range(pop, dev);
  double best = 0;
  for (const auto &o : s.all) {
    const double v = npi(o.latency, o.r, range, w);
    s.npi.push_back(v);
    if (s.best < 0 || v < best) {
      best = v;
      s.best = o.id;
    }
  }
  s.front = pareto_filter(s.all);
  return s;
}

nlohmann::json design_space_to_json(const DesignSpace &ds, const Scored &s, const RunInfo &run) {
  std::set<int> on_front;
  for (const auto &o : s.front) on_front.insert(o.id);
  std::map<int, size_t> at;
  for (size_t i = 0; i < s.all.size(); ++i) at[s.all[i].id] = i;

  nlohmann::json variants = nlohmann::json::array();
  for (size_t v = 0; v < ds.variants.size(); ++v) {
    nlohmann::json tr = nlohmann::json::array();
    for (const auto &t : ds.variants[v].transforms) tr.push_back(t.describe());
    variants.push_back({{"index", v}, {"transforms", tr}, {"loops", loop_labels(ds.variants[v].program)}});
  }
  nlohmann::json points = nlohmann::json::array();
  for (const auto &d : ds.points) {
    nlohmann::json tr = nlohmann::json::array();
    for (const auto &t : d.transforms) tr.push_back(t.to_json());
    nlohmann::json p = {{"id", d.id},
                        {"variant", d.variant},
                        {"transforms", tr},
                        {"pragmas", pragmas_to_json(d.pragmas)},
                        {"program_digest", d.program_digest}};
    if (d.qor) {
      const size_t i = at.at(d.id);
      p["qor"] = qor_json(*d.qor);
      p["r_percent"] = s.all[i].r;
      p["npi"] = s.npi[i];
      p["on_front"] = on_front.count(d.id) > 0;
    }
    points.push_back(std::move(p));
  }
  nlohmann::json front = nlohmann::json::array();
  for (const auto &o : s.front) front.push_back(o.id);
  return {{"kernel", ds.source.name},
          {"input", run.input},
          {"seed", run.seed},
          {"device", device_to_json(run.device)},
          {"weights", {run.weights.latency, run.weights.resource}},
          {"npi_population", "all design points"},
          {"variants", variants},
          {"dropped_variants", ds.dropped_variants},
          {"points", points},
          {"front", front},
          {"best", s.best},
          {"refine_hypervolume", run.hypervolume},
          {"warnings", ds.warnings}};
}

std::string pareto_csv(const DesignSpace &ds, const Scored &s, uint64_t seed) {
  std::map<int, double> npi_of;
  for (size_t i = 0; i < s.all.size(); ++i) npi_of[s.all[i].id] = s.npi[i];
  std::ostringstream os;
  os << "# seed=" << seed << "\n";
  os << "design_id,latency_cycles,dsp,lut,ff,bram,r_percent,npi\n";
  for (const auto &o : s.front) {
    const QoR &q = *point_by_id(ds, o.id).qor;
    os << o.id << ',' << q.latency << ',' << q.dsp << ',' << q.lut << ',' << q.ff << ',' << q.bram << ',' << num(o.r)
       << ',' << num(npi_of.at(o.id)) << "\n";
  }
  return os.str();
}

std::string pareto_svg(const Scored &s, const std::string &title) {
  constexpr double W = 800, H = 600, left = 80, right = 30, top = 50, bottom = 70;
  double lx = 0, hx = 1, ly = 0, hy = 1;
  if (!s.all.empty()) {
    lx = hx = s.all[0].latency;
    ly = hy = s.all[0].r;
    for (const auto &o : s.all) {
      lx = std::min(lx, o.latency);
      hx = std::max(hx, o.latency);
      ly = std::min(ly, o.r);
      hy = std::max(hy, o.r);
    }
  }
  if (hx == lx) lx -= 1, hx += 1;
  if (hy == ly) ly -= 1, hy += 1;
  const double padx = (hx - lx) * 0.05, pady = (hy - ly) * 0.05;
  lx -= padx, hx += padx, ly -= pady, hy += pady;
  auto X = [&](double v) { return left + (v - lx) / (hx - lx) * (W - left - right); };
  auto Y = [&](double v) { return H - bottom - (v - ly) / (hy - ly) * (H - top - bottom); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\">\n";
  os << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
  os << "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double vx = lx + (hx - lx) * i / 5, vy = ly + (hy - ly) * i / 5;
    os << "<text x=\"" << num(X(vx)) << "\" y=\"" << H - bottom + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(std::round(vx * 100) / 100)
       << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << num(Y(vy) + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(std::round(vy * 1000) / 1000)
       << "</text>\n";
  }
  os << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 20
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">latency (cycles)</text>\n";
  os << "<text x=\"20\" y=\"" << (top + H - bottom) / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"13\" transform=\"rotate(-90 20 " << (top + H - bottom) / 2 << ")\">resources (%)</text>\n";
  for (const auto &o : s.all)
    os << "<circle cx=\"" << num(X(o.latency)) << "\" cy=\"" << num(Y(o.r)) << "\" r=\"3\" fill=\"#999999\"/>\n";
  if (!s.front.empty()) {
    os << "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.front.size(); ++i) os << (i ? " " : "") << num(X(s.front[i].latency)) << "," << num(Y(s.front[i].r));
    os << "\"/>\n";
    for (const auto &o : s.front)
      os << "<circle cx=\"" << num(X(o.latency)) << "\" cy=\"" << num(Y(o.r)) << "\" r=\"4.5\" fill=\"#c0392b\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string report_markdown(const nlohmann::json &j) {
  std::ostringstream os;
  const auto &points = j.at("points");
  std::map<int, const nlohmann::json *> by_id;
  for (const auto &p : points) by_id[p.at("id").get<int>()] = &p;
  const auto &dev = j.at("device");

  os << "# Design space: " << j.at("kernel").get<std::string>() << "\n\n";
  os << "- input: `" << j.at("input").get<std::string>() << "`\n";
  os << "- seed: " << j.at("seed").get<uint64_t>() << "\n";
  os << "- device: " << dev.at("name").get<std::string>() << " (DSP " << dev.at("dsp") << ", LUT " << dev.at("lut")
     << ", FF " << dev.at("ff") << ", BRAM " << dev.at("bram") << ")\n";
  os << "- weights: " << num(j.at("weights")[0].get<double>()) << ", " << num(j.at("weights")[1].get<double>()) << "\n";
  os << "- variants: " << j.at("variants").size() << " (" << j.at("dropped_variants") << " dropped)\n";
  os << "- design points: " << points.size() << "\n";
  os << "- Pareto front: " << j.at("front").size() << " points\n\n";

  os << "## Pareto front\n\n";
  os << "| id | latency | DSP | LUT | FF | BRAM | r (%) | NPI | transforms | directives |\n";
  os << "|---:|---:|---:|---:|---:|---:|---:|---:|---|---|\n";
  for (const auto &idj : j.at("front")) {
    const auto &p = *by_id.at(idj.get<int>());
    const auto &q = p.at("qor");
    std::string tr;
    for (const auto &t : p.at("transforms")) {
      std::string d = t.at("kind").get<std::string>();
      if (!t.at("loops").empty() || t.contains("value")) {
        std::string args;
        for (const auto &l : t.at("loops")) args += (args.empty() ? "" : ",") + l.get<std::string>();
        if (t.contains("value")) args += (args.empty() ? "" : ",") + std::to_string(t.at("value").get<int64_t>());
        d += "(" + args + ")";
      }
      tr += (tr.empty() ? "" : " ") + d;
    }
    os << "| " << p.at("id") << " | " << q.at("latency_cycles") << " | " << q.at("dsp") << " | " << q.at("lut") << " | "
       << q.at("ff") << " | " << q.at("bram") << " | " << num(p.at("r_percent").get<double>()) << " | "
       << num(p.at("npi").get<double>()) << " | " << (tr.empty() ? "-" : tr) << " | "
       << pragmas_from_json(p.at("pragmas")).describe() << " |\n";
  }
  const int best = j.at("best").get<int>();
  if (best >= 0) {
    const auto &p = *by_id.at(best);
    os << "\n## Minimum-NPI design\n\n";
    os << "Point " << best << ": latency " << p.at("qor").at("latency_cycles") << " cycles, " << p.at("qor").at("dsp")
       << " DSP, r = " << num(p.at("r_percent").get<double>()) << " %, NPI " << num(p.at("npi").get<double>()) << ".\n";
  }
  if (!j.at("refine_hypervolume").empty()) {
    os << "\n## Refinement\n\nFront hypervolume per round:";
    for (const auto &h : j.at("refine_hypervolume")) os << " " << num(h.get<double>());
    os << "\n";
  }
  if (!j.at("warnings").empty()) {
    os << "\n## Warnings\n\n";
    for (const auto &w : j.at("warnings")) os << "- " << w.get<std::string>() << "\n";
  }
  return os.str();
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_atomic(const std::string &path, const std::string &content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

KernelFront load_front(const std::string &path) {
  namespace fs = std::filesystem;
  const fs::path p(path);
  KernelFront f;
  f.name = p.stem().string();
  if (f.name == "pareto" || f.name == "design_space") {
    const auto parent = fs::absolute(p).parent_path().filename().string();
    if (!parent.empty()) f.name = parent;
  }
  const std::string text = read_file(path);
  if (p.extension() == ".json") {
    const auto j = nlohmann::json::parse(text);
    if (j.contains("kernel")) f.name = j.at("kernel").get<std::string>();
    for (const auto &pt : j.at("points")) {
      if (!pt.contains("qor") || (pt.contains("on_front") && !pt.at("on_front").get<bool>())) continue;
      const auto &q = pt.at("qor");
      f.points.push_back({pt.at("id").get<int>(),
                          {q.at("latency_cycles").get<int64_t>(), q.at("dsp").get<int64_t>(), q.at("lut").get<int64_t>(),
                           q.at("ff").get<int64_t>(), q.at("bram").get<int64_t>()}});
    }
    return f;
  }
  std::istringstream in(text);
  std::string line;
  bool header = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line.rfind("design_id,", 0) != 0) throw std::runtime_error(path + ": missing pareto.csv header");
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 6) throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 8 columns");
    try {
      f.points.push_back({std::stoi(cells[0]),
                          {std::stoll(cells[1]), std::stoll(cells[2]), std::stoll(cells[3]), std::stoll(cells[4]),
                           std::stoll(cells[5])}});
    } catch (const std::logic_error &) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed number");
    }
  }
  return f;
}

}  // namespace rollhls
