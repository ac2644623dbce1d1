// rollhls: re-roll straight-line kernels and explore HLS design variants.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <sstream>

#include "rollhls/emit.hpp"
#include "rollhls/explorer.hpp"
#include "rollhls/multikernel.hpp"
#include "rollhls/oracle.hpp"
#include "rollhls/output.hpp"
#include "rollhls/parser.hpp"
#include "rollhls/pipeline.hpp"
#include "rollhls/qor.hpp"

namespace fs = std::filesystem;
using namespace rollhls;

namespace {

enum Exit { kOk = 0, kNotEquivalent = 1, kUsage = 2, kInfeasible = 3 };

struct Flags {
  uint64_t seed = 1;
  std::string device = "zu9eg";
  std::string weights = "0.5,0.5";
  std::string params;
  int min_seq_len = 2;
  int max_unroll = 16;
  int refine = 0;
  int64_t dsp_budget = -1;
  std::string mode = "latency";
  int vectors = 1000;
  std::string out = ".";
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

DeviceProfile load_device(const std::string &name_or_path) {
  if (fs::is_regular_file(name_or_path)) return device_from_json(nlohmann::json::parse(read_file(name_or_path)));
  try {
    return device_by_name(name_or_path);
  } catch (const std::exception &e) {
    throw UsageError(e.what());
  }
}

Weights parse_weights(const std::string &s) {
  Weights w;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%lf,%lf%c", &w.latency, &w.resource, &tail) != 2 || w.latency < 0 || w.resource < 0)
    throw UsageError("--weights expects two non-negative numbers, e.g. 0.5,0.5");
  return w;
}

EstimatorParams load_params(const std::string &path) {
  if (path.empty()) return {};
  return params_from_json(nlohmann::json::parse(read_file(path)));
}

fs::path out_dir(const Flags &f) {
  fs::path d(f.out);
  fs::create_directories(d);
  return d;
}

int cmd_roll(const std::string &input, const Flags &f) {
  ParsedSource src = load_kernel_file(input);
  Program p = loop_count(src.kernel) > 0 ? unroll(src.kernel) : src.kernel;
  RollOptions opt;
  opt.saturation.min_sequence_ops = f.min_seq_len;
  opt.vectors = f.vectors;
  opt.seed = f.seed;
  RollResult r = roll(p, opt);
  nlohmann::json report = roll_report(r);
  report["input"] = input;
  std::cout << "statements: " << r.statements_before << " -> " << r.statements_after << "\n"
            << "loops: " << r.loops << "\n"
            << "equivalence: " << (r.verdict.equivalent ? "equivalent" : "NOT equivalent") << " ("
            << r.verdict.vectors_tested << " vectors, seed " << r.verdict.seed << ")\n";
  if (!r.verdict.equivalent) {
    std::cerr << "rollhls: rolled program differs from the input; nothing written\n"
              << verdict_to_json(r.verdict, p).dump(2) << "\n";
    return kNotEquivalent;
  }
  const fs::path dir = out_dir(f);
  write_atomic((dir / "rolled.slc").string(), emit_c(r.rolled));
  write_atomic((dir / "roll_report.json").string(), report.dump(2) + "\n");
  return kOk;
}

int cmd_explore(const std::string &input, const Flags &f) {
  ParsedSource src = load_kernel_file(input);
  const DeviceProfile dev = load_device(f.device);
  const Weights w = parse_weights(f.weights);
  const EstimatorParams params = load_params(f.params);
  ExplorerConfig cfg;
  cfg.max_unroll = f.max_unroll;
  cfg.vectors = f.vectors;
  cfg.seed = f.seed;

  DesignSpace ds = explore(src.kernel, cfg, params);
  RunInfo run{f.seed, input, dev, w, {}};
  if (f.refine > 0) run.hypervolume = refine(ds, params, dev, f.refine, cfg).hypervolume;
  for (const auto &warning : ds.warnings) std::cerr << "warning: " << warning << "\n";

  const Scored s = score(ds, dev, w);
  const nlohmann::json j = design_space_to_json(ds, s, run);
  const fs::path dir = out_dir(f);
  write_atomic((dir / "design_space.json").string(), j.dump(2) + "\n");
  write_atomic((dir / "pareto.csv").string(), pareto_csv(ds, s, f.seed));
  write_atomic((dir / "pareto.svg").string(), pareto_svg(s, ds.source.name));
  write_atomic((dir / "report.md").string(), report_markdown(j));
  if (s.best >= 0) {
    for (const auto &d : ds.points) {
      if (d.id != s.best) continue;
      write_atomic((dir / "best.c").string(), emit_c(ds.variants[static_cast<size_t>(d.variant)].program, d.pragmas));
    }
  }
  std::cout << "variants: " << ds.variants.size() << "\n"
            << "design points: " << ds.points.size() << "\n"
            << "pareto front: " << s.front.size() << "\n"
            << "best (min NPI): " << s.best << "\n";
  return kOk;
}

int cmd_check(const std::string &a, const std::string &b, const Flags &f) {
  const Kernel ka = load_kernel_file(a).kernel;
  const Kernel kb = load_kernel_file(b).kernel;
  const EquivVerdict v = check_equiv(ka, kb, f.vectors, f.seed);
  std::cout << verdict_to_json(v, ka).dump(2) << "\n";
  return v.equivalent ? kOk : kNotEquivalent;
}

int cmd_combine(const std::vector<std::string> &files, const Flags &f) {
  const DeviceProfile dev = load_device(f.device);
  const Weights w = parse_weights(f.weights);
  if (f.mode != "latency" && f.mode != "npi") throw UsageError("--mode must be latency or npi");
  std::vector<KernelFront> fronts;
  for (const auto &file : files) fronts.push_back(load_front(file));

  const CombineResult res = combine_fronts(fronts, dev, w);
  const int64_t budget = f.dsp_budget < 0 ? std::numeric_limits<int64_t>::max() : f.dsp_budget;
  const Selection sel = select_under_budget(res.all, budget, f.mode == "npi" ? SelectMode::Npi : SelectMode::Latency);

  nlohmann::json kernels = nlohmann::json::array();
  for (const auto &k : fronts) kernels.push_back({{"name", k.name}, {"points", k.points.size()}});
  nlohmann::json front = nlohmann::json::array();
  for (const auto &d : res.front) front.push_back(combined_to_json(d, fronts));
  nlohmann::json out = {{"seed", f.seed},
                        {"device", device_to_json(dev)},
                        {"weights", {w.latency, w.resource}},
                        {"kernels", kernels},
                        {"combinations", res.all.size()},
                        {"pruned", res.pruned},
                        {"front", front},
                        {"selection",
                         {{"mode", f.mode},
                          {"dsp_budget", f.dsp_budget < 0 ? nlohmann::json(nullptr) : nlohmann::json(f.dsp_budget)},
                          {"feasible", sel.feasible},
                          {sel.feasible ? "design" : "witness", combined_to_json(sel.design, fronts)}}}};
  write_atomic((out_dir(f) / "combined.json").string(), out.dump(2) + "\n");

  std::cout << "combinations: " << res.all.size() << (res.pruned ? " (fronts pruned)" : "") << "\n"
            << "combined front: " << res.front.size() << "\n";
  if (!sel.feasible) {
    std::cerr << "rollhls: no combination fits " << f.dsp_budget << " DSP; smallest needs " << sel.design.total.dsp
              << "\n";
    return kInfeasible;
  }
  std::cout << "selected: latency " << sel.design.total.latency << ", dsp " << sel.design.total.dsp << "\n";
  return kOk;
}

int cmd_report(const std::string &dir) {
  const fs::path d(dir);
  const auto j = nlohmann::json::parse(read_file((d / "design_space.json").string()));
  write_atomic((d / "report.md").string(), report_markdown(j));
  return kOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Re-roll straight-line kernels into loops and explore HLS design variants"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&](CLI::App *c) {
    c->add_option("--seed", f.seed, "Seed for every random choice")->capture_default_str();
    c->add_option("--vectors", f.vectors, "Random vectors per equivalence check")->capture_default_str()->check(CLI::PositiveNumber);
    c->add_option("-o,--out", f.out, "Output directory")->capture_default_str();
  };
  auto add_scoring = [&](CLI::App *c) {
    c->add_option("--device", f.device, "Device name or JSON profile")->capture_default_str();
    c->add_option("--weights", f.weights, "NPI weights w1,w2")->capture_default_str();
  };

  std::string input, other, report_dir;
  std::vector<std::string> fronts;

  auto *roll_cmd = app.add_subcommand("roll", "Re-roll a straight-line kernel");
  roll_cmd->add_option("input", input, "Kernel source (.slc)")->required()->check(CLI::ExistingFile);
  roll_cmd->add_option("--min-seq-len", f.min_seq_len, "Shortest statement sequence to roll")->capture_default_str()->check(CLI::PositiveNumber);
  add_common(roll_cmd);

  auto *explore_cmd = app.add_subcommand("explore", "Enumerate and estimate design variants");
  explore_cmd->add_option("input", input, "Structured kernel (.slc)")->required()->check(CLI::ExistingFile);
  explore_cmd->add_option("--max-unroll", f.max_unroll, "Largest unroll factor")->capture_default_str()->check(CLI::PositiveNumber);
  explore_cmd->add_option("--refine", f.refine, "Refinement rounds around the front")->capture_default_str()->check(CLI::NonNegativeNumber);
  explore_cmd->add_option("--params", f.params, "Estimator parameter JSON")->check(CLI::ExistingFile);
  add_common(explore_cmd);
  add_scoring(explore_cmd);

  auto *check_cmd = app.add_subcommand("check", "Compare two kernels on random and corner inputs");
  check_cmd->add_option("first", input, "Reference kernel")->required()->check(CLI::ExistingFile);
  check_cmd->add_option("second", other, "Candidate kernel")->required()->check(CLI::ExistingFile);
  add_common(check_cmd);

  auto *combine_cmd = app.add_subcommand("combine", "Combine per-kernel fronts");
  combine_cmd->add_option("fronts", fronts, "pareto.csv or design_space.json per kernel")->required()->check(CLI::ExistingFile);
  combine_cmd->add_option("--dsp-budget", f.dsp_budget, "DSP budget for the selection")->check(CLI::NonNegativeNumber);
  combine_cmd->add_option("--mode", f.mode, "Selection objective: latency or npi")->capture_default_str()->check(CLI::IsMember({"latency", "npi"}));
  add_common(combine_cmd);
  add_scoring(combine_cmd);

  auto *report_cmd = app.add_subcommand("report", "Rebuild report.md from design_space.json");
  report_cmd->add_option("dir", report_dir, "Directory holding design_space.json")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*roll_cmd) return cmd_roll(input, f);
    if (*explore_cmd) return cmd_explore(input, f);
    if (*check_cmd) return cmd_check(input, other, f);
    if (*combine_cmd) return cmd_combine(fronts, f);
    if (*report_cmd) return cmd_report(report_dir);
  } catch (const SignatureMismatch &e) {
    std::cerr << "rollhls: signature mismatch: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError &e) {
    std::cerr << "rollhls: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception &e) {
    std::cerr << "rollhls: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
