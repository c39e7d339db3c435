// dwellopt command-line tool: phantom generation, single optimizations and
// E-vs-F comparisons. Exit codes: 0 ok, 2 usage/config, 3 infeasible, 4 I/O.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "dwellopt/dwellopt.hpp"

namespace fs = std::filesystem;
using namespace dwellopt;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kInfeasible = 3, kIo = 4 };

void configure_logging() {
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("DWELLOPT_LOG");
  if (!env) {
    spdlog::set_level(spdlog::level::info);
    return;
  }
  const auto level = spdlog::level::from_str(env);
  // from_str maps unknown names to "off"; only honour that when asked for.
  if (level == spdlog::level::off && std::string(env) != "off") {
    spdlog::set_level(spdlog::level::info);
    spdlog::warn("DWELLOPT_LOG='{}' is not a log level; using info", env);
    return;
  }
  spdlog::set_level(level);
}

struct RunOptions {
  std::string case_path;
  std::string protocol_path;
  std::string mode = "full";
  std::optional<std::uint64_t> seed;
  std::string out;
  AdaptiveRunConfig adaptive;
  moea::OptimizerConfig optimizer;
  bool no_scaling = false;
};

void add_run_flags(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--case", o.case_path, "Patient case JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--protocol", o.protocol_path, "Protocol JSON (default: built-in protocol)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Seed (mandatory)")->required();
  cmd->add_option("--out", o.out, "Output directory")->required();
  cmd->add_option("--ndc-min", o.adaptive.n_dc_min, "DC points per ROI in the adaptive rounds");
  cmd->add_option("--ndc-max", o.adaptive.n_dc_max, "DC points per ROI in the final run");
  cmd->add_option("--ndc-reeval", o.adaptive.n_dc_reeval, "DC points per ROI for re-evaluation");
  cmd->add_option("--gmin", o.adaptive.g_min, "Generations per adaptive round");
  cmd->add_option("--gmax", o.adaptive.g_max, "Generations of the final run");
  cmd->add_option("--min-steps", o.adaptive.min_steps, "Minimum adjustment steps per added aim");
  cmd->add_option("--pop", o.optimizer.population_size, "Population size");
  cmd->add_option("--clusters", o.optimizer.n_clusters, "Number of clusters");
  cmd->add_flag("--embrace-stop", o.adaptive.embrace_stop, "Extend the final run until a plan meets every EMBRACE aim");
  cmd->add_flag("--no-variance-scaling", o.no_scaling, "Disable adaptive variance scaling and the mean shift");
}

ProtocolConfig protocol_for(const RunOptions& o, const PatientCase& c) {
  ProtocolConfig p = o.protocol_path.empty() ? default_protocol(c.prescribed_dose_gy) : load_protocol(o.protocol_path);
  validate(p, &c);
  return p;
}

json config_json(const RunOptions& o) {
  const auto& a = o.adaptive;
  return json{{"case", o.case_path},
              {"protocol", o.protocol_path.empty() ? "built-in" : o.protocol_path},
              {"mode", o.mode},
              {"seed", *o.seed},
              {"optimizer", moea::config_to_json(o.optimizer)},
              {"adaptive", json{{"min_steps", a.min_steps}, {"n_dc_min", a.n_dc_min}, {"n_dc_max", a.n_dc_max}, {"g_min", a.g_min},
                                {"g_max", a.g_max}, {"n_dc_reeval", a.n_dc_reeval}, {"embrace_stop", a.embrace_stop}}}};
}

json aim_state_json(const ProtocolConfig& p, const AimState& s) {
  json out = json::array();
  for (std::size_t i = 0; i < p.aims.size(); ++i) {
    if (p.aims[i].protocol != AimProtocol::added) continue;
    out.push_back(json{{"aim", p.aims[i].id},
                       {"aspiration", s.entries[i].current_aspiration},
                       {"eliminated", s.entries[i].eliminated},
                       {"steps", s.entries[i].steps_taken}});
  }
  return out;
}

void write_outputs(const fs::path& dir, const moea::OptimizerState& st, const eval::ReevaluationResult& re, const ProtocolConfig& p,
                   std::size_t n_dwells, json report, const json& meta) {
  fs::create_directories(dir);
  // The front holds the re-evaluated plans; the trace covers the final run.
  eval::export_front(re.solutions, p, n_dwells, dir / "front.csv", meta);
  write_file_atomic(dir / "trace.csv", eval::trace_csv(st.best_lci_trace, st.best_balanced_trace));
  write_file_atomic(dir / "scatter.csv", eval::scatter_csv(re.solutions));
  moea::save_checkpoint(st, dir / "checkpoint.json");
  write_file_atomic(dir / "report.json", report.dump(2) + "\n");
}

int cmd_phantom(const std::string& preset, std::uint64_t seed, const std::string& out) {
  const PatientCase c = generate_phantom(phantom_preset(preset), seed);
  save_case(c, out);
  std::cout << "dwell positions: " << c.n_dwells() << " in " << c.channels.size() << " channels\n";
  for (const auto& r : c.rois) std::cout << to_string(r.name) << ": " << r.volume_cm3 << " cm3\n";
  return kOk;
}

int cmd_optimize(RunOptions& o) {
  if (o.no_scaling) o.optimizer.scaling.enabled = false;
  const PatientCase c = load_case(o.case_path);
  const ProtocolConfig p = protocol_for(o, c);
  const std::uint64_t seed = *o.seed;
  const auto start = std::chrono::steady_clock::now();
  const fs::path dir = o.out;
  json meta = config_json(o);
  auto progress = [](const std::string& phase, const moea::OptimizerState& st) {
    spdlog::info("{}: generation {}, archive {}, best min(LCI, LSI) {:.6g}", phase, st.generation, st.archive.size(),
                 st.best_balanced_trace.empty() ? 0.0 : st.best_balanced_trace.back());
  };
  if (o.mode == "embrace") {
    const auto res = eval::run_embrace_only(c, p, o.optimizer, o.adaptive, seed, {}, progress);
    auto rep = eval::make_run_report("E", seed, res.reevaluated, p);
    rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json report{{"mode", "embrace"},
                {"seed", seed},
                {"archive_size", rep.archive_size},
                {"plans_satisfying_embrace", rep.n_plans_satisfying_embrace},
                {"mean_abs_fallback_lci", rep.mean_abs_fallback_lci},
                {"mean_abs_fallback_lsi", rep.mean_abs_fallback_lsi},
                {"generations", res.state.generation},
                {"evaluations", res.state.evaluations},
                {"runtime_seconds", rep.runtime_seconds}};
    write_outputs(dir, res.state, res.reevaluated, p, c.n_dwells(), std::move(report), meta);
    spdlog::info("{} of {} plans meet every EMBRACE aim", rep.n_plans_satisfying_embrace, rep.archive_size);
    return kOk;
  }
  const auto res = run_adaptive(c, p, o.optimizer, o.adaptive, seed, {}, progress);
  auto rep = eval::make_run_report("F", seed, res.reevaluated, p);
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::size_t eliminated = 0;
  for (const auto& e : res.aims.entries) eliminated += e.eliminated ? 1 : 0;
  json report{{"mode", "full"},
              {"seed", seed},
              {"rounds", res.rounds},
              {"eliminations", eliminated},
              {"added_aims", aim_state_json(p, res.aims)},
              {"embrace_reached_before_reevaluation", res.embrace_reached},
              {"archive_size", rep.archive_size},
              {"plans_satisfying_embrace", rep.n_plans_satisfying_embrace},
              {"mean_abs_fallback_lci", rep.mean_abs_fallback_lci},
              {"mean_abs_fallback_lsi", rep.mean_abs_fallback_lsi},
              {"low_fidelity_generations", res.low_generations},
              {"generations", res.final_state.generation},
              {"evaluations", res.final_state.evaluations},
              {"runtime_seconds", rep.runtime_seconds}};
  write_outputs(dir, res.final_state, res.reevaluated, p, c.n_dwells(), std::move(report), meta);
  write_file_atomic(dir / "audit.log", audit_log_text(res.audit));
  spdlog::info("{} rounds, {} eliminations; {} of {} plans meet every EMBRACE aim", res.rounds, eliminated, rep.n_plans_satisfying_embrace,
               rep.archive_size);
  return kOk;
}

int cmd_compare(RunOptions& o, std::size_t runs, unsigned jobs) {
  if (o.no_scaling) o.optimizer.scaling.enabled = false;
  const PatientCase c = load_case(o.case_path);
  const ProtocolConfig p = protocol_for(o, c);
  eval::CompareConfig cfg;
  cfg.optimizer = o.optimizer;
  cfg.adaptive = o.adaptive;
  cfg.jobs = jobs;
  for (std::size_t k = 0; k < runs; ++k) cfg.seeds.push_back(*o.seed + k);
  spdlog::info("comparing E and F over {} seeds with {} job(s)", runs, jobs);
  const auto report = eval::compare_approaches(c, p, cfg);
  const fs::path dir = o.out;
  fs::create_directories(dir);
  write_file_atomic(dir / "summary.csv", eval::summary_table_csv({report.embrace, report.full}, p));
  std::vector<eval::RunReport> all = report.embrace_runs;
  all.insert(all.end(), report.full_runs.begin(), report.full_runs.end());
  write_file_atomic(dir / "runs.csv", eval::run_reports_csv(all));
  json meta = config_json(o);
  meta["runs"] = runs;
  meta["seeds"] = cfg.seeds;
  write_file_atomic(dir / "summary.meta.json", meta.dump(2) + "\n");
  for (const auto* m : {&report.embrace, &report.full})
    spdlog::info("mode {}: {}% of runs meet EMBRACE, {} plans per run", m->mode, m->pct_embrace_satisfied, m->mean_plans);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Bi-objective HDR brachytherapy dwell-time optimization"};
  app.require_subcommand(1);

  std::string preset = "default";
  std::uint64_t phantom_seed = 0;
  std::string phantom_out;
  auto* phantom = app.add_subcommand("phantom", "Generate a synthetic patient case");
  phantom->add_option("--preset", preset, "easy, medium or default");
  phantom->add_option("--seed", phantom_seed, "Seed (mandatory)")->required();
  phantom->add_option("-o,--output", phantom_out, "Case file to write")->required();

  std::string protocol_out;
  double prescribed = 7.0;
  auto* protocol = app.add_subcommand("protocol", "Write the built-in protocol as JSON");
  protocol->add_option("-o,--output", protocol_out, "Protocol file to write")->required();
  protocol->add_option("--prescribed-dose", prescribed, "Prescribed dose in Gy");

  RunOptions opt;
  auto* optimize = app.add_subcommand("optimize", "Optimize one case");
  add_run_flags(optimize, opt);
  optimize->add_option("--mode", opt.mode, "embrace or full")->check(CLI::IsMember({"embrace", "full"}));

  RunOptions cmp;
  std::size_t runs = 1;
  unsigned jobs = 1;
  auto* compare = app.add_subcommand("compare", "Compare EMBRACE-only and adaptive runs over consecutive seeds");
  add_run_flags(compare, cmp);
  compare->add_option("--runs", runs, "Runs per mode (seeds seed, seed+1, ...)")->check(CLI::PositiveNumber);
  compare->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*phantom) return cmd_phantom(preset, phantom_seed, phantom_out);
    if (*protocol) {
      save_protocol(default_protocol(prescribed), protocol_out);
      return kOk;
    }
    if (*optimize) return cmd_optimize(opt);
    if (*compare) return cmd_compare(cmp, runs, jobs);
  } catch (const InfeasibleError& e) {
    spdlog::error("{}", e.what());
    return kInfeasible;
  } catch (const IoError& e) {
    spdlog::error("{}", e.what());
    return kIo;
  } catch (const fs::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return kIo;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  }
  return kUsage;
}
