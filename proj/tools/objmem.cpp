// objmem command-line entry point: gen-world, run, eval, compare-policies.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "objmem/objmem.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitGeneration = 3;
constexpr int kExitRuntime = 4;

struct ConfigArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  int jobs = 0;
};

void add_config_flags(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "YAML run configuration (defaults apply when omitted)");
  cmd->add_option("--set", args.overrides, "Override a config field, e.g. --set exploration.alpha=0.5")
      ->take_all();
  cmd->add_option("-j,--jobs", args.jobs, "Worker threads (overrides the config)");
}

objmem::RunConfig load(const ConfigArgs& args) {
  auto overrides = args.overrides;
  if (args.jobs > 0) overrides.push_back("jobs=" + std::to_string(args.jobs));
  if (args.config_path.empty()) return objmem::load_config("", overrides);
  return objmem::load_config_file(args.config_path, overrides);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw objmem::Error("cannot write " + path);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object-centric episodic memory simulator"};
  app.require_subcommand(1);

  ConfigArgs gen_args;
  std::uint64_t gen_seed = 0;
  bool gen_seed_set = false;
  std::string gen_out = "world.txt";
  auto* gen = app.add_subcommand("gen-world", "Generate a world and write it in the world text format");
  add_config_flags(gen, gen_args);
  gen->add_option("--seed", gen_seed, "World seed (default: first configured seed)")
      ->each([&](const std::string&) { gen_seed_set = true; });
  gen->add_option("-o,--out", gen_out, "Output world file");

  ConfigArgs run_args;
  std::string run_dir;
  auto* run = app.add_subcommand("run", "Run one episode per seed and write JSONL logs");
  add_config_flags(run, run_args);
  run->add_option("-o,--output-dir", run_dir, "Log directory (overrides output_dir)");

  std::vector<std::string> eval_logs;
  std::string eval_report = "report.csv";
  std::string eval_series = "series.csv";
  std::string eval_summary = "summary.csv";
  auto* eval = app.add_subcommand("eval", "Recompute metrics from episode logs");
  eval->add_option("logs", eval_logs, "Episode JSONL logs")->required();
  eval->add_option("--report", eval_report, "Per-episode CSV report");
  eval->add_option("--series", eval_series, "Per-step series CSV");
  eval->add_option("--summary", eval_summary, "Per-policy median CSV");

  ConfigArgs cmp_args;
  std::vector<std::string> cmp_policies{"disagreement", "frontier", "random"};
  std::string cmp_out = "comparison.csv";
  std::string cmp_logs;
  auto* cmp = app.add_subcommand("compare-policies", "Run policies on matched seeds and compare");
  add_config_flags(cmp, cmp_args);
  cmp->add_option("--policies", cmp_policies, "Policies to compare")->delimiter(',');
  cmp->add_option("-o,--out", cmp_out, "Comparison CSV");
  cmp->add_option("--log-dir", cmp_logs, "Also write every episode log here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*gen) {
      auto cfg = load(gen_args);
      const std::uint64_t seed = gen_seed_set ? gen_seed : cfg.seeds.front();
      const auto world = objmem::generate_world(cfg.world, objmem::Vocabulary::household(), seed);
      auto out = open_out(gen_out);
      objmem::write_world(out, world);
      std::cout << gen_out << " world_hash=" << objmem::hex64(objmem::fnv1a(objmem::world_to_string(world)))
                << '\n';
    } else if (*run) {
      if (!run_dir.empty()) run_args.overrides.push_back("output_dir=" + run_dir);
      const auto cfg = load(run_args);
      for (const auto& p : objmem::run_all(cfg)) std::cout << p << '\n';
    } else if (*eval) {
      std::vector<objmem::ReportRow> rows;
      std::vector<std::pair<std::string, objmem::EpisodeData>> logs;
      for (const auto& path : eval_logs) {
        objmem::EpisodeData data;
        rows.push_back(objmem::evaluate_log_file(path, &data));
        logs.emplace_back(rows.back().source, std::move(data));
      }
      auto report = open_out(eval_report);
      objmem::write_report_csv(report, rows);
      auto series = open_out(eval_series);
      objmem::write_series_csv(series, logs);
      auto summary = open_out(eval_summary);
      objmem::write_summary_csv(summary, rows);
      std::cout << eval_report << '\n' << eval_series << '\n' << eval_summary << '\n';
    } else if (*cmp) {
      const auto cfg = load(cmp_args);
      std::vector<objmem::PolicyKind> kinds;
      std::vector<std::string> problems;
      for (const auto& p : cmp_policies) {
        if (auto k = objmem::policy_from_string(p)) kinds.push_back(*k);
        else problems.push_back("--policies: unknown policy '" + p + "'");
      }
      if (kinds.size() < 2) problems.emplace_back("--policies: at least two policies are required");
      if (!problems.empty()) throw objmem::ValidationError(problems);
      const auto result = objmem::compare_policies(cfg, kinds, cmp_logs);
      auto out = open_out(cmp_out);
      objmem::write_comparison_csv(out, result);
      std::cout << cmp_out << '\n';
    }
  } catch (const objmem::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const objmem::GenerationError& e) {
    std::cerr << "generation error: " << e.what() << '\n';
    return kExitGeneration;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
