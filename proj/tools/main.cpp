#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "scramble/figures.hpp"
#include "scramble/linalg.hpp"
#include "scramble/plan.hpp"
#include "scramble/runner.hpp"

namespace {

void print_summary(const scramble::RunSummary& summary) {
  std::printf("jobs total=%d skipped=%d executed=%d%s\n", summary.total,
              summary.skipped, summary.executed,
              summary.cancelled ? " (cancelled)" : "");
}

}  // namespace

int main(int argc, char** argv) {
  scramble::pin_blas_kernels(argv);
  CLI::App app{"disordered all-to-all XX model: spectral statistics and "
               "scrambling dynamics"};
  app.require_subcommand(1);

  int workers = 0;
  app.add_option("--workers", workers, "worker threads (0 = hardware)");

  // run
  auto* run_cmd = app.add_subcommand("run", "execute a plan file");
  std::string plan_path;
  run_cmd->add_option("plan", plan_path, "plan file (JSON, // comments ok)")
      ->required();
  bool resume = true;
  run_cmd->add_flag("--resume,!--no-resume", resume,
                    "extend an existing record store (default) or discard it");
  std::string run_out;
  run_cmd->add_option("--out", run_out, "override the plan output directory");
  std::uint64_t run_seed = 0;
  bool run_seed_set = false;
  run_cmd->add_option("--seed", run_seed, "override the plan master seed")
      ->each([&](const std::string&) { run_seed_set = true; });
  int run_chi = 0;
  run_cmd->add_option("--chi", run_chi, "override the bond-dimension cap");

  // reproduce
  auto* rep_cmd = app.add_subcommand(
      "reproduce", "run the datasets behind a figure table and emit its CSV");
  std::string figure_id;
  rep_cmd->add_option("figure", figure_id, "figure table id")->required();
  std::string rep_out = "tables";
  rep_cmd->add_option("--out", rep_out, "directory for CSV tables");

  // analyze
  auto* ana_cmd = app.add_subcommand(
      "analyze", "condense an existing record store into CSV tables");
  std::string records_dir, analysis_id;
  ana_cmd->add_option("records", records_dir, "record store directory")
      ->required();
  ana_cmd->add_option("analysis", analysis_id, "analysis id")->required();
  std::string ana_out = "tables";
  ana_cmd->add_option("--out", ana_out, "directory for CSV tables");
  double threshold = scramble::kQuantumThreshold;
  ana_cmd->add_option("--threshold", threshold,
                      "commutator threshold defining the scrambling time");

  // verify
  auto* ver_cmd =
      app.add_subcommand("verify", "run the built-in consistency battery");

  CLI11_PARSE(app, argc, argv);

  try {
    scramble::RunOptions opts;
    opts.workers = workers;

    if (*run_cmd) {
      scramble::ExperimentPlan plan = scramble::load_plan(plan_path);
      if (!run_out.empty()) plan.out_dir = run_out;
      if (run_seed_set) plan.seed = run_seed;
      if (run_chi > 0) plan.chi_values = {run_chi};
      opts.resume = resume;
      print_summary(scramble::run_plan(plan, opts));
      return 0;
    }
    if (*rep_cmd) {
      const auto written =
          scramble::reproduce_figure(figure_id, rep_out, opts);
      for (const auto& path : written)
        std::printf("wrote %s\n", path.string().c_str());
      return 0;
    }
    if (*ana_cmd) {
      const auto written = scramble::analyze_records(
          records_dir, analysis_id, ana_out);
      for (const auto& path : written)
        std::printf("wrote %s\n", path.string().c_str());
      return 0;
    }
    if (*ver_cmd) {
      return scramble::run_verify_battery() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
