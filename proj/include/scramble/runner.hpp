#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <vector>

#include "scramble/plan.hpp"

namespace scramble {

// Executes one job of a plan and returns its record rows (first row is the
// primary record; later rows are diagnostics). Registered per engine.
using EngineFn =
    std::function<std::vector<json>(const ExperimentPlan&, const JobSpec&)>;

EngineFn engine_for(const std::string& engine);

// Observation times k * dt * snap_every up to t_max inclusive.
std::vector<double> snapshot_times(const TimeGridSpec& grid);

struct RunOptions {
  int workers = 0;  // 0 = hardware concurrency
  bool resume = true;
  // Checked between jobs; a true return requests a clean stop.
  std::function<bool()> cancel{};
};

struct RunSummary {
  int total = 0;
  int skipped = 0;   // already in the manifest
  int executed = 0;
  bool cancelled = false;
};

// Runs all jobs not yet marked complete. Layout under plan.out_dir:
//   records.jsonl   one row per completed job (plus diagnostics rows)
//   manifest.jsonl  header with the plan content hash, then one line per
//                   completed job key, written only after its records are
//                   durably on disk
// A rerun with a matching hash extends the store; a mismatch aborts.
RunSummary run_plan(const ExperimentPlan& plan, const RunOptions& opts = {});

// Primary records of a store, deduplicated by job key (last wins), with
// only manifest-acknowledged keys included.
std::vector<json> load_records(const std::filesystem::path& out_dir);

}  // namespace scramble
