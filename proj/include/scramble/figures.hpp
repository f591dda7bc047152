#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scramble/plan.hpp"
#include "scramble/runner.hpp"

namespace scramble {

// Canonical datasets and figure tables. Every figure id maps to one or more
// shared datasets (record stores under a data root) plus an analysis step
// that condenses records into a CSV table.

// Data root resolution: $SCRAMBLE_DATA_DIR if set, else ./runs.
std::filesystem::path data_root();

// All built-in dataset plans, out_dir resolved under the data root.
std::vector<ExperimentPlan> builtin_datasets();
ExperimentPlan dataset(const std::string& id);

std::vector<std::string> figure_ids();

// Ensures the datasets behind a figure are complete (resumable), then
// writes the figure's CSV tables under out_dir. Returns written paths.
std::vector<std::filesystem::path> reproduce_figure(
    const std::string& figure_id, const std::filesystem::path& out_dir,
    const RunOptions& opts);

// Analysis only: condense an existing record store into the tables for
// `analysis_id` (same ids as figures) without running anything. threshold 0
// picks the per-figure default (0.3 quantum, 1.0 classical).
std::vector<std::filesystem::path> analyze_records(
    const std::filesystem::path& records_dir, const std::string& analysis_id,
    const std::filesystem::path& out_dir, double threshold = 0.0);

// Quick end-to-end consistency battery; prints one line per check.
bool run_verify_battery();

}  // namespace scramble
