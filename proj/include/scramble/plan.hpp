#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scramble/records.hpp"

namespace scramble {

// Sweep description: one plan fans out into jobs over (size, disorder
// strength, bond cap, realization index). Plans are stored as JSON with
// // comments allowed.
struct TimeGridSpec {
  double dt = 0.05;       // integrator step
  double t_max = 10.0;    // horizon in units of 1/J
  int snap_every = 1;     // record every k-th step
  double stop_above = 0;  // early stop once mean C exceeds this; 0 = never
};

struct ExperimentPlan {
  std::string id;
  std::string engine;  // "ed", "exact", "tdvp-mpo", "classical", "probe"
  std::vector<int> sizes;
  std::vector<double> w_values;
  double alpha = 0.5;
  double j = 1.0;
  std::optional<double> alpha_tilde{};
  std::uint64_t seed = 1;
  std::map<int, int> realizations;  // per size
  std::vector<int> chi_values;      // tdvp-mpo only; {0} elsewhere
  TimeGridSpec grid;

  // engine knobs
  int ed_states = 20;
  double ed_window = 1.0 / 3.0;
  double trunc_cut = 1e-5;
  int krylov_max = 40;
  int ensemble = 100;
  double classical_dt = 0.01;
  std::string deriv = "tangent";  // or "finite_diff"

  std::string out_dir;

  ModelParams model_for(int n, double w) const;
  void validate() const;
};

json to_json(const ExperimentPlan& plan);
ExperimentPlan plan_from_json(const json& j);
ExperimentPlan load_plan(const std::filesystem::path& path);

// Hash of the result-defining content: physics parameters, engine, grids
// and knobs. Realization counts, worker counts and output paths stay out,
// so growing an ensemble extends a record store instead of invalidating it.
std::uint64_t plan_content_hash(const ExperimentPlan& plan);

struct JobSpec {
  int n = 0;
  double w = 0.0;
  int chi = 0;
  int index = 0;
};

std::string job_key(const JobSpec& job);
std::vector<JobSpec> enumerate_jobs(const ExperimentPlan& plan);

}  // namespace scramble
