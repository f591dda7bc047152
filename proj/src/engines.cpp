#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "scramble/classical.hpp"
#include "scramble/ed.hpp"
#include "scramble/otoc_exact.hpp"
#include "scramble/prng.hpp"
#include "scramble/runner.hpp"

namespace scramble {

std::vector<double> snapshot_times(const TimeGridSpec& grid) {
  const double step = grid.dt * grid.snap_every;
  const long count = std::lround(std::floor(grid.t_max / step + 1e-9));
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(count) + 1);
  for (long k = 0; k <= count; ++k) times.push_back(step * static_cast<double>(k));
  return times;
}

namespace {

std::vector<json> run_ed_job(const ExperimentPlan& plan, const JobSpec& job) {
  EdRecord rec;
  rec.params = plan.model_for(job.n, job.w);
  rec.seed = plan.seed;
  rec.index = job.index;
  rec.window = plan.ed_window;
  const DisorderRealization dis = sample_disorder(rec.params, plan.seed, job.index);
  rec.obs = ed_observables(rec.params, dis, plan.ed_states, plan.ed_window);
  return {to_json(rec)};
}

// Fast deterministic stand-in engine for exercising the harness itself.
std::vector<json> run_probe_job(const ExperimentPlan& plan, const JobSpec& job) {
  std::this_thread::sleep_for(std::chrono::milliseconds(2));
  const std::uint64_t bits =
      stream_word(plan.seed, static_cast<std::uint64_t>(job.n),
                  static_cast<std::uint64_t>(job.index));
  json row = to_json(plan.model_for(job.n, job.w));
  row["engine"] = "probe";
  row["seed"] = plan.seed;
  row["index"] = job.index;
  row["value"] = unit_double(bits);
  return {row};
}

std::vector<json> run_exact_job(const ExperimentPlan& plan, const JobSpec& job) {
  const ModelParams params = plan.model_for(job.n, job.w);
  const DisorderRealization dis = sample_disorder(params, plan.seed, job.index);
  const ExactOtocEngine engine(params, dis);
  OtocCurve curve =
      engine.commutator_curve(snapshot_times(plan.grid), plan.grid.stop_above);
  curve.seed = plan.seed;
  curve.index = job.index;
  return {to_json(curve)};
}

std::vector<json> run_classical_job(const ExperimentPlan& plan,
                                    const JobSpec& job) {
  const ModelParams params = plan.model_for(job.n, job.w);
  const DisorderRealization dis = sample_disorder(params, plan.seed, job.index);
  ClassicalOptions opts;
  opts.ensemble = plan.ensemble;
  opts.dt = plan.classical_dt;
  opts.method =
      plan.deriv == "finite_diff" ? DerivMethod::finite_diff : DerivMethod::tangent;
  opts.stop_above = plan.grid.stop_above;
  OtocCurve curve =
      classical_sensitivity(params, dis, snapshot_times(plan.grid), opts);
  return {to_json(curve)};
}

}  // namespace

// Defined alongside the tensor-network engine in tdvp_engine.cpp.
std::vector<json> run_tdvp_job(const ExperimentPlan&, const JobSpec&);

EngineFn engine_for(const std::string& engine) {
  if (engine == "ed") return run_ed_job;
  if (engine == "probe") return run_probe_job;
  if (engine == "exact") return run_exact_job;
  if (engine == "tdvp-mpo") return run_tdvp_job;
  if (engine == "classical") return run_classical_job;
  throw std::invalid_argument("engine_for: unknown engine '" + engine + "'");
}

}  // namespace scramble
