#include "scramble/plan.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

namespace scramble {

ModelParams ExperimentPlan::model_for(int n, double w) const {
  ModelParams p;
  p.n = n;
  p.alpha = alpha;
  p.w = w;
  p.j = j;
  p.alpha_tilde = alpha_tilde;
  p.validate();
  return p;
}

void ExperimentPlan::validate() const {
  static const std::set<std::string> engines{"ed", "exact", "tdvp-mpo",
                                             "classical", "probe"};
  if (id.empty()) throw std::invalid_argument("plan: id required");
  if (!engines.count(engine))
    throw std::invalid_argument("plan: unknown engine '" + engine + "'");
  if (sizes.empty()) throw std::invalid_argument("plan: sizes required");
  if (w_values.empty()) throw std::invalid_argument("plan: w values required");
  if (chi_values.empty()) throw std::invalid_argument("plan: chi values required");
  if (engine != "tdvp-mpo" && (chi_values.size() != 1 || chi_values[0] != 0))
    throw std::invalid_argument("plan: chi sweep only applies to tdvp-mpo");
  for (int n : sizes) {
    if (!realizations.count(n))
      throw std::invalid_argument("plan: realization count missing for size " +
                                  std::to_string(n));
    model_for(n, w_values.front());
  }
  if (grid.dt <= 0 || grid.t_max <= 0 || grid.snap_every < 1)
    throw std::invalid_argument("plan: bad time grid");
}

json to_json(const ExperimentPlan& plan) {
  json j{{"id", plan.id},
         {"engine", plan.engine},
         {"n", plan.sizes},
         {"w", plan.w_values},
         {"alpha", plan.alpha},
         {"j", plan.j},
         {"seed", plan.seed}};
  if (plan.alpha_tilde) j["alpha_tilde"] = *plan.alpha_tilde;
  json reals;
  for (const auto& [n, count] : plan.realizations)
    reals[std::to_string(n)] = count;
  j["realizations"] = reals;
  if (plan.engine == "tdvp-mpo") {
    j["chi"] = plan.chi_values;
    j["trunc_cut"] = plan.trunc_cut;
    j["krylov_max"] = plan.krylov_max;
  }
  if (plan.engine != "ed") {
    j["time"] = {{"dt", plan.grid.dt},
                 {"t_max", plan.grid.t_max},
                 {"snap_every", plan.grid.snap_every},
                 {"stop_above", plan.grid.stop_above}};
  }
  if (plan.engine == "ed") {
    j["ed_states"] = plan.ed_states;
    j["ed_window"] = plan.ed_window;
  }
  if (plan.engine == "classical") {
    j["ensemble"] = plan.ensemble;
    j["classical_dt"] = plan.classical_dt;
    j["deriv"] = plan.deriv;
  }
  if (!plan.out_dir.empty()) j["out"] = plan.out_dir;
  return j;
}

ExperimentPlan plan_from_json(const json& j) {
  ExperimentPlan plan;
  plan.id = j.at("id").get<std::string>();
  plan.engine = j.at("engine").get<std::string>();
  plan.sizes = j.at("n").get<std::vector<int>>();
  if (j.at("w").is_array())
    plan.w_values = j.at("w").get<std::vector<double>>();
  else
    plan.w_values = {j.at("w").get<double>()};
  plan.alpha = j.at("alpha").get<double>();
  plan.j = j.value("j", 1.0);
  if (j.contains("alpha_tilde") && !j.at("alpha_tilde").is_null())
    plan.alpha_tilde = j.at("alpha_tilde").get<double>();
  plan.seed = j.at("seed").get<std::uint64_t>();

  const json& reals = j.at("realizations");
  if (reals.is_number_integer()) {
    for (int n : plan.sizes) plan.realizations[n] = reals.get<int>();
  } else {
    for (const auto& [key, value] : reals.items())
      plan.realizations[std::stoi(key)] = value.get<int>();
  }

  if (j.contains("chi")) {
    if (j.at("chi").is_array())
      plan.chi_values = j.at("chi").get<std::vector<int>>();
    else
      plan.chi_values = {j.at("chi").get<int>()};
  } else {
    plan.chi_values = {0};
  }
  if (j.contains("time")) {
    const json& t = j.at("time");
    plan.grid.dt = t.value("dt", plan.grid.dt);
    plan.grid.t_max = t.value("t_max", plan.grid.t_max);
    plan.grid.snap_every = t.value("snap_every", plan.grid.snap_every);
    plan.grid.stop_above = t.value("stop_above", plan.grid.stop_above);
  }
  plan.ed_states = j.value("ed_states", plan.ed_states);
  plan.ed_window = j.value("ed_window", plan.ed_window);
  plan.trunc_cut = j.value("trunc_cut", plan.trunc_cut);
  plan.krylov_max = j.value("krylov_max", plan.krylov_max);
  plan.ensemble = j.value("ensemble", plan.ensemble);
  plan.classical_dt = j.value("classical_dt", plan.classical_dt);
  plan.deriv = j.value("deriv", plan.deriv);
  plan.out_dir = j.value("out", std::string{});
  plan.validate();
  return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_plan: cannot open " + path.string());
  json j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  return plan_from_json(j);
}

std::uint64_t plan_content_hash(const ExperimentPlan& plan) {
  json j = to_json(plan);
  j.erase("realizations");
  j.erase("out");
  return json_content_hash(j);
}

std::string job_key(const JobSpec& job) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "n=%d;w=%.17g;chi=%d;i=%d", job.n, job.w,
                job.chi, job.index);
  return buf;
}

std::vector<JobSpec> enumerate_jobs(const ExperimentPlan& plan) {
  std::vector<JobSpec> jobs;
  for (int n : plan.sizes)
    for (double w : plan.w_values)
      for (int chi : plan.chi_values)
        for (int idx = 0; idx < plan.realizations.at(n); ++idx)
          jobs.push_back({n, w, chi, idx});
  return jobs;
}

}  // namespace scramble
