#include "scramble/runner.hpp"

#include <nlohmann/json.hpp>

#include <condition_variable>
#include <deque>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <unordered_set>

namespace scramble {

namespace {

std::string row_key(const json& row) {
  JobSpec job;
  job.n = row.at("n").get<int>();
  job.w = row.at("w").get<double>();
  job.chi = row.value("chi", 0);
  job.index = row.at("index").get<int>();
  return job_key(job);
}

struct JobResult {
  std::size_t slot = 0;
  std::vector<json> rows;
  std::exception_ptr error{};
};

}  // namespace

RunSummary run_plan(const ExperimentPlan& plan, const RunOptions& opts) {
  plan.validate();
  if (plan.out_dir.empty())
    throw std::invalid_argument("run_plan: plan needs an output directory");
  const std::filesystem::path dir(plan.out_dir);
  std::filesystem::create_directories(dir);
  const std::filesystem::path manifest_path = dir / "manifest.jsonl";
  const std::filesystem::path records_path = dir / "records.jsonl";
  const std::uint64_t hash = plan_content_hash(plan);

  std::unordered_set<std::string> done;
  bool have_header = false;
  if (opts.resume) {
    for (const json& line : read_jsonl(manifest_path)) {
      const std::string kind = line.value("kind", "");
      if (kind == "header") {
        const std::uint64_t stored = line.at("plan_hash").get<std::uint64_t>();
        if (stored != hash)
          throw std::runtime_error(
              "run_plan: existing store was produced by a different plan "
              "(content hash mismatch); refusing to mix results");
        have_header = true;
      } else if (kind == "done") {
        done.insert(line.at("key").get<std::string>());
      }
    }
  } else {
    std::filesystem::remove(manifest_path);
    std::filesystem::remove(records_path);
  }

  JsonlWriter manifest(manifest_path);
  JsonlWriter records(records_path);
  if (!have_header)
    manifest.write_line(
        {{"kind", "header"}, {"plan_hash", hash}, {"id", plan.id}});

  std::vector<JobSpec> jobs;
  for (const JobSpec& job : enumerate_jobs(plan))
    if (!done.count(job_key(job))) jobs.push_back(job);

  RunSummary summary;
  summary.total = static_cast<int>(enumerate_jobs(plan).size());
  summary.skipped = summary.total - static_cast<int>(jobs.size());
  if (jobs.empty()) return summary;

  const EngineFn engine = engine_for(plan.engine);
  int workers = opts.workers > 0
                    ? opts.workers
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min<int>(workers, static_cast<int>(jobs.size()));

  std::mutex mu;
  std::condition_variable cv;
  std::size_t next_job = 0;
  std::deque<JobResult> ready;
  int in_flight = 0;
  bool stop = false;

  auto worker = [&] {
    for (;;) {
      std::size_t slot = 0;
      {
        std::unique_lock lock(mu);
        if (stop || next_job >= jobs.size()) return;
        if (opts.cancel && opts.cancel()) {
          stop = true;
          cv.notify_all();
          return;
        }
        slot = next_job++;
        ++in_flight;
      }
      JobResult result;
      result.slot = slot;
      try {
        result.rows = engine(plan, jobs[slot]);
      } catch (...) {
        result.error = std::current_exception();
      }
      {
        std::lock_guard lock(mu);
        --in_flight;
        ready.push_back(std::move(result));
      }
      cv.notify_all();
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int k = 0; k < workers; ++k) pool.emplace_back(worker);

  std::exception_ptr first_error{};
  for (;;) {
    JobResult result;
    {
      std::unique_lock lock(mu);
      cv.wait(lock, [&] {
        return !ready.empty() ||
               (in_flight == 0 && (stop || next_job >= jobs.size()));
      });
      if (ready.empty()) break;
      result = std::move(ready.front());
      ready.pop_front();
    }
    if (result.error) {
      std::lock_guard lock(mu);
      stop = true;
      if (!first_error) first_error = result.error;
      continue;
    }
    // Records first, completion mark second: a crash between the two only
    // leaves orphan rows that the next run overwrites.
    for (const json& row : result.rows) records.write_line(row);
    manifest.write_line({{"kind", "done"}, {"key", job_key(jobs[result.slot])}});
    ++summary.executed;
  }
  for (std::thread& t : pool) t.join();
  // Drain results that finished after the writer saw the stop condition.
  for (JobResult& result : ready) {
    if (result.error) {
      if (!first_error) first_error = result.error;
      continue;
    }
    for (const json& row : result.rows) records.write_line(row);
    manifest.write_line({{"kind", "done"}, {"key", job_key(jobs[result.slot])}});
    ++summary.executed;
  }
  if (first_error) std::rethrow_exception(first_error);
  summary.cancelled = stop;
  return summary;
}

std::vector<json> load_records(const std::filesystem::path& out_dir) {
  std::unordered_set<std::string> acked;
  for (const json& line : read_jsonl(out_dir / "manifest.jsonl"))
    if (line.value("kind", "") == "done")
      acked.insert(line.at("key").get<std::string>());

  std::unordered_map<std::string, json> by_key;
  std::vector<std::string> order;
  for (json& row : read_jsonl(out_dir / "records.jsonl")) {
    if (row.contains("kind")) continue;  // diagnostics rows
    std::string key = row_key(row);
    if (!acked.count(key)) continue;
    if (!by_key.count(key)) order.push_back(key);
    by_key[key] = std::move(row);
  }
  std::vector<json> rows;
  rows.reserve(order.size());
  for (const std::string& key : order) rows.push_back(std::move(by_key[key]));
  return rows;
}

}  // namespace scramble
