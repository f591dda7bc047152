#include "scramble/figures.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "scramble/analysis.hpp"
#include "scramble/classical.hpp"
#include "scramble/curves.hpp"
#include "scramble/prng.hpp"

namespace scramble {

namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kAnalysisSeed = 0x5ca1ab1eull;
constexpr int kBootstrapDraws = 200;
constexpr double kTStar = 0.5;
constexpr double kKeystoneHorizon = 5.0;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

class CsvFile {
 public:
  CsvFile(const fs::path& path, const std::string& header) : path_(path) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    out_.open(path);
    if (!out_) throw std::runtime_error("cannot open " + path.string());
    out_ << header << '\n';
  }
  template <typename... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ","), first = false, put(cells)), ...);
    out_ << '\n';
  }
  fs::path close() {
    out_.close();
    if (!out_) throw std::runtime_error("write failed: " + path_.string());
    return path_;
  }

 private:
  void put(double v) { out_ << fmt(v); }
  void put(int v) { out_ << v; }
  void put(const std::string& v) { out_ << v; }
  void put(const char* v) { out_ << v; }
  fs::path path_;
  std::ofstream out_;
};

fs::path plans_root() {
  if (const char* env = std::getenv("SCRAMBLE_PLANS_DIR")) return env;
  if (fs::is_directory("plans")) return "plans";
  std::error_code ec;
  fs::path exe = fs::read_symlink("/proc/self/exe", ec);
  if (!ec) {
    fs::path dir = exe.parent_path();
    for (int up = 0; up < 3; ++up) {
      if (fs::is_directory(dir / "plans")) return dir / "plans";
      dir = dir.parent_path();
    }
  }
  throw std::runtime_error(
      "cannot locate the plans directory; set SCRAMBLE_PLANS_DIR");
}

// figure id -> canonical datasets feeding it
const std::vector<std::pair<std::string, std::vector<std::string>>>&
figure_registry() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>>
      reg = {
          {"fig1a", {"ed-a2", "ed-a2-n14"}},
          {"fig1b", {"ed-a2", "ed-a2-n14"}},
          {"fig2a", {"ed-a2", "ed-a2-n14"}},
          {"fig2b", {"ed-a05", "ed-a05-n14"}},
          {"fig3a", {"otoc-n10-short"}},
          {"fig3b", {"otoc-n10-long"}},
          {"fig4a", {"tdvp-a05"}},
          {"fig4b", {"tdvp-a05"}},
          {"fig4c", {"tdvp-a05"}},
          {"fig5a", {"classical-a05"}},
          {"fig5b", {"classical-a05"}},
          {"figA", {"tdvp-chi-scan", "exact-n14-keystone", "tdvp-n14-keystone"}},
          {"figB", {"tdvp-a02", "tdvp-a05", "tdvp-a10"}},
      };
  return reg;
}

// ---- record grouping ------------------------------------------------------

struct EdGroups {
  // n -> w -> per-realization samples
  std::map<int, std::map<double, std::vector<double>>> r;
  std::map<int, std::map<double, std::vector<double>>> s;
};

EdGroups group_ed(const std::vector<json>& rows) {
  EdGroups g;
  for (const json& row : rows) {
    if (row.value("engine", "") != "ed") continue;
    const EdRecord rec = ed_record_from_json(row);
    g.r[rec.params.n][rec.params.w].push_back(rec.obs.mean_r);
    if (rec.obs.entropy_states > 0)
      g.s[rec.params.n][rec.params.w].push_back(rec.obs.s_mid);
  }
  return g;
}

bool is_curve_row(const json& row) {
  const std::string engine = row.value("engine", "");
  return engine == "exact" || engine == "tdvp-mpo" || engine == "classical";
}

std::vector<OtocCurve> load_curves(const std::vector<json>& rows) {
  std::vector<OtocCurve> curves;
  for (const json& row : rows)
    if (is_curve_row(row)) curves.push_back(curve_from_json(row));
  return curves;
}

// Pointwise stats over the common time prefix (curves stopped early by the
// threshold watchdog have shorter grids).
struct CurveStats {
  std::vector<double> t;
  std::vector<double> mean;
  std::vector<double> sem;
  int count = 0;
};

CurveStats curve_stats(const std::vector<OtocCurve>& curves) {
  CurveStats st;
  if (curves.empty()) return st;
  std::size_t len = curves.front().times.size();
  for (const OtocCurve& c : curves) len = std::min(len, c.times.size());
  for (std::size_t k = 0; k < len; ++k) {
    const double t0 = curves.front().times[k];
    std::vector<double> vals;
    vals.reserve(curves.size());
    for (const OtocCurve& c : curves) {
      if (std::abs(c.times[k] - t0) > 1e-9)
        throw std::invalid_argument("curve_stats: mismatched time grids");
      vals.push_back(c.c_mean[static_cast<Eigen::Index>(k)]);
    }
    const MeanSem ms = aggregate(vals);
    st.t.push_back(t0);
    st.mean.push_back(ms.mean);
    st.sem.push_back(ms.sem);
  }
  st.count = static_cast<int>(curves.size());
  return st;
}

double interp_at(const std::vector<double>& t, const std::vector<double>& v,
                 double x) {
  if (t.empty()) throw std::invalid_argument("interp_at: empty grid");
  if (x <= t.front()) return v.front();
  if (x >= t.back()) return v.back();
  const auto it = std::lower_bound(t.begin(), t.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - t.begin());
  const std::size_t lo = hi - 1;
  const double span = t[hi] - t[lo];
  const double f = span > 0.0 ? (x - t[lo]) / span : 0.0;
  return (1.0 - f) * v[lo] + f * v[hi];
}

double curve_value_at(const OtocCurve& c, double x) {
  std::vector<double> v(c.c_mean.data(), c.c_mean.data() + c.c_mean.size());
  return interp_at(c.times, v, x);
}

// ---- per-figure analyses ---------------------------------------------------

using Paths = std::vector<fs::path>;

Paths analyze_fig1a(const std::vector<json>& rows, const fs::path& out) {
  const EdGroups g = group_ed(rows);
  CsvFile csv(out / "fig1a.csv", "n,w,r_mean,r_sem,count");
  for (const auto& [n, by_w] : g.r)
    for (const auto& [w, samples] : by_w) {
      const MeanSem ms = aggregate(samples);
      csv.row(n, w, ms.mean, ms.sem, ms.count);
    }
  return {csv.close()};
}

Paths analyze_fig1b(const std::vector<json>& rows, const fs::path& out) {
  const EdGroups g = group_ed(rows);
  Paths paths;
  CsvFile csv(out / "fig1b.csv", "n,w,s_mean,s_sem,s_density,count");
  std::vector<SizeSeries> series;
  for (const auto& [n, by_w] : g.s) {
    SizeSeries sz;
    sz.n = n;
    for (const auto& [w, samples] : by_w) {
      const MeanSem ms = aggregate(samples);
      csv.row(n, w, ms.mean, ms.sem, ms.mean / n, ms.count);
      sz.w.push_back(w);
      sz.y.push_back(ms.mean / n);
      std::vector<double> dens(samples);
      for (double& v : dens) v /= n;
      sz.samples.push_back(std::move(dens));
    }
    if (sz.w.size() >= 3) series.push_back(std::move(sz));
  }
  paths.push_back(csv.close());
  if (series.size() >= 3) {
    const CollapseWindow window{0.05, 0.30, 0.4, 2.0};
    const CollapseResult res =
        data_collapse(series, window, 64, kAnalysisSeed);
    CsvFile cc(out / "fig1b-collapse.csv", "wc,wc_err,nu,nu_err,cost,sizes");
    cc.row(res.wc, res.wc_err, res.nu, res.nu_err, res.cost,
           static_cast<int>(series.size()));
    paths.push_back(cc.close());
  }
  return paths;
}

Paths analyze_crossings(const std::vector<json>& rows, const fs::path& out,
                        const std::string& name) {
  const EdGroups g = group_ed(rows);
  CsvFile csv(out / (name + ".csv"), "n1,n2,w_cross,sigma,found");
  std::vector<int> sizes;
  for (const auto& [n, _] : g.r) sizes.push_back(n);
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    const auto& a = g.r.at(sizes[k - 1]);
    const auto& b = g.r.at(sizes[k]);
    std::vector<double> grid;
    std::vector<std::vector<double>> sa, sb;
    for (const auto& [w, samples] : a) {
      const auto it = b.find(w);
      if (it == b.end()) continue;
      grid.push_back(w);
      sa.push_back(samples);
      sb.push_back(it->second);
    }
    if (grid.size() < 2) continue;
    const CrossingEstimate est = crossing_with_bootstrap(
        grid, sa, sb, kBootstrapDraws,
        stream_word(kAnalysisSeed, static_cast<std::uint64_t>(k)));
    csv.row(sizes[k - 1], sizes[k], est.w, est.sigma, est.found ? 1 : 0);
  }
  return {csv.close()};
}

Paths analyze_curve_family(const std::vector<json>& rows, const fs::path& out,
                           const std::string& name, bool by_w) {
  const std::vector<OtocCurve> curves = load_curves(rows);
  std::map<double, std::vector<OtocCurve>> groups;
  for (const OtocCurve& c : curves)
    groups[by_w ? c.params.w : c.params.n].push_back(c);
  CsvFile csv(out / (name + ".csv"),
              std::string(by_w ? "w" : "n") + ",t,c_mean,c_sem,count");
  for (const auto& [key, group] : groups) {
    const CurveStats st = curve_stats(group);
    for (std::size_t k = 0; k < st.t.size(); ++k)
      csv.row(key, st.t[k], st.mean[k], st.sem[k], st.count);
  }
  return {csv.close()};
}

Paths analyze_fig3b(const std::vector<json>& rows, const fs::path& out) {
  Paths paths = analyze_curve_family(rows, out, "fig3b", /*by_w=*/true);
  const std::vector<OtocCurve> curves = load_curves(rows);
  std::map<double, std::vector<OtocCurve>> groups;
  for (const OtocCurve& c : curves) groups[c.params.w].push_back(c);
  CsvFile csv(out / "fig3b-late.csv", "w,late_mean,late_std,points");
  for (const auto& [w, group] : groups) {
    const CurveStats st = curve_stats(group);
    std::vector<double> late;
    for (std::size_t k = 0; k < st.t.size(); ++k)
      if (st.t[k] >= 50.0 && st.t[k] <= 100.0) late.push_back(st.mean[k]);
    if (late.size() < 2) continue;
    const MeanSem ms = aggregate(late);
    const double sd = ms.sem * std::sqrt(static_cast<double>(ms.count));
    csv.row(w, ms.mean, sd, ms.count);
  }
  paths.push_back(csv.close());
  return paths;
}

struct TsTable {
  // n -> per-realization scrambling times
  std::map<int, std::vector<double>> ts;
  std::map<int, int> missed;  // curves that never crossed
};

TsTable scrambling_table(const std::vector<OtocCurve>& curves,
                         double threshold) {
  TsTable table;
  for (const OtocCurve& c : curves) {
    const std::optional<double> ts = scrambling_time(c, threshold);
    if (ts)
      table.ts[c.params.n].push_back(*ts);
    else
      ++table.missed[c.params.n];
  }
  return table;
}

Paths analyze_fig4b(const std::vector<json>& rows, const fs::path& out,
                    double threshold) {
  const std::vector<OtocCurve> curves = load_curves(rows);
  const TsTable table = scrambling_table(curves, threshold);
  CsvFile csv(out / "fig4b.csv", "n,ln_n,ts_mean,ts_sem,count,missed");
  std::vector<double> xs, ys;
  for (const auto& [n, samples] : table.ts) {
    const MeanSem ms = aggregate(samples);
    const int missed =
        table.missed.count(n) ? table.missed.at(n) : 0;
    csv.row(n, std::log(static_cast<double>(n)), ms.mean, ms.sem, ms.count,
            missed);
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(ms.mean);
  }
  Paths paths{csv.close()};
  const LinFit fit = fit_linear(xs, ys);
  CsvFile cf(out / "fig4b-fit.csv",
             "slope,slope_se,intercept,intercept_se,r2,points");
  cf.row(fit.slope, fit.slope_se, fit.intercept, fit.intercept_se, fit.r2,
         fit.points);
  paths.push_back(cf.close());
  return paths;
}

Paths analyze_fig4c(const std::vector<json>& rows, const fs::path& out) {
  const std::vector<OtocCurve> curves = load_curves(rows);
  std::map<int, std::vector<double>> by_n;
  for (const OtocCurve& c : curves)
    by_n[c.params.n].push_back(curve_value_at(c, kTStar));
  CsvFile csv(out / "fig4c.csv", "n,c_tstar_mean,c_tstar_sem,count");
  std::vector<double> xs, ys;
  for (const auto& [n, samples] : by_n) {
    const MeanSem ms = aggregate(samples);
    csv.row(n, ms.mean, ms.sem, ms.count);
    if (ms.mean > 0.0) {
      xs.push_back(std::log(static_cast<double>(n)));
      ys.push_back(std::log(ms.mean));
    }
  }
  Paths paths{csv.close()};
  const LinFit fit = fit_linear(xs, ys);
  CsvFile cf(out / "fig4c-fit.csv",
             "slope,slope_se,intercept,intercept_se,r2,points");
  cf.row(fit.slope, fit.slope_se, fit.intercept, fit.intercept_se, fit.r2,
         fit.points);
  paths.push_back(cf.close());
  return paths;
}

Paths analyze_figA(const std::vector<json>& rows, const fs::path& out) {
  const std::vector<OtocCurve> curves = load_curves(rows);
  Paths paths;

  // Bond-dimension scan: the size that appears with several caps.
  std::map<int, std::set<int>> chi_by_n;
  for (const OtocCurve& c : curves)
    if (c.engine == "tdvp-mpo") chi_by_n[c.params.n].insert(c.chi);
  int scan_n = 0;
  for (const auto& [n, chis] : chi_by_n)
    if (chis.size() > 1) scan_n = n;
  if (scan_n > 0) {
    std::map<int, std::vector<OtocCurve>> by_chi;
    for (const OtocCurve& c : curves)
      if (c.engine == "tdvp-mpo" && c.params.n == scan_n)
        by_chi[c.chi].push_back(c);
    CsvFile csv(out / "figA-chi.csv", "n,chi,t,c_mean,count");
    std::map<int, CurveStats> stats;
    for (const auto& [chi, group] : by_chi) {
      stats[chi] = curve_stats(group);
      const CurveStats& st = stats[chi];
      for (std::size_t k = 0; k < st.t.size(); ++k)
        csv.row(scan_n, chi, st.t[k], st.mean[k], st.count);
    }
    paths.push_back(csv.close());
    CsvFile conv(out / "figA-conv.csv", "n,chi_lo,chi_hi,max_dev");
    for (auto it = stats.begin(); std::next(it) != stats.end(); ++it) {
      const CurveStats& lo = it->second;
      const CurveStats& hi = std::next(it)->second;
      const std::size_t len = std::min(lo.t.size(), hi.t.size());
      double dev = 0.0;
      for (std::size_t k = 0; k < len; ++k) {
        if (lo.t[k] > kKeystoneHorizon) break;
        dev = std::max(dev, std::abs(lo.mean[k] - hi.mean[k]));
      }
      conv.row(scan_n, it->first, std::next(it)->first, dev);
    }
    paths.push_back(conv.close());
  }

  // Engine comparison at the largest size both engines cover.
  std::vector<OtocCurve> exact, tdvp;
  for (const OtocCurve& c : curves) {
    if (c.engine == "exact") exact.push_back(c);
    if (c.engine == "tdvp-mpo" && chi_by_n[c.params.n].size() <= 1)
      tdvp.push_back(c);
  }
  if (!exact.empty() && !tdvp.empty()) {
    const CurveStats se = curve_stats(exact);
    const CurveStats st = curve_stats(tdvp);
    CsvFile csv(out / "figA-keystone.csv", "t,c_exact,c_tdvp,abs_dev");
    double max_dev = 0.0;
    const std::size_t len = std::min(se.t.size(), st.t.size());
    for (std::size_t k = 0; k < len; ++k) {
      if (std::abs(se.t[k] - st.t[k]) > 1e-9)
        throw std::invalid_argument("figA: engine grids differ");
      if (se.t[k] > kKeystoneHorizon) break;
      const double dev = std::abs(se.mean[k] - st.mean[k]);
      max_dev = std::max(max_dev, dev);
      csv.row(se.t[k], se.mean[k], st.mean[k], dev);
    }
    paths.push_back(csv.close());
    CsvFile summary(out / "figA-keystone-max.csv", "max_dev,horizon");
    summary.row(max_dev, kKeystoneHorizon);
    paths.push_back(summary.close());
  }
  return paths;
}

Paths analyze_figB(const std::vector<json>& rows, const fs::path& out,
                   double threshold) {
  const std::vector<OtocCurve> curves = load_curves(rows);
  std::map<double, std::vector<OtocCurve>> by_alpha;
  for (const OtocCurve& c : curves) by_alpha[c.params.alpha].push_back(c);
  CsvFile csv(out / "figB.csv",
              "alpha,n,ln_n,ts_mean,ts_sem,count,ts_norm,ts_norm_sem");
  std::map<double, std::pair<std::vector<double>, std::vector<double>>> fits;
  for (const auto& [alpha, group] : by_alpha) {
    const TsTable table = scrambling_table(group, threshold);
    for (const auto& [n, samples] : table.ts) {
      const MeanSem ms = aggregate(samples);
      const double norm = normalized_scrambling_time(ms.mean, n, alpha);
      const double norm_sem = normalized_scrambling_time(ms.sem, n, alpha);
      csv.row(alpha, n, std::log(static_cast<double>(n)), ms.mean, ms.sem,
              ms.count, norm, norm_sem);
      fits[alpha].first.push_back(std::log(static_cast<double>(n)));
      fits[alpha].second.push_back(norm);
    }
  }
  Paths paths{csv.close()};
  CsvFile cf(out / "figB-fit.csv",
             "alpha,slope,slope_se,intercept,intercept_se,r2,points");
  for (const auto& [alpha, xy] : fits) {
    const LinFit fit = fit_linear(xy.first, xy.second);
    cf.row(alpha, fit.slope, fit.slope_se, fit.intercept, fit.intercept_se,
           fit.r2, fit.points);
  }
  paths.push_back(cf.close());
  return paths;
}

Paths analyze_fig5a(const std::vector<json>& rows, const fs::path& out) {
  Paths paths = analyze_curve_family(rows, out, "fig5a", /*by_w=*/false);
  const std::vector<OtocCurve> curves = load_curves(rows);
  std::map<int, std::vector<OtocCurve>> by_n;
  for (const OtocCurve& c : curves) by_n[c.params.n].push_back(c);
  CsvFile csv(out / "fig5a-lyap.csv", "n,rate,intercept,r2,t_lo,t_hi,points");
  for (const auto& [n, group] : by_n) {
    const CurveStats st = curve_stats(group);
    const Eigen::VectorXd mean = Eigen::Map<const Eigen::VectorXd>(
        st.mean.data(), static_cast<Eigen::Index>(st.mean.size()));
    const LyapunovFit fit = lyapunov_fit_auto(st.t, mean);
    if (fit.ok) csv.row(n, fit.rate, fit.intercept, fit.r2, fit.t0, fit.t1,
                        fit.points);
  }
  paths.push_back(csv.close());
  return paths;
}

Paths analyze_fig5b(const std::vector<json>& rows, const fs::path& out,
                    double threshold) {
  const std::vector<OtocCurve> curves = load_curves(rows);
  const TsTable table = scrambling_table(curves, threshold);
  CsvFile csv(out / "fig5b.csv", "n,ln_n,ts_mean,ts_sem,count,missed");
  std::vector<double> xs, ys;
  for (const auto& [n, samples] : table.ts) {
    const MeanSem ms = aggregate(samples);
    const int missed = table.missed.count(n) ? table.missed.at(n) : 0;
    csv.row(n, std::log(static_cast<double>(n)), ms.mean, ms.sem, ms.count,
            missed);
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(ms.mean);
  }
  Paths paths{csv.close()};
  const LinFit fit = fit_linear(xs, ys);
  CsvFile cf(out / "fig5b-fit.csv",
             "slope,slope_se,intercept,intercept_se,r2,points");
  cf.row(fit.slope, fit.slope_se, fit.intercept, fit.intercept_se, fit.r2,
         fit.points);
  paths.push_back(cf.close());
  return paths;
}

Paths analyze_rows(const std::vector<json>& rows, const std::string& id,
                   const fs::path& out, double threshold) {
  const double quantum = threshold > 0.0 ? threshold : kQuantumThreshold;
  const double classical = threshold > 0.0 ? threshold : kClassicalThreshold;
  if (id == "fig1a") return analyze_fig1a(rows, out);
  if (id == "fig1b") return analyze_fig1b(rows, out);
  if (id == "fig2a" || id == "fig2b") return analyze_crossings(rows, out, id);
  if (id == "fig3a") return analyze_curve_family(rows, out, id, true);
  if (id == "fig3b") return analyze_fig3b(rows, out);
  if (id == "fig4a") return analyze_curve_family(rows, out, id, false);
  if (id == "fig4b") return analyze_fig4b(rows, out, quantum);
  if (id == "fig4c") return analyze_fig4c(rows, out);
  if (id == "figA") return analyze_figA(rows, out);
  if (id == "figB") return analyze_figB(rows, out, quantum);
  if (id == "fig5a") return analyze_fig5a(rows, out);
  if (id == "fig5b") return analyze_fig5b(rows, out, classical);
  throw std::invalid_argument("unknown figure id '" + id + "'");
}

}  // namespace

fs::path data_root() {
  if (const char* env = std::getenv("SCRAMBLE_DATA_DIR")) return env;
  return "runs";
}

std::vector<ExperimentPlan> builtin_datasets() {
  std::vector<ExperimentPlan> plans;
  const fs::path root = plans_root();
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.path().extension() == ".cfg") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const fs::path& file : files) {
    ExperimentPlan plan = load_plan(file);
    plan.out_dir = (data_root() / plan.id).string();
    plans.push_back(std::move(plan));
  }
  return plans;
}

ExperimentPlan dataset(const std::string& id) {
  for (ExperimentPlan& plan : builtin_datasets())
    if (plan.id == id) return std::move(plan);
  throw std::invalid_argument("unknown dataset '" + id + "'");
}

std::vector<std::string> figure_ids() {
  std::vector<std::string> ids;
  for (const auto& [id, _] : figure_registry()) ids.push_back(id);
  return ids;
}

std::vector<fs::path> reproduce_figure(const std::string& figure_id,
                                       const fs::path& out_dir,
                                       const RunOptions& opts) {
  const auto& reg = figure_registry();
  const auto it =
      std::find_if(reg.begin(), reg.end(),
                   [&](const auto& e) { return e.first == figure_id; });
  if (it == reg.end())
    throw std::invalid_argument("unknown figure id '" + figure_id + "'");
  std::vector<json> rows;
  for (const std::string& dataset_id : it->second) {
    const ExperimentPlan plan = dataset(dataset_id);
    const RunSummary summary = run_plan(plan, opts);
    if (summary.cancelled)
      throw std::runtime_error("cancelled while running " + dataset_id);
    std::vector<json> part = load_records(plan.out_dir);
    for (json& row : part) rows.push_back(std::move(row));
  }
  return analyze_rows(rows, figure_id, out_dir, 0.0);
}

std::vector<fs::path> analyze_records(const fs::path& records_dir,
                                      const std::string& analysis_id,
                                      const fs::path& out_dir,
                                      double threshold) {
  return analyze_rows(load_records(records_dir), analysis_id, out_dir,
                      threshold);
}

}  // namespace scramble
