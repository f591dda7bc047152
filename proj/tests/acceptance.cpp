// Acceptance battery: one line per criterion against the canonical record
// stores under the data root. Missing stores are completed in place first
// (resumable, like `scramble reproduce`), so a cold run regenerates
// everything and a warm run only reads. Exit status counts failures.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "scramble/analysis.hpp"
#include "scramble/classical.hpp"
#include "scramble/curves.hpp"
#include "scramble/ed.hpp"
#include "scramble/figures.hpp"
#include "scramble/linalg.hpp"
#include "scramble/model.hpp"
#include "scramble/otoc_exact.hpp"
#include "scramble/plan.hpp"
#include "scramble/prng.hpp"
#include "scramble/records.hpp"
#include "scramble/runner.hpp"
#include "scramble/tn.hpp"

namespace fs = std::filesystem;
using namespace scramble;

namespace {

constexpr std::uint64_t kSeed = 0xacce9717u;
constexpr int kBootstrapDraws = 200;

// criterion 1
constexpr double kPoissonR = 0.386, kGoeR = 0.53, kRTol = 0.015;
// criteria 2, 4
constexpr double kCrossLo = 0.09, kCrossHi = 0.19;
constexpr double kStabilitySigmas = 3.0;
// criterion 3
constexpr double kWcTarget = 0.14, kWcTol = 0.04;
constexpr double kNuTarget = 0.89, kNuTol = 0.2;
// criteria 5, 6
constexpr double kKeystoneHorizon = 5.0;
constexpr double kKeystoneTol = 1e-2;
constexpr double kChiConvTol = 1e-3;
// criteria 7, 8, 12
constexpr double kLogFitR2 = 0.98;
constexpr double kPowerFitR2 = 0.95;
// criterion 9
constexpr double kLateLo = 50.0, kLateHi = 100.0, kStdRatio = 5.0;
// criterion 10
constexpr double kRescaleTol = 1e-6;
// criterion 11
constexpr double kPredSigmas = 3.0, kPredRelTol = 0.15;
constexpr double kTStar = 0.5;

struct Result {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

fs::path g_root;

std::vector<json> store_rows(const std::string& id) {
  const fs::path dir = g_root / id;
  std::vector<json> rows = load_records(dir);
  if (rows.empty())
    throw std::runtime_error("store " + id + " is empty or missing");
  return rows;
}

bool is_curve(const json& row) {
  const std::string engine = row.value("engine", "");
  return engine == "exact" || engine == "tdvp-mpo" || engine == "classical";
}

std::vector<OtocCurve> store_curves(const std::string& id) {
  std::vector<OtocCurve> out;
  for (const json& row : store_rows(id))
    if (is_curve(row)) out.push_back(curve_from_json(row));
  if (out.empty()) throw std::runtime_error(id + ": no curve records");
  return out;
}

// n -> w -> per-realization samples of one ED observable
using EdTable = std::map<int, std::map<double, std::vector<double>>>;

struct EdSamples {
  EdTable r, s;
};

EdSamples ed_samples(const std::vector<std::string>& ids) {
  EdSamples g;
  for (const std::string& id : ids)
    for (const json& row : store_rows(id)) {
      if (row.value("engine", "") != "ed") continue;
      const EdRecord rec = ed_record_from_json(row);
      g.r[rec.params.n][rec.params.w].push_back(rec.obs.mean_r);
      if (rec.obs.entropy_states > 0)
        g.s[rec.params.n][rec.params.w].push_back(rec.obs.s_mid);
    }
  return g;
}

const std::vector<double>& samples_at(
    const std::map<double, std::vector<double>>& by_w, double w) {
  for (const auto& [key, v] : by_w)
    if (std::abs(key - w) < 1e-9) return v;
  throw std::runtime_error(fmt("no samples at W=%g", w));
}

// Crossing of the r-curves for every consecutive size pair, on the shared
// part of the disorder grid.
std::vector<CrossingEstimate> consecutive_crossings(const EdTable& by_n,
                                                    std::uint64_t seed) {
  std::vector<int> sizes;
  for (const auto& [n, _] : by_n) sizes.push_back(n);
  std::vector<CrossingEstimate> out;
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    const auto& a = by_n.at(sizes[k - 1]);
    const auto& b = by_n.at(sizes[k]);
    std::vector<double> grid;
    std::vector<std::vector<double>> sa, sb;
    for (const auto& [w, samples] : a) {
      const auto it = b.find(w);
      if (it == b.end()) continue;
      grid.push_back(w);
      sa.push_back(samples);
      sb.push_back(it->second);
    }
    if (grid.size() < 2)
      throw std::runtime_error("crossings: shared grid too small");
    out.push_back(crossing_with_bootstrap(grid, sa, sb, kBootstrapDraws,
                                          stream_word(seed, k)));
  }
  return out;
}

double interp_c_at(const OtocCurve& c, double t) {
  const auto& tt = c.times;
  if (t <= tt.front()) return c.c_mean[0];
  if (t >= tt.back()) return c.c_mean[c.c_mean.size() - 1];
  const auto it = std::lower_bound(tt.begin(), tt.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - tt.begin());
  const std::size_t lo = hi - 1;
  const double span = tt[hi] - tt[lo];
  const double f = span > 0.0 ? (t - tt[lo]) / span : 0.0;
  return (1.0 - f) * c.c_mean[static_cast<Eigen::Index>(lo)] +
         f * c.c_mean[static_cast<Eigen::Index>(hi)];
}

// Pointwise mean of c_mean over realizations on the common time prefix.
void mean_curve(const std::vector<OtocCurve>& group, std::vector<double>& t,
                std::vector<double>& mean) {
  t.clear();
  mean.clear();
  std::size_t len = group.front().times.size();
  for (const OtocCurve& c : group) len = std::min(len, c.times.size());
  for (std::size_t k = 0; k < len; ++k) {
    double acc = 0.0;
    for (const OtocCurve& c : group) {
      if (std::abs(c.times[k] - group.front().times[k]) > 1e-9)
        throw std::runtime_error("mean_curve: mismatched grids");
      acc += c.c_mean[static_cast<Eigen::Index>(k)];
    }
    t.push_back(group.front().times[k]);
    mean.push_back(acc / static_cast<double>(group.size()));
  }
}

std::map<int, MeanSem> ts_by_size(const std::vector<OtocCurve>& curves,
                                  double threshold, int* missed = nullptr) {
  std::map<int, std::vector<double>> ts;
  if (missed) *missed = 0;
  for (const OtocCurve& c : curves) {
    const std::optional<double> t = scrambling_time(c, threshold);
    if (t)
      ts[c.params.n].push_back(*t);
    else if (missed)
      ++*missed;
  }
  std::map<int, MeanSem> out;
  for (const auto& [n, v] : ts) out[n] = aggregate(v);
  return out;
}

LinFit ts_log_fit(const std::map<int, MeanSem>& ts) {
  std::vector<double> x, y;
  for (const auto& [n, ms] : ts) {
    x.push_back(std::log(static_cast<double>(n)));
    y.push_back(ms.mean);
  }
  return fit_linear(x, y);
}

// ---- criteria -------------------------------------------------------------

Result criterion1() {
  const EdSamples g = ed_samples({"ed-a2-r200"});
  const MeanSem thermal = aggregate(samples_at(g.r.at(12), 0.02));
  const MeanSem local = aggregate(samples_at(g.r.at(12), 1.0));
  const bool pass = std::abs(local.mean - kPoissonR) <= kRTol &&
                    std::abs(thermal.mean - kGoeR) <= kRTol;
  return {pass, fmt("r(W=1)=%.4f (%.3f+-%.3f, %d real), r(W=0.02)=%.4f "
                    "(%.2f+-%.3f, %d real)",
                    local.mean, kPoissonR, kRTol, local.count, thermal.mean,
                    kGoeR, kRTol, thermal.count)};
}

Result criterion2() {
  const EdSamples g = ed_samples({"ed-a2", "ed-a2-n14"});
  const auto crossings = consecutive_crossings(g.r, stream_word(kSeed, 2));
  bool pass = crossings.size() == 3;
  std::string detail = "crossings";
  for (const CrossingEstimate& est : crossings) {
    pass = pass && est.found && est.w >= kCrossLo && est.w <= kCrossHi;
    detail += fmt(" %.3f+-%.3f", est.w, est.sigma);
  }
  detail += fmt(" target [%.2f, %.2f]", kCrossLo, kCrossHi);
  return {pass, detail};
}

Result criterion3() {
  const EdSamples g = ed_samples({"ed-a2", "ed-a2-n14"});
  std::vector<SizeSeries> series;
  for (const auto& [n, by_w] : g.s) {
    SizeSeries sz;
    sz.n = n;
    for (const auto& [w, samples] : by_w) {
      sz.w.push_back(w);
      std::vector<double> dens(samples);
      for (double& v : dens) v /= n;
      sz.y.push_back(aggregate(dens).mean);
      sz.samples.push_back(std::move(dens));
    }
    if (sz.w.size() >= 3) series.push_back(std::move(sz));
  }
  const CollapseWindow window{0.05, 0.30, 0.4, 2.0};
  const CollapseResult res =
      data_collapse(series, window, 64, stream_word(kSeed, 3));
  const bool pass = res.ok && std::abs(res.wc - kWcTarget) <= kWcTol &&
                    std::abs(res.nu - kNuTarget) <= kNuTol;
  return {pass, fmt("Wc=%.3f+-%.3f (%.2f+-%.2f), nu=%.2f+-%.2f (%.2f+-%.1f), "
                    "%zu sizes",
                    res.wc, res.wc_err, kWcTarget, kWcTol, res.nu, res.nu_err,
                    kNuTarget, kNuTol, series.size())};
}

Result criterion4() {
  const EdSamples shallow = ed_samples({"ed-a05", "ed-a05-n14"});
  const auto drift = consecutive_crossings(shallow.r, stream_word(kSeed, 4));
  bool monotone = drift.size() == 3;
  std::string detail = "a=0.5 crossings";
  for (std::size_t k = 0; k < drift.size(); ++k) {
    monotone = monotone && drift[k].found &&
               (k == 0 || drift[k].w > drift[k - 1].w);
    detail += fmt(" %.2f", drift[k].w);
  }

  const EdSamples steep = ed_samples({"ed-a2", "ed-a2-n14"});
  const auto fixed = consecutive_crossings(steep.r, stream_word(kSeed, 2));
  bool stable = fixed.size() == 3;
  double worst = 0.0;
  for (std::size_t i = 0; i < fixed.size(); ++i)
    for (std::size_t j = i + 1; j < fixed.size(); ++j) {
      const double band = kStabilitySigmas *
                          std::hypot(fixed[i].sigma, fixed[j].sigma);
      stable = stable && std::abs(fixed[i].w - fixed[j].w) <= band;
      if (band > 0.0)
        worst = std::max(worst, std::abs(fixed[i].w - fixed[j].w) / band);
    }
  detail += fmt(" (monotone %s); a=2 spread %.2f of %gsigma band",
                monotone ? "yes" : "NO", worst, kStabilitySigmas);
  return {monotone && stable, detail};
}

Result criterion5() {
  const std::vector<OtocCurve> exact = store_curves("exact-n14-keystone");
  const std::vector<OtocCurve> tdvp = store_curves("tdvp-n14-keystone");
  std::vector<double> te, ce, tt, ct;
  mean_curve(exact, te, ce);
  mean_curve(tdvp, tt, ct);
  const std::size_t len = std::min(te.size(), tt.size());
  double dev = 0.0;
  for (std::size_t k = 0; k < len; ++k) {
    if (std::abs(te[k] - tt[k]) > 1e-9)
      throw std::runtime_error("keystone: engine grids differ");
    if (te[k] > kKeystoneHorizon) break;
    dev = std::max(dev, std::abs(ce[k] - ct[k]));
  }
  return {dev < kKeystoneTol,
          fmt("max |C_tdvp - C_exact| = %.2e over Jt<=%g (tol %.0e)", dev,
              kKeystoneHorizon, kKeystoneTol)};
}

Result criterion6() {
  const std::vector<OtocCurve> curves = store_curves("tdvp-chi-scan");
  std::map<int, std::vector<OtocCurve>> by_chi;
  for (const OtocCurve& c : curves) by_chi[c.chi].push_back(c);
  if (by_chi.size() < 3) throw std::runtime_error("chi scan: too few caps");
  std::vector<int> chis;
  std::vector<std::vector<double>> t(by_chi.size()), m(by_chi.size());
  for (const auto& [chi, group] : by_chi) {
    const std::size_t k = chis.size();
    chis.push_back(chi);
    mean_curve(group, t[k], m[k]);
  }
  std::vector<double> devs;
  std::string detail;
  for (std::size_t k = 1; k < chis.size(); ++k) {
    const std::size_t len = std::min(t[k - 1].size(), t[k].size());
    double dev = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      if (t[k][i] > kKeystoneHorizon) break;
      dev = std::max(dev, std::abs(m[k - 1][i] - m[k][i]));
    }
    devs.push_back(dev);
    detail += fmt(" |C%d-C%d|=%.1e", chis[k - 1], chis[k], dev);
  }
  bool monotone = true;
  for (std::size_t k = 1; k < devs.size(); ++k)
    monotone = monotone && devs[k] < devs[k - 1];
  const bool pass = monotone && devs.back() < kChiConvTol;
  return {pass, fmt("n=%d:%s (monotone %s, tol %.0e)",
                    curves.front().params.n, detail.c_str(),
                    monotone ? "yes" : "NO", kChiConvTol)};
}

Result criterion7() {
  int missed = 0;
  const auto ts = ts_by_size(store_curves("tdvp-a05"), kQuantumThreshold,
                             &missed);
  const LinFit fit = ts_log_fit(ts);
  const bool pass = fit.ok && ts.size() >= 5 && missed == 0 &&
                    fit.slope > 0.0 && fit.r2 > kLogFitR2;
  return {pass, fmt("t_s = %.3f ln N %+.3f, R2=%.4f (>%g), %zu sizes, "
                    "%d curves never crossed",
                    fit.slope, fit.intercept, fit.r2, kLogFitR2, ts.size(),
                    missed)};
}

Result criterion8() {
  const std::vector<OtocCurve> curves = store_curves("tdvp-a05");
  std::map<int, std::vector<double>> by_n;
  for (const OtocCurve& c : curves)
    by_n[c.params.n].push_back(interp_c_at(c, kTStar));
  std::vector<double> x, y;
  for (const auto& [n, v] : by_n) {
    const MeanSem ms = aggregate(v);
    if (ms.mean > 0.0) {
      x.push_back(std::log(static_cast<double>(n)));
      y.push_back(std::log(ms.mean));
    }
  }
  const LinFit fit = fit_linear(x, y);
  const bool pass = fit.ok && x.size() >= 5 && fit.slope < 0.0 &&
                    fit.r2 > kPowerFitR2;
  return {pass, fmt("C(t*=%.1f) ~ N^%.3f, R2=%.4f (>%g), %zu sizes", kTStar,
                    fit.slope, fit.r2, kPowerFitR2, x.size())};
}

Result criterion9() {
  const std::vector<OtocCurve> curves = store_curves("otoc-n10-long");
  std::map<double, std::vector<OtocCurve>> by_w;
  for (const OtocCurve& c : curves) by_w[c.params.w].push_back(c);
  std::map<double, double> late_std;
  for (const auto& [w, group] : by_w) {
    std::vector<double> t, m, window;
    mean_curve(group, t, m);
    for (std::size_t k = 0; k < t.size(); ++k)
      if (t[k] >= kLateLo && t[k] <= kLateHi) window.push_back(m[k]);
    if (window.size() < 8)
      throw std::runtime_error("late window too short");
    const MeanSem ms = aggregate(window);
    late_std[w] = ms.sem * std::sqrt(static_cast<double>(ms.count));
  }
  const double ratio = late_std.at(18.0) / late_std.at(1.0);
  return {ratio >= kStdRatio,
          fmt("late-time std W=18 %.2e vs W=1 %.2e, ratio %.1f (>=%g)",
              late_std.at(18.0), late_std.at(1.0), ratio, kStdRatio)};
}

Result criterion10() {
  const std::vector<OtocCurve> a05 = store_curves("rescale-a05");
  const std::vector<OtocCurve> a10 = store_curves("rescale-a10");
  std::map<int, const OtocCurve*> partner;
  for (const OtocCurve& c : a10) partner[c.index] = &c;
  double worst = 0.0;
  int pairs = 0;
  for (const OtocCurve& c : a05) {
    const auto it = partner.find(c.index);
    if (it == partner.end()) continue;
    worst = std::max(worst, rescaling_max_deviation(c, *it->second));
    ++pairs;
  }
  if (pairs == 0) throw std::runtime_error("no matched rescaling pairs");
  return {worst < kRescaleTol,
          fmt("max |C_0.5(t) - C_1.0(t N^0.5)| = %.2e over %d pairs (tol %g)",
              worst, pairs, kRescaleTol)};
}

Result criterion11() {
  const auto ref = ts_by_size(store_curves("tdvp-a05"), kQuantumThreshold);
  const LinFit fit = ts_log_fit(ref);
  if (!fit.ok) throw std::runtime_error("reference fit failed");
  std::string detail = fmt("a=0.5 fit %.3f ln N %+.3f;", fit.slope,
                           fit.intercept);
  bool pass = true;
  for (const auto& [alpha, id] :
       std::vector<std::pair<double, std::string>>{{0.2, "tdvp-a02"},
                                                   {1.0, "tdvp-a10"}}) {
    const auto ts = ts_by_size(store_curves(id), kQuantumThreshold);
    double worst = 0.0;
    for (const auto& [n, ms] : ts) {
      const double ln = std::log(static_cast<double>(n));
      const double scale = std::pow(static_cast<double>(n), alpha - 0.5);
      const double pred = scale * (fit.intercept + fit.slope * ln);
      const double pred_err =
          scale * std::hypot(fit.intercept_se, fit.slope_se * ln);
      const double tol = std::max(
          kPredSigmas * std::hypot(ms.sem, pred_err), kPredRelTol * pred);
      pass = pass && std::abs(ms.mean - pred) <= tol;
      if (tol > 0.0) worst = std::max(worst, std::abs(ms.mean - pred) / tol);
    }
    detail += fmt(" a=%.1f worst dev %.2f of budget (%zu sizes);", alpha,
                  worst, ts.size());
  }
  return {pass, detail + fmt(" budget max(%gsigma, %d%%)", kPredSigmas,
                             static_cast<int>(kPredRelTol * 100))};
}

Result criterion12() {
  const std::vector<OtocCurve> curves = store_curves("classical-a05");
  std::map<int, std::vector<OtocCurve>> by_n;
  for (const OtocCurve& c : curves) by_n[c.params.n].push_back(c);
  bool lyap_ok = by_n.size() >= 3;
  double worst_r2 = 1.0;
  for (const auto& [n, group] : by_n) {
    std::vector<double> t, m;
    mean_curve(group, t, m);
    const Eigen::VectorXd mean = Eigen::Map<const Eigen::VectorXd>(
        m.data(), static_cast<Eigen::Index>(m.size()));
    const LyapunovFit lf = lyapunov_fit_auto(t, mean);
    lyap_ok = lyap_ok && lf.ok && lf.rate > 0.0 && lf.r2 > kPowerFitR2;
    if (lf.ok) worst_r2 = std::min(worst_r2, lf.r2);
  }
  int missed = 0;
  const auto ts = ts_by_size(curves, kClassicalThreshold, &missed);
  const LinFit fit = ts_log_fit(ts);
  const bool ts_ok =
      fit.ok && fit.slope > 0.0 && missed == 0 && fit.r2 > kLogFitR2;
  return {lyap_ok && ts_ok,
          fmt("Lyapunov windows ok=%s (worst R2=%.3f); t_s = %.3f ln N "
              "%+.3f, R2=%.4f (>%g), %zu sizes",
              lyap_ok ? "yes" : "NO", worst_r2, fit.slope, fit.intercept,
              fit.r2, kLogFitR2, ts.size())};
}

// Always-on invariants, independent of the record stores.
Result criterion13() {
  int passed = 0, total = 0;
  std::string failed;
  const auto check = [&](const char* name, bool ok) {
    ++total;
    if (ok)
      ++passed;
    else
      failed += fmt(" %s", name);
  };

  ModelParams params{6, 0.5, 1.2, 0.9};
  const DisorderRealization dis = sample_disorder(params, kSeed, 0);
  const DenseHamiltonian full = build_hamiltonian(params, dis);
  check("hermitian",
        (full.matrix - full.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  check("parity", parity_commutator_norm(full) < 1e-12);

  ModelParams clean = params;
  clean.w = 0.0;
  const DenseHamiltonian h0 =
      build_hamiltonian(clean, sample_disorder(clean, kSeed, 0));
  Eigen::MatrixXcd sz_total = Eigen::MatrixXcd::Zero(64, 64);
  for (int i = 0; i < 6; ++i)
    sz_total += site_operator_dense({PauliKind::z, i}, 6);
  check("u1-clean", (h0.matrix * sz_total - sz_total * h0.matrix)
                            .cwiseAbs()
                            .maxCoeff() < 1e-12);

  const ExactOtocEngine engine(params, dis);
  check("c-zero-at-t0",
        (engine.otoc_f_all(0.0).array() - 1.0).abs().maxCoeff() < 1e-12);

  {
    TdvpConfig cfg;
    cfg.dt = 0.05;
    cfg.chi_max = 64;
    cfg.trunc_cut = 1e-14;
    TdvpEngine tdvp(pauli_z_product(6, 0), commutator_mpo(params, dis), cfg);
    for (int k = 0; k < 20; ++k) tdvp.step();
    check("tdvp-norm", std::abs(tdvp.state().norm() - 1.0) < 1e-9);
  }

  {
    ModelParams cp{10, 0.5, 1.0, 1.0};
    const DisorderRealization cd = sample_disorder(cp, kSeed, 1);
    Eigen::Matrix3Xd n(3, 10);
    for (int i = 0; i < 10; ++i) {
      const double phi =
          2.0 * M_PI * unit_double(stream_word(kSeed, 5, i));
      n.col(i) = Eigen::Vector3d(std::cos(phi), std::sin(phi), 0.0);
    }
    const auto energy = [&](const Eigen::Matrix3Xd& s) {
      const double g = cp.pair_coupling();
      double e = 0.0;
      for (int i = 0; i < 10; ++i)
        for (int k = i + 1; k < 10; ++k)
          e += g * (s(0, i) * s(0, k) + s(1, i) * s(1, k));
      for (int i = 0; i < 10; ++i)
        e += cp.disorder_coeff() * cd.h[i] * s(0, i);
      return e;
    };
    const double e0 = energy(n);
    const double dt = 0.01;
    for (int step = 0; step < 500; ++step) {
      const Eigen::Matrix3Xd k1 = classical_rhs(cp, cd.h, n);
      const Eigen::Matrix3Xd k2 = classical_rhs(cp, cd.h, n + 0.5 * dt * k1);
      const Eigen::Matrix3Xd k3 = classical_rhs(cp, cd.h, n + 0.5 * dt * k2);
      const Eigen::Matrix3Xd k4 = classical_rhs(cp, cd.h, n + dt * k3);
      n += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    check("classical-energy", std::abs(energy(n) - e0) <
                                  1e-8 * std::max(1.0, std::abs(e0)));
    check("classical-norms",
          (n.colwise().norm().array() - 1.0).abs().maxCoeff() < 1e-9);

    ModelParams sp{6, 0.5, 1.0, 1.0};
    const DisorderRealization sd = sample_disorder(sp, kSeed, 2);
    const std::vector<double> times{0.0, 0.5, 1.0};
    ClassicalOptions tangent;
    tangent.ensemble = 4;
    ClassicalOptions fd = tangent;
    fd.method = DerivMethod::finite_diff;
    const OtocCurve ct = classical_sensitivity(sp, sd, times, tangent);
    const OtocCurve cf = classical_sensitivity(sp, sd, times, fd);
    const double scale = std::max(ct.c_r.cwiseAbs().maxCoeff(), 1e-12);
    check("deriv-agreement",
          (ct.c_r - cf.c_r).cwiseAbs().maxCoeff() / scale < 1e-5);
  }

  {
    std::vector<double> x{0.0, 1.0, 2.0, 3.0}, y;
    for (double v : x) y.push_back(3.0 * v - 2.0);
    const LinFit lf = fit_linear(x, y);
    check("fit-exact", lf.ok && std::abs(lf.slope - 3.0) < 1e-12 &&
                           std::abs(lf.intercept + 2.0) < 1e-12 &&
                           std::abs(lf.r2 - 1.0) < 1e-12);
    const std::vector<double> grid{0.0, 1.0, 2.0};
    const std::vector<double> a{0.0, 1.0, 2.0}, b{1.0, 1.5, 2.0};
    const CrossingEstimate est = crossing_point(grid, a, b);
    check("crossing-exact", est.found && std::abs(est.w - 2.0) < 1e-12);
    std::vector<double> lt;
    Eigen::VectorXd lc(60);
    for (int k = 0; k < 60; ++k) {
      lt.push_back(0.1 * k);
      lc[k] = 2.5 * std::exp(1.7 * lt.back());
    }
    const LyapunovFit lf2 = lyapunov_fit(lt, lc, 1.0, 5.0);
    check("lyapunov-exact", lf2.ok && std::abs(lf2.rate - 1.7) < 1e-10 &&
                                std::abs(lf2.r2 - 1.0) < 1e-12);
  }

  {
    ExperimentPlan probe;
    probe.id = "acceptance-probe";
    probe.engine = "probe";
    probe.sizes = {4, 6};
    probe.w_values = {0.5};
    probe.alpha = 0.7;
    probe.seed = 77;
    probe.realizations = {{4, 3}, {6, 2}};
    probe.chi_values = {0};
    const fs::path tmp = fs::temp_directory_path();
    const fs::path dir1 = tmp / "scramble-accept-probe-1";
    const fs::path dir2 = tmp / "scramble-accept-probe-2";
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    RunOptions opts;
    opts.workers = 1;
    probe.out_dir = dir1.string();
    run_plan(probe, opts);
    probe.out_dir = dir2.string();
    run_plan(probe, opts);
    const auto slurp = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    check("harness-deterministic",
          slurp(dir1 / "records.jsonl") == slurp(dir2 / "records.jsonl"));
    probe.out_dir = dir1.string();
    const RunSummary again = run_plan(probe, opts);
    check("harness-idempotent", again.executed == 0 && again.skipped == 5);
    fs::remove_all(dir1);
    fs::remove_all(dir2);
  }

  return {passed == total, fmt("%d/%d invariant groups%s%s", passed, total,
                               failed.empty() ? "" : ", failed:",
                               failed.c_str())};
}

const std::map<int, std::vector<std::string>>& criterion_datasets() {
  static const std::map<int, std::vector<std::string>> table = {
      {1, {"ed-a2-r200"}},
      {2, {"ed-a2", "ed-a2-n14"}},
      {3, {"ed-a2", "ed-a2-n14"}},
      {4, {"ed-a05", "ed-a05-n14", "ed-a2", "ed-a2-n14"}},
      {5, {"exact-n14-keystone", "tdvp-n14-keystone"}},
      {6, {"tdvp-chi-scan"}},
      {7, {"tdvp-a05"}},
      {8, {"tdvp-a05"}},
      {9, {"otoc-n10-long"}},
      {10, {"rescale-a05", "rescale-a10"}},
      {11, {"tdvp-a05", "tdvp-a02", "tdvp-a10"}},
      {12, {"classical-a05"}},
      {13, {}},
  };
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  pin_blas_kernels(argv);
  CLI::App app{"acceptance battery over the canonical record stores"};
  int workers = 0;
  bool no_run = false;
  std::vector<int> only;
  app.add_option("--workers", workers, "worker threads (0 = hardware)");
  app.add_flag("--no-run", no_run,
               "never compute; fail criteria whose stores are incomplete");
  app.add_option("--only", only, "run a subset of criteria");
  CLI11_PARSE(app, argc, argv);

  g_root = data_root();
  const auto wanted = [&](int k) {
    return only.empty() || std::count(only.begin(), only.end(), k) > 0;
  };

  if (!no_run) {
    std::set<std::string> ids;
    for (const auto& [k, deps] : criterion_datasets())
      if (wanted(k)) ids.insert(deps.begin(), deps.end());
    RunOptions opts;
    opts.workers = workers;
    for (const std::string& id : ids) {
      try {
        const RunSummary s = run_plan(dataset(id), opts);
        if (s.executed > 0)
          std::printf("dataset %-20s computed %d missing jobs\n", id.c_str(),
                      s.executed);
      } catch (const std::exception& e) {
        std::printf("dataset %-20s NOT READY: %s\n", id.c_str(), e.what());
      }
    }
  }

  const std::vector<std::pair<int, std::function<Result()>>> criteria = {
      {1, criterion1},   {2, criterion2},   {3, criterion3},
      {4, criterion4},   {5, criterion5},   {6, criterion6},
      {7, criterion7},   {8, criterion8},   {9, criterion9},
      {10, criterion10}, {11, criterion11}, {12, criterion12},
      {13, criterion13},
  };

  int failures = 0, ran = 0;
  for (const auto& [num, fn] : criteria) {
    if (!wanted(num)) continue;
    Result res;
    try {
      res = fn();
    } catch (const std::exception& e) {
      res = {false, std::string("error: ") + e.what()};
    }
    ++ran;
    failures += res.pass ? 0 : 1;
    std::printf("criterion %02d %s  %s\n", num, res.pass ? "pass" : "FAIL",
                res.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/%d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}
