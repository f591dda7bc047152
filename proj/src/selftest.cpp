#include "scramble/figures.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "scramble/analysis.hpp"
#include "scramble/classical.hpp"
#include "scramble/ed.hpp"
#include "scramble/linalg.hpp"
#include "scramble/model.hpp"
#include "scramble/otoc_exact.hpp"
#include "scramble/prng.hpp"
#include "scramble/records.hpp"
#include "scramble/tn.hpp"

namespace scramble {

namespace {

double normal_draw(std::uint64_t key, std::uint64_t idx) {
  const double u1 = unit_double(stream_word(key, 2 * idx));
  const double u2 = unit_double(stream_word(key, 2 * idx + 1));
  const double r = std::sqrt(-2.0 * std::log1p(-u1));
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

bool check_parity_symmetry() {
  ModelParams p;
  p.n = 6;
  p.alpha = 0.5;
  p.w = 1.0;
  const DenseHamiltonian full = build_hamiltonian(p, sample_disorder(p, 7, 0));
  return parity_commutator_norm(full) < 1e-12;
}

bool check_sector_split() {
  ModelParams p;
  p.n = 6;
  p.alpha = 2.0;
  p.w = 0.3;
  const DisorderRealization dis = sample_disorder(p, 11, 0);
  const Eigen::VectorXd full =
      sym_eigenvalues(build_hamiltonian(p, dis).matrix);
  const Eigen::VectorXd even =
      sym_eigenvalues(build_sector_hamiltonian(p, dis, Sector::even).matrix);
  const Eigen::VectorXd odd =
      sym_eigenvalues(build_sector_hamiltonian(p, dis, Sector::odd).matrix);
  std::vector<double> merged(even.data(), even.data() + even.size());
  merged.insert(merged.end(), odd.data(), odd.data() + odd.size());
  std::sort(merged.begin(), merged.end());
  double worst = 0.0;
  for (Eigen::Index k = 0; k < full.size(); ++k)
    worst = std::max(worst, std::abs(full[k] - merged[static_cast<std::size_t>(k)]));
  return worst < 1e-10;
}

bool check_poisson_ratio() {
  const int levels = 200001;
  Eigen::VectorXd e(levels);
  double acc = 0.0;
  for (int k = 0; k < levels; ++k) {
    acc += -std::log1p(-unit_double(stream_word(0xab1e, k)));
    e[k] = acc;
  }
  const LevelStatistics stats = adjacent_gap_ratio(e, 1.0);
  return std::abs(stats.mean_r - (2.0 * std::numbers::ln2 - 1.0)) < 0.005;
}

bool check_goe_ratio() {
  const int dim = 1200;
  Eigen::MatrixXd a(dim, dim);
  std::uint64_t idx = 0;
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r <= c; ++r) {
      const double v = normal_draw(0x90e, idx++);
      a(r, c) = a(c, r) = (r == c ? std::numbers::sqrt2 * v : v);
    }
  const LevelStatistics stats = adjacent_gap_ratio(sym_eigenvalues(a), 0.6);
  return std::abs(stats.mean_r - 0.5307) < 0.03;
}

bool check_page_entropy() {
  const int n = 12;
  Eigen::VectorXcd state(1 << n);
  for (Eigen::Index k = 0; k < state.size(); ++k)
    state[k] = std::complex<double>(normal_draw(0x9a9e, 2 * k),
                                    normal_draw(0x9a9e, 2 * k + 1));
  state.normalize();
  return std::abs(entanglement_entropy(state, n / 2) - page_entropy(n)) < 0.05;
}

bool check_engine_vs_dense() {
  ModelParams p;
  p.n = 5;
  p.alpha = 0.5;
  p.w = 0.8;
  const DisorderRealization dis = sample_disorder(p, 13, 2);
  const DenseHamiltonian full = build_hamiltonian(p, dis);
  const ExactOtocEngine engine(p, dis);
  double worst = 0.0;
  for (double t : {0.0, 0.6, 1.7}) {
    const Eigen::VectorXd f = engine.otoc_f_all(t);
    for (int r = 1; r < p.n; ++r) {
      const std::complex<double> dense = otoc_f(full, r, t);
      worst = std::max(worst, std::abs(dense.real() - f[r - 1]));
      worst = std::max(worst, std::abs(dense.imag()));
    }
  }
  return worst < 1e-10;
}

bool check_correlator_start() {
  ModelParams p;
  p.n = 6;
  p.alpha = 2.0;
  p.w = 0.1;
  const ExactOtocEngine engine(p, sample_disorder(p, 17, 0));
  const Eigen::VectorXd f0 = engine.otoc_f_all(0.0);
  return (f0.array() - 1.0).abs().maxCoeff() < 1e-12;
}

bool check_classical_rotation() {
  ModelParams p;
  p.n = 1;
  p.w = 1.0;
  Eigen::VectorXd h(1);
  h << 1.0;
  Eigen::Matrix3Xd n(3, 1);
  n.col(0) << 0.0, 0.0, 1.0;
  const double dt = 1e-3;
  for (int step = 0; step < 1000; ++step) {
    const Eigen::Matrix3Xd k1 = classical_rhs(p, h, n);
    const Eigen::Matrix3Xd k2 = classical_rhs(p, h, n + 0.5 * dt * k1);
    const Eigen::Matrix3Xd k3 = classical_rhs(p, h, n + 0.5 * dt * k2);
    const Eigen::Matrix3Xd k4 = classical_rhs(p, h, n + dt * k3);
    n += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  Eigen::Vector3d expect(0.0, -std::sin(1.0), std::cos(1.0));
  return (n.col(0) - expect).norm() < 1e-9;
}

bool check_tangent_vs_fd() {
  ModelParams p;
  p.n = 6;
  p.alpha = 0.5;
  p.w = 1.0;
  const DisorderRealization dis = sample_disorder(p, 23, 1);
  const std::vector<double> times{0.0, 0.5, 1.0, 1.5, 2.0};
  ClassicalOptions opts;
  opts.ensemble = 6;
  opts.dt = 0.01;
  opts.method = DerivMethod::tangent;
  const OtocCurve tan = classical_sensitivity(p, dis, times, opts);
  opts.method = DerivMethod::finite_diff;
  const OtocCurve fd = classical_sensitivity(p, dis, times, opts);
  const double scale = std::max(1.0, tan.c_mean.cwiseAbs().maxCoeff());
  return (tan.c_mean - fd.c_mean).cwiseAbs().maxCoeff() / scale < 1e-3;
}

bool check_rescaling_identity() {
  ModelParams a;
  a.n = 6;
  a.alpha = 1.0;
  a.alpha_tilde = 0.5;
  a.w = 2.0;
  ModelParams b = a;
  b.alpha = 0.5;
  const DisorderRealization dis_a = sample_disorder(a, 29, 0);
  const DisorderRealization dis_b = sample_disorder(b, 29, 0);
  std::vector<double> ta, tb;
  const double factor = rescaled_time_factor(b.alpha, a.alpha, a.n);
  for (int k = 0; k <= 10; ++k) {
    ta.push_back(0.2 * k);
    tb.push_back(0.2 * k * factor);
  }
  const OtocCurve ca = ExactOtocEngine(a, dis_a).commutator_curve(ta);
  const OtocCurve cb = ExactOtocEngine(b, dis_b).commutator_curve(tb);
  return rescaling_max_deviation(ca, cb) < 1e-6;
}

bool check_record_round_trip() {
  ModelParams p;
  p.n = 4;
  p.alpha = 0.5;
  p.w = 1.5;
  const DisorderRealization dis = sample_disorder(p, 31, 3);
  OtocCurve curve =
      ExactOtocEngine(p, dis).commutator_curve({0.0, 0.5, 1.0});
  curve.seed = 31;
  curve.index = 3;
  const OtocCurve back = curve_from_json(to_json(curve));
  return back.engine == curve.engine && back.times == curve.times &&
         back.c_mean == curve.c_mean && back.c_r == curve.c_r &&
         back.seed == curve.seed && back.index == curve.index;
}

bool check_plan_hash() {
  ExperimentPlan plan;
  plan.id = "battery";
  plan.engine = "probe";
  plan.sizes = {4, 6};
  plan.w_values = {0.5, 1.0};
  plan.realizations = {{4, 3}, {6, 2}};
  plan.out_dir = "somewhere";
  const std::uint64_t base = plan_content_hash(plan);
  ExperimentPlan grown = plan;
  grown.realizations = {{4, 30}, {6, 20}};
  grown.out_dir = "elsewhere";
  ExperimentPlan changed = plan;
  changed.w_values = {0.5, 2.0};
  return plan_content_hash(grown) == base &&
         plan_content_hash(changed) != base;
}

}  // namespace

bool check_superoperator_invariants() {
  ModelParams p;
  p.n = 4;
  p.alpha = 0.5;
  p.w = 1.4;
  const Eigen::MatrixXd g = mpo_dense(commutator_mpo(p, sample_disorder(p, 31, 0)));
  if ((g + g.transpose()).cwiseAbs().maxCoeff() >= 1e-12) return false;
  if (g.col(0).cwiseAbs().maxCoeff() >= 1e-13) return false;  // identity
  p.w = 0.0;
  DisorderRealization clean;
  clean.h = Eigen::VectorXd::Zero(4);
  const Eigen::MatrixXd g0 = mpo_dense(commutator_mpo(p, clean));
  Eigen::VectorXd total_z = Eigen::VectorXd::Zero(g0.rows());
  for (int r = 0; r < 4; ++r) total_z += contract_dense(pauli_z_product(4, r));
  return (g0 * total_z).cwiseAbs().maxCoeff() < 1e-13;
}

bool check_tdvp_vs_dense() {
  ModelParams p;
  p.n = 6;
  p.alpha = 0.5;
  p.w = 1.1;
  const DisorderRealization dis = sample_disorder(p, 7, 3);
  const std::vector<double> times{0.0, 0.3, 0.6};
  const OtocCurve exact = ExactOtocEngine(p, dis).commutator_curve(times);
  TdvpConfig cfg;
  cfg.dt = 0.015;
  cfg.chi_max = 256;
  cfg.trunc_cut = 1e-13;
  TdvpEngine engine(pauli_z_product(6, 0), commutator_mpo(p, dis), cfg);
  double worst = 0.0;
  for (int k = 1; k <= 2; ++k) {
    for (int i = 0; i < 20; ++i) engine.step();
    const Eigen::VectorXd f = pauli_z_overlaps(engine.state());
    for (int r = 1; r < 6; ++r)
      worst = std::max(worst, std::abs(1.0 - f[r] - exact.c_r(r - 1, k)));
  }
  return worst < 1e-4 && std::abs(engine.state().norm() - 1.0) < 1e-10;
}

bool run_verify_battery() {
  struct Check {
    const char* name;
    std::function<bool()> fn;
  };
  const std::vector<Check> checks = {
      {"parity symmetry of a sampled realization", check_parity_symmetry},
      {"sector split preserves the spectrum", check_sector_split},
      {"gap ratio matches the Poisson value", check_poisson_ratio},
      {"gap ratio matches the orthogonal-ensemble value", check_goe_ratio},
      {"random-state entropy sits at the Page value", check_page_entropy},
      {"sector-split correlator matches the dense route", check_engine_vs_dense},
      {"correlator starts at one", check_correlator_start},
      {"classical single spin follows the exact rotation", check_classical_rotation},
      {"tangent and finite-difference sensitivities agree", check_tangent_vs_fd},
      {"rescaled couplings replay one dynamics", check_rescaling_identity},
      {"superoperator is skew and kills conserved charges",
       check_superoperator_invariants},
      {"tdvp curve matches the sector-split engine", check_tdvp_vs_dense},
      {"curve records survive the round trip", check_record_round_trip},
      {"plan hash ignores ensemble growth", check_plan_hash},
  };
  int failed = 0;
  for (const Check& check : checks) {
    bool ok = false;
    std::string note;
    try {
      ok = check.fn();
    } catch (const std::exception& err) {
      note = err.what();
    }
    std::printf("%-52s %s%s%s\n", check.name, ok ? "ok" : "FAIL",
                note.empty() ? "" : "  ", note.c_str());
    if (!ok) ++failed;
  }
  if (failed > 0) std::printf("%d check(s) failed\n", failed);
  return failed == 0;
}

}  // namespace scramble
