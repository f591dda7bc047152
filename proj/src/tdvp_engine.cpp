#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "scramble/linalg.hpp"
#include "scramble/records.hpp"
#include "scramble/runner.hpp"
#include "scramble/tn.hpp"

namespace scramble {

namespace {

using Env = std::vector<Eigen::MatrixXd>;
using OneSite = std::array<Eigen::MatrixXd, kPauliDim>;

void add_scaled(Eigen::MatrixXd& acc, double c, const Eigen::MatrixXd& m) {
  if (acc.size() == 0)
    acc = c * m;
  else
    acc.noalias() += c * m;
}

Env propagate_left(const Env& left, const SiteTensor& a,
                   const std::vector<MpoEntry>& site, int bond) {
  std::vector<OneSite> la(static_cast<std::size_t>(bond));
  for (int w = 0; w < bond; ++w) {
    if (left[static_cast<std::size_t>(w)].size() == 0) continue;
    for (int p = 0; p < kPauliDim; ++p)
      la[static_cast<std::size_t>(w)][static_cast<std::size_t>(p)].noalias() =
          left[static_cast<std::size_t>(w)] * a.m[static_cast<std::size_t>(p)];
  }
  Env out(static_cast<std::size_t>(bond));
  for (const MpoEntry& e : site) {
    if (left[static_cast<std::size_t>(e.row)].size() == 0) continue;
    OneSite mixed{};
    for (int q = 0; q < kPauliDim; ++q)
      for (int p = 0; p < kPauliDim; ++p)
        if (e.op(q, p) != 0.0)
          add_scaled(mixed[static_cast<std::size_t>(q)], e.op(q, p),
                     la[static_cast<std::size_t>(e.row)][static_cast<std::size_t>(p)]);
    for (int q = 0; q < kPauliDim; ++q)
      if (mixed[static_cast<std::size_t>(q)].size() != 0)
        add_scaled(out[static_cast<std::size_t>(e.col)], 1.0,
                   a.m[static_cast<std::size_t>(q)].transpose() *
                       mixed[static_cast<std::size_t>(q)]);
  }
  return out;
}

Env propagate_right(const Env& right, const SiteTensor& a,
                    const std::vector<MpoEntry>& site, int bond) {
  std::vector<OneSite> ar(static_cast<std::size_t>(bond));
  for (int w = 0; w < bond; ++w) {
    if (right[static_cast<std::size_t>(w)].size() == 0) continue;
    for (int p = 0; p < kPauliDim; ++p)
      ar[static_cast<std::size_t>(w)][static_cast<std::size_t>(p)].noalias() =
          a.m[static_cast<std::size_t>(p)] * right[static_cast<std::size_t>(w)];
  }
  Env out(static_cast<std::size_t>(bond));
  for (const MpoEntry& e : site) {
    if (right[static_cast<std::size_t>(e.col)].size() == 0) continue;
    OneSite mixed{};
    for (int q = 0; q < kPauliDim; ++q)
      for (int p = 0; p < kPauliDim; ++p)
        if (e.op(q, p) != 0.0)
          add_scaled(mixed[static_cast<std::size_t>(q)], e.op(q, p),
                     ar[static_cast<std::size_t>(e.col)][static_cast<std::size_t>(p)]);
    for (int q = 0; q < kPauliDim; ++q)
      if (mixed[static_cast<std::size_t>(q)].size() != 0)
        add_scaled(out[static_cast<std::size_t>(e.row)], 1.0,
                   mixed[static_cast<std::size_t>(q)] *
                       a.m[static_cast<std::size_t>(q)].transpose());
  }
  return out;
}

// The effective matvecs dominate the run time, so the local blocks live in a
// single matrix per MPO bond value instead of per-label pieces: labels stack
// horizontally while an environment multiplies from the left, then restack
// vertically for the right environment. Each present bond value costs one
// dgemm per side instead of one per label pair.

void mix_block(Eigen::MatrixXd& acc, double c, const Eigen::MatrixXd& src,
               Eigen::Index rows, Eigen::Index cols, int to, int from) {
  if (acc.size() == 0) acc.setZero(rows, src.cols());
  acc.middleCols(static_cast<Eigen::Index>(to) * cols, cols).noalias() +=
      c * src.middleCols(static_cast<Eigen::Index>(from) * cols, cols);
}

// One label slot: x and y are vertical stacks (4 rows blocks) of rl x rc.
void apply_one(const Env& left, const Env& right,
               const std::vector<MpoEntry>& site, int bond,
               const Eigen::Ref<const Eigen::MatrixXd>& x, Eigen::MatrixXd& y) {
  const Eigen::Index rl = x.rows() / kPauliDim, rc = x.cols();
  Eigen::MatrixXd xh(rl, kPauliDim * rc);
  for (int q = 0; q < kPauliDim; ++q)
    xh.middleCols(q * rc, rc) = x.middleRows(q * rl, rl);
  std::vector<Eigen::MatrixXd> lx(static_cast<std::size_t>(bond));
  std::vector<Eigen::MatrixXd> mixed(static_cast<std::size_t>(bond));
  for (int w = 0; w < bond; ++w)
    if (left[static_cast<std::size_t>(w)].size() != 0)
      lx[static_cast<std::size_t>(w)].noalias() =
          left[static_cast<std::size_t>(w)] * xh;
  for (const MpoEntry& e : site) {
    const Eigen::MatrixXd& src = lx[static_cast<std::size_t>(e.row)];
    if (src.size() == 0 || right[static_cast<std::size_t>(e.col)].size() == 0)
      continue;
    Eigen::MatrixXd& acc = mixed[static_cast<std::size_t>(e.col)];
    if (e.op.isIdentity(0.0)) {
      if (acc.size() == 0)
        acc = src;
      else
        acc.noalias() += src;
      continue;
    }
    for (int q = 0; q < kPauliDim; ++q)
      for (int p = 0; p < kPauliDim; ++p)
        if (e.op(q, p) != 0.0) mix_block(acc, e.op(q, p), src, rl, rc, q, p);
  }
  y.setZero(x.rows(), rc);
  Eigen::MatrixXd stack(x.rows(), rc);
  for (int w = 0; w < bond; ++w) {
    const Eigen::MatrixXd& m = mixed[static_cast<std::size_t>(w)];
    if (m.size() == 0) continue;
    for (int q = 0; q < kPauliDim; ++q)
      stack.middleRows(q * rl, rl) = m.middleCols(q * rc, rc);
    y.noalias() += stack * right[static_cast<std::size_t>(w)];
  }
}

// Two label slots: blocks q1 * 4 + q2 stacked vertically, rl x rc each.
void apply_two(const Env& left, const Env& right,
               const std::vector<MpoEntry>& first,
               const std::vector<MpoEntry>& second, int bond,
               const Eigen::Ref<const Eigen::MatrixXd>& x, Eigen::MatrixXd& y) {
  constexpr int kPair = kPauliDim * kPauliDim;
  const Eigen::Index rl = x.rows() / kPair, rc = x.cols();
  Eigen::MatrixXd xh(rl, kPair * rc);
  for (int q = 0; q < kPair; ++q)
    xh.middleCols(q * rc, rc) = x.middleRows(q * rl, rl);
  std::vector<Eigen::MatrixXd> lx(static_cast<std::size_t>(bond));
  std::vector<Eigen::MatrixXd> mid(static_cast<std::size_t>(bond));
  std::vector<Eigen::MatrixXd> full(static_cast<std::size_t>(bond));
  for (int w = 0; w < bond; ++w)
    if (left[static_cast<std::size_t>(w)].size() != 0)
      lx[static_cast<std::size_t>(w)].noalias() =
          left[static_cast<std::size_t>(w)] * xh;
  for (const MpoEntry& e : first) {
    const Eigen::MatrixXd& src = lx[static_cast<std::size_t>(e.row)];
    if (src.size() == 0) continue;
    Eigen::MatrixXd& acc = mid[static_cast<std::size_t>(e.col)];
    if (e.op.isIdentity(0.0)) {
      if (acc.size() == 0)
        acc = src;
      else
        acc.noalias() += src;
      continue;
    }
    for (int q1 = 0; q1 < kPauliDim; ++q1)
      for (int p1 = 0; p1 < kPauliDim; ++p1) {
        if (e.op(q1, p1) == 0.0) continue;
        for (int p2 = 0; p2 < kPauliDim; ++p2)
          mix_block(acc, e.op(q1, p1), src, rl, rc, q1 * kPauliDim + p2,
                    p1 * kPauliDim + p2);
      }
  }
  for (const MpoEntry& e : second) {
    const Eigen::MatrixXd& src = mid[static_cast<std::size_t>(e.row)];
    if (src.size() == 0 || right[static_cast<std::size_t>(e.col)].size() == 0)
      continue;
    Eigen::MatrixXd& acc = full[static_cast<std::size_t>(e.col)];
    if (e.op.isIdentity(0.0)) {
      if (acc.size() == 0)
        acc = src;
      else
        acc.noalias() += src;
      continue;
    }
    for (int q2 = 0; q2 < kPauliDim; ++q2)
      for (int p2 = 0; p2 < kPauliDim; ++p2) {
        if (e.op(q2, p2) == 0.0) continue;
        for (int q1 = 0; q1 < kPauliDim; ++q1)
          mix_block(acc, e.op(q2, p2), src, rl, rc, q1 * kPauliDim + q2,
                    q1 * kPauliDim + p2);
      }
  }
  y.setZero(x.rows(), rc);
  Eigen::MatrixXd stack(x.rows(), rc);
  for (int w = 0; w < bond; ++w) {
    const Eigen::MatrixXd& m = full[static_cast<std::size_t>(w)];
    if (m.size() == 0) continue;
    for (int q = 0; q < kPair; ++q)
      stack.middleRows(q * rl, rl) = m.middleCols(q * rc, rc);
    y.noalias() += stack * right[static_cast<std::size_t>(w)];
  }
}

Eigen::VectorXd as_vector(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

}  // namespace

TdvpEngine::TdvpEngine(OperatorMps state, SuperOperatorMpo mpo, TdvpConfig cfg)
    : state_(std::move(state)), mpo_(std::move(mpo)), cfg_(cfg) {
  const int n = state_.sites();
  if (n < 2) throw std::invalid_argument("TdvpEngine: needs n >= 2");
  if (mpo_.n != n) throw std::invalid_argument("TdvpEngine: MPO size mismatch");
  if (cfg_.dt <= 0.0 || cfg_.chi_max < 1 || cfg_.krylov_max < 2)
    throw std::invalid_argument("TdvpEngine: bad config");
  env_l_.assign(static_cast<std::size_t>(n) + 1,
                Env(static_cast<std::size_t>(mpo_.bond)));
  env_r_.assign(static_cast<std::size_t>(n) + 1,
                Env(static_cast<std::size_t>(mpo_.bond)));
  env_l_[0][0] = Eigen::MatrixXd::Ones(1, 1);
  env_r_[static_cast<std::size_t>(n)][static_cast<std::size_t>(mpo_.bond) - 1] =
      Eigen::MatrixXd::Ones(1, 1);
  // Assumes sites 1..n-1 arrive right-isometric, true for product input.
  for (int s = n - 1; s >= 1; --s)
    env_r_[static_cast<std::size_t>(s)] = propagate_right(
        env_r_[static_cast<std::size_t>(s) + 1], state_.site[static_cast<std::size_t>(s)],
        mpo_.site[static_cast<std::size_t>(s)], mpo_.bond);
}

void TdvpEngine::evolve_bond(int s, double tau, bool keep_left) {
  SiteTensor& a = state_.site[static_cast<std::size_t>(s)];
  SiteTensor& b = state_.site[static_cast<std::size_t>(s) + 1];
  const Eigen::Index rows = a.left(), cols = b.right();
  Eigen::MatrixXd theta(kPauliDim * kPauliDim * rows, cols);
  for (int q1 = 0; q1 < kPauliDim; ++q1)
    for (int q2 = 0; q2 < kPauliDim; ++q2)
      theta.middleRows((q1 * kPauliDim + q2) * rows, rows).noalias() =
          a.m[static_cast<std::size_t>(q1)] * b.m[static_cast<std::size_t>(q2)];

  const Env& left = env_l_[static_cast<std::size_t>(s)];
  const Env& right = env_r_[static_cast<std::size_t>(s) + 2];
  const auto& first = mpo_.site[static_cast<std::size_t>(s)];
  const auto& second = mpo_.site[static_cast<std::size_t>(s) + 1];
  Eigen::MatrixXd scratch;
  auto matvec = [&](const Eigen::VectorXd& v) {
    Eigen::Map<const Eigen::MatrixXd> x(v.data(), theta.rows(), cols);
    apply_two(left, right, first, second, mpo_.bond, x, scratch);
    return as_vector(scratch);
  };
  Eigen::VectorXd v = krylov_exp_skew(matvec, as_vector(theta), tau,
                                      cfg_.krylov_max, cfg_.krylov_tol);
  Eigen::Map<const Eigen::MatrixXd> tv(v.data(), theta.rows(), cols);

  Eigen::MatrixXd merged(kPauliDim * rows, kPauliDim * cols);
  for (int q1 = 0; q1 < kPauliDim; ++q1)
    for (int q2 = 0; q2 < kPauliDim; ++q2)
      merged.block(q1 * rows, q2 * cols, rows, cols) =
          tv.middleRows((q1 * kPauliDim + q2) * rows, rows);
  Eigen::MatrixXd u, vt;
  Eigen::VectorXd sig;
  svd_thin(std::move(merged), u, sig, vt);

  const double total2 = sig.squaredNorm();
  double tail = 0.0;
  Eigen::Index k = sig.size();
  const double budget = cfg_.trunc_cut * cfg_.trunc_cut * total2;
  while (k > 1 && tail + sig[k - 1] * sig[k - 1] <= budget) {
    tail += sig[k - 1] * sig[k - 1];
    --k;
  }
  if (k > cfg_.chi_max) {
    for (Eigen::Index i = cfg_.chi_max; i < k; ++i) tail += sig[i] * sig[i];
    k = cfg_.chi_max;
    diag_.capped = true;
  }
  diag_.discarded += total2 > 0.0 ? tail / total2 : 0.0;
  diag_.max_bond = std::max(diag_.max_bond, static_cast<int>(k));
  const double rescale = std::sqrt(total2 / (total2 - tail));

  if (keep_left) {
    Eigen::MatrixXd sv =
        (rescale * sig.head(k)).asDiagonal() * vt.topRows(k);
    for (int q = 0; q < kPauliDim; ++q) {
      a.m[static_cast<std::size_t>(q)] = u.block(q * rows, 0, rows, k);
      b.m[static_cast<std::size_t>(q)] = sv.middleCols(q * cols, cols);
    }
  } else {
    Eigen::MatrixXd us =
        u.leftCols(k) * (rescale * sig.head(k)).asDiagonal();
    for (int q = 0; q < kPauliDim; ++q) {
      a.m[static_cast<std::size_t>(q)] = us.middleRows(q * rows, rows);
      b.m[static_cast<std::size_t>(q)] = vt.block(0, q * cols, k, cols);
    }
  }
}

void TdvpEngine::back_evolve_site(int s, double tau) {
  SiteTensor& a = state_.site[static_cast<std::size_t>(s)];
  const Eigen::Index rows = a.left(), cols = a.right();
  const Env& left = env_l_[static_cast<std::size_t>(s)];
  const Env& right = env_r_[static_cast<std::size_t>(s) + 1];
  const auto& site = mpo_.site[static_cast<std::size_t>(s)];
  Eigen::MatrixXd stacked(kPauliDim * rows, cols);
  for (int q = 0; q < kPauliDim; ++q)
    stacked.middleRows(q * rows, rows) = a.m[static_cast<std::size_t>(q)];
  Eigen::MatrixXd scratch;
  auto matvec = [&](const Eigen::VectorXd& v) {
    Eigen::Map<const Eigen::MatrixXd> x(v.data(), stacked.rows(), cols);
    apply_one(left, right, site, mpo_.bond, x, scratch);
    return as_vector(scratch);
  };
  Eigen::VectorXd v = krylov_exp_skew(matvec, as_vector(stacked), tau,
                                      cfg_.krylov_max, cfg_.krylov_tol);
  Eigen::Map<const Eigen::MatrixXd> av(v.data(), stacked.rows(), cols);
  for (int q = 0; q < kPauliDim; ++q)
    a.m[static_cast<std::size_t>(q)] = av.middleRows(q * rows, rows);
}

void TdvpEngine::sweep_right(double tau) {
  const int n = state_.sites();
  for (int s = 0; s <= n - 2; ++s) {
    evolve_bond(s, tau, true);
    env_l_[static_cast<std::size_t>(s) + 1] =
        propagate_left(env_l_[static_cast<std::size_t>(s)],
                       state_.site[static_cast<std::size_t>(s)],
                       mpo_.site[static_cast<std::size_t>(s)], mpo_.bond);
    if (s < n - 2) back_evolve_site(s + 1, -tau);
  }
}

void TdvpEngine::sweep_left(double tau) {
  const int n = state_.sites();
  for (int s = n - 2; s >= 0; --s) {
    evolve_bond(s, tau, false);
    env_r_[static_cast<std::size_t>(s) + 1] =
        propagate_right(env_r_[static_cast<std::size_t>(s) + 2],
                        state_.site[static_cast<std::size_t>(s) + 1],
                        mpo_.site[static_cast<std::size_t>(s) + 1], mpo_.bond);
    if (s > 0) back_evolve_site(s, -tau);
  }
}

void TdvpEngine::step() {
  const double half = 0.5 * cfg_.dt;
  sweep_right(half);
  sweep_left(half);
  diag_.time += cfg_.dt;
}

std::vector<json> run_tdvp_job(const ExperimentPlan& plan, const JobSpec& job) {
  if (job.chi < 1)
    throw std::invalid_argument("run_tdvp_job: positive chi required");
  const ModelParams params = plan.model_for(job.n, job.w);
  const DisorderRealization dis = sample_disorder(params, plan.seed, job.index);
  TdvpConfig cfg;
  cfg.dt = plan.grid.dt;
  cfg.chi_max = job.chi;
  cfg.trunc_cut = plan.trunc_cut;
  cfg.krylov_max = plan.krylov_max;
  cfg.krylov_tol = 1e-10;
  TdvpEngine engine(pauli_z_product(job.n, 0), commutator_mpo(params, dis), cfg);

  OtocCurve curve;
  curve.engine = "tdvp-mpo";
  curve.params = params;
  curve.seed = plan.seed;
  curve.index = job.index;
  curve.chi = job.chi;
  std::vector<Eigen::VectorXd> cols;
  auto measure = [&] {
    const Eigen::VectorXd f = pauli_z_overlaps(engine.state());
    Eigen::VectorXd c(job.n - 1);
    for (int r = 1; r < job.n; ++r) c[r - 1] = 1.0 - f[r];
    cols.push_back(std::move(c));
  };
  const std::vector<double> times = snapshot_times(plan.grid);
  measure();
  curve.times.push_back(times.at(0));
  for (std::size_t k = 1; k < times.size(); ++k) {
    for (int i = 0; i < plan.grid.snap_every; ++i) engine.step();
    measure();
    curve.times.push_back(times[k]);
    if (plan.grid.stop_above > 0.0 && cols.back().mean() > plan.grid.stop_above)
      break;
  }
  const Eigen::Index nt = static_cast<Eigen::Index>(cols.size());
  curve.c_r.resize(job.n - 1, nt);
  for (Eigen::Index c = 0; c < nt; ++c)
    curve.c_r.col(c) = cols[static_cast<std::size_t>(c)];
  curve.c_mean = curve.c_r.colwise().mean();
  curve.converged = !engine.diagnostics().capped;
  curve.check();

  const TdvpDiagnostics& diag = engine.diagnostics();
  json extra{{"kind", "tdvp-diag"}, {"engine", "tdvp-mpo"},
             {"n", job.n},          {"w", job.w},
             {"chi", job.chi},      {"index", job.index},
             {"seed", plan.seed},   {"max_bond", diag.max_bond},
             {"discarded", diag.discarded}, {"capped", diag.capped},
             {"t_final", curve.times.back()}};
  return {to_json(curve), std::move(extra)};
}

}  // namespace scramble
