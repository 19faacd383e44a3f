#include "llhomog/experiments.hpp"

#include <climits>
#include <cmath>
#include <numbers>
#include <sstream>

namespace llh {

namespace {

using std::numbers::pi;

const std::vector<int> kOrders{1};

double l2(const TS& u) { return std::sqrt((u[0].square() + u[1].square() + u[2].square()).mean()); }

long ceil_steps(double t, double h) { return std::max(1L, static_cast<long>(std::ceil(t / h - 1e-9))); }

void require_finite(const NormReport& r, const char* what, double eps) {
  bool ok = std::isfinite(r.l2) && std::isfinite(r.linf);
  for (const auto& [q, v] : r.hq) ok = ok && std::isfinite(v);
  if (!ok) {
    std::ostringstream os;
    os << what << " is not finite at eps = " << eps;
    throw NumericalError(os.str());
  }
}

}  // namespace

Problem make_problem(const SimConfig& cfg) {
  validate(cfg);
  MaterialCoefficient a = build_coefficient(cfg.coefficient, PeriodicGrid(cfg.n_fast));
  CellSolution cell = solve_cell_problem(a);
  return {cfg, std::move(a), std::move(cell)};
}

double final_time(const SimConfig& cfg, double eps) { return std::pow(eps, cfg.sigma) * cfg.T; }

Trajectory fine_solve(const Problem& p, double eps, double t_end, int output_stride) {
  const PeriodicGrid grid(fine_points(p.cfg, eps));
  const auto ctx = LLOperatorContext::fine(sample_eps_coefficient(p.a, eps, grid), p.cfg.alpha);
  IntegrateOptions o;
  o.scheme = p.cfg.scheme;
  o.dt = p.cfg.dt;
  o.cfl_safety = p.cfg.cfl_safety;
  o.output_stride = output_stride;
  return integrate(build_initial_data(p.cfg.initial, grid), ctx, t_end, o);
}

long hom_steps(const Problem& p, double t) {
  const auto ctx = LLOperatorContext::homogenized(PeriodicGrid(p.cfg.n_slow), p.cell.a_h, p.cfg.alpha);
  return ceil_steps(t, rk4_dt_limit(ctx, p.cfg.cfl_safety));
}

VectorField3 hom_state(const Problem& p, double t, long steps) {
  const PeriodicGrid slow(p.cfg.n_slow);
  VectorField3 m0 = build_initial_data(p.cfg.initial, slow);
  if (t == 0.0) return m0;
  const auto ctx = LLOperatorContext::homogenized(slow, p.cell.a_h, p.cfg.alpha);
  IntegrateOptions o;
  o.cfl_safety = p.cfg.cfl_safety;
  o.output_stride = INT_MAX;
  o.fixed_steps = steps > 0 ? steps : hom_steps(p, t);
  return integrate(m0, ctx, t, o).final_state();
}

CorrectedField corrected_field(const Problem& p, double eps, int J, double t, const PeriodicGrid& fine,
                               long hom_step_count, long tau_step_count) {
  const VectorField3 m0 = hom_state(p, t, hom_step_count);
  const ProjectionContext ctx(m0, p.cfg.alpha);
  CorrectorSetOptions o;
  o.J = J;
  o.scheme = p.cfg.tau_scheme;
  o.dtau = p.cfg.dtau;
  o.fixed_steps = tau_step_count;
  CorrectorSet cs = J > 0 ? compute_correctors(ctx, p.a, p.cell, t / (eps * eps), o)
                          : CorrectorSet{TwoScaleField3::zero(m0.grid(), p.a.grid()),
                                         TwoScaleField3::zero(m0.grid(), p.a.grid()),
                                         TwoScaleField3::zero(m0.grid(), p.a.grid()), t / (eps * eps)};
  std::vector<const TwoScaleField3*> list;
  if (J >= 1) list.push_back(&cs.m1);
  if (J >= 2) list.push_back(&cs.m2);
  VectorField3 mt = assemble_m_tilde(m0, list, eps, fine);
  return {std::move(mt), std::move(cs)};
}

VectorField3 corrected_residual(const Problem& p, double eps, int J, double t, const PeriodicGrid& fine) {
  const double s = p.cfg.stencil_dtau * eps * eps;
  if (t - 2.0 * s < 0.0) throw ParameterError("corrected_residual: the stencil reaches below t = 0");
  const double t_hi = t + 2.0 * s;
  const long n_hom = hom_steps(p, t_hi);
  const long n_tau = ceil_steps(t_hi / (eps * eps), p.cfg.dtau);
  std::vector<VectorField3> series;
  for (int k = -2; k <= 2; ++k)
    series.push_back(corrected_field(p, eps, J, t + k * s, fine, n_hom, n_tau).m_tilde);
  return residual_eta(series, sample_eps_coefficient(p.a, eps, fine), p.cfg.alpha, s);
}

std::vector<ErrorRecord> error_records(const Problem& p, double eps, const std::vector<int>& Js, bool with_eta) {
  const double t_final = final_time(p.cfg, eps);
  const Trajectory traj = fine_solve(p, eps, t_final, INT_MAX);
  const VectorField3& fine = traj.final_state();
  std::vector<ErrorRecord> out;
  for (int J : Js) {
    ErrorRecord r;
    r.eps = eps;
    r.sigma = p.cfg.sigma;
    r.J = J;
    r.t_final = t_final;
    const CorrectedField mt = corrected_field(p, eps, J, t_final, fine.grid());
    r.err = compute_error(fine, mt.m_tilde, kOrders);
    r.len_dev = length_deviation(mt.m_tilde, kOrders);
    r.grad_inf_fine = gradient_monitor(fine);
    require_finite(r.err, "error norm", eps);
    if (with_eta) {
      r.eta = norm_report(corrected_residual(p, eps, J, t_final, fine.grid()), kOrders);
      r.has_eta = true;
      require_finite(r.eta, "residual norm", eps);
    }
    out.push_back(std::move(r));
  }
  return out;
}

ErrorRecord error_record(const Problem& p, double eps, int J, bool with_eta) {
  return error_records(p, eps, {J}, with_eta).front();
}

SweepResult run_sweep(const Problem& p, int J, bool with_eta) {
  // Sequential on purpose: the runs are independent, but Eigen's FFTW
  // wrapper creates plans lazily and the planner is not reentrant.
  SweepResult s;
  s.norm_key = p.cfg.norm_key;
  for (double eps : p.cfg.eps) s.records.push_back(error_record(p, eps, J, with_eta));
  s.fit = fit_records(s.records, s.norm_key);
  return s;
}

DecayResult v_decay(const Problem& p) {
  const ProjectionContext ctx(hom_state(p, 0.0), p.cfg.alpha);
  const TauPropagator prop(ctx, p.a);
  const TS v0 = v_initial(ctx, p.cell);
  DecayResult d;
  const long n = ceil_steps(p.cfg.history_tau_end, p.cfg.history_dtau);
  for (long i = 0; i <= n; ++i) {
    const double tau = p.cfg.history_tau_end * static_cast<double>(i) / static_cast<double>(n);
    d.tau.push_back(tau);
    d.norm.push_back(l2(v_at(prop, v0, tau)));
  }
  d.fit = fit_decay(d.tau, d.norm, 0.5);
  d.floor = p.cfg.alpha * p.a.a_min() * 4.0 * pi * pi;
  return d;
}

Fig1Result run_fig1(const Problem& p, int snapshots) {
  Fig1Result r;
  r.eps = p.cfg.single_eps();
  const double eps = r.eps, t_end = final_time(p.cfg, eps);
  const PeriodicGrid grid(fine_points(p.cfg, eps));
  const auto ctx = LLOperatorContext::fine(sample_eps_coefficient(p.a, eps, grid), p.cfg.alpha);
  const long base = ceil_steps(t_end, rk4_dt_limit(ctx, p.cfg.cfl_safety));
  IntegrateOptions o;
  o.cfl_safety = p.cfg.cfl_safety;
  o.output_stride = static_cast<int>((base + snapshots - 1) / snapshots);
  o.fixed_steps = o.output_stride * static_cast<long>(snapshots);
  const Trajectory traj = integrate(build_initial_data(p.cfg.initial, grid), ctx, t_end, o);

  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const VectorField3 m0 = refine_field(hom_state(p, traj.times[i]), grid);
    r.times.push_back(traj.times[i]);
    r.fine.push_back(traj.states[i]);
    r.diff.emplace_back(grid, traj.states[i].components() - m0.components());
    r.max_norm_defect = std::max(r.max_norm_defect, traj.states[i].length_deviation());
  }

  // Dominant spatial frequency of the x-component of the difference.
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  const Array1<double>& dx = r.diff.back()[0];
  std::vector<double> sig(dx.data(), dx.data() + dx.size());
  fft.fwd(spec, sig);
  std::size_t peak = 1;
  for (std::size_t k = 1; k <= sig.size() / 2; ++k)
    if (std::abs(spec[k]) > std::abs(spec[peak])) peak = k;
  r.peak_frequency = static_cast<double>(peak);

  // Oscillation amplitude (max - min) / 2 in the windows around tau = 0.2 and tau = 2.
  auto amplitude = [&](Index node, double lo, double hi) {
    double mn = 1e300, mx = -1e300;
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      const double tau = r.times[i] / (eps * eps);
      if (tau < lo - 1e-9 || tau > hi + 1e-9) continue;
      mn = std::min(mn, r.diff[i][0](node));
      mx = std::max(mx, r.diff[i][0](node));
    }
    return 0.5 * (mx - mn);
  };
  const double tau_end = t_end / (eps * eps);
  for (Index j = 0; j < grid.size() && grid.node(j) <= 7.0 * eps; ++j) {
    const double a = amplitude(j, 0.0, 0.2 * tau_end);
    if (a > r.amp_early) {
      r.amp_early = a;
      r.amp_node = j;
    }
  }
  r.amp_late = amplitude(r.amp_node, 0.8 * tau_end, tau_end);
  return r;
}

}  // namespace llh
