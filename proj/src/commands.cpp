#include <climits>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "llhomog/experiments.hpp"
#include "llhomog/io.hpp"

namespace llh {

namespace {

namespace fs = std::filesystem;

// Collects summary lines and pass/fail checks.
class Summary {
 public:
  void value(const std::string& key, double v) { os_ << key << " = " << format_real(v) << "\n"; }
  void text(const std::string& key, const std::string& v) { os_ << key << " = " << v << "\n"; }
  void check(const std::string& name, bool ok, const std::string& detail) {
    os_ << "check " << name << ": " << (ok ? "PASS" : "FAIL") << " (" << detail << ")\n";
    failed_ = failed_ || !ok;
  }
  int finish(const fs::path& dir) const {
    write_text(dir / "summary.txt", os_.str());
    std::cout << os_.str();
    return failed_ ? 2 : 0;
  }

 private:
  std::ostringstream os_;
  bool failed_ = false;
};

std::string range(double v, double lo, double hi) {
  return format_real(v) + " in [" + format_real(lo) + ", " + format_real(hi) + "]";
}

void write_trajectory(const fs::path& path, const Trajectory& traj, double x_max = 1.0) {
  CsvWriter csv(path, {"t", "x", "mx", "my", "mz"});
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const auto& m = traj.states[i];
    for (Index j = 0; j < m.grid().size() && m.grid().node(j) <= x_max; ++j)
      csv.row({traj.times[i], m.grid().node(j), m[0](j), m[1](j), m[2](j)});
  }
}

int auto_stride(const Problem& p, double eps, double t_end) {
  if (p.cfg.output_stride > 0) return static_cast<int>(p.cfg.output_stride);
  const PeriodicGrid grid(fine_points(p.cfg, eps));
  const auto ctx = LLOperatorContext::fine(sample_eps_coefficient(p.a, eps, grid), p.cfg.alpha);
  const double dt = p.cfg.dt > 0.0 ? p.cfg.dt : rk4_dt_limit(ctx, p.cfg.cfl_safety);
  return static_cast<int>(std::max(1.0, std::ceil(t_end / dt / 40.0)));
}

int cmd_cell(const Problem& p, const fs::path& dir) {
  const Array1<double> flux = cell_flux(p.a, p.cell);
  CsvWriter csv(dir / "cell.csv", {"y", "a", "chi", "flux"});
  for (Index i = 0; i < p.a.grid().size(); ++i)
    csv.row({p.a.grid().node(i), p.a.values()(i), p.cell.chi.values()(i), flux(i)});
  write_text(dir / "cell.gp",
             "set datafile separator ','\n"
             "set key autotitle columnheader\n"
             "set xlabel 'y'\n"
             "plot 'cell.csv' using 1:2 with lines, '' using 1:3 with lines, '' using 1:4 with lines\n");
  Summary s;
  s.text("coefficient", p.cfg.coefficient.describe());
  s.value("n_fast", static_cast<double>(p.a.grid().size()));
  s.value("A_H", p.cell.a_h);
  s.value("a_min", p.a.a_min());
  s.value("a_max", p.a.a_max());
  s.value("cell_residual_sup", p.cell.residual_sup);
  s.value("path_discrepancy", p.cell.path_discrepancy);
  return s.finish(dir);
}

int cmd_fine(const Problem& p, const fs::path& dir) {
  const double eps = p.cfg.single_eps(), t_end = final_time(p.cfg, eps);
  const Trajectory traj = fine_solve(p, eps, t_end, auto_stride(p, eps, t_end));
  write_trajectory(dir / "trajectory.csv", traj);
  write_snapshot(dir / "final.bin", traj.final_state());
  write_text(dir / "trajectory.gp",
             "set datafile separator ','\n"
             "set xlabel 'x'\nset ylabel 't'\n"
             "set view map\n"
             "plot 'trajectory.csv' using 2:1:3 with image title 'm_x'\n");
  double defect = 0.0;
  for (const auto& m : traj.states) defect = std::max(defect, m.length_deviation());
  Summary s;
  s.value("eps", eps);
  s.value("t_final", traj.final_time());
  s.value("n_fine", static_cast<double>(traj.final_state().grid().size()));
  s.text("scheme", traj.scheme);
  s.value("dt", traj.dt);
  s.value("steps", static_cast<double>(traj.steps));
  s.value("max_norm_defect", defect);
  s.value("grad_inf_fine", gradient_monitor(traj.final_state()));
  s.check("norm_preservation", defect < p.cfg.norm_tol, format_real(defect) + " < " + format_real(p.cfg.norm_tol));
  return s.finish(dir);
}

int cmd_hom(const Problem& p, const fs::path& dir) {
  const double eps = p.cfg.single_eps(), t_end = final_time(p.cfg, eps);
  const PeriodicGrid slow(p.cfg.n_slow);
  const auto ctx = LLOperatorContext::homogenized(slow, p.cell.a_h, p.cfg.alpha);
  IntegrateOptions o;
  o.cfl_safety = p.cfg.cfl_safety;
  o.output_stride = static_cast<int>(std::max(1L, hom_steps(p, t_end) / 40));
  const Trajectory traj = integrate(build_initial_data(p.cfg.initial, slow), ctx, t_end, o);
  write_trajectory(dir / "trajectory.csv", traj);
  write_text(dir / "trajectory.gp",
             "set datafile separator ','\n"
             "set xlabel 'x'\nset ylabel 't'\n"
             "set view map\n"
             "plot 'trajectory.csv' using 2:1:3 with image title 'm0_x'\n");
  Summary s;
  s.value("A_H", p.cell.a_h);
  s.value("t_final", traj.final_time());
  s.value("dt", traj.dt);
  s.value("steps", static_cast<double>(traj.steps));
  s.value("exchange_energy_initial", exchange_energy(traj.states.front(), ctx));
  s.value("exchange_energy_final", exchange_energy(traj.final_state(), ctx));
  return s.finish(dir);
}

int cmd_correct(const Problem& p, const fs::path& dir) {
  const double eps = p.cfg.single_eps();
  HistoryOptions h;
  h.tau_end = p.cfg.history_tau_end;
  h.dtau = p.cfg.history_dtau;
  h.refresh_dtau = p.cfg.refresh_dtau;
  h.eps = eps;
  h.a_h = p.cell.a_h;
  h.J = p.cfg.J;
  const auto rows = corrector_history([&](double t) { return hom_state(p, t); }, p.cfg.alpha, p.a, p.cell, h);
  CsvWriter csv(dir / "history.csv", {"tau", "norm_v_L2", "norm_m1_L2", "norm_m2_L2", "ortho_defect", "mean_defect"});
  for (const auto& r : rows) csv.row({r.tau, r.norm_v, r.norm_m1, r.norm_m2, r.ortho_defect, r.mean_defect});
  write_text(dir / "history.gp",
             "set datafile separator ','\n"
             "set key autotitle columnheader\n"
             "set logscale y\nset xlabel 'tau'\n"
             "plot 'history.csv' using 1:2 with lines, '' using 1:3 with lines, '' using 1:4 with lines\n");

  // Frozen initial slice: structure of m1 and decay of v.
  const ProjectionContext ctx(hom_state(p, 0.0), p.cfg.alpha);
  TauOptions o;
  o.scheme = p.cfg.tau_scheme;
  o.dtau = p.cfg.history_dtau;
  const M1Result m1 = solve_m1(ctx, p.a, p.cell, p.cfg.history_tau_end, o);
  const TS m0 = ctx.m0_two_scale(p.a.grid().size());
  double ortho = 0.0, mean = 0.0;
  for (const auto& st : m1.states) {
    ortho = std::max(ortho, dot(st.field.components(), m0).abs().maxCoeff());
    mean = std::max(mean, max_abs(averaging_A(st.field).components()));
  }
  const DecayResult d = v_decay(p);

  Summary s;
  s.value("eps", eps);
  s.value("tau_end", p.cfg.history_tau_end);
  s.value("m1_ortho_max", ortho);
  s.value("m1_mean_max", mean);
  s.value("m1_dual_path", m1.dual_path_discrepancy);
  s.value("v_decay_rate", d.fit.rate);
  s.value("v_decay_r_squared", d.fit.r_squared);
  s.value("v_decay_floor", d.floor);
  s.check("m1_orthogonal", ortho < 1e-8, format_real(ortho) + " < 1e-8");
  s.check("m1_zero_mean", mean < 1e-8, format_real(mean) + " < 1e-8");
  s.check("m1_dual_path", m1.dual_path_discrepancy < 1e-8, format_real(m1.dual_path_discrepancy) + " < 1e-8");
  s.check("v_decay", d.fit.rate >= 0.95 * d.floor, format_real(d.fit.rate) + " >= " + format_real(0.95 * d.floor));
  return s.finish(dir);
}

const std::vector<std::string> kSweepHeader{"eps", "sigma", "J", "t_final", "err_L2",
                                            "err_H1", "eta_L2", "len_dev_L2", "grad_inf_fine"};

void write_record(CsvWriter& csv, const ErrorRecord& r) {
  csv.row({r.eps, r.sigma, static_cast<double>(r.J), r.t_final, r.err.l2, r.err.hq.at(1),
           r.has_eta ? r.eta.l2 : std::nan(""), r.len_dev.l2, r.grad_inf_fine});
}

int cmd_compare(const Problem& p, const fs::path& dir) {
  const double eps = p.cfg.single_eps();
  const ErrorRecord r = error_record(p, eps, p.cfg.J, p.cfg.eta);
  CsvWriter csv(dir / "compare.csv", kSweepHeader);
  write_record(csv, r);
  Summary s;
  s.value("eps", eps);
  s.value("sigma", r.sigma);
  s.value("J", r.J);
  s.value("t_final", r.t_final);
  s.value("err_L2", r.err.l2);
  s.value("err_H1", r.err.hq.at(1));
  if (r.has_eta) s.value("eta_L2", r.eta.l2);
  s.value("len_dev_L2", r.len_dev.l2);
  s.value("grad_inf_fine", r.grad_inf_fine);
  return s.finish(dir);
}

int cmd_sweep(const Problem& p, const fs::path& dir) {
  const bool with_eta = p.cfg.eta || p.cfg.J == 2;
  const SweepResult sw = run_sweep(p, p.cfg.J, with_eta);
  std::map<std::string, RateFit> fits;
  for (const std::string key : {"err_L2", "err_H1", "len_dev_L2"}) fits[key] = fit_records(sw.records, key);
  if (with_eta) fits["eta_L2"] = fit_records(sw.records, "eta_L2");

  CsvWriter csv(dir / "sweep.csv", kSweepHeader);
  for (const auto& r : sw.records) write_record(csv, r);
  auto slope = [&](const std::string& k) { return fits.count(k) ? fits[k].slope : std::nan(""); };
  csv.row("slope", {p.cfg.sigma, static_cast<double>(p.cfg.J), std::nan(""), slope("err_L2"), slope("err_H1"),
                    slope("eta_L2"), slope("len_dev_L2"), std::nan("")});
  write_text(dir / "sweep.gp",
             "set datafile separator ','\n"
             "set key autotitle columnheader\n"
             "set logscale xy\nset xlabel 'eps'\n"
             "plot '< grep -v slope sweep.csv' using 1:5 with linespoints, '' using 1:6 with linespoints, "
             "'' using 1:8 with linespoints\n");

  Summary s;
  s.value("sigma", p.cfg.sigma);
  s.value("J", p.cfg.J);
  for (const auto& [k, f] : fits) {
    s.value(k + "_slope", f.slope);
    s.value(k + "_intercept", f.intercept);
    s.value(k + "_r_squared", f.r_squared);
  }
  const RateFit& f = sw.fit;
  const auto [lo, hi] = p.cfg.slope_range(p.cfg.J);
  s.check(sw.norm_key + "_slope", f.slope >= lo && f.slope <= hi, range(f.slope, lo, hi));
  s.check(sw.norm_key + "_r_squared", f.r_squared >= p.cfg.r2_min,
          format_real(f.r_squared) + " >= " + format_real(p.cfg.r2_min));
  if (p.cfg.J == 2) {
    const double se = slope("eta_L2"), sl = slope("len_dev_L2");
    s.check("eta_L2_slope", se >= p.cfg.eta_slope_min && se <= p.cfg.eta_slope_max,
            range(se, p.cfg.eta_slope_min, p.cfg.eta_slope_max));
    s.check("len_dev_L2_slope", sl >= p.cfg.len_slope_min && sl <= p.cfg.len_slope_max,
            range(sl, p.cfg.len_slope_min, p.cfg.len_slope_max));
  }
  return s.finish(dir);
}

int cmd_fig1(const Problem& p, const fs::path& dir) {
  const Fig1Result r = run_fig1(p);
  const double eps = r.eps;
  CsvWriter fine(dir / "fig1_fine.csv", {"t", "x", "mx", "my", "mz"});
  CsvWriter diff(dir / "fig1_diff.csv", {"t", "x", "mx", "my", "mz"});
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    const PeriodicGrid& g = r.fine[i].grid();
    for (Index j = 0; j < g.size() && g.node(j) <= 7.0 * eps + 1e-12; ++j) {
      fine.row({r.times[i], g.node(j), r.fine[i][0](j), r.fine[i][1](j), r.fine[i][2](j)});
      diff.row({r.times[i], g.node(j), r.diff[i][0](j), r.diff[i][1](j), r.diff[i][2](j)});
    }
  }
  CsvWriter node(dir / "fig1_node.csv", {"t", "tau", "x", "diff_x"});
  for (std::size_t i = 0; i < r.times.size(); ++i)
    node.row({r.times[i], r.times[i] / (eps * eps), r.diff[i].grid().node(r.amp_node), r.diff[i][0](r.amp_node)});
  write_text(dir / "fig1.gp",
             "set datafile separator ','\n"
             "set multiplot layout 1,2\n"
             "set xlabel 'x'\nset ylabel 't'\n"
             "set view map\n"
             "set title 'm^eps_x'\n"
             "plot 'fig1_fine.csv' using 2:1:3 with image notitle\n"
             "set title 'm^eps_x - m_{0,x}'\n"
             "plot 'fig1_diff.csv' using 2:1:3 with image notitle\n"
             "unset multiplot\n");

  Summary s;
  s.value("eps", eps);
  s.value("alpha", p.cfg.alpha);
  s.value("t_final", r.times.back());
  s.value("n_fine", static_cast<double>(r.fine.back().grid().size()));
  s.value("max_norm_defect", r.max_norm_defect);
  s.value("peak_frequency", r.peak_frequency);
  s.value("amp_node_x", r.fine.back().grid().node(r.amp_node));
  s.value("amp_early", r.amp_early);
  s.value("amp_late", r.amp_late);
  s.value("amp_decay", r.amp_decay());
  s.value("err_L2_vs_m0", norm_l2(r.diff.back()));
  s.check("norm_preservation", r.max_norm_defect < p.cfg.norm_tol,
          format_real(r.max_norm_defect) + " < " + format_real(p.cfg.norm_tol));
  const double f0 = 1.0 / eps;
  s.check("peak_frequency", r.peak_frequency >= f0 / p.cfg.freq_factor && r.peak_frequency <= f0 * p.cfg.freq_factor,
          range(r.peak_frequency, f0 / p.cfg.freq_factor, f0 * p.cfg.freq_factor));
  s.check("amplitude_decay", r.amp_decay() >= p.cfg.amp_decay_min,
          format_real(r.amp_decay()) + " >= " + format_real(p.cfg.amp_decay_min));
  return s.finish(dir);
}

}  // namespace

int run_command(const std::string& command, const SimConfig& cfg) {
  static const std::map<std::string, std::function<int(const Problem&, const fs::path&)>> commands = {
      {"cell", cmd_cell},       {"fine", cmd_fine},   {"hom", cmd_hom},   {"correct", cmd_correct},
      {"compare", cmd_compare}, {"sweep", cmd_sweep}, {"fig1", cmd_fig1},
  };
  const auto it = commands.find(command);
  if (it == commands.end()) throw ConfigError("unknown command '" + command + "'");
  const Problem p = make_problem(cfg);
  fs::create_directories(cfg.out_dir);
  write_text(cfg.out_dir / "config_echo.cfg", cfg.echo());
  return it->second(p, cfg.out_dir);
}

}  // namespace llh
