#pragma once

// Experiment drivers behind the CLI commands and the acceptance checks.

#include <string>
#include <vector>

#include "llhomog/analysis.hpp"
#include "llhomog/config.hpp"

namespace llh {

/// Cell data shared by every run of one configuration.
struct Problem {
  SimConfig cfg;
  MaterialCoefficient a;  // on the fast grid
  CellSolution cell;
};

Problem make_problem(const SimConfig& cfg);

/// eps^sigma T
double final_time(const SimConfig& cfg, double eps);

Trajectory fine_solve(const Problem& p, double eps, double t_end, int output_stride);

/// m0(t) on the slow grid; steps = 0 picks the RK4 limit.
VectorField3 hom_state(const Problem& p, double t, long steps = 0);
long hom_steps(const Problem& p, double t);

struct CorrectedField {
  VectorField3 m_tilde;
  CorrectorSet correctors;
};

/// m~_J at (t, t / eps^2) on the fine grid, correctors frozen at m0(t).
CorrectedField corrected_field(const Problem& p, double eps, int J, double t, const PeriodicGrid& fine,
                               long hom_step_count = 0, long tau_step_count = 0);

/// eta_J at t from a five-point stencil of corrected fields with spacing stencil_dtau eps^2.
VectorField3 corrected_residual(const Problem& p, double eps, int J, double t, const PeriodicGrid& fine);

ErrorRecord error_record(const Problem& p, double eps, int J, bool with_eta);
/// One fine solve shared by every corrector order in Js.
std::vector<ErrorRecord> error_records(const Problem& p, double eps, const std::vector<int>& Js, bool with_eta);

/// Records for every eps of the configuration, fitted on cfg.norm_key.
SweepResult run_sweep(const Problem& p, int J, bool with_eta);

struct DecayResult {
  std::vector<double> tau, norm;
  DecayFit fit;
  double floor = 0.0;  // alpha a_min 4 pi^2
};

/// ||v(tau)|| for the initial slice on [0, history_tau_end].
DecayResult v_decay(const Problem& p);

struct Fig1Result {
  double eps = 0.0;
  std::vector<double> times;
  std::vector<VectorField3> fine, diff;  // m^eps and m^eps - m0 on the fine grid
  double max_norm_defect = 0.0;
  double peak_frequency = 0.0;  // cycles per unit length of diff_x at the final time
  Index amp_node = 0;
  double amp_early = 0.0, amp_late = 0.0;
  double amp_decay() const { return 1.0 - amp_late / amp_early; }
};

Fig1Result run_fig1(const Problem& p, int snapshots = 200);

/// Returns the process exit code: 0 pass, 2 tolerance failure.
int run_command(const std::string& command, const SimConfig& cfg);

}  // namespace llh
