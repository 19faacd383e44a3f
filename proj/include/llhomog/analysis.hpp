#pragma once

// Error norms, the residual eta of a corrected approximation, length
// deviation and log-log rate fitting.

#include <span>
#include <string>
#include <vector>

#include "llhomog/llg.hpp"
#include "llhomog/norms.hpp"

namespace llh {

/// Norms of fine - m_tilde; both fields must live on the same grid.
NormReport compute_error(const VectorField3& fine, const VectorField3& m_tilde, std::span<const int> q_list);

/// Same, taking the state of a trajectory at time t (must be a recorded time).
NormReport compute_error(const Trajectory& fine, double t, const VectorField3& m_tilde, std::span<const int> q_list,
                         double time_tol = 1e-12);

/// eta = d_t m + m x L m + alpha m x m x L m at the centre of a five-point
/// stencil m(t + k dt), k = -2..2, with L = d_x(a^eps d_x).
VectorField3 residual_eta(std::span<const VectorField3> series, const ScalarField& a_eps, double alpha,
                          double dt_stencil);

/// |m|^2 - 1 as a scalar field, and its norms.
ScalarField length_defect(const VectorField3& m);
NormReport length_deviation(const VectorField3& m, std::span<const int> q_list);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least-squares line through (log eps, log value).
RateFit fit_rate(std::span<const double> eps, std::span<const double> values);

struct DecayFit {
  double rate = 0.0;
  double r_squared = 0.0;
};

/// Positive decay rate of log(norm) against tau over points with tau >= tau_min.
DecayFit fit_decay(std::span<const double> tau, std::span<const double> norms, double tau_min = 0.5);

/// max_i |m_x(x_i)|: the bounded-gradient monitor (reported, not enforced).
double gradient_monitor(const VectorField3& m);

struct ErrorRecord {
  double eps = 0.0;
  double sigma = 0.0;
  int J = 0;
  double t_final = 0.0;
  NormReport err;
  NormReport eta;
  NormReport len_dev;
  double grad_inf_fine = 0.0;
  bool has_eta = false;
};

struct SweepResult {
  std::vector<ErrorRecord> records;
  std::string norm_key = "err_L2";
  RateFit fit;
};

/// Fit the selected record norm ("err_L2", "err_H1", "eta_L2", "len_dev_L2") against eps.
RateFit fit_records(const std::vector<ErrorRecord>& records, const std::string& norm_key);
double record_value(const ErrorRecord& r, const std::string& norm_key);

}  // namespace llh
