#include "llhomog/analysis.hpp"

#include <algorithm>
#include <set>

namespace llh {

NormReport compute_error(const VectorField3& fine, const VectorField3& m_tilde, std::span<const int> q_list) {
  detail::require_same(fine.grid(), m_tilde.grid(), "compute_error");
  return norm_report(VectorField3(fine.grid(), fine.components() - m_tilde.components()), q_list);
}

NormReport compute_error(const Trajectory& fine, double t, const VectorField3& m_tilde, std::span<const int> q_list,
                         double time_tol) {
  for (std::size_t i = 0; i < fine.times.size(); ++i)
    if (std::abs(fine.times[i] - t) <= time_tol * std::max(1.0, std::abs(t)))
      return compute_error(fine.states[i], m_tilde, q_list);
  std::ostringstream os;
  os << "compute_error: time " << t << " is not a recorded trajectory time";
  throw ParameterError(os.str());
}

VectorField3 residual_eta(std::span<const VectorField3> series, const ScalarField& a_eps, double alpha,
                          double dt_stencil) {
  if (series.size() != 5) {
    std::ostringstream os;
    os << "residual_eta: needs a five-point stencil, got " << series.size() << " snapshots";
    throw ParameterError(os.str());
  }
  if (!(dt_stencil > 0.0)) throw ParameterError("residual_eta: dt_stencil must be positive");
  for (const auto& s : series) detail::require_same(s.grid(), a_eps.grid(), "residual_eta");

  const auto& m = series[2].components();
  Vec3<Array1<double>> dt;
  for (int k = 0; k < 3; ++k)
    dt[k] = (series[0][k] - 8.0 * series[1][k] + 8.0 * series[3][k] - series[4][k]) / (12.0 * dt_stencil);
  const LLOperatorContext ctx = LLOperatorContext::fine(a_eps, alpha);
  const Vec3<Array1<double>> lm = apply_exchange(m, ctx);
  const Vec3<Array1<double>> mxl = cross(m, lm);
  return VectorField3(a_eps.grid(), axpy(dt + mxl, alpha, cross(m, mxl)));
}

ScalarField length_defect(const VectorField3& m) { return ScalarField(m.grid(), m.squared_length() - 1.0); }

NormReport length_deviation(const VectorField3& m, std::span<const int> q_list) {
  return norm_report(length_defect(m), q_list);
}

RateFit fit_rate(std::span<const double> eps, std::span<const double> values) {
  if (eps.size() != values.size()) throw ParameterError("fit_rate: eps and values differ in length");
  if (eps.size() < 3) throw ParameterError("fit_rate: needs at least 3 points");
  std::set<double> distinct(eps.begin(), eps.end());
  if (distinct.size() != eps.size()) throw ParameterError("fit_rate: eps values must be distinct");
  const Index n = static_cast<Index>(eps.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (Index i = 0; i < n; ++i) {
    if (!(eps[i] > 0.0)) throw ParameterError("fit_rate: eps must be positive");
    if (!(values[i] > 0.0)) {
      std::ostringstream os;
      os << "fit_rate: value at index " << i << " is not positive (" << values[i] << ")";
      throw ParameterError(os.str());
    }
    A(i, 0) = std::log(eps[i]);
    A(i, 1) = 1.0;
    b(i) = std::log(values[i]);
  }
  const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(b);
  const double ss_res = (A * coef - b).squaredNorm();
  const double ss_tot = (b.array() - b.mean()).square().sum();
  RateFit f;
  f.slope = coef(0);
  f.intercept = coef(1);
  f.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  return f;
}

DecayFit fit_decay(std::span<const double> tau, std::span<const double> norms, double tau_min) {
  if (tau.size() != norms.size()) throw ParameterError("fit_decay: tau and norms differ in length");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (tau[i] < tau_min) continue;
    if (!(norms[i] > 0.0)) {
      std::ostringstream os;
      os << "fit_decay: norm at index " << i << " is not positive (" << norms[i] << ")";
      throw ParameterError(os.str());
    }
    x.push_back(tau[i]);
    y.push_back(std::log(norms[i]));
  }
  if (x.size() < 4) throw ParameterError("fit_decay: needs at least 4 points with tau >= tau_min");
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Index>(x.size()));
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Index>(y.size()));
  const double xm = xv.mean(), ym = yv.mean();
  const double sxx = (xv.array() - xm).square().sum();
  const double sxy = ((xv.array() - xm) * (yv.array() - ym)).sum();
  const double syy = (yv.array() - ym).square().sum();
  DecayFit f;
  const double slope = sxy / sxx;
  f.rate = -slope;
  f.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return f;
}

double gradient_monitor(const VectorField3& m) {
  return static_cast<double>(length(derivative(m.components(), 1)).maxCoeff());
}

double record_value(const ErrorRecord& r, const std::string& key) {
  if (key == "err_L2") return r.err.l2;
  if (key == "err_H1") return r.err.hq.at(1);
  if (key == "eta_L2") return r.eta.l2;
  if (key == "len_dev_L2") return r.len_dev.l2;
  throw ParameterError("unknown norm key '" + key + "'");
}

RateFit fit_records(const std::vector<ErrorRecord>& records, const std::string& key) {
  std::vector<double> e, v;
  for (const auto& r : records) {
    e.push_back(r.eps);
    v.push_back(record_value(r, key));
  }
  return fit_rate(e, v);
}

}  // namespace llh
