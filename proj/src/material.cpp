#include "llhomog/material.hpp"

#include <numbers>

namespace llh {

std::string CoefficientSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (family) {
    case Family::constant: os << "constant " << value; break;
    case Family::sine: os << "1 + " << amplitude << " sin(2 pi y)"; break;
    case Family::cosine: os << "1 + " << amplitude << " cos(2 pi y)"; break;
    case Family::table: os << "table(" << table.size() << " samples)"; break;
  }
  return os.str();
}

MaterialCoefficient::MaterialCoefficient(ScalarField samples, std::optional<std::string> tag)
    : samples_(std::move(samples)),
      a_min_(samples_.values().minCoeff()),
      a_max_(samples_.values().maxCoeff()),
      tag_(std::move(tag)) {
  if (!(a_min_ > 0.0)) {
    std::ostringstream os;
    os << "material coefficient must be positive (A1); minimum sample is " << a_min_;
    throw ParameterError(os.str());
  }
}

MaterialCoefficient MaterialCoefficient::scaled(double c) const {
  if (!(c > 0.0)) throw ParameterError("MaterialCoefficient::scaled: factor must be positive");
  std::optional<std::string> tag;
  if (tag_) tag = std::to_string(c) + " * (" + *tag_ + ")";
  return MaterialCoefficient(ScalarField(grid(), c * values()), std::move(tag));
}

MaterialCoefficient build_coefficient(const CoefficientSpec& spec, const PeriodicGrid& fast_grid) {
  using std::numbers::pi;
  Array1<double> a;
  const Array1<double> y = fast_grid.nodes();
  switch (spec.family) {
    case CoefficientSpec::Family::constant:
      a = Array1<double>::Constant(fast_grid.size(), spec.value);
      break;
    case CoefficientSpec::Family::sine:
      a = 1.0 + spec.amplitude * (2.0 * pi * y).sin();
      break;
    case CoefficientSpec::Family::cosine:
      a = 1.0 + spec.amplitude * (2.0 * pi * y).cos();
      break;
    case CoefficientSpec::Family::table: {
      const auto m = static_cast<Index>(spec.table.size());
      if (m < PeriodicGrid::kMinPoints || (m & (m - 1)) != 0)
        throw ParameterError("coefficient table needs a power-of-two number (>= 8) of samples");
      const Array1<double> t = Eigen::Map<const Array1<double>>(spec.table.data(), m);
      a = resample<double>(t, fast_grid.size(), /*allow_truncation=*/true);
      break;
    }
  }
  return MaterialCoefficient(ScalarField(fast_grid, std::move(a)), spec.describe());
}

Eigen::MatrixXd spectral_derivative_matrix(Index n) {
  Eigen::MatrixXd d(n, n);
  Array1<double> e = Array1<double>::Zero(n);
  for (Index j = 0; j < n; ++j) {
    e.setZero();
    e(j) = 1.0;
    d.col(j) = derivative<double>(e, 1).matrix();
  }
  return d;
}

Array1<double> solve_cell_problem_dense(const MaterialCoefficient& a) {
  const Index n = a.grid().size();
  const Eigen::MatrixXd d = spectral_derivative_matrix(n);
  const Eigen::VectorXd av = a.values().matrix();
  const Eigen::MatrixXd l2 = d * av.asDiagonal() * d;
  const Eigen::VectorXd rhs = -(d * av);

  // L2 annihilates constants and the Nyquist alternation; pinning both to
  // zero restricts the solve to the mean-free resolved modes.
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd nyq(n);
  for (Index i = 0; i < n; ++i) nyq(i) = (i % 2 == 0) ? 1.0 : -1.0;
  const Eigen::MatrixXd pinned =
      -l2 + (ones * ones.transpose() + nyq * nyq.transpose()) / static_cast<double>(n);
  const Eigen::VectorXd chi = pinned.ldlt().solve(-rhs);
  return chi.array();
}

CellSolution solve_cell_problem(const MaterialCoefficient& a, const CellOptions& opts) {
  const Array1<double>& av = a.values();
  const Array1<double> inv_a = av.inverse();
  const double a_star = 1.0 / inv_a.mean();
  const Array1<double> dchi = a_star * inv_a - 1.0;
  Array1<double> chi = antiderivative<double>(dchi);
  chi -= chi.mean();

  CellSolution cell{ScalarField(a.grid(), chi), a_star, 0.0, 0.0};

  const Array1<double> flux = av * derivative<double>(chi, 1);
  const Array1<double> residual = derivative<double>(flux, 1) + derivative<double>(av, 1);
  cell.residual_sup = residual.abs().maxCoeff();

  const Array1<double> chi_dense = solve_cell_problem_dense(a);
  cell.path_discrepancy = (chi_dense - chi).abs().maxCoeff();

  if (cell.path_discrepancy > opts.path_tol) {
    std::ostringstream os;
    os << "cell problem: closed-form and dense solutions differ by " << cell.path_discrepancy;
    throw ConsistencyError(os.str());
  }
  if (cell.residual_sup > opts.cell_tol) {
    std::ostringstream os;
    os << "cell problem: residual " << cell.residual_sup << " exceeds tolerance " << opts.cell_tol;
    throw NumericalError(os.str());
  }
  return cell;
}

Array1<double> cell_flux(const MaterialCoefficient& a, const CellSolution& cell) {
  detail::require_same(a.grid(), cell.chi.grid(), "cell_flux");
  return a.values() * (1.0 + derivative<double>(cell.chi.values(), 1));
}

double homogenized_matrix(const MaterialCoefficient& a, const CellSolution& cell, double tol) {
  const double ah = cell_flux(a, cell).mean();
  if (std::abs(ah - cell.a_h) > tol) {
    std::ostringstream os;
    os.precision(17);
    os << "homogenized_matrix: quadrature " << ah << " differs from cell a_h " << cell.a_h;
    throw ConsistencyError(os.str());
  }
  return ah;
}

ScalarField sample_eps_coefficient(const MaterialCoefficient& a, double eps, const PeriodicGrid& fine_grid) {
  check_eps(eps, "sample_eps_coefficient");
  check_eps_resolution(fine_grid, eps, "sample_eps_coefficient");
  return ScalarField(fine_grid, interpolate_at<double>(a.values(), fast_phase(fine_grid, eps)));
}

CellSpectrum::CellSpectrum(const MaterialCoefficient& a) {
  const Eigen::MatrixXd d = spectral_derivative_matrix(a.grid().size());
  l2_ = d * a.values().matrix().asDiagonal() * d;
  l2_ = 0.5 * (l2_ + l2_.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l2_);
  if (es.info() != Eigen::Success) throw NumericalError("CellSpectrum: eigen-decomposition failed");
  // Round-off can leave the null eigenvalues marginally positive.
  lambda_ = es.eigenvalues().cwiseMin(0.0);
  u_ = es.eigenvectors();
}

double CellSpectrum::spectral_gap() const {
  const double scale = lambda_.cwiseAbs().maxCoeff();
  double gap = scale;
  for (Index k = 0; k < lambda_.size(); ++k) {
    const double v = std::abs(lambda_(k));
    if (v > 1e-10 * scale) gap = std::min(gap, v);
  }
  return gap;
}

}  // namespace llh
