#pragma once

// Material coefficient a(y) on the unit cell, the cell corrector chi and the
// effective coefficient A^H.
//
// The effective coefficient is a scalar because the toolkit is one
// dimensional. In n dimensions A^H is an n x n matrix; CellSolution::a_h is
// the (1,1) entry of that matrix and is the only slot that would change.

#include <optional>
#include <string>
#include <vector>

#include "llhomog/spectral.hpp"

namespace llh {

struct CoefficientSpec {
  enum class Family { constant, sine, cosine, table };

  Family family = Family::sine;
  double value = 1.0;      // constant family: a = value
  double amplitude = 0.5;  // sine / cosine families: a = 1 + amplitude * sin|cos(2 pi y)
  std::vector<double> table;  // table family: uniform periodic samples of a on [0,1)

  static CoefficientSpec constant(double c) { return {Family::constant, c, 0.0, {}}; }
  static CoefficientSpec sine(double b) { return {Family::sine, 1.0, b, {}}; }
  static CoefficientSpec cosine(double b) { return {Family::cosine, 1.0, b, {}}; }
  static CoefficientSpec from_table(std::vector<double> samples) {
    return {Family::table, 1.0, 0.0, std::move(samples)};
  }

  std::string describe() const;
};

class MaterialCoefficient {
 public:
  MaterialCoefficient(ScalarField samples, std::optional<std::string> tag = std::nullopt);

  const ScalarField& samples() const { return samples_; }
  const PeriodicGrid& grid() const { return samples_.grid(); }
  const Array1<double>& values() const { return samples_.values(); }
  double a_min() const { return a_min_; }
  double a_max() const { return a_max_; }
  double mean() const { return samples_.mean(); }
  const std::optional<std::string>& analytic_tag() const { return tag_; }

  /// c * a, c > 0.
  MaterialCoefficient scaled(double c) const;

 private:
  ScalarField samples_;
  double a_min_;
  double a_max_;
  std::optional<std::string> tag_;
};

/// Sample a built-in coefficient family on the fast grid. Rejects any
/// non-positive sample.
MaterialCoefficient build_coefficient(const CoefficientSpec& spec, const PeriodicGrid& fast_grid);

struct CellSolution {
  ScalarField chi;
  double a_h = 0.0;
  double residual_sup = 0.0;
  /// max |chi_closed_form - chi_generic| between the two solution routes.
  double path_discrepancy = 0.0;
};

struct CellOptions {
  double cell_tol = 1e-8;
  double path_tol = 1e-8;
};

/// Solve d_y(a d_y chi) = -d_y a with zero mean. The closed form
/// chi' = A/a - 1, A = (mean 1/a)^{-1}, is checked against a dense spectral
/// solve of the divergence-form equation.
CellSolution solve_cell_problem(const MaterialCoefficient& a, const CellOptions& opts = {});

/// Independent route: dense spectral solve restricted to mean-free modes.
Array1<double> solve_cell_problem_dense(const MaterialCoefficient& a);

/// A^H = mean of a (1 + chi'); must reproduce cell.a_h.
double homogenized_matrix(const MaterialCoefficient& a, const CellSolution& cell, double tol = 1e-10);

/// Pointwise flux a (1 + chi'), constant in one dimension.
Array1<double> cell_flux(const MaterialCoefficient& a, const CellSolution& cell);

/// a(x_i / eps) on a fine grid via spectral interpolation in y.
ScalarField sample_eps_coefficient(const MaterialCoefficient& a, double eps, const PeriodicGrid& fine_grid);

/// Dense first-derivative matrix D of the spectral derivative on n points
/// (Nyquist bin zeroed, so D is real and skew-symmetric).
Eigen::MatrixXd spectral_derivative_matrix(Index n);

/// Dense L2 = D diag(a) D with its symmetric eigen-decomposition.
class CellSpectrum {
 public:
  explicit CellSpectrum(const MaterialCoefficient& a);

  const Eigen::MatrixXd& operator_matrix() const { return l2_; }
  /// Non-positive eigenvalues, ascending.
  const Eigen::VectorXd& eigenvalues() const { return lambda_; }
  /// Orthonormal eigenvectors as columns.
  const Eigen::MatrixXd& eigenvectors() const { return u_; }
  /// Smallest nonzero |lambda|.
  double spectral_gap() const;

 private:
  Eigen::MatrixXd l2_;
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd u_;
};

}  // namespace llh
