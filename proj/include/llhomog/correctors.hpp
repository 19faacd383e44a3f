#pragma once

// Two-scale corrector calculus around a homogenized slice m0(x) at fixed t.
//
//   L0 = d_x (a d_x),  L1 = d_x (a d_y) + d_y (a d_x),  L2 = d_y (a d_y)
//   script_L w = -m0 x L2 w - alpha m0 x (m0 x L2 w)
//
// The correctors solve d_tau m_j = script_L m_j + F_j with m_j(tau = 0) = 0.
// Since script_L acts as B(x) (x) L2 with B = -K - alpha K^2, K = [m0]_x,
// the homogeneous flow diagonalises in the eigenbasis of the discrete L2 and
// exp(s B) = M + e^{alpha s} (cos s (I - M) - sin s K) is exact per mode.

#include <functional>
#include <vector>

#include "llhomog/llg.hpp"
#include "llhomog/material.hpp"

namespace llh {

using TS = Vec3<Array2<double>>;

/// m0 frozen at one slow time.
class ProjectionContext {
 public:
  ProjectionContext(VectorField3 m0, double alpha, double unit_tol = VectorField3::kDefaultUnitTol);

  const VectorField3& m0() const { return m0_; }
  const PeriodicGrid& slow_grid() const { return m0_.grid(); }
  double alpha() const { return alpha_; }
  /// m0 spread over n_fast columns.
  TS m0_two_scale(Index n_fast) const;

 private:
  VectorField3 m0_;
  double alpha_;
};

/// y-independent two-scale field f(x).
TwoScaleField3 lift(const VectorField3& f, const PeriodicGrid& fast);

// Operators on raw component blocks (rows x, columns y).
TS op_L0(const TS& u, const Array1<double>& a);
TS op_L1(const TS& u, const Array1<double>& a);
TS op_L2(const TS& u, const Array1<double>& a);

TwoScaleField3 op_L0(const TwoScaleField3& u, const MaterialCoefficient& a);
TwoScaleField3 op_L1(const TwoScaleField3& u, const MaterialCoefficient& a);
TwoScaleField3 op_L2(const TwoScaleField3& u, const MaterialCoefficient& a);

TS script_L(const TS& w, const TS& m0, const Array1<double>& a, double alpha);
TwoScaleField3 script_L(const TwoScaleField3& w, const ProjectionContext& ctx, const MaterialCoefficient& a);

/// Cell average over y.
VectorField3 averaging_A(const TwoScaleField3& u);
/// m0 (m0 . v)
VectorField3 projection_M(const VectorField3& v, const ProjectionContext& ctx);
TwoScaleField3 projection_M(const TwoScaleField3& u, const ProjectionContext& ctx);
/// (I - M)(I - A)
TwoScaleField3 proj_P(const TwoScaleField3& u, const ProjectionContext& ctx);
/// M + (I - M) A
TwoScaleField3 proj_Q(const TwoScaleField3& u, const ProjectionContext& ctx);

/// Closed form -m0 x [m0_x + alpha m0 x m0_x] a'(y), checked against the
/// generic -m0 x Z0 - alpha m0 x m0 x Z0 with Z0 = L1 m0.
TwoScaleField3 forcing_F1(const ProjectionContext& ctx, const MaterialCoefficient& a, double tol = 1e-11);
TwoScaleField3 forcing_F1_generic(const ProjectionContext& ctx, const MaterialCoefficient& a);

enum class TauScheme { exponential, rk4 };
std::string to_string(TauScheme s);
TauScheme parse_tau_scheme(const std::string& s);

struct TauOptions {
  TauScheme scheme = TauScheme::exponential;
  /// Output spacing. Also the step of the exponential integrator for forced problems.
  double dtau = 1e-3;
  /// RK4 sub-steps obey dtau <= cfl_safety h_y^2 / a_max.
  double cfl_safety = 0.2;
};

/// Exact homogeneous tau-flow exp(s script_L) through the eigen-decomposition of L2.
class TauPropagator {
 public:
  TauPropagator(const ProjectionContext& ctx, const MaterialCoefficient& a);

  /// exp(s script_L) u
  TS apply(const TS& u, double s) const;
  /// Same in eigen coordinates c = u U.
  TS apply_modes(const TS& c, double s) const;
  TS to_modes(const TS& u) const;
  TS from_modes(const TS& c) const;

  const CellSpectrum& spectrum() const { return spec_; }
  /// Smallest nonzero alpha |lambda|: the asymptotic decay rate of the flow.
  double decay_rate() const { return alpha_ * spec_.spectral_gap(); }

 private:
  CellSpectrum spec_;
  TS m0_;  // m0 spread over eigen-mode columns
  Eigen::ArrayXXd lambda_;  // eigenvalues spread over rows
  double alpha_;
};

struct CorrectorState {
  int j = 1;
  TwoScaleField3 field;
  double tau = 0.0;
  double t_slow = 0.0;
};

/// v(tau) for tau = 0, dtau, ..., tau_end with v(0) = -m0_x chi.
std::vector<CorrectorState> solve_v(const ProjectionContext& ctx, const MaterialCoefficient& a,
                                    const CellSolution& cell, double tau_end, const TauOptions& opts = {},
                                    double t_slow = 0.0);

/// v at a single tau.
TS v_at(const TauPropagator& prop, const TS& v0, double tau);
TS v_initial(const ProjectionContext& ctx, const CellSolution& cell);

struct M1Result {
  std::vector<CorrectorState> states;
  /// max over sampled tau of |ansatz - direct solve|.
  double dual_path_discrepancy = 0.0;
};

/// m1 = m0_x chi + v(tau), checked against a direct solve of
/// d_tau m1 = script_L m1 + F1, m1(0) = 0.
M1Result solve_m1(const ProjectionContext& ctx, const MaterialCoefficient& a, const CellSolution& cell,
                  double tau_end, const TauOptions& opts = {}, double cross_tol = 1e-8, double t_slow = 0.0);

/// Z_j, V_j, T_j, R_j, S_j for j = 0 .. J (V_0 and T_0 are unused and zero).
struct RecursionBundle {
  std::vector<TS> Z, V, T, R, S;
  int j() const { return static_cast<int>(Z.size()) - 1; }
};

/// states[k] = m_k for k = 0 .. j (states[0] is the lifted m0).
RecursionBundle recursion_quantities(const std::vector<TS>& states, const Array1<double>& a, int j);
RecursionBundle recursion_quantities(const std::vector<TwoScaleField3>& states, const MaterialCoefficient& a, int j);

/// d_t m_k as a two-scale block; only k = 0 is available in closed form.
using DtMCallback = std::function<TS(int k)>;

/// Generic F_j from a bundle holding index j - 1.
TS forcing_Fj(const RecursionBundle& bundle, const TS& m0, double alpha, int j, const DtMCallback& dt_m);

/// Hand-written F2 with R1 = m1 x L2 v and S1 = m1 x m0 x L2 v.
TS forcing_F2_hand(const TS& m0, const TS& m1, const TS& v, const TS& dt_m0, const Array1<double>& a, double alpha);

/// d_t m0 = -m0 x (a_h m0_xx) - alpha m0 x (m0 x a_h m0_xx), lifted.
TS dt_m0(const ProjectionContext& ctx, double a_h, Index n_fast);

using ForcingFn = std::function<TS(double tau)>;

/// d_tau m = script_L m + F(tau), m(0) = 0, sampled every opts.dtau up to tau_end.
/// The exponential scheme is third-order exponential time differencing on a quadratic
/// interpolant of F, exact for constant F.
std::vector<TS> solve_mj(const ForcingFn& F, const ProjectionContext& ctx, const MaterialCoefficient& a,
                         double tau_end, const TauOptions& opts = {});

/// Same, returning only m(tau_end) after exactly n_steps uniform steps.
TS solve_mj_final(const ForcingFn& F, const TauPropagator& prop, const TS& m0, const Array1<double>& a, double alpha,
                  double tau_end, long n_steps, TauScheme scheme);

/// m0, m1 and m2 at (t, tau) with everything frozen at the slice.
struct CorrectorSet {
  TwoScaleField3 m1;
  TwoScaleField3 m2;
  TwoScaleField3 v;
  double tau = 0.0;
};

struct CorrectorSetOptions {
  int J = 2;
  TauScheme scheme = TauScheme::exponential;
  /// Target step for the forced m2 solve; the count is rounded up.
  double dtau = 1e-3;
  /// When > 0 the m2 solve uses exactly this many steps.
  long fixed_steps = 0;
};

/// Correctors at tau for the slice m0 (frozen-at-target coupling).
CorrectorSet compute_correctors(const ProjectionContext& ctx, const MaterialCoefficient& a, const CellSolution& cell,
                                double tau, const CorrectorSetOptions& opts = {});

/// m0 + sum_{j<=J} eps^j m_j(x, x/eps) on the fine grid.
VectorField3 assemble_m_tilde(const VectorField3& m0_slow, const std::vector<const TwoScaleField3*>& correctors,
                              double eps, const PeriodicGrid& fine);

/// Corrector norms along tau = t / eps^2 with m0 refreshed from the
/// homogenized trajectory every refresh_dtau.
struct HistoryRow {
  double tau, norm_v, norm_m1, norm_m2, ortho_defect, mean_defect;
};

struct HistoryOptions {
  double tau_end = 5.0;
  double dtau = 0.01;
  double refresh_dtau = 0.25;
  double eps = 1.0 / 70.0;
  double a_h = 1.0;
  int J = 2;
};

/// m0_of_t must return the homogenized slice on the slow grid at any t.
std::vector<HistoryRow> corrector_history(const std::function<VectorField3(double t)>& m0_of_t, double alpha,
                                          const MaterialCoefficient& a, const CellSolution& cell,
                                          const HistoryOptions& opts);

}  // namespace llh
