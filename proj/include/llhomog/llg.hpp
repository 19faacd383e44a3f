#pragma once

// Method-of-lines integration of the Landau-Lifshitz equation
//
//   m_t = -m x L m - alpha m x (m x L m),   L m = (a m_x)_x,
//
// for an oscillatory coefficient a^eps (fine problem) or a constant
// effective coefficient (homogenized problem). Every accepted step is followed
// by a nodewise renormalisation of m.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "llhomog/material.hpp"

namespace llh {

class LLOperatorContext {
 public:
  /// Fine problem with a^eps sampled on the trajectory grid.
  static LLOperatorContext fine(ScalarField a_eps, double alpha);
  /// Homogenized problem with the scalar effective coefficient.
  static LLOperatorContext homogenized(PeriodicGrid grid, double a_h, double alpha);

  const PeriodicGrid& grid() const { return grid_; }
  double alpha() const { return alpha_; }
  bool is_homogenized() const { return !coefficient_.has_value(); }
  const std::optional<ScalarField>& coefficient() const { return coefficient_; }
  double a_h() const { return a_h_; }
  double a_max() const { return a_max_; }
  std::string describe() const;

 private:
  LLOperatorContext(PeriodicGrid grid, std::optional<ScalarField> a, double a_h, double alpha);

  PeriodicGrid grid_;
  std::optional<ScalarField> coefficient_;
  double a_h_ = 0.0;
  double a_max_ = 0.0;
  double alpha_ = 0.0;
};

/// Throws ParameterError unless 0 < alpha <= 1.
void check_alpha(double alpha);

/// Componentwise D(a D m), or a_h D^2 m for the homogenized context.
VectorField3 apply_exchange(const VectorField3& m, const LLOperatorContext& ctx);
Vec3<Array1<double>> apply_exchange(const Vec3<Array1<double>>& m, const LLOperatorContext& ctx);

/// -m x h - alpha m x (m x h), h = apply_exchange(m).
VectorField3 ll_rhs(const VectorField3& m, const LLOperatorContext& ctx);
Vec3<Array1<double>> ll_rhs(const Vec3<Array1<double>>& m, const LLOperatorContext& ctx);

/// 1/2 int a |m_x|^2
double exchange_energy(const VectorField3& m, const LLOperatorContext& ctx);

enum class TimeScheme { rk4_projected, imex_midpoint_projected };

std::string to_string(TimeScheme s);
TimeScheme parse_time_scheme(const std::string& s);

struct IntegrateOptions {
  TimeScheme scheme = TimeScheme::rk4_projected;
  /// Zero selects the scheme default: cfl_safety h^2 / a_max (RK4) or h / 2 (IMEX).
  double dt = 0.0;
  int output_stride = 1;
  double cfl_safety = 0.2;
  /// Disable only to measure the unprojected drift.
  bool project = true;
  double unit_tol = VectorField3::kDefaultUnitTol;
  /// Exactly this many uniform steps when > 0 (dt is then ignored, CFL still checked).
  long fixed_steps = 0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<VectorField3> states;
  std::string scheme;
  double dt = 0.0;
  long steps = 0;
  std::string context;

  const VectorField3& final_state() const { return states.back(); }
  double final_time() const { return times.back(); }
};

/// Largest admissible explicit step.
double rk4_dt_limit(const LLOperatorContext& ctx, double cfl_safety);

/// Stabilisation constant of the IMEX scheme.
double imex_beta(const LLOperatorContext& ctx);

/// One explicit RK4 step (no projection).
void rk4_step(Vec3<Array1<double>>& m, const LLOperatorContext& ctx, double dt);

/// One stabilised semi-implicit midpoint step (no projection).
void imex_step(Vec3<Array1<double>>& m, const LLOperatorContext& ctx, double dt);

/// Nodewise m / |m|.
void project_unit(Vec3<Array1<double>>& m);

Trajectory integrate(const VectorField3& m_init, const LLOperatorContext& ctx, double t_end,
                     const IntegrateOptions& opts = {});

struct InitialSpec {
  enum class Kind { fig1, constant, custom_table };
  Kind kind = Kind::fig1;
  Vector3 direction{0.0, 0.0, 1.0};
  /// custom_table: uniform periodic samples, resampled spectrally and normalised.
  std::vector<Vector3> table;
};

/// The Fig. 1 profile m_nn / |m_nn| at a point.
Vector3 fig1_initial_value(double x);

VectorField3 build_initial_data(const InitialSpec& spec, const PeriodicGrid& grid);

/// Binary snapshot: uint64 n_points, then the x, y and z components as
/// 3n little-endian doubles (component-major).
void write_snapshot(const std::filesystem::path& path, const VectorField3& m);
VectorField3 read_snapshot(const std::filesystem::path& path);

}  // namespace llh
