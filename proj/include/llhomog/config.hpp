#pragma once

// Run configuration: line-based `key = value` text with [section] headers.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "llhomog/correctors.hpp"
#include "llhomog/llg.hpp"
#include "llhomog/material.hpp"

namespace llh {

struct SimConfig {
  // [material]
  CoefficientSpec coefficient = CoefficientSpec::sine(0.5);
  std::string table_file;

  // [physics]
  double alpha = 0.02;
  std::vector<double> eps{1.0 / 70.0};
  double sigma = 0.0;
  int J = 0;
  double T = 0.05;

  // [initial]
  InitialSpec initial;
  std::string initial_file;

  // [grid] sizes are powers of two; n_fine = 0 picks next_pow2(points_per_period / eps).
  Index n_fine = 0;
  Index n_slow = 64;
  Index n_fast = 64;
  double points_per_period = 12.0;

  // [time] dt = 0 picks the stability limit.
  double dt = 0.0;
  TimeScheme scheme = TimeScheme::rk4_projected;
  long output_stride = 0;  // 0: about 40 snapshots
  double cfl_safety = 0.2;

  // [correctors] all in tau units
  TauScheme tau_scheme = TauScheme::exponential;
  double dtau = 1e-3;
  double history_tau_end = 5.0;
  double history_dtau = 0.01;
  double refresh_dtau = 0.25;
  double stencil_dtau = 1e-3;

  // [tolerance] gates for sweep / fig1 summaries
  double slope_min = 0.8;
  double slope_max = 1.2;
  /// Per-J override of [slope_min, slope_max]; NaN keeps the shared range.
  std::array<std::pair<double, double>, 3> slope_by_J{{{NAN, NAN}, {NAN, NAN}, {NAN, NAN}}};
  double r2_min = 0.98;
  double eta_slope_min = 0.7;
  double eta_slope_max = 1.3;
  double len_slope_min = 2.6;
  double len_slope_max = 3.4;
  double norm_tol = 1e-10;
  double freq_factor = 2.0;
  double amp_decay_min = 0.5;

  // [sweep]
  std::string norm_key = "err_L2";
  bool eta = false;

  // [output]
  std::filesystem::path out_dir = "out";

  // [random]
  std::uint64_t seed = 20240601;

  /// Full key = value listing with every default filled in.
  std::string echo() const;
  std::pair<double, double> slope_range(int J) const;
  /// The single eps of commands other than sweep.
  double single_eps() const;
};

SimConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
SimConfig parse_config(const std::filesystem::path& path);

/// Check every invariant; throws ConfigError.
void validate(const SimConfig& cfg);

/// Fine grid size for one eps.
Index fine_points(const SimConfig& cfg, double eps);

/// Parses "0.0125", "1/80" or "1e-2".
double parse_real(const std::string& s);

}  // namespace llh
