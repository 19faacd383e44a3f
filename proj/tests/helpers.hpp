#pragma once

#include <random>

#include "llhomog/grid.hpp"
#include "llhomog/spectral.hpp"

namespace testing {

using namespace llh;

// Random trigonometric polynomial with modes below k_max.
inline Array1<double> random_bandlimited(Index n, int k_max, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  const Array1<double> x = PeriodicGrid(n).nodes();
  Array1<double> f = Array1<double>::Constant(n, scale * g(rng));
  for (int k = 1; k < k_max; ++k) {
    const double w = 2.0 * std::numbers::pi * k;
    f += scale / k * (g(rng) * (w * x).cos() + g(rng) * (w * x).sin());
  }
  return f;
}

inline Vec3<Array1<double>> random_bandlimited3(Index n, int k_max, std::mt19937_64& rng, double scale = 1.0) {
  return {random_bandlimited(n, k_max, rng, scale), random_bandlimited(n, k_max, rng, scale),
          random_bandlimited(n, k_max, rng, scale)};
}

// Random smooth unit field on n points.
inline VectorField3 random_unit_field(Index n, int k_max, std::mt19937_64& rng) {
  auto c = random_bandlimited3(n, k_max, rng, 0.3);
  c[2] += 1.0;
  return VectorField3(PeriodicGrid(n), normalized(c), true);
}

// Random band-limited two-scale block.
inline Array2<double> random_two_scale(Index nx, Index ny, int kx, int ky, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const Array1<double> x = PeriodicGrid(nx).nodes(), y = PeriodicGrid(ny).nodes();
  Array2<double> u = Array2<double>::Zero(nx, ny);
  for (int p = 0; p < kx; ++p)
    for (int q = 0; q < ky; ++q) {
      const double s = 1.0 / (1.0 + p + q);
      const Array1<double> fx = g(rng) * (2 * std::numbers::pi * p * x).cos() + g(rng) * (2 * std::numbers::pi * p * x).sin();
      const Array1<double> fy = (2 * std::numbers::pi * q * y + g(rng)).cos();
      u += s * (fx.matrix() * fy.matrix().transpose()).array();
    }
  return u;
}

inline Vec3<Array2<double>> random_two_scale3(Index nx, Index ny, int kx, int ky, std::mt19937_64& rng) {
  return {random_two_scale(nx, ny, kx, ky, rng), random_two_scale(nx, ny, kx, ky, rng),
          random_two_scale(nx, ny, kx, ky, rng)};
}

}  // namespace testing
