#pragma once

// Discrete Sobolev norms on the unit torus.
//
// In one space dimension the multi-index sums collapse to single derivative
// orders, so ||f||_{H^q}^2 = sum_{j<=q} ||D^j f||_{L^2}^2. Integrals use the
// periodic trapezoid rule, which is exact for band-limited integrands.
// Sup-norms are maxima over grid nodes and hence lower bounds of the true
// suprema.

#include <map>
#include <span>
#include <vector>

#include "llhomog/spectral.hpp"

namespace llh {

namespace detail {

inline void require_hq_resolved(Index n, int q, const char* what) {
  if (q < 0 || q > n / 4) {
    std::ostringstream os;
    os << what << ": order " << q << " is not resolved on " << n << " points (need q <= n/4)";
    throw ResolutionError(os.str());
  }
}

template <typename Scalar>
Scalar mean_square(const Array1<Scalar>& f) {
  return f.square().mean();
}

template <typename Scalar>
Scalar mean_square(const Vec3<Array1<Scalar>>& f) {
  return f[0].square().mean() + f[1].square().mean() + f[2].square().mean();
}

template <typename Scalar>
Array1<Scalar> pointwise_abs(const Array1<Scalar>& f) {
  return f.abs();
}

template <typename Scalar>
Array1<Scalar> pointwise_abs(const Vec3<Array1<Scalar>>& f) {
  return length(f);
}

template <typename Scalar>
const Array1<Scalar>& raw(const BasicScalarField<Scalar>& f) {
  return f.values();
}

template <typename Scalar>
const Vec3<Array1<Scalar>>& raw(const BasicVectorField3<Scalar>& f) {
  return f.components();
}

}  // namespace detail

/// ||D^j f||_{L^2} for j = 0 .. q.
template <typename Field>
std::vector<double> seminorms(const Field& f, int q) {
  detail::require_hq_resolved(f.grid().size(), q, "seminorms");
  std::vector<double> out;
  out.reserve(q + 1);
  auto d = detail::raw(f);
  for (int j = 0; j <= q; ++j) {
    if (j > 0) d = derivative(d, 1);
    out.push_back(std::sqrt(static_cast<double>(detail::mean_square(d))));
  }
  return out;
}

template <typename Field>
double norm_l2(const Field& f) {
  return std::sqrt(static_cast<double>(detail::mean_square(detail::raw(f))));
}

template <typename Field>
double norm_hq(const Field& f, int q) {
  double s = 0.0;
  for (double v : seminorms(f, q)) s += v * v;
  return std::sqrt(s);
}

/// sum_{j<=q} eps^j ||f||_{H^j}
template <typename Field>
double norm_hq_eps(const Field& f, int q, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) {
    std::ostringstream os;
    os << "norm_hq_eps: eps must lie in (0,1], got " << eps;
    throw ParameterError(os.str());
  }
  const auto semi = seminorms(f, q);
  double acc = 0.0, partial = 0.0, w = 1.0;
  for (int j = 0; j <= q; ++j) {
    partial += semi[j] * semi[j];
    acc += w * std::sqrt(partial);
    w *= eps;
  }
  return acc;
}

template <typename Field>
double norm_linf(const Field& f) {
  return static_cast<double>(detail::pointwise_abs(detail::raw(f)).maxCoeff());
}

/// max_{j<=q} max_i |D^j f(x_i)|
template <typename Field>
double norm_wq_inf(const Field& f, int q) {
  detail::require_order(f.grid().size(), q);
  auto d = detail::raw(f);
  double best = static_cast<double>(detail::pointwise_abs(d).maxCoeff());
  for (int j = 1; j <= q; ++j) {
    d = derivative(d, 1);
    best = std::max(best, static_cast<double>(detail::pointwise_abs(d).maxCoeff()));
  }
  return best;
}

/// Bochner-Sobolev norm: all mixed derivatives d_x^b d_y^g with b <= q, g <= p.
template <typename Scalar>
double norm_hqp(const BasicTwoScaleField3<Scalar>& u, int q, int p) {
  detail::require_hq_resolved(u.slow_grid().size(), q, "norm_hqp (slow)");
  detail::require_hq_resolved(u.fast_grid().size(), p, "norm_hqp (fast)");
  double s = 0.0;
  for (int comp = 0; comp < 3; ++comp) {
    Array2<Scalar> dx = u[comp];
    for (int b = 0; b <= q; ++b) {
      if (b > 0) dx = derivative_x(dx, 1);
      Array2<Scalar> dxy = dx;
      for (int g = 0; g <= p; ++g) {
        if (g > 0) dxy = derivative_y(dxy, 1);
        s += static_cast<double>(dxy.square().mean());
      }
    }
  }
  return std::sqrt(s);
}

struct NormReport {
  double l2 = 0.0;
  std::map<int, double> hq;
  std::map<int, double> hq_eps;
  double linf = 0.0;
  std::map<int, double> wq_inf;
};

/// All norms of f for the requested orders; hq_eps is filled only when eps is given.
/// Every order must satisfy q <= n/4.
template <typename Field>
NormReport norm_report(const Field& f, std::span<const int> orders, double eps = 0.0) {
  NormReport r;
  r.l2 = norm_l2(f);
  r.linf = norm_linf(f);
  for (int q : orders) {
    r.hq[q] = norm_hq(f, q);
    r.wq_inf[q] = norm_wq_inf(f, q);
    if (eps > 0.0) r.hq_eps[q] = norm_hq_eps(f, q, eps);
  }
  return r;
}

}  // namespace llh
