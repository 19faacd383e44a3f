#pragma once

// Pointwise algebra on component triples. Works for any Eigen array type,
// so the same expressions serve one-scale (Array1) and two-scale (Array2)
// samples.

#include "llhomog/grid.hpp"

namespace llh {

template <typename A>
Vec3<A> cross(const Vec3<A>& u, const Vec3<A>& v) {
  return {A(u[1] * v[2] - u[2] * v[1]), A(u[2] * v[0] - u[0] * v[2]), A(u[0] * v[1] - u[1] * v[0])};
}

template <typename A>
A dot(const Vec3<A>& u, const Vec3<A>& v) {
  return u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
}

template <typename A>
Vec3<A> operator+(const Vec3<A>& u, const Vec3<A>& v) {
  return {A(u[0] + v[0]), A(u[1] + v[1]), A(u[2] + v[2])};
}

template <typename A>
Vec3<A> operator-(const Vec3<A>& u, const Vec3<A>& v) {
  return {A(u[0] - v[0]), A(u[1] - v[1]), A(u[2] - v[2])};
}

template <typename A>
Vec3<A> operator-(const Vec3<A>& u) {
  return {A(-u[0]), A(-u[1]), A(-u[2])};
}

template <typename A>
Vec3<A> operator*(double s, const Vec3<A>& u) {
  return {A(s * u[0]), A(s * u[1]), A(s * u[2])};
}

/// Componentwise scaling by a field of the same shape.
template <typename A>
Vec3<A> scale(const A& s, const Vec3<A>& u) {
  return {A(s * u[0]), A(s * u[1]), A(s * u[2])};
}

template <typename A>
Vec3<A>& operator+=(Vec3<A>& u, const Vec3<A>& v) {
  for (int k = 0; k < 3; ++k) u[k] += v[k];
  return u;
}

/// u + s v
template <typename A>
Vec3<A> axpy(const Vec3<A>& u, double s, const Vec3<A>& v) {
  return {A(u[0] + s * v[0]), A(u[1] + s * v[1]), A(u[2] + s * v[2])};
}

template <typename A>
Vec3<A> zeros_like(const Vec3<A>& u) {
  return {A::Zero(u[0].rows(), u[0].cols()), A::Zero(u[0].rows(), u[0].cols()),
          A::Zero(u[0].rows(), u[0].cols())};
}

template <typename A>
double max_abs(const Vec3<A>& u) {
  return std::max({u[0].abs().maxCoeff(), u[1].abs().maxCoeff(), u[2].abs().maxCoeff()});
}

/// Pointwise Euclidean length.
template <typename A>
A length(const Vec3<A>& u) {
  return dot(u, u).sqrt();
}

/// Normalise every node vector to unit length.
template <typename A>
Vec3<A> normalized(const Vec3<A>& u) {
  const A inv = length(u).inverse();
  return scale(inv, u);
}

/// Spread a slow-variable column (n_x) across n_y fast columns.
template <typename Scalar>
Array2<Scalar> broadcast_slow(const Array1<Scalar>& f, Index n_fast) {
  return f.replicate(1, n_fast);
}

template <typename Scalar>
Vec3<Array2<Scalar>> broadcast_slow(const Vec3<Array1<Scalar>>& f, Index n_fast) {
  return {broadcast_slow(f[0], n_fast), broadcast_slow(f[1], n_fast), broadcast_slow(f[2], n_fast)};
}

/// Spread a fast-variable profile (n_y) across n_x slow rows.
template <typename Scalar>
Array2<Scalar> broadcast_fast(const Array1<Scalar>& g, Index n_slow) {
  return g.transpose().replicate(n_slow, 1);
}

}  // namespace llh
