#pragma once

// Periodic grids on the unit torus and the sampled field types living on them.
//
// Fields store their three components as separate Eigen arrays so that
// pointwise vector algebra (cross products, projections) is written as plain
// Eigen array expressions. All field types are templated on the scalar; the
// toolkit itself instantiates double.

#include <array>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "llhomog/errors.hpp"

namespace llh {

using Index = Eigen::Index;

template <typename Scalar>
using Array1 = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// Two-scale sample block: rows index the slow variable x, columns the fast variable y.
template <typename Scalar>
using Array2 = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Three Cartesian components of a vector-valued field.
template <typename A>
using Vec3 = std::array<A, 3>;

/// Uniform sampling x_i = i / n of the unit torus [0, 1).
class PeriodicGrid {
 public:
  static constexpr Index kMinPoints = 8;

  explicit PeriodicGrid(Index n_points) : n_(n_points) {
    if (n_points < kMinPoints || (n_points & (n_points - 1)) != 0) {
      std::ostringstream os;
      os << "PeriodicGrid: n_points must be a power of two >= " << kMinPoints << ", got " << n_points;
      throw ParameterError(os.str());
    }
  }

  Index size() const { return n_; }
  double spacing() const { return 1.0 / static_cast<double>(n_); }
  double node(Index i) const { return static_cast<double>(i) / static_cast<double>(n_); }

  Array1<double> nodes() const { return Array1<double>::LinSpaced(n_, 0.0, 1.0 - spacing()); }

  /// Largest derivative order that stays resolved.
  Index max_derivative_order() const { return n_ / 2; }

  friend bool operator==(const PeriodicGrid& a, const PeriodicGrid& b) { return a.n_ == b.n_; }
  friend bool operator!=(const PeriodicGrid& a, const PeriodicGrid& b) { return a.n_ != b.n_; }

 private:
  Index n_;
};

/// Smallest power of two that is at least max(n, PeriodicGrid::kMinPoints).
inline Index next_pow2(Index n) {
  Index p = PeriodicGrid::kMinPoints;
  while (p < n) p <<= 1;
  return p;
}

namespace detail {

template <typename Derived>
void require_finite(const Eigen::ArrayBase<Derived>& a, const char* what) {
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      if (!std::isfinite(static_cast<double>(a(i, j)))) {
        std::ostringstream os;
        os << what << ": non-finite value at node (" << i;
        if (a.cols() > 1) os << ", " << j;
        os << ")";
        throw NumericalError(os.str());
      }
    }
  }
}

inline void require_same(const PeriodicGrid& a, const PeriodicGrid& b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": grid mismatch (" << a.size() << " vs " << b.size() << ")";
    throw GridMismatchError(os.str());
  }
}

}  // namespace detail

template <typename Scalar>
class BasicScalarField {
 public:
  BasicScalarField(PeriodicGrid grid, Array1<Scalar> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw GridMismatchError("ScalarField: values.size() != grid.size()");
    detail::require_finite(values_, "ScalarField");
  }

  static BasicScalarField constant(PeriodicGrid grid, Scalar c) {
    return BasicScalarField(grid, Array1<Scalar>::Constant(grid.size(), c));
  }

  template <typename F>
  static BasicScalarField sample(PeriodicGrid grid, F&& f) {
    Array1<Scalar> v(grid.size());
    for (Index i = 0; i < grid.size(); ++i) v(i) = f(grid.node(i));
    return BasicScalarField(grid, std::move(v));
  }

  const PeriodicGrid& grid() const { return grid_; }
  const Array1<Scalar>& values() const { return values_; }
  Scalar operator[](Index i) const { return values_(i); }
  Scalar mean() const { return values_.mean(); }

 private:
  PeriodicGrid grid_;
  Array1<Scalar> values_;
};

template <typename Scalar>
class BasicVectorField3 {
 public:
  static constexpr double kDefaultUnitTol = 1e-9;

  BasicVectorField3(PeriodicGrid grid, Vec3<Array1<Scalar>> comps, bool unit_constrained = false,
                    double unit_tol = kDefaultUnitTol)
      : grid_(grid), c_(std::move(comps)), unit_(unit_constrained) {
    for (const auto& c : c_) {
      if (c.size() != grid_.size()) throw GridMismatchError("VectorField3: component size != grid.size()");
      detail::require_finite(c, "VectorField3");
    }
    if (unit_) {
      const double dev = length_deviation();
      if (dev > unit_tol) {
        std::ostringstream os;
        os << "VectorField3: unit constraint violated, max | |m| - 1 | = " << dev;
        throw NumericalError(os.str());
      }
    }
  }

  static BasicVectorField3 zero(PeriodicGrid grid) {
    const Array1<Scalar> z = Array1<Scalar>::Zero(grid.size());
    return BasicVectorField3(grid, {z, z, z});
  }

  static BasicVectorField3 constant(PeriodicGrid grid, const Eigen::Matrix<Scalar, 3, 1>& v,
                                    bool unit_constrained = false) {
    Vec3<Array1<Scalar>> c;
    for (int k = 0; k < 3; ++k) c[k] = Array1<Scalar>::Constant(grid.size(), v(k));
    return BasicVectorField3(grid, std::move(c), unit_constrained);
  }

  template <typename F>
  static BasicVectorField3 sample(PeriodicGrid grid, F&& f, bool unit_constrained = false) {
    Vec3<Array1<Scalar>> c;
    for (auto& a : c) a.resize(grid.size());
    for (Index i = 0; i < grid.size(); ++i) {
      const Eigen::Matrix<Scalar, 3, 1> v = f(grid.node(i));
      for (int k = 0; k < 3; ++k) c[k](i) = v(k);
    }
    return BasicVectorField3(grid, std::move(c), unit_constrained);
  }

  const PeriodicGrid& grid() const { return grid_; }
  const Vec3<Array1<Scalar>>& components() const { return c_; }
  const Array1<Scalar>& operator[](int k) const { return c_[k]; }
  bool unit_constrained() const { return unit_; }

  Eigen::Matrix<Scalar, 3, 1> at(Index i) const { return {c_[0](i), c_[1](i), c_[2](i)}; }

  Array1<Scalar> squared_length() const { return c_[0].square() + c_[1].square() + c_[2].square(); }

  /// max_i | |m_i| - 1 |
  double length_deviation() const { return (squared_length().sqrt() - Scalar(1)).abs().maxCoeff(); }

 private:
  PeriodicGrid grid_;
  Vec3<Array1<Scalar>> c_;
  bool unit_;
};

/// Tensor-grid samples of u(x, y): component k is an (n_slow x n_fast) block.
template <typename Scalar>
class BasicTwoScaleField3 {
 public:
  BasicTwoScaleField3(PeriodicGrid slow, PeriodicGrid fast, Vec3<Array2<Scalar>> comps)
      : slow_(slow), fast_(fast), c_(std::move(comps)) {
    for (const auto& c : c_) {
      if (c.rows() != slow_.size() || c.cols() != fast_.size())
        throw GridMismatchError("TwoScaleField3: component shape != (n_slow, n_fast)");
      detail::require_finite(c, "TwoScaleField3");
    }
  }

  static BasicTwoScaleField3 zero(PeriodicGrid slow, PeriodicGrid fast) {
    const Array2<Scalar> z = Array2<Scalar>::Zero(slow.size(), fast.size());
    return BasicTwoScaleField3(slow, fast, {z, z, z});
  }

  template <typename F>
  static BasicTwoScaleField3 sample(PeriodicGrid slow, PeriodicGrid fast, F&& f) {
    Vec3<Array2<Scalar>> c;
    for (auto& a : c) a.resize(slow.size(), fast.size());
    for (Index j = 0; j < fast.size(); ++j)
      for (Index i = 0; i < slow.size(); ++i) {
        const Eigen::Matrix<Scalar, 3, 1> v = f(slow.node(i), fast.node(j));
        for (int k = 0; k < 3; ++k) c[k](i, j) = v(k);
      }
    return BasicTwoScaleField3(slow, fast, std::move(c));
  }

  const PeriodicGrid& slow_grid() const { return slow_; }
  const PeriodicGrid& fast_grid() const { return fast_; }
  const Vec3<Array2<Scalar>>& components() const { return c_; }
  const Array2<Scalar>& operator[](int k) const { return c_[k]; }

 private:
  PeriodicGrid slow_;
  PeriodicGrid fast_;
  Vec3<Array2<Scalar>> c_;
};

using ScalarField = BasicScalarField<double>;
using VectorField3 = BasicVectorField3<double>;
using TwoScaleField3 = BasicTwoScaleField3<double>;
using Vector3 = Eigen::Vector3d;

}  // namespace llh
