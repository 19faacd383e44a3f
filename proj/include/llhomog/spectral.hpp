#pragma once

// Fourier-spectral calculus on the unit torus: derivatives, antiderivatives,
// trigonometric interpolation and two-scale diagonal evaluation u(x, x/eps).
//
// Transforms go through Eigen's FFT module (FFTW backend when the build finds
// it). Real transforms use the half spectrum: bins k = 0 .. n/2.

#include <complex>
#include <mutex>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "llhomog/grid.hpp"
#include "llhomog/vec3.hpp"

namespace llh {

template <typename Scalar>
class RealFft {
 public:
  using Complex = std::complex<Scalar>;
  using Spectrum = Eigen::Array<Complex, Eigen::Dynamic, 1>;

  /// One instance per thread; Eigen::FFT caches plans and is not thread safe.
  static RealFft& local() {
    thread_local RealFft instance;
    return instance;
  }

  /// Half spectrum (n/2 + 1 bins) of a real signal of length n.
  void forward(const Array1<Scalar>& x, Spectrum& X) {
    const Index n = x.size();
    prepare(n);
    in_ = x;
    X.resize(n / 2 + 1);
    fft_.fwd(X.data(), in_.data(), n);
  }

  /// Real signal from its half spectrum, scaled so that inverse(forward(x)) = x.
  void inverse(const Spectrum& X, Array1<Scalar>& x, Index n) {
    prepare(n);
    spec_ = X;
    x.resize(n);
    fft_.inv(x.data(), spec_.data(), n);
  }

 private:
  RealFft() { fft_.SetFlag(Eigen::FFT<Scalar>::HalfSpectrum); }

  // Plans are created lazily on first use of a size; the FFTW planner is
  // global, so that first call is serialised across threads.
  void prepare(Index n) {
    for (Index m : ready_)
      if (m == n) return;
    static std::mutex planner;
    std::lock_guard<std::mutex> lock(planner);
    Array1<Scalar> x = Array1<Scalar>::Zero(n), y(n);
    Spectrum X(n / 2 + 1);
    fft_.fwd(X.data(), x.data(), n);
    fft_.inv(y.data(), X.data(), n);
    ready_.push_back(n);
  }

  Eigen::FFT<Scalar> fft_;
  Array1<Scalar> in_;
  Spectrum spec_;
  std::vector<Index> ready_;
};

namespace detail {

template <typename Scalar>
std::complex<Scalar> derivative_symbol(Index k, Index n, int order) {
  using std::numbers::pi;
  if (order == 0) return {1, 0};
  if (2 * k == n && order % 2 == 1) return {0, 0};
  const std::complex<Scalar> ik(0, Scalar(2 * pi) * static_cast<Scalar>(k));
  std::complex<Scalar> s(1, 0);
  for (int p = 0; p < order; ++p) s *= ik;
  if (2 * k == n) s = {s.real(), 0};
  return s;
}

inline void require_order(Index n, int order) {
  if (order < 0 || order > n / 2) {
    std::ostringstream os;
    os << "spectral derivative of order " << order << " is not resolved on " << n << " points";
    throw ResolutionError(os.str());
  }
}

}  // namespace detail

/// order-th derivative of a periodic sample vector on the unit torus.
template <typename Scalar>
Array1<Scalar> derivative(const Array1<Scalar>& f, int order) {
  const Index n = f.size();
  detail::require_order(n, order);
  detail::require_finite(f, "spectral_derivative");
  if (order == 0) return f;
  auto& fft = RealFft<Scalar>::local();
  typename RealFft<Scalar>::Spectrum X;
  fft.forward(f, X);
  for (Index k = 0; k < X.size(); ++k) X(k) *= detail::derivative_symbol<Scalar>(k, n, order);
  Array1<Scalar> out;
  fft.inverse(X, out, n);
  return out;
}

/// Mean-free antiderivative; the mean of f is discarded, the Nyquist bin zeroed.
template <typename Scalar>
Array1<Scalar> antiderivative(const Array1<Scalar>& f) {
  using std::numbers::pi;
  const Index n = f.size();
  auto& fft = RealFft<Scalar>::local();
  typename RealFft<Scalar>::Spectrum X;
  fft.forward(f, X);
  X(0) = 0;
  X(n / 2) = 0;
  for (Index k = 1; k < n / 2; ++k) X(k) /= std::complex<Scalar>(0, Scalar(2 * pi) * static_cast<Scalar>(k));
  Array1<Scalar> out;
  fft.inverse(X, out, n);
  return out;
}

/// Derivative along x (down each column) of a two-scale block.
template <typename Scalar>
Array2<Scalar> derivative_x(const Array2<Scalar>& u, int order) {
  if (order == 0) return u;
  Array2<Scalar> out(u.rows(), u.cols());
  for (Index j = 0; j < u.cols(); ++j) out.col(j) = derivative<Scalar>(u.col(j), order);
  return out;
}

/// Derivative along y (across each row) of a two-scale block.
template <typename Scalar>
Array2<Scalar> derivative_y(const Array2<Scalar>& u, int order) {
  if (order == 0) return u;
  Array2<Scalar> out(u.rows(), u.cols());
  Array1<Scalar> row;
  for (Index i = 0; i < u.rows(); ++i) {
    row = u.row(i).transpose();
    out.row(i) = derivative<Scalar>(row, order).transpose();
  }
  return out;
}

template <typename A>
Vec3<A> derivative(const Vec3<A>& u, int order) {
  return {derivative(u[0], order), derivative(u[1], order), derivative(u[2], order)};
}

template <typename Scalar>
Vec3<Array2<Scalar>> derivative_x(const Vec3<Array2<Scalar>>& u, int order) {
  return {derivative_x(u[0], order), derivative_x(u[1], order), derivative_x(u[2], order)};
}

template <typename Scalar>
Vec3<Array2<Scalar>> derivative_y(const Vec3<Array2<Scalar>>& u, int order) {
  return {derivative_y(u[0], order), derivative_y(u[1], order), derivative_y(u[2], order)};
}

enum class Axis { slow, fast };

template <typename Scalar>
BasicScalarField<Scalar> spectral_derivative(const BasicScalarField<Scalar>& f, int order) {
  return BasicScalarField<Scalar>(f.grid(), derivative<Scalar>(f.values(), order));
}

template <typename Scalar>
BasicVectorField3<Scalar> spectral_derivative(const BasicVectorField3<Scalar>& f, int order) {
  return BasicVectorField3<Scalar>(f.grid(), derivative(f.components(), order));
}

template <typename Scalar>
BasicTwoScaleField3<Scalar> spectral_derivative(const BasicTwoScaleField3<Scalar>& u, Axis axis, int order) {
  const auto& c = u.components();
  detail::require_order(axis == Axis::slow ? u.slow_grid().size() : u.fast_grid().size(), order);
  return BasicTwoScaleField3<Scalar>(u.slow_grid(), u.fast_grid(),
                                     axis == Axis::slow ? derivative_x(c, order) : derivative_y(c, order));
}

/// Trigonometric interpolation onto n_target points. Coarsening drops modes
/// and therefore has to be requested explicitly.
template <typename Scalar>
Array1<Scalar> resample(const Array1<Scalar>& f, Index n_target, bool allow_truncation = false) {
  const Index n = f.size();
  if (n_target == n) return f;
  if (n_target < n && !allow_truncation) {
    std::ostringstream os;
    os << "resample: coarsening " << n << " -> " << n_target << " loses modes; pass allow_truncation";
    throw ResolutionError(os.str());
  }
  auto& fft = RealFft<Scalar>::local();
  typename RealFft<Scalar>::Spectrum X, Y = RealFft<Scalar>::Spectrum::Zero(n_target / 2 + 1);
  fft.forward(f, X);
  const Scalar gain = static_cast<Scalar>(n_target) / static_cast<Scalar>(n);
  if (n_target > n) {
    for (Index k = 0; k < n / 2; ++k) Y(k) = gain * X(k);
    // The coarse Nyquist cosine splits evenly between +n/2 and -n/2.
    Y(n / 2) = gain * X(n / 2) / Scalar(2);
  } else {
    for (Index k = 0; k < n_target / 2; ++k) Y(k) = gain * X(k);
  }
  Array1<Scalar> out;
  fft.inverse(Y, out, n_target);
  return out;
}

/// Evaluate the trigonometric interpolant of periodic samples at arbitrary points.
template <typename Scalar>
Array1<Scalar> interpolate_at(const Array1<Scalar>& samples, const Array1<Scalar>& points) {
  using std::numbers::pi;
  const Index n = samples.size();
  auto& fft = RealFft<Scalar>::local();
  typename RealFft<Scalar>::Spectrum X;
  fft.forward(samples, X);
  Array1<Scalar> out(points.size());
  for (Index p = 0; p < points.size(); ++p) {
    const Scalar y = points(p);
    const std::complex<Scalar> w = std::polar(Scalar(1), Scalar(2 * pi) * y);
    std::complex<Scalar> e(1, 0);
    Scalar acc = X(0).real();
    for (Index k = 1; k < n / 2; ++k) {
      e *= w;
      acc += Scalar(2) * (X(k) * e).real();
    }
    acc += X(n / 2).real() * std::cos(Scalar(pi) * static_cast<Scalar>(n) * y);
    out(p) = acc / static_cast<Scalar>(n);
  }
  return out;
}

template <typename Scalar>
BasicVectorField3<Scalar> refine_field(const BasicVectorField3<Scalar>& f, const PeriodicGrid& target,
                                       bool allow_truncation = false) {
  Vec3<Array1<Scalar>> c;
  for (int k = 0; k < 3; ++k) c[k] = resample<Scalar>(f[k], target.size(), allow_truncation);
  return BasicVectorField3<Scalar>(target, std::move(c));
}

template <typename Scalar>
BasicScalarField<Scalar> refine_field(const BasicScalarField<Scalar>& f, const PeriodicGrid& target,
                                      bool allow_truncation = false) {
  return BasicScalarField<Scalar>(target, resample<Scalar>(f.values(), target.size(), allow_truncation));
}

/// Fast-variable phase y = x / eps mod 1 at every node of a grid.
inline Array1<double> fast_phase(const PeriodicGrid& grid, double eps) {
  Array1<double> y(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const double s = grid.node(i) / eps;
    y(i) = s - std::floor(s);
  }
  return y;
}

/// Required output resolution for a given eps (8 nodes per fast period).
inline Index min_points_for_eps(double eps) { return static_cast<Index>(std::ceil(8.0 / eps - 1e-9)); }

inline void check_eps(double eps, const char* what) {
  if (!(eps > 0.0 && eps < 1.0)) {
    std::ostringstream os;
    os << what << ": eps must lie in (0,1), got " << eps;
    throw ParameterError(os.str());
  }
}

inline void check_eps_resolution(const PeriodicGrid& grid, double eps, const char* what) {
  if (grid.size() < min_points_for_eps(eps)) {
    std::ostringstream os;
    os << what << ": " << grid.size() << " points do not resolve eps = " << eps << "; need n_points >= "
       << next_pow2(min_points_for_eps(eps));
    throw ResolutionError(os.str());
  }
}

/// Sample u(x_i, x_i / eps mod 1) on the output grid by spectral
/// interpolation in both variables.
template <typename Scalar>
BasicVectorField3<Scalar> evaluate_diagonal(const BasicTwoScaleField3<Scalar>& u, double eps,
                                            const PeriodicGrid& out) {
  using std::numbers::pi;
  check_eps(eps, "evaluate_diagonal");
  check_eps_resolution(out, eps, "evaluate_diagonal");
  if (out.size() < u.slow_grid().size())
    throw ResolutionError("evaluate_diagonal: output grid is coarser than the slow grid");
  const Index nx = out.size();
  const Index ny = u.fast_grid().size();
  const Array1<double> phase = fast_phase(out, eps);

  // e^{2 pi i k y_i} for k = 0 .. ny/2
  Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic> basis(nx, ny / 2 + 1);
  for (Index i = 0; i < nx; ++i) {
    const std::complex<Scalar> w = std::polar(Scalar(1), Scalar(2 * pi) * static_cast<Scalar>(phase(i)));
    std::complex<Scalar> e(1, 0);
    for (Index k = 0; k < ny / 2; ++k) {
      basis(i, k) = e;
      e *= w;
    }
    basis(i, ny / 2) = std::cos(Scalar(pi) * static_cast<Scalar>(ny) * static_cast<Scalar>(phase(i)));
  }

  auto& fft = RealFft<Scalar>::local();
  typename RealFft<Scalar>::Spectrum X;
  Vec3<Array1<Scalar>> c;
  for (int comp = 0; comp < 3; ++comp) {
    Array2<Scalar> fine(nx, ny);
    for (Index j = 0; j < ny; ++j) fine.col(j) = resample<Scalar>(u[comp].col(j), nx);
    c[comp].resize(nx);
    Array1<Scalar> row;
    for (Index i = 0; i < nx; ++i) {
      row = fine.row(i).transpose();
      fft.forward(row, X);
      Scalar acc = X(0).real();
      for (Index k = 1; k < ny / 2; ++k) acc += Scalar(2) * (X(k) * basis(i, k)).real();
      acc += X(ny / 2).real() * basis(i, ny / 2).real();
      c[comp](i) = acc / static_cast<Scalar>(ny);
    }
  }
  return BasicVectorField3<Scalar>(out, std::move(c));
}

}  // namespace llh
