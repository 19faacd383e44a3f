#include "llhomog/correctors.hpp"

#include <complex>

#include "llhomog/norms.hpp"

namespace llh {

namespace {

using Complex = std::complex<double>;

Array2<double> times_fast(const Array2<double>& u, const Array1<double>& g) { return u.rowwise() * g.transpose(); }

TS outer(const Vec3<Array1<double>>& f, const Array1<double>& g) {
  TS out;
  for (int k = 0; k < 3; ++k) out[k] = (f[k].matrix() * g.matrix().transpose()).array();
  return out;
}

Vec3<Array1<double>> row_mean(const TS& u) {
  return {Array1<double>(u[0].rowwise().mean()), Array1<double>(u[1].rowwise().mean()),
          Array1<double>(u[2].rowwise().mean())};
}

void require_fast(const TS& u, const Array1<double>& a, const char* what) {
  if (u[0].cols() != a.size()) {
    std::ostringstream os;
    os << what << ": fast grid mismatch (" << u[0].cols() << " vs " << a.size() << ")";
    throw GridMismatchError(os.str());
  }
}

TwoScaleField3 wrap(const TwoScaleField3& like, TS c) {
  return TwoScaleField3(like.slow_grid(), like.fast_grid(), std::move(c));
}

}  // namespace

ProjectionContext::ProjectionContext(VectorField3 m0, double alpha, double unit_tol)
    : m0_(VectorField3(m0.grid(), m0.components(), true, unit_tol)), alpha_(alpha) {
  check_alpha(alpha);
}

TS ProjectionContext::m0_two_scale(Index n_fast) const { return broadcast_slow(m0_.components(), n_fast); }

TwoScaleField3 lift(const VectorField3& f, const PeriodicGrid& fast) {
  return TwoScaleField3(f.grid(), fast, broadcast_slow(f.components(), fast.size()));
}

TS op_L0(const TS& u, const Array1<double>& a) {
  require_fast(u, a, "op_L0");
  TS out;
  for (int k = 0; k < 3; ++k) out[k] = times_fast(derivative_x<double>(u[k], 2), a);
  return out;
}

TS op_L1(const TS& u, const Array1<double>& a) {
  require_fast(u, a, "op_L1");
  TS out;
  for (int k = 0; k < 3; ++k)
    out[k] = derivative_x<double>(times_fast(derivative_y<double>(u[k], 1), a), 1) +
             derivative_y<double>(times_fast(derivative_x<double>(u[k], 1), a), 1);
  return out;
}

TS op_L2(const TS& u, const Array1<double>& a) {
  require_fast(u, a, "op_L2");
  TS out;
  for (int k = 0; k < 3; ++k) out[k] = derivative_y<double>(times_fast(derivative_y<double>(u[k], 1), a), 1);
  return out;
}

TwoScaleField3 op_L0(const TwoScaleField3& u, const MaterialCoefficient& a) {
  detail::require_same(u.fast_grid(), a.grid(), "op_L0");
  return wrap(u, op_L0(u.components(), a.values()));
}

TwoScaleField3 op_L1(const TwoScaleField3& u, const MaterialCoefficient& a) {
  detail::require_same(u.fast_grid(), a.grid(), "op_L1");
  return wrap(u, op_L1(u.components(), a.values()));
}

TwoScaleField3 op_L2(const TwoScaleField3& u, const MaterialCoefficient& a) {
  detail::require_same(u.fast_grid(), a.grid(), "op_L2");
  return wrap(u, op_L2(u.components(), a.values()));
}

TS script_L(const TS& w, const TS& m0, const Array1<double>& a, double alpha) {
  const TS c = cross(m0, op_L2(w, a));
  return axpy(-c, -alpha, cross(m0, c));
}

TwoScaleField3 script_L(const TwoScaleField3& w, const ProjectionContext& ctx, const MaterialCoefficient& a) {
  detail::require_same(w.slow_grid(), ctx.slow_grid(), "script_L");
  detail::require_same(w.fast_grid(), a.grid(), "script_L");
  return wrap(w, script_L(w.components(), ctx.m0_two_scale(a.grid().size()), a.values(), ctx.alpha()));
}

VectorField3 averaging_A(const TwoScaleField3& u) { return VectorField3(u.slow_grid(), row_mean(u.components())); }

VectorField3 projection_M(const VectorField3& v, const ProjectionContext& ctx) {
  detail::require_same(v.grid(), ctx.slow_grid(), "projection_M");
  const auto& m0 = ctx.m0().components();
  return VectorField3(v.grid(), scale(dot(m0, v.components()), m0));
}

namespace {

TS apply_M(const TS& u, const TS& m0) { return scale(dot(m0, u), m0); }

TS minus_mean(const TS& u) {
  const auto mean = broadcast_slow(row_mean(u), u[0].cols());
  return u - mean;
}

}  // namespace

TwoScaleField3 projection_M(const TwoScaleField3& u, const ProjectionContext& ctx) {
  detail::require_same(u.slow_grid(), ctx.slow_grid(), "projection_M");
  return wrap(u, apply_M(u.components(), ctx.m0_two_scale(u.fast_grid().size())));
}

TwoScaleField3 proj_P(const TwoScaleField3& u, const ProjectionContext& ctx) {
  detail::require_same(u.slow_grid(), ctx.slow_grid(), "proj_P");
  const TS m0 = ctx.m0_two_scale(u.fast_grid().size());
  const TS w = minus_mean(u.components());
  return wrap(u, w - apply_M(w, m0));
}

TwoScaleField3 proj_Q(const TwoScaleField3& u, const ProjectionContext& ctx) {
  detail::require_same(u.slow_grid(), ctx.slow_grid(), "proj_Q");
  const Index ny = u.fast_grid().size();
  const TS m0 = ctx.m0_two_scale(ny);
  const TS avg = broadcast_slow(row_mean(u.components()), ny);
  return wrap(u, apply_M(u.components(), m0) + (avg - apply_M(avg, m0)));
}

TwoScaleField3 forcing_F1_generic(const ProjectionContext& ctx, const MaterialCoefficient& a) {
  const Index ny = a.grid().size();
  const TS m0 = ctx.m0_two_scale(ny);
  const TS z0 = op_L1(m0, a.values());
  const TS c = cross(m0, z0);
  return TwoScaleField3(ctx.slow_grid(), a.grid(), axpy(-c, -ctx.alpha(), cross(m0, c)));
}

TwoScaleField3 forcing_F1(const ProjectionContext& ctx, const MaterialCoefficient& a, double tol) {
  const auto& m0 = ctx.m0().components();
  const Vec3<Array1<double>> dm0 = derivative(m0, 1);
  const Vec3<Array1<double>> inner = axpy(dm0, ctx.alpha(), cross(m0, dm0));
  const Array1<double> da = derivative<double>(a.values(), 1);
  TS f = outer(-cross(m0, inner), da);
  TwoScaleField3 closed(ctx.slow_grid(), a.grid(), std::move(f));

  const TwoScaleField3 generic = forcing_F1_generic(ctx, a);
  const double diff = max_abs(closed.components() - generic.components());
  if (diff > tol) {
    std::ostringstream os;
    os << "forcing_F1: closed form and generic recursion differ by " << diff;
    throw ConsistencyError(os.str());
  }
  return closed;
}

std::string to_string(TauScheme s) { return s == TauScheme::exponential ? "exponential" : "rk4"; }

TauScheme parse_tau_scheme(const std::string& s) {
  if (s == "exponential") return TauScheme::exponential;
  if (s == "rk4") return TauScheme::rk4;
  throw ParameterError("unknown tau scheme '" + s + "' (expected exponential or rk4)");
}

// ---------------------------------------------------------------------------
// Mode-space calculus. A scalar function f of h*script_L acts on the 3-vector
// w of mode k (eigenvalue lambda_k) as
//   f(0) M w + Re f(z) (I - M) w + Im f(z) K w,   z = (alpha - i) lambda_k h,
// because script_L restricted to m0-perp is lambda (alpha - K) with K^2 = -I.

TauPropagator::TauPropagator(const ProjectionContext& ctx, const MaterialCoefficient& a)
    : spec_(a), alpha_(ctx.alpha()) {
  detail::require_same(ctx.m0().grid(), ctx.slow_grid(), "TauPropagator");
  const Index ny = a.grid().size();
  m0_ = ctx.m0_two_scale(ny);
  lambda_ = spec_.eigenvalues().transpose().array().replicate(ctx.slow_grid().size(), 1);
}

TS TauPropagator::to_modes(const TS& u) const {
  TS c;
  for (int k = 0; k < 3; ++k) c[k] = (u[k].matrix() * spec_.eigenvectors()).array();
  return c;
}

TS TauPropagator::from_modes(const TS& c) const {
  TS u;
  for (int k = 0; k < 3; ++k) u[k] = (c[k].matrix() * spec_.eigenvectors().transpose()).array();
  return u;
}

namespace {

// f(0) M w + re (I - M) w + im K w for per-entry coefficient arrays.
TS apply_symbol(const TS& c, const TS& m0, double f0, const Array2<double>& re, const Array2<double>& im) {
  const Array2<double> p = dot(m0, c);
  const TS kc = cross(m0, c);
  TS out;
  for (int k = 0; k < 3; ++k) {
    const Array2<double> mc = p * m0[k];
    out[k] = f0 * mc + re * (c[k] - mc) + im * kc[k];
  }
  return out;
}

}  // namespace

TS TauPropagator::apply_modes(const TS& c, double s) const {
  const Array2<double> sl = s * lambda_;
  const Array2<double> g = (alpha_ * sl).exp();
  // e^{(alpha - i) s lambda} = g (cos - i sin)
  return apply_symbol(c, m0_, 1.0, g * sl.cos(), -g * sl.sin());
}

TS TauPropagator::apply(const TS& u, double s) const { return from_modes(apply_modes(to_modes(u), s)); }

TS v_initial(const ProjectionContext& ctx, const CellSolution& cell) {
  const Vec3<Array1<double>> dm0 = derivative(ctx.m0().components(), 1);
  return outer(-dm0, cell.chi.values());
}

TS v_at(const TauPropagator& prop, const TS& v0, double tau) { return prop.apply(v0, tau); }

namespace {

long step_count(double tau_end, double h) {
  if (!(h > 0.0)) throw ParameterError("dtau must be positive");
  return std::max(1L, static_cast<long>(std::ceil(tau_end / h - 1e-9)));
}

double rk4_tau_limit(const MaterialCoefficient& a, double cfl) {
  const double h = a.grid().spacing();
  return cfl * h * h / a.a_max();
}

void rk4_tau_step(TS& m, double tau, double h, const ForcingFn* F, const TS& m0, const Array1<double>& a,
                  double alpha) {
  auto rhs = [&](const TS& u, double s) {
    TS r = script_L(u, m0, a, alpha);
    if (F) r += (*F)(s);
    return r;
  };
  const TS k1 = rhs(m, tau);
  const TS k2 = rhs(axpy(m, 0.5 * h, k1), tau + 0.5 * h);
  const TS k3 = rhs(axpy(m, 0.5 * h, k2), tau + 0.5 * h);
  const TS k4 = rhs(axpy(m, h, k3), tau + h);
  for (int c = 0; c < 3; ++c) m[c] += (h / 6.0) * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
}

// phi_0 .. phi_3 at complex x.
std::array<Complex, 4> phi_functions(Complex x) {
  std::array<Complex, 4> p;
  if (std::abs(x) < 1.0) {
    // phi_k(x) = sum_n x^n / (n + k)!
    for (int k = 0; k < 4; ++k) {
      Complex term(1.0, 0.0), sum(0.0, 0.0);
      double fact = 1.0;
      for (int j = 2; j <= k; ++j) fact *= j;
      term /= fact;
      for (int n = 0; n < 30; ++n) {
        sum += term;
        term *= x / static_cast<double>(n + k + 1);
      }
      p[k] = sum;
    }
  } else {
    p[0] = std::exp(x);
    p[1] = (p[0] - 1.0) / x;
    p[2] = (p[1] - 1.0) / x;
    p[3] = (p[2] - 0.5) / x;
  }
  return p;
}

// Exponential quadrature with quadratic interpolation of the forcing:
//   m+ = e^{hL} m + h [w0(hL) F0 + w1(hL) F_half + w2(hL) F1].
struct EtdWeights {
  double f0[4];
  Array2<double> re[4], im[4];  // [0] = exp, then the three forcing weights
};

EtdWeights etd_weights(const Array2<double>& lambda, double alpha, double h) {
  EtdWeights w;
  const Index r = lambda.rows(), c = lambda.cols();
  for (int i = 0; i < 4; ++i) {
    w.re[i].resize(r, c);
    w.im[i].resize(r, c);
  }
  // lambda is constant down each column; evaluate once per mode.
  for (Index k = 0; k < c; ++k) {
    const Complex z = Complex(alpha, -1.0) * (lambda(0, k) * h);
    const auto p = phi_functions(z);
    const Complex g[4] = {p[0], p[1] - 3.0 * p[2] + 4.0 * p[3], 4.0 * p[2] - 8.0 * p[3], 4.0 * p[3] - p[2]};
    for (int i = 0; i < 4; ++i) {
      w.re[i].col(k).setConstant(g[i].real());
      w.im[i].col(k).setConstant(g[i].imag());
    }
  }
  w.f0[0] = 1.0;
  w.f0[1] = 1.0 / 6.0;
  w.f0[2] = 4.0 / 6.0;
  w.f0[3] = 1.0 / 6.0;
  return w;
}

struct EtdStepper {
  const TauPropagator& prop;
  const TS& m0;
  EtdWeights w;
  double h;

  // All arguments and the result in mode coordinates.
  TS step(const TS& c, const TS& f0, const TS& fh, const TS& f1) const {
    TS out = apply_symbol(c, m0, w.f0[0], w.re[0], w.im[0]);
    out += h * apply_symbol(f0, m0, w.f0[1], w.re[1], w.im[1]);
    out += h * apply_symbol(fh, m0, w.f0[2], w.re[2], w.im[2]);
    out += h * apply_symbol(f1, m0, w.f0[3], w.re[3], w.im[3]);
    return out;
  }
};

Array2<double> spread_lambda(const CellSpectrum& s, Index rows) {
  return s.eigenvalues().transpose().array().replicate(rows, 1);
}

}  // namespace

std::vector<CorrectorState> solve_v(const ProjectionContext& ctx, const MaterialCoefficient& a,
                                    const CellSolution& cell, double tau_end, const TauOptions& opts, double t_slow) {
  if (!(tau_end > 0.0)) throw ParameterError("solve_v: tau_end must be positive");
  detail::require_same(cell.chi.grid(), a.grid(), "solve_v");
  const long n_out = step_count(tau_end, opts.dtau);
  const double h = tau_end / static_cast<double>(n_out);
  const TS v0 = v_initial(ctx, cell);
  const PeriodicGrid slow = ctx.slow_grid(), fast = a.grid();

  std::vector<CorrectorState> out;
  out.push_back({1, TwoScaleField3(slow, fast, v0), 0.0, t_slow});
  if (opts.scheme == TauScheme::exponential) {
    const TauPropagator prop(ctx, a);
    const TS c0 = prop.to_modes(v0);
    for (long i = 1; i <= n_out; ++i) {
      const double tau = static_cast<double>(i) * h;
      out.push_back({1, TwoScaleField3(slow, fast, prop.from_modes(prop.apply_modes(c0, tau))), tau, t_slow});
    }
  } else {
    const long sub = step_count(h, rk4_tau_limit(a, opts.cfl_safety));
    const double hs = h / static_cast<double>(sub);
    const TS m0 = ctx.m0_two_scale(fast.size());
    TS v = v0;
    for (long i = 1; i <= n_out; ++i) {
      for (long s = 0; s < sub; ++s) rk4_tau_step(v, 0.0, hs, nullptr, m0, a.values(), ctx.alpha());
      for (int k = 0; k < 3; ++k)
        if (!v[k].allFinite()) throw NumericalError("solve_v: non-finite state (rk4 instability)");
      out.push_back({1, TwoScaleField3(slow, fast, v), static_cast<double>(i) * h, t_slow});
    }
  }
  return out;
}

std::vector<TS> solve_mj(const ForcingFn& F, const ProjectionContext& ctx, const MaterialCoefficient& a,
                         double tau_end, const TauOptions& opts) {
  if (!(tau_end > 0.0)) throw ParameterError("solve_mj: tau_end must be positive");
  const long n_out = step_count(tau_end, opts.dtau);
  const double h = tau_end / static_cast<double>(n_out);
  const Index ny = a.grid().size();
  const TS m0 = ctx.m0_two_scale(ny);
  const TS zero = zeros_like(m0);

  std::vector<TS> out{zero};
  out.reserve(n_out + 1);
  if (opts.scheme == TauScheme::exponential) {
    const TauPropagator prop(ctx, a);
    const EtdStepper st{prop, m0, etd_weights(spread_lambda(prop.spectrum(), m0[0].rows()), ctx.alpha(), h), h};
    TS c = zero;
    TS f0 = prop.to_modes(F(0.0));
    for (long i = 0; i < n_out; ++i) {
      const double tau = static_cast<double>(i) * h;
      const TS fh = prop.to_modes(F(tau + 0.5 * h));
      const TS f1 = prop.to_modes(F(tau + h));
      c = st.step(c, f0, fh, f1);
      f0 = f1;
      out.push_back(prop.from_modes(c));
    }
  } else {
    const long sub = step_count(h, rk4_tau_limit(a, opts.cfl_safety));
    const double hs = h / static_cast<double>(sub);
    TS m = zero;
    for (long i = 0; i < n_out; ++i) {
      for (long s = 0; s < sub; ++s)
        rk4_tau_step(m, static_cast<double>(i) * h + static_cast<double>(s) * hs, hs, &F, m0, a.values(),
                     ctx.alpha());
      for (int k = 0; k < 3; ++k)
        if (!m[k].allFinite()) throw NumericalError("solve_mj: non-finite state (rk4 instability)");
      out.push_back(m);
    }
  }
  return out;
}

TS solve_mj_final(const ForcingFn& F, const TauPropagator& prop, const TS& m0, const Array1<double>& a, double alpha,
                  double tau_end, long n_steps, TauScheme scheme) {
  if (n_steps < 1) throw ParameterError("solve_mj_final: n_steps must be >= 1");
  const double h = tau_end / static_cast<double>(n_steps);
  TS m = zeros_like(m0);
  if (tau_end <= 0.0) return m;
  if (scheme == TauScheme::exponential) {
    const EtdStepper st{prop, m0, etd_weights(spread_lambda(prop.spectrum(), m0[0].rows()), alpha, h), h};
    TS f0 = prop.to_modes(F(0.0));
    for (long i = 0; i < n_steps; ++i) {
      const double tau = static_cast<double>(i) * h;
      const TS fh = prop.to_modes(F(tau + 0.5 * h));
      const TS f1 = prop.to_modes(F(tau + h));
      m = st.step(m, f0, fh, f1);
      f0 = f1;
    }
    return prop.from_modes(m);
  }
  const double hy = 1.0 / static_cast<double>(a.size());
  const double limit = 0.25 * hy * hy / a.maxCoeff();  // RK4 imaginary-axis bound for the spectral L2
  if (h > limit) {
    std::ostringstream os;
    os << "solve_mj_final: rk4 step " << h << " exceeds the admissible dtau " << limit << " for n_fast = " << a.size();
    throw ResolutionError(os.str());
  }
  for (long i = 0; i < n_steps; ++i) rk4_tau_step(m, static_cast<double>(i) * h, h, &F, m0, a, alpha);
  return m;
}

M1Result solve_m1(const ProjectionContext& ctx, const MaterialCoefficient& a, const CellSolution& cell,
                  double tau_end, const TauOptions& opts, double cross_tol, double t_slow) {
  const auto vs = solve_v(ctx, a, cell, tau_end, opts, t_slow);
  const TS ansatz0 = outer(derivative(ctx.m0().components(), 1), cell.chi.values());
  const TS f1 = forcing_F1(ctx, a).components();
  const auto direct = solve_mj([&](double) { return f1; }, ctx, a, tau_end, opts);

  M1Result r;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    TS m1 = ansatz0 + vs[i].field.components();
    r.dual_path_discrepancy = std::max(r.dual_path_discrepancy, max_abs(m1 - direct[i]));
    r.states.push_back({1, TwoScaleField3(ctx.slow_grid(), a.grid(), std::move(m1)), vs[i].tau, t_slow});
  }
  if (r.dual_path_discrepancy > cross_tol) {
    std::ostringstream os;
    os << "solve_m1: ansatz and direct solve differ by " << r.dual_path_discrepancy << " (tolerance " << cross_tol
       << ")";
    throw ConsistencyError(os.str());
  }
  return r;
}

RecursionBundle recursion_quantities(const std::vector<TS>& m, const Array1<double>& a, int j) {
  if (j < 0) throw ParameterError("recursion_quantities: j must be >= 0");
  if (static_cast<int>(m.size()) < j + 1) {
    std::ostringstream os;
    os << "recursion_quantities: index " << j << " needs m_0 .. m_" << j << ", got " << m.size() << " states";
    throw ParameterError(os.str());
  }
  RecursionBundle b;
  const TS zero = zeros_like(m[0]);
  b.Z.resize(j + 1);
  b.V.assign(j + 1, zero);
  b.T.assign(j + 1, zero);
  b.R.assign(j + 1, zero);
  b.S.assign(j + 1, zero);
  b.Z[0] = op_L1(m[0], a);
  for (int i = 1; i <= j; ++i) {
    b.Z[i] = op_L0(m[i - 1], a) + op_L1(m[i], a);
    b.V[i] = op_L2(m[i], a) + b.Z[i - 1];
  }
  for (int i = 1; i <= j; ++i) {
    TS t = zero, r = zero;
    for (int k = 1; k <= i; ++k) {
      t += cross(m[i - k], b.V[k]);
      r += cross(m[i + 1 - k], b.V[k]);
    }
    b.T[i] = std::move(t);
    b.R[i] = std::move(r);
  }
  for (int i = 1; i <= j; ++i) {
    TS s = zero;
    for (int k = 1; k <= i; ++k) s += cross(m[i + 1 - k], b.T[k]);
    b.S[i] = std::move(s);
  }
  return b;
}

RecursionBundle recursion_quantities(const std::vector<TwoScaleField3>& states, const MaterialCoefficient& a, int j) {
  std::vector<TS> m;
  for (const auto& s : states) {
    detail::require_same(s.fast_grid(), a.grid(), "recursion_quantities");
    m.push_back(s.components());
  }
  return recursion_quantities(m, a.values(), j);
}

TS forcing_Fj(const RecursionBundle& b, const TS& m0, double alpha, int j, const DtMCallback& dt_m) {
  if (j < 1) throw ParameterError("forcing_Fj: j must be >= 1");
  if (b.j() < j - 1) {
    std::ostringstream os;
    os << "forcing_Fj: F_" << j << " needs the bundle at index " << j - 1 << ", got " << b.j();
    throw ParameterError(os.str());
  }
  const TS& R = b.R[j - 1];
  const TS& Z = b.Z[j - 1];
  const TS& S = b.S[j - 1];
  const TS m0xZ = cross(m0, Z);
  TS damp = cross(m0, R) + cross(m0, m0xZ) + S;
  TS f = axpy(-R - m0xZ, -alpha, damp);
  if (j >= 2) {
    if (!dt_m) throw ParameterError("forcing_Fj: d_t m_{j-2} callback required for j >= 2");
    f = f - dt_m(j - 2);
  }
  return f;
}

TS forcing_F2_hand(const TS& m0, const TS& m1, const TS& v, const TS& dtm0, const Array1<double>& a, double alpha) {
  const TS l2v = op_L2(v, a);
  const TS r1 = cross(m1, l2v);
  const TS s1 = cross(m1, cross(m0, l2v));
  const TS z1 = op_L0(m0, a) + op_L1(m1, a);
  const TS m0xz1 = cross(m0, z1);
  return axpy(-r1 - m0xz1, -alpha, cross(m0, r1) + cross(m0, m0xz1) + s1) - dtm0;
}

TS dt_m0(const ProjectionContext& ctx, double a_h, Index n_fast) {
  const LLOperatorContext hom = LLOperatorContext::homogenized(ctx.slow_grid(), a_h, ctx.alpha());
  return broadcast_slow(ll_rhs(ctx.m0().components(), hom), n_fast);
}

CorrectorSet compute_correctors(const ProjectionContext& ctx, const MaterialCoefficient& a, const CellSolution& cell,
                                double tau, const CorrectorSetOptions& opts) {
  if (!(tau >= 0.0)) throw ParameterError("compute_correctors: tau must be non-negative");
  if (opts.J < 0 || opts.J > 2) throw ParameterError("compute_correctors: J must be 0, 1 or 2");
  const PeriodicGrid slow = ctx.slow_grid(), fast = a.grid();
  const Index ny = fast.size();
  const TauPropagator prop(ctx, a);
  const TS m0 = ctx.m0_two_scale(ny);
  const TS v0 = v_initial(ctx, cell);
  const TS ansatz = outer(derivative(ctx.m0().components(), 1), cell.chi.values());
  const TS cv0 = prop.to_modes(v0);

  const TS v = prop.from_modes(prop.apply_modes(cv0, tau));
  CorrectorSet out{TwoScaleField3(slow, fast, ansatz + v), TwoScaleField3::zero(slow, fast),
                   TwoScaleField3(slow, fast, v), tau};
  if (opts.J < 2 || tau == 0.0) return out;

  const TS dtm0 = dt_m0(ctx, cell.a_h, ny);
  const DtMCallback dtm = [&](int k) -> TS {
    if (k != 0) throw ParameterError("d_t m_k is only available for k = 0");
    return dtm0;
  };
  const ForcingFn F2 = [&](double s) {
    const TS m1 = ansatz + prop.from_modes(prop.apply_modes(cv0, s));
    const RecursionBundle b = recursion_quantities(std::vector<TS>{m0, m1}, a.values(), 1);
    return forcing_Fj(b, m0, ctx.alpha(), 2, dtm);
  };
  const long n = opts.fixed_steps > 0 ? opts.fixed_steps : step_count(tau, opts.dtau);
  TS m2 = solve_mj_final(F2, prop, m0, a.values(), ctx.alpha(), tau, n, opts.scheme);
  out.m2 = TwoScaleField3(slow, fast, std::move(m2));
  return out;
}

VectorField3 assemble_m_tilde(const VectorField3& m0_slow, const std::vector<const TwoScaleField3*>& correctors,
                              double eps, const PeriodicGrid& fine) {
  check_eps(eps, "assemble_m_tilde");
  Vec3<Array1<double>> m = refine_field(m0_slow, fine).components();
  double w = 1.0;
  for (const TwoScaleField3* mj : correctors) {
    w *= eps;
    if (!mj) continue;
    detail::require_same(mj->slow_grid(), m0_slow.grid(), "assemble_m_tilde");
    m = axpy(m, w, evaluate_diagonal(*mj, eps, fine).components());
  }
  return VectorField3(fine, std::move(m));
}

std::vector<HistoryRow> corrector_history(const std::function<VectorField3(double t)>& m0_of_t, double alpha,
                                          const MaterialCoefficient& a, const CellSolution& cell,
                                          const HistoryOptions& opts) {
  if (!(opts.tau_end > 0.0) || !(opts.dtau > 0.0) || !(opts.refresh_dtau > 0.0))
    throw ParameterError("corrector_history: tau_end, dtau and refresh_dtau must be positive");
  const long n_out = step_count(opts.tau_end, opts.dtau);
  const double h = opts.tau_end / static_cast<double>(n_out);
  const Index ny = a.grid().size();
  const double eps2 = opts.eps * opts.eps;

  ProjectionContext ctx(m0_of_t(0.0), alpha);
  auto prop = std::make_unique<TauPropagator>(ctx, a);
  TS m0 = ctx.m0_two_scale(ny);
  TS ansatz = outer(derivative(ctx.m0().components(), 1), cell.chi.values());
  TS v_anchor = v_initial(ctx, cell);  // v at the last refresh
  double tau_anchor = 0.0, next_refresh = opts.refresh_dtau;
  TS cv_anchor = prop->to_modes(v_anchor);
  TS m2 = zeros_like(m0);
  TS dtm0 = dt_m0(ctx, opts.a_h, ny);

  auto v_of = [&](double s) { return prop->from_modes(prop->apply_modes(cv_anchor, s - tau_anchor)); };
  auto F2 = [&](double s) {
    const TS m1 = ansatz + v_of(s);
    const RecursionBundle b = recursion_quantities(std::vector<TS>{m0, m1}, a.values(), 1);
    return forcing_Fj(b, m0, alpha, 2, [&](int) { return dtm0; });
  };

  auto l2 = [](const TS& u) { return std::sqrt((u[0].square() + u[1].square() + u[2].square()).mean()); };
  std::vector<HistoryRow> rows;
  auto record = [&](double tau) {
    const TS v = v_of(tau);
    const TS m1 = ansatz + v;
    const Array2<double> par = dot(m0, m1);
    const auto mean = row_mean(m1);
    rows.push_back({tau, l2(v), l2(m1), l2(m2), par.abs().maxCoeff(),
                    static_cast<double>(length(mean).maxCoeff())});
  };
  record(0.0);
  for (long i = 0; i < n_out; ++i) {
    const double tau = static_cast<double>(i) * h;
    if (opts.J >= 2) {
      const TauPropagator& p = *prop;
      const EtdStepper st{p, m0, etd_weights(spread_lambda(p.spectrum(), m0[0].rows()), alpha, h), h};
      TS c = p.to_modes(m2);
      c = st.step(c, p.to_modes(F2(tau)), p.to_modes(F2(tau + 0.5 * h)), p.to_modes(F2(tau + h)));
      m2 = p.from_modes(c);
    }
    const double tau1 = static_cast<double>(i + 1) * h;
    if (tau1 >= next_refresh - 1e-12 && i + 1 < n_out) {
      // Carry v across the refresh; m0, the ansatz part and d_t m0 follow the new slice.
      const TS v_now = v_of(tau1);
      ctx = ProjectionContext(m0_of_t(eps2 * tau1), alpha);
      prop = std::make_unique<TauPropagator>(ctx, a);
      m0 = ctx.m0_two_scale(ny);
      ansatz = outer(derivative(ctx.m0().components(), 1), cell.chi.values());
      dtm0 = dt_m0(ctx, opts.a_h, ny);
      v_anchor = v_now;
      cv_anchor = prop->to_modes(v_anchor);
      tau_anchor = tau1;
      next_refresh += opts.refresh_dtau;
    }
    record(tau1);
  }
  return rows;
}

}  // namespace llh
