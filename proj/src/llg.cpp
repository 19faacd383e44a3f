#include "llhomog/llg.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <numbers>

namespace llh {

using V3 = Vec3<Array1<double>>;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    std::ostringstream os;
    os << "alpha must lie in (0,1] (A3), got " << alpha;
    throw ParameterError(os.str());
  }
}

LLOperatorContext::LLOperatorContext(PeriodicGrid grid, std::optional<ScalarField> a, double a_h, double alpha)
    : grid_(grid), coefficient_(std::move(a)), a_h_(a_h), alpha_(alpha) {
  check_alpha(alpha);
  if (coefficient_) {
    if (!(coefficient_->values().minCoeff() > 0.0)) throw ParameterError("LLOperatorContext: coefficient must be positive");
    a_max_ = coefficient_->values().maxCoeff();
  } else {
    if (!(a_h > 0.0)) throw ParameterError("LLOperatorContext: effective coefficient must be positive");
    a_max_ = a_h;
  }
}

LLOperatorContext LLOperatorContext::fine(ScalarField a_eps, double alpha) {
  const PeriodicGrid g = a_eps.grid();
  return LLOperatorContext(g, std::move(a_eps), 0.0, alpha);
}

LLOperatorContext LLOperatorContext::homogenized(PeriodicGrid grid, double a_h, double alpha) {
  return LLOperatorContext(grid, std::nullopt, a_h, alpha);
}

std::string LLOperatorContext::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (coefficient_)
    os << "fine, n=" << grid_.size() << ", a_max=" << a_max_;
  else
    os << "homogenized, n=" << grid_.size() << ", a_h=" << a_h_;
  os << ", alpha=" << alpha_;
  return os.str();
}

V3 apply_exchange(const V3& m, const LLOperatorContext& ctx) {
  V3 h;
  for (int k = 0; k < 3; ++k) {
    if (m[k].size() != ctx.grid().size()) throw GridMismatchError("apply_exchange: grid mismatch");
    if (ctx.is_homogenized()) {
      h[k] = ctx.a_h() * derivative<double>(m[k], 2);
    } else {
      const Array1<double> flux = ctx.coefficient()->values() * derivative<double>(m[k], 1);
      h[k] = derivative<double>(flux, 1);
    }
  }
  return h;
}

VectorField3 apply_exchange(const VectorField3& m, const LLOperatorContext& ctx) {
  detail::require_same(m.grid(), ctx.grid(), "apply_exchange");
  return VectorField3(m.grid(), apply_exchange(m.components(), ctx));
}

V3 ll_rhs(const V3& m, const LLOperatorContext& ctx) {
  const V3 h = apply_exchange(m, ctx);
  const V3 mxh = cross(m, h);
  return axpy(-mxh, -ctx.alpha(), cross(m, mxh));
}

VectorField3 ll_rhs(const VectorField3& m, const LLOperatorContext& ctx) {
  detail::require_same(m.grid(), ctx.grid(), "ll_rhs");
  return VectorField3(m.grid(), ll_rhs(m.components(), ctx));
}

double exchange_energy(const VectorField3& m, const LLOperatorContext& ctx) {
  detail::require_same(m.grid(), ctx.grid(), "exchange_energy");
  const V3 dm = derivative(m.components(), 1);
  const Array1<double> g = dot(dm, dm);
  if (ctx.is_homogenized()) return 0.5 * ctx.a_h() * g.mean();
  return 0.5 * (ctx.coefficient()->values() * g).mean();
}

std::string to_string(TimeScheme s) {
  return s == TimeScheme::rk4_projected ? "rk4_projected" : "imex_midpoint_projected";
}

TimeScheme parse_time_scheme(const std::string& s) {
  if (s == "rk4_projected" || s == "rk4") return TimeScheme::rk4_projected;
  if (s == "imex_midpoint_projected" || s == "imex") return TimeScheme::imex_midpoint_projected;
  throw ParameterError("unknown time scheme '" + s + "' (expected rk4_projected or imex_midpoint_projected)");
}

double rk4_dt_limit(const LLOperatorContext& ctx, double cfl_safety) {
  const double h = ctx.grid().spacing();
  return cfl_safety * h * h / ctx.a_max();
}

double imex_beta(const LLOperatorContext& ctx) {
  const double a = ctx.alpha();
  return (1.0 + a * a) * ctx.a_max() / (2.0 * a);
}

void rk4_step(V3& m, const LLOperatorContext& ctx, double dt) {
  const V3 k1 = ll_rhs(m, ctx);
  const V3 k2 = ll_rhs(axpy(m, 0.5 * dt, k1), ctx);
  const V3 k3 = ll_rhs(axpy(m, 0.5 * dt, k2), ctx);
  const V3 k4 = ll_rhs(axpy(m, dt, k3), ctx);
  for (int c = 0; c < 3; ++c) m[c] += (dt / 6.0) * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
}

namespace {

// (I - c D^2)^{-1} applied componentwise in Fourier space.
V3 helmholtz_solve(const V3& f, double c) {
  using std::numbers::pi;
  const Index n = f[0].size();
  auto& fft = RealFft<double>::local();
  RealFft<double>::Spectrum X;
  V3 out;
  for (int k = 0; k < 3; ++k) {
    fft.forward(f[k], X);
    for (Index q = 0; q < X.size(); ++q) {
      const double w = 2.0 * pi * static_cast<double>(q);
      X(q) /= 1.0 + c * w * w;
    }
    fft.inverse(X, out[k], n);
  }
  return out;
}

V3 d2(const V3& m) { return derivative(m, 2); }

}  // namespace

void imex_step(V3& m, const LLOperatorContext& ctx, double dt) {
  const double beta = imex_beta(ctx);
  // Predictor: semi-implicit Euler to the midpoint.
  const V3 n0 = axpy(ll_rhs(m, ctx), -beta, d2(m));
  const V3 half = helmholtz_solve(axpy(m, 0.5 * dt, n0), 0.5 * dt * beta);
  // Corrector with the stabilisation taken implicitly at the new level.
  const V3 n1 = axpy(ll_rhs(half, ctx), -beta, d2(half));
  m = helmholtz_solve(axpy(m, dt, n1), dt * beta);
}

void project_unit(V3& m) { m = normalized(m); }

namespace {

void require_finite_state(const V3& m, long step) {
  for (int k = 0; k < 3; ++k)
    if (!m[k].allFinite()) {
      std::ostringstream os;
      os << "integrate: non-finite state after step " << step;
      throw NumericalError(os.str());
    }
}

}  // namespace

Trajectory integrate(const VectorField3& m_init, const LLOperatorContext& ctx, double t_end,
                     const IntegrateOptions& opts) {
  detail::require_same(m_init.grid(), ctx.grid(), "integrate");
  if (!(t_end >= 0.0)) throw ParameterError("integrate: t_end must be non-negative");
  if (opts.output_stride < 1) throw ParameterError("integrate: output_stride must be >= 1");
  if (!(opts.cfl_safety > 0.0)) throw ParameterError("integrate: cfl_safety must be positive");

  const bool explicit_scheme = opts.scheme == TimeScheme::rk4_projected;
  const double limit = rk4_dt_limit(ctx, opts.cfl_safety);
  double dt_req = opts.dt;
  if (dt_req <= 0.0) dt_req = explicit_scheme ? limit : 0.5 * ctx.grid().spacing();

  long steps = 0;
  if (t_end > 0.0) {
    steps = opts.fixed_steps > 0 ? opts.fixed_steps : static_cast<long>(std::ceil(t_end / dt_req - 1e-9));
    steps = std::max(steps, 1L);
  }
  const double dt = steps > 0 ? t_end / static_cast<double>(steps) : 0.0;
  if (explicit_scheme && dt > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os.precision(6);
    os << "integrate: dt = " << dt << " violates the explicit stability limit; admissible dt <= " << limit
       << " (cfl_safety " << opts.cfl_safety << " * h^2 / a_max)";
    throw ParameterError(os.str());
  }

  Trajectory traj;
  traj.scheme = to_string(opts.scheme);
  traj.dt = dt;
  traj.steps = steps;
  traj.context = ctx.describe();

  V3 m = m_init.components();
  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.states.emplace_back(ctx.grid(), m, opts.project, opts.project ? opts.unit_tol : 0.0);
  };
  record(0.0);
  for (long s = 1; s <= steps; ++s) {
    if (explicit_scheme)
      rk4_step(m, ctx, dt);
    else
      imex_step(m, ctx, dt);
    require_finite_state(m, s);
    if (opts.project) project_unit(m);
    if (s % opts.output_stride == 0 || s == steps) record(s == steps ? t_end : static_cast<double>(s) * dt);
  }
  return traj;
}

Vector3 fig1_initial_value(double x) {
  using std::numbers::pi;
  const Vector3 mnn(0.5 + std::exp(-0.1 * std::cos(2.0 * pi * (x - 0.2))), 0.5 + std::exp(-0.2 * std::cos(2.0 * pi * x)),
                    0.5 + std::exp(-0.1 * std::cos(2.0 * pi * (x - 0.8))));
  return mnn / mnn.norm();
}

VectorField3 build_initial_data(const InitialSpec& spec, const PeriodicGrid& grid) {
  switch (spec.kind) {
    case InitialSpec::Kind::fig1:
      return VectorField3::sample(grid, fig1_initial_value, true);
    case InitialSpec::Kind::constant: {
      if (std::abs(spec.direction.norm() - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "constant initial data must be a unit vector, |v| = " << spec.direction.norm();
        throw ParameterError(os.str());
      }
      return VectorField3::constant(grid, spec.direction, true);
    }
    case InitialSpec::Kind::custom_table: {
      const auto m = static_cast<Index>(spec.table.size());
      if (m < PeriodicGrid::kMinPoints || (m & (m - 1)) != 0)
        throw ParameterError("initial table needs a power-of-two number (>= 8) of samples");
      V3 c;
      for (int k = 0; k < 3; ++k) {
        Array1<double> t(m);
        for (Index i = 0; i < m; ++i) t(i) = spec.table[i](k);
        c[k] = resample<double>(t, grid.size(), true);
      }
      const Array1<double> len = length(c);
      for (Index i = 0; i < grid.size(); ++i)
        if (!(len(i) > 1e-300)) {
          std::ostringstream os;
          os << "initial data has zero length at node " << i << " before normalisation";
          throw ParameterError(os.str());
        }
      return VectorField3(grid, normalized(c), true);
    }
  }
  throw ParameterError("unknown initial data kind");
}

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

void write_snapshot(const std::filesystem::path& path, const VectorField3& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const std::uint64_t n = static_cast<std::uint64_t>(m.grid().size());
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (int k = 0; k < 3; ++k)
    out.write(reinterpret_cast<const char*>(m[k].data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!out) throw Error("write failed: " + path.string());
}

VectorField3 read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!in || n > (1u << 26)) throw Error("bad snapshot header in " + path.string());
  const PeriodicGrid grid(static_cast<Index>(n));
  V3 c;
  for (int k = 0; k < 3; ++k) {
    c[k].resize(static_cast<Index>(n));
    in.read(reinterpret_cast<char*>(c[k].data()), static_cast<std::streamsize>(n * sizeof(double)));
  }
  if (!in) throw Error("truncated snapshot " + path.string());
  return VectorField3(grid, std::move(c));
}

}  // namespace llh
