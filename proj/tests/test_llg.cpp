#include <filesystem>

#include "doctest.h"
#include "helpers.hpp"
#include "llhomog/llg.hpp"

using namespace llh;
using std::numbers::pi;

namespace {

LLOperatorContext sine_context(Index n, double alpha) {
  const auto a = ScalarField::sample(PeriodicGrid(n), [](double x) { return 1.0 + 0.5 * std::sin(2 * pi * x); });
  return LLOperatorContext::fine(a, alpha);
}

}  // namespace

TEST_CASE("context validation") {
  CHECK_THROWS_AS(LLOperatorContext::homogenized(PeriodicGrid(8), 1.0, 0.0), ParameterError);
  CHECK_THROWS_AS(LLOperatorContext::homogenized(PeriodicGrid(8), 1.0, 1.5), ParameterError);
  CHECK_NOTHROW(LLOperatorContext::homogenized(PeriodicGrid(8), 1.0, 1.0));
  CHECK_THROWS_AS(LLOperatorContext::homogenized(PeriodicGrid(8), -1.0, 0.5), ParameterError);
}

TEST_CASE("exchange operator") {
  const PeriodicGrid g(64);
  const auto one = LLOperatorContext::fine(ScalarField::constant(g, 1.0), 0.1);
  const auto c = VectorField3::constant(g, Vector3(0, 0, 1), true);
  CHECK(max_abs(apply_exchange(c, one).components()) < 1e-12);

  const auto s = VectorField3::sample(g, [](double x) { return Vector3(std::sin(2 * pi * x), 0, 0); });
  const Array1<double> x = g.nodes();
  CHECK((apply_exchange(s, one)[0] + 4 * pi * pi * (2 * pi * x).sin()).abs().maxCoeff() < 1e-9);

  // (a m')' with a = 1 + sin/2, m = cos: -2 pi^2 sin cos - 4 pi^2 a cos
  const auto ctx = sine_context(64, 0.1);
  const auto m = VectorField3::sample(g, [](double x) { return Vector3(std::cos(2 * pi * x), 0, 0); });
  const Array1<double> a = 1.0 + 0.5 * (2 * pi * x).sin();
  const Array1<double> oracle = -2 * pi * pi * (2 * pi * x).sin() * (2 * pi * x).cos() - 4 * pi * pi * a * (2 * pi * x).cos();
  CHECK((apply_exchange(m, ctx)[0] - oracle).abs().maxCoeff() < 1e-9);

  CHECK_THROWS_AS(apply_exchange(VectorField3::zero(PeriodicGrid(32)), ctx), GridMismatchError);
}

TEST_CASE("right-hand side is tangent and vanishes at equilibria") {
  const auto ctx = sine_context(64, 0.3);
  CHECK(max_abs(ll_rhs(VectorField3::constant(PeriodicGrid(64), Vector3(0.6, 0, 0.8), true), ctx).components()) < 1e-12);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = testing::random_unit_field(64, 8, rng);
    const auto r = ll_rhs(m, ctx);
    CHECK(dot(r.components(), m.components()).abs().maxCoeff() < 1e-12 * std::max(1.0, max_abs(r.components())));
  }
}

TEST_CASE("one RK4 step dissipates exchange energy") {
  std::mt19937_64 rng(2);
  const auto ctx = sine_context(64, 0.5);
  const auto m = testing::random_unit_field(64, 6, rng);
  Vec3<Array1<double>> s = m.components();
  rk4_step(s, ctx, rk4_dt_limit(ctx, 0.2));
  project_unit(s);
  CHECK(exchange_energy(VectorField3(m.grid(), s), ctx) < exchange_energy(m, ctx));
}

TEST_CASE("constant states are fixed points") {
  const auto ctx = sine_context(16, 0.2);
  const auto m0 = build_initial_data({InitialSpec::Kind::constant, Vector3(0, 0, 1), {}}, PeriodicGrid(16));
  const auto traj = integrate(m0, ctx, 1.0, {.output_stride = 200});
  CHECK(traj.times.front() == 0.0);
  CHECK(traj.final_time() == 1.0);
  for (const auto& s : traj.states) CHECK(max_abs(s.components() - m0.components()) < 1e-12);
}

TEST_CASE("energy decreases along a trajectory") {
  std::mt19937_64 rng(9);
  const auto ctx = sine_context(32, 0.5);
  const auto traj = integrate(testing::random_unit_field(32, 5, rng), ctx, 0.01);
  for (std::size_t i = 1; i < traj.states.size(); ++i)
    CHECK(exchange_energy(traj.states[i], ctx) <= exchange_energy(traj.states[i - 1], ctx) + 1e-8);
}

TEST_CASE("RK4 is fourth order in time") {
  const auto ctx = sine_context(16, 0.5);
  const auto m0 = build_initial_data({}, PeriodicGrid(16));
  const double t_end = 0.02;
  auto run = [&](long steps) { return integrate(m0, ctx, t_end, {.output_stride = 1 << 20, .fixed_steps = steps}).final_state(); };
  const long n0 = static_cast<long>(std::ceil(t_end / rk4_dt_limit(ctx, 0.2))) * 2;
  const auto u1 = run(n0), u2 = run(2 * n0), u4 = run(4 * n0);
  const double e1 = max_abs(u1.components() - u2.components());
  const double e2 = max_abs(u2.components() - u4.components());
  const double order = std::log2(e1 / e2);
  CHECK(order > 3.7);
  CHECK(order < 4.3);
}

TEST_CASE("unprojected drift per step is fifth order") {
  const auto ctx = sine_context(16, 0.5);
  std::mt19937_64 rng(4);
  const auto m0 = testing::random_unit_field(16, 8, rng);
  auto drift = [&](double dt) {
    Vec3<Array1<double>> s = m0.components();
    rk4_step(s, ctx, dt);
    return (length(s) - 1.0).abs().maxCoeff();
  };
  const double dt = rk4_dt_limit(ctx, 0.2) / 4;
  const double order = std::log2(drift(dt) / drift(dt / 2));
  CHECK(order > 4.5);
  CHECK(order < 5.5);
}

TEST_CASE("CFL and blow-up diagnostics") {
  const auto ctx = sine_context(32, 0.1);
  const auto m0 = build_initial_data({}, PeriodicGrid(32));
  try {
    integrate(m0, ctx, 0.01, {.dt = 1e-3});
    FAIL("expected ParameterError");
  } catch (const ParameterError& e) {
    CHECK(std::string(e.what()).find("admissible dt") != std::string::npos);
  }
  CHECK_THROWS_AS(integrate(m0, ctx, 1.0, {.cfl_safety = 4.0, .project = false}), NumericalError);
}

TEST_CASE("fine and homogenized agree for a constant coefficient") {
  const PeriodicGrid g(32);
  const auto fine = LLOperatorContext::fine(ScalarField::constant(g, 1.3), 0.2);
  const auto hom = LLOperatorContext::homogenized(g, 1.3, 0.2);
  const auto m0 = build_initial_data({}, g);
  const auto a = integrate(m0, fine, 0.01), b = integrate(m0, hom, 0.01);
  CHECK(max_abs(a.final_state().components() - b.final_state().components()) < 1e-12);
}

TEST_CASE("IMEX scheme is stable at the default step and first order") {
  const PeriodicGrid g(64);
  const auto ctx = sine_context(64, 0.5);
  const auto m0 = build_initial_data({}, g);
  const double t_end = 0.02;
  const auto ref = integrate(m0, ctx, t_end).final_state();
  const auto coarse = integrate(m0, ctx, t_end, {.scheme = TimeScheme::imex_midpoint_projected});
  for (const auto& s : coarse.states) CHECK(s.length_deviation() < 1e-12);
  auto err = [&](long steps) {
    const auto r = integrate(m0, ctx, t_end, {.scheme = TimeScheme::imex_midpoint_projected, .fixed_steps = steps});
    return max_abs(r.final_state().components() - ref.components());
  };
  const double e1 = err(40), e2 = err(80);
  CHECK(e1 < 0.05);
  CHECK(std::log2(e1 / e2) > 0.8);
}

TEST_CASE("initial data") {
  const PeriodicGrid g(64);
  const auto m = build_initial_data({}, g);
  CHECK(m.unit_constrained());
  CHECK(m.length_deviation() < 1e-15);
  CHECK(m.at(0)(0) == doctest::Approx(0.59705473699178091).epsilon(1e-15));
  CHECK(m.at(0)(1) == doctest::Approx(0.53577166971700796).epsilon(1e-15));
  CHECK(m.at(0)(2) == doctest::Approx(0.59705473699178091).epsilon(1e-15));
  CHECK_THROWS_AS(build_initial_data({InitialSpec::Kind::constant, Vector3(0, 0, 2), {}}, g), ParameterError);
  InitialSpec zero{InitialSpec::Kind::custom_table, {}, std::vector<Vector3>(8, Vector3::Zero())};
  CHECK_THROWS_AS(build_initial_data(zero, g), ParameterError);
  InitialSpec table{InitialSpec::Kind::custom_table, {}, {}};
  for (int i = 0; i < 16; ++i) table.table.push_back(fig1_initial_value(i / 16.0));
  CHECK(build_initial_data(table, g).length_deviation() < 1e-15);
}

TEST_CASE("binary snapshot round trip") {
  const auto m = build_initial_data({}, PeriodicGrid(32));
  const auto path = std::filesystem::temp_directory_path() / "llhomog_snapshot_test.bin";
  write_snapshot(path, m);
  CHECK(std::filesystem::file_size(path) == 8 + 3 * 32 * 8);
  const auto r = read_snapshot(path);
  CHECK(max_abs(r.components() - m.components()) == 0.0);
  std::filesystem::remove(path);
}
