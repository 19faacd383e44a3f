#include "doctest.h"
#include "helpers.hpp"

using namespace llh;
using std::numbers::pi;

TEST_CASE("periodic grid invariants") {
  for (Index n : {8, 64, 1024}) {
    PeriodicGrid g(n);
    CHECK(g.spacing() * static_cast<double>(n) == 1.0);
    CHECK(g.nodes()(n - 1) == doctest::Approx(1.0 - g.spacing()));
  }
  CHECK_THROWS_AS(PeriodicGrid(4), ParameterError);
  CHECK_THROWS_AS(PeriodicGrid(48), ParameterError);
  CHECK(next_pow2(70) == 128);
  CHECK(next_pow2(3) == 8);
}

TEST_CASE("derivative of sin is exact") {
  const PeriodicGrid g(64);
  const auto f = ScalarField::sample(g, [](double x) { return std::sin(2 * pi * x); });
  const auto d = spectral_derivative(f, 1);
  const Array1<double> exact = 2 * pi * (2 * pi * g.nodes()).cos();
  CHECK((d.values() - exact).abs().maxCoeff() < 1e-10);
}

TEST_CASE("derivatives of a constant vanish") {
  const PeriodicGrid g(32);
  const auto f = ScalarField::constant(g, 3.5);
  for (int p = 1; p <= 4; ++p) CHECK(spectral_derivative(f, p).values().abs().maxCoeff() < 1e-12);
}

TEST_CASE("derivative of exp(cos) against fourth-order differences") {
  const Index n = 256;
  const PeriodicGrid g(n);
  const Array1<double> x = g.nodes();
  const Array1<double> f = (2 * pi * x).cos().exp();
  const double h = g.spacing();
  Array1<double> fd(n);
  for (Index i = 0; i < n; ++i) {
    auto at = [&](Index k) { return f((i + k + n) % n); };
    fd(i) = (at(-2) - 8 * at(-1) + 8 * at(1) - at(2)) / (12 * h);
  }
  const Array1<double> d = derivative<double>(f, 1);
  const Array1<double> exact = -2 * pi * (2 * pi * x).sin() * f;
  CHECK((d - exact).abs().maxCoeff() < 1e-10);
  // The gap is the stencil truncation error, bounded by h^4/30 max|f^(5)|.
  const double gap = (d - fd).abs().maxCoeff();
  const double bound = std::pow(h, 4) / 30.0 * derivative<double>(f, 5).abs().maxCoeff();
  CHECK(gap < bound);
  CHECK(gap > 0.5 * bound);
}

TEST_CASE("order and finiteness checks") {
  Array1<double> f = Array1<double>::Zero(16);
  CHECK_THROWS_AS(derivative<double>(f, 9), ResolutionError);
  f(5) = std::numeric_limits<double>::quiet_NaN();
  try {
    derivative<double>(f, 1);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("node (5") != std::string::npos);
  }
}

TEST_CASE("differentiation is linear and mean free") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = testing::random_bandlimited(128, 30, rng);
    const auto g = testing::random_bandlimited(128, 30, rng);
    for (int p = 1; p <= 3; ++p) {
      const Array1<double> lhs = derivative<double>(Array1<double>(2.5 * f - 0.75 * g), p);
      const Array1<double> rhs = 2.5 * derivative<double>(f, p) - 0.75 * derivative<double>(g, p);
      const double scale = std::max(1.0, rhs.abs().maxCoeff());
      CHECK((lhs - rhs).abs().maxCoeff() < 1e-12 * scale);
      CHECK(std::abs(derivative<double>(f, p).mean()) < 1e-12 * scale);
    }
  }
}

TEST_CASE("evaluate_diagonal maps fast modes") {
  const PeriodicGrid slow(16), fast(16), out(64);
  const auto u = TwoScaleField3::sample(slow, fast, [](double, double y) { return Vector3(std::sin(2 * pi * y), 0, 0); });
  const auto d = evaluate_diagonal(u, 1.0 / 8.0, out);
  const Array1<double> exact = (16 * pi * out.nodes()).sin();
  CHECK((d[0] - exact).abs().maxCoeff() < 1e-10);
  CHECK(d[1].abs().maxCoeff() < 1e-14);
}

TEST_CASE("evaluate_diagonal of a y-independent field re-interpolates") {
  const PeriodicGrid slow(32), fast(8), out(128);
  auto f = [](double x) { return Vector3(std::cos(2 * pi * x), std::sin(4 * pi * x), 1.0); };
  const auto u = TwoScaleField3::sample(slow, fast, [&](double x, double) { return f(x); });
  const auto d = evaluate_diagonal(u, 0.1, out);
  const auto ref = VectorField3::sample(out, f);
  CHECK(max_abs(d.components() - ref.components()) < 1e-10);
}

TEST_CASE("evaluate_diagonal closed form") {
  const PeriodicGrid slow(32), fast(32), out(256);
  const double eps = 1.0 / 16.0;
  const auto u = TwoScaleField3::sample(slow, fast, [](double x, double y) {
    return Vector3(std::sin(2 * pi * x) * std::cos(2 * pi * y), 0, 0);
  });
  const auto d = evaluate_diagonal(u, eps, out);
  const Array1<double> x = out.nodes();
  const Array1<double> exact = (2 * pi * x).sin() * (2 * pi * x / eps).cos();
  CHECK((d[0] - exact).abs().maxCoeff() < 1e-9);
}

TEST_CASE("evaluate_diagonal errors") {
  const auto u = TwoScaleField3::zero(PeriodicGrid(16), PeriodicGrid(16));
  CHECK_THROWS_AS(evaluate_diagonal(u, 0.0, PeriodicGrid(64)), ParameterError);
  CHECK_THROWS_AS(evaluate_diagonal(u, 1.0, PeriodicGrid(64)), ParameterError);
  try {
    evaluate_diagonal(u, 1.0 / 16.0, PeriodicGrid(64));
    FAIL("expected ResolutionError");
  } catch (const ResolutionError& e) {
    CHECK(std::string(e.what()).find("n_points >= 128") != std::string::npos);
  }
}

TEST_CASE("chain rule along the diagonal") {
  const PeriodicGrid slow(16), fast(16), out(256);
  const double eps = 1.0 / 8.0;
  std::mt19937_64 rng(3);
  const TwoScaleField3 u(slow, fast, testing::random_two_scale3(16, 16, 5, 5, rng));
  const auto du = derivative(evaluate_diagonal(u, eps, out).components(), 1);
  const auto dx = spectral_derivative(u, Axis::slow, 1);
  const auto dy = spectral_derivative(u, Axis::fast, 1);
  const auto rhs = axpy(evaluate_diagonal(dx, eps, out).components(), 1.0 / eps,
                        evaluate_diagonal(dy, eps, out).components());
  CHECK(max_abs(du - rhs) < 1e-9 * max_abs(rhs));
}

TEST_CASE("refine_field") {
  const auto c = VectorField3::constant(PeriodicGrid(16), Vector3(0.3, -0.2, 0.9));
  const auto rc = refine_field(c, PeriodicGrid(128));
  CHECK((rc[0] - 0.3).abs().maxCoeff() < 1e-14);

  auto s = [](double x) { return Vector3(std::sin(2 * pi * x), 0, 0); };
  const auto r = refine_field(VectorField3::sample(PeriodicGrid(32), s), PeriodicGrid(128));
  CHECK((r[0] - (2 * pi * PeriodicGrid(128).nodes()).sin()).abs().maxCoeff() < 1e-12);

  // Mode-space oracle: evaluate the same trigonometric polynomial on both grids.
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gdist;
  std::vector<double> ca(16), sa(16);
  for (int k = 0; k < 16; ++k) {
    ca[k] = gdist(rng);
    sa[k] = gdist(rng);
  }
  auto poly = [&](double x) {
    double v = ca[0];
    for (int k = 1; k < 16; ++k) v += ca[k] * std::cos(2 * pi * k * x) + sa[k] * std::sin(2 * pi * k * x);
    return Vector3(v, 0, 0);
  };
  const auto fine = refine_field(VectorField3::sample(PeriodicGrid(64), poly), PeriodicGrid(256));
  const auto oracle = VectorField3::sample(PeriodicGrid(256), poly);
  CHECK((fine[0] - oracle[0]).abs().maxCoeff() < 1e-10);

  CHECK_THROWS_AS(refine_field(oracle, PeriodicGrid(64)), ResolutionError);
  CHECK_NOTHROW(refine_field(oracle, PeriodicGrid(64), true));
}

TEST_CASE("field invariants") {
  const PeriodicGrid g(8);
  Vec3<Array1<double>> c{Array1<double>::Constant(8, 2.0), Array1<double>::Zero(8), Array1<double>::Zero(8)};
  CHECK_THROWS_AS(VectorField3(g, c, true), NumericalError);
  CHECK_NOTHROW(VectorField3(g, c, false));
  CHECK_THROWS_AS(ScalarField(g, Array1<double>::Zero(4)), GridMismatchError);
}
