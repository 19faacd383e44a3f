#include "doctest.h"
#include "helpers.hpp"
#include "llhomog/analysis.hpp"

using namespace llh;
using std::numbers::pi;

namespace {

const std::vector<double> kEps{1.0 / 10, 1.0 / 20, 1.0 / 40, 1.0 / 80};
const std::vector<int> kOrders{1};

VectorField3 tilted(const PeriodicGrid& g, double delta) {
  const Array1<double> x = g.nodes();
  return VectorField3(g, {delta * (2 * pi * x).sin(), Array1<double>::Zero(g.size()), Array1<double>::Ones(g.size())});
}

}  // namespace

TEST_CASE("rate fit oracles") {
  std::vector<double> v;
  for (double e : kEps) v.push_back(e);
  auto f = fit_rate(kEps, v);
  CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0));

  v.clear();
  for (double e : kEps) v.push_back(3.0 * std::pow(e, 1.5));
  f = fit_rate(kEps, v);
  CHECK(f.slope == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  for (int trial = 0; trial < 20; ++trial) {
    v.clear();
    for (double e : kEps) v.push_back(e * (1.0 + noise(rng)));
    f = fit_rate(kEps, v);
    CHECK(f.slope > 0.9);
    CHECK(f.slope < 1.1);
  }
}

TEST_CASE("rate fit rejects bad input") {
  const std::vector<double> two{0.1, 0.05};
  CHECK_THROWS_AS(fit_rate(two, two), ParameterError);
  const std::vector<double> dup{0.1, 0.1, 0.05};
  CHECK_THROWS_AS(fit_rate(dup, dup), ParameterError);
  const std::vector<double> bad{1e-3, 0.0, 1e-4, 1e-5};
  try {
    fit_rate(kEps, bad);
    FAIL("expected an exception");
  } catch (const ParameterError& e) {
    CHECK(std::string(e.what()).find("index 1") != std::string::npos);
  }
}

TEST_CASE("decay fit oracles") {
  std::vector<double> tau, n, c;
  for (int i = 0; i <= 20; ++i) {
    tau.push_back(0.25 * i);
    n.push_back(std::exp(-2.0 * tau.back()));
    c.push_back(0.7);
  }
  CHECK(fit_decay(tau, n).rate == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit_decay(tau, n).r_squared == doctest::Approx(1.0));
  CHECK(std::abs(fit_decay(tau, c).rate) < 1e-14);
  CHECK_THROWS_AS(fit_decay(tau, n, 4.5), ParameterError);
}

TEST_CASE("error norms") {
  const PeriodicGrid g(64);
  const VectorField3 base = tilted(g, 0.0);
  const double delta = 0.01;
  const auto r = compute_error(base, tilted(g, delta), kOrders);
  CHECK(r.l2 == doctest::Approx(delta / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(r.hq.at(1) == doctest::Approx(delta * std::sqrt((1 + 4 * pi * pi) / 2)).epsilon(1e-12));
  CHECK_THROWS_AS(compute_error(base, tilted(PeriodicGrid(32), delta), kOrders), GridMismatchError);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto u = testing::random_unit_field(64, 8, rng);
    const auto v = testing::random_unit_field(64, 8, rng);
    const auto w = testing::random_unit_field(64, 8, rng);
    const double uv = compute_error(u, v, kOrders).l2;
    CHECK(uv == doctest::Approx(compute_error(v, u, kOrders).l2).epsilon(1e-14));
    CHECK(uv <= compute_error(u, w, kOrders).l2 + compute_error(w, v, kOrders).l2 + 1e-14);
  }
}

TEST_CASE("error against a trajectory time") {
  const PeriodicGrid g(32);
  const auto m = build_initial_data({}, g);
  const auto ctx = LLOperatorContext::homogenized(g, 1.0, 0.1);
  const auto traj = integrate(m, ctx, 0.01, {.output_stride = 10});
  CHECK(compute_error(traj, 0.0, m, kOrders).l2 == 0.0);
  CHECK(compute_error(traj, traj.final_time(), traj.final_state(), kOrders).l2 == 0.0);
  CHECK_THROWS_AS(compute_error(traj, 0.0033, m, kOrders), ParameterError);
}

TEST_CASE("length deviation") {
  const PeriodicGrid g(32);
  const double delta = 1e-3;
  const VectorField3 m(g, {Array1<double>::Zero(32), Array1<double>::Zero(32), Array1<double>::Constant(32, 1 + delta)});
  const auto r = length_deviation(m, kOrders);
  CHECK(r.l2 == doctest::Approx(2 * delta + delta * delta).epsilon(1e-12));
  CHECK(r.hq.at(1) == doctest::Approx(2 * delta + delta * delta).epsilon(1e-12));
  CHECK(length_deviation(tilted(g, 0.0), kOrders).linf == 0.0);
}

TEST_CASE("residual of an equilibrium vanishes") {
  const PeriodicGrid g(64);
  const auto a = sample_eps_coefficient(build_coefficient(CoefficientSpec::sine(0.5), PeriodicGrid(64)), 1.0 / 8.0, g);
  const VectorField3 m = VectorField3::constant(g, Vector3(0.6, 0.0, 0.8), true);
  const std::vector<VectorField3> series(5, m);
  // The stencil sum vanishes up to roundoff of order eps_mach / dt.
  CHECK(max_abs(residual_eta(series, a, 0.1, 1e-4).components()) < 10 * std::numeric_limits<double>::epsilon() / 1e-4);
  CHECK_THROWS_AS(residual_eta(std::span(series).first(4), a, 0.1, 1e-4), ParameterError);
  CHECK_THROWS_AS(residual_eta(series, a, 0.1, 0.0), ParameterError);
}

TEST_CASE("residual time difference is fourth order") {
  const PeriodicGrid g(32);
  std::mt19937_64 rng(5);
  const auto p = testing::random_bandlimited3(32, 4, rng);
  const auto q = testing::random_bandlimited3(32, 4, rng);
  const ScalarField a = ScalarField::constant(g, 1.0);
  // Smooth synthetic curve; the stencil error is isolated by Richardson differences.
  auto at = [&](double t) {
    Vec3<Array1<double>> m;
    for (int k = 0; k < 3; ++k) m[k] = p[k] + std::sin(3 * t) * q[k] + (k == 2 ? 3.0 : 0.0);
    return VectorField3(g, normalized(m), true);
  };
  auto eta = [&](double s) {
    std::vector<VectorField3> series;
    for (int k = -2; k <= 2; ++k) series.push_back(at(0.3 + k * s));
    return residual_eta(series, a, 0.1, s).components();
  };
  const double s = 0.04;
  const double d1 = max_abs(eta(s) - eta(s / 2)), d2 = max_abs(eta(s / 2) - eta(s / 4));
  const double order = std::log2(d1 / d2);
  CHECK(order > 3.5);
  CHECK(order < 4.5);
}

TEST_CASE("gradient monitor") {
  const PeriodicGrid g(64);
  const Array1<double> x = g.nodes();
  const VectorField3 m(g, {(2 * pi * x).cos(), (2 * pi * x).sin(), Array1<double>::Zero(64)}, true);
  CHECK(gradient_monitor(m) == doctest::Approx(2 * pi).epsilon(1e-12));
}

TEST_CASE("sweep record fits") {
  std::vector<ErrorRecord> recs;
  for (double e : kEps) {
    ErrorRecord r;
    r.eps = e;
    r.err.l2 = 2 * e;
    r.err.hq[1] = e * e;
    r.eta.l2 = 0.5 * e;
    r.len_dev.l2 = e * e * e;
    recs.push_back(r);
  }
  CHECK(fit_records(recs, "err_L2").slope == doctest::Approx(1.0));
  CHECK(fit_records(recs, "err_H1").slope == doctest::Approx(2.0));
  CHECK(fit_records(recs, "eta_L2").slope == doctest::Approx(1.0));
  CHECK(fit_records(recs, "len_dev_L2").slope == doctest::Approx(3.0));
  CHECK_THROWS_AS(fit_records(recs, "err_H7"), ParameterError);
}
