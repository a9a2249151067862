#include <cmath>
#include <sstream>

#include "doctest.h"
#include "mcflab/diagnostics.hpp"

using namespace mcflab;

TEST_CASE("series header contract") {
  CHECK(series_csv_header() ==
        "step,t,t_tilde,psi,area,int_Ao2,int_grad1A2,int_grad2A2,int_grad3A2,sup_A,sup_H,min_H,sup_gradH,h_tilde,"
        "diameter,topping_ratio,pinch_ratio,dt,kato_margin,gradient_pinch_ratio");
  std::ostringstream os;
  write_series_csv(os, {DiagnosticsRecord{}});
  CHECK(os.str().find('\n') == series_csv_header().size());
}

TEST_CASE("record of a round sphere") {
  const double R = 2.0;
  const auto st = make_state(build_sphere(Backend::axi, 2, R, 512), FlowMode::unnormalized);
  const auto f = curvature_field(st.surface, 1);
  const auto r = record(st, f);
  CHECK(r.area == doctest::Approx(4 * M_PI * R * R).epsilon(1e-4));
  CHECK(r.int_H2 == doctest::Approx(16 * M_PI).epsilon(1e-4));
  CHECK(r.sup_H == doctest::Approx(2 / R).epsilon(1e-6));
  CHECK(r.sup_A == doctest::Approx(std::sqrt(2.0) / R).epsilon(1e-6));
  CHECK(r.h_tilde == doctest::Approx(4 / (R * R)).epsilon(1e-6));
  CHECK(r.int_Ao2 < 1e-10);
  CHECK(r.mean_convex);
  CHECK(r.convex);
  CHECK(std::isnan(r.gradient_pinch_ratio));
}

TEST_CASE("sphere anchors: Topping 1/8, Michael-Simon 1/4 at R = 1") {
  for (double R : {0.5, 1.0, 2.0}) {
    const auto s = build_sphere(Backend::axi, 2, R, 1024);
    const auto f = curvature_field(s, 1);
    CHECK(topping_check(s, f) == doctest::Approx(0.125).epsilon(1e-3));
    // the n = 2 form is not scale invariant: v = 1 gives R^2 / 4
    const auto ms = michael_simon_check(s, f, TestFunction::constant_one);
    CHECK(ms.ratio == doctest::Approx(R * R / 4).epsilon(1e-4));
  }
}

TEST_CASE("Michael-Simon with v = |Ao| is vacuous on a round sphere") {
  const auto s = build_sphere(Backend::axi, 2, 1.0, 256);
  CHECK(michael_simon_check(s, curvature_field(s, 1), TestFunction::abs_traceless).vacuous);
  CHECK_THROWS_AS(test_function_from_string("cubic"), Error);
  CHECK(test_function_from_string("H2") == TestFunction::mean_curvature_sq);
}

TEST_CASE("Michael-Simon n = 3 form is scale invariant") {
  auto s = build_perturbed_sphere(Backend::axi, 3, 1.0, 2, 0.1, 512);
  const double a = michael_simon_check(s, curvature_field(s, 1), TestFunction::constant_one).ratio;
  s.scale(2.5);
  const double b = michael_simon_check(s, curvature_field(s, 1), TestFunction::constant_one).ratio;
  CHECK(b == doctest::Approx(a).epsilon(1e-8));
}

TEST_CASE("Hamilton interpolation ratio on perturbed spheres") {
  double prev = 1e9;
  for (int res : {512, 1024, 2048}) {
    const auto s = build_perturbed_sphere(Backend::axi, 2, 1.0, 2, 0.05, res);
    const auto h = hamilton_interpolation_check(s, curvature_field(s, 2));
    CHECK_FALSE(h.vacuous);
    CHECK(h.ratio <= 1.01);
    CHECK(h.ratio <= prev * (1 + 1e-3));
    prev = h.ratio;
  }
  const auto m = build_ellipsoid(2, 1, 1, 500);
  CHECK_THROWS_AS(hamilton_interpolation_check(m, curvature_field(m, 1)), Error);
}

TEST_CASE("area derivative identity on a sphere step") {
  auto st = make_state(build_sphere(Backend::axi, 2, 1.0, 512), FlowMode::unnormalized);
  const auto f0 = curvature_field(st.surface, 0);
  const auto r0 = record(st, f0);
  const double dt = 1e-4;
  const auto st1 = step_mcf(st, f0, dt, Method::explicit_euler);
  auto r1 = record(st1, curvature_field(st1.surface, 0));
  r1.dt = dt;
  const auto chk = area_derivative_check(r0, r1, r0.int_H2);
  CHECK_FALSE(chk.violation);
  CHECK(chk.rel_error < 1e-3);
}

TEST_CASE("monotonicity monitor") {
  std::vector<DiagnosticsRecord> s(5);
  for (int i = 0; i < 5; ++i) s[i].int_Ao2 = 1.0 - 0.1 * i;
  SlackPolicy p{1e-3, 1e-12, true};
  CHECK_FALSE(monotonicity_monitor(s, "int_Ao2", p).has_value());
  s[3].int_Ao2 = 0.9;
  CHECK(monotonicity_monitor(s, "int_Ao2", p) == std::optional<std::size_t>(3));
  // a remesh excursion covered by its logged drift is tolerated
  s[3].remeshed = true;
  s[3].remesh_int_Ao2_drift = 0.25;
  CHECK_FALSE(monotonicity_monitor(s, "int_Ao2", p).has_value());
  CHECK_THROWS_AS(series_value(s[0], "volume"), Error);
}

TEST_CASE("diagnostic scale weights") {
  const double lam = 1.9;
  for (int n : {2, 3}) {
    auto st = make_state(build_perturbed_sphere(Backend::axi, n, 1.0, 2, 0.1, 512), FlowMode::unnormalized);
    const auto r0 = record(st, curvature_field(st.surface, 1));
    st.surface.scale(lam);
    const auto r1 = record(st, curvature_field(st.surface, 1));
    CHECK(r1.area == doctest::Approx(r0.area * std::pow(lam, n)).epsilon(1e-10));
    CHECK(r1.sup_H == doctest::Approx(r0.sup_H / lam).epsilon(1e-10));
    CHECK(r1.int_Ao2 == doctest::Approx(r0.int_Ao2 * std::pow(lam, n - 2)).epsilon(1e-8));
    CHECK(r1.topping_ratio == doctest::Approx(r0.topping_ratio).epsilon(1e-8));
  }
}

TEST_CASE("evolution residuals are small for a resolved step") {
  const auto st = make_state(build_perturbed_sphere(Backend::axi, 2, 1.0, 2, 0.1, 256), FlowMode::unnormalized);
  const auto next = step_mcf(st, 1e-6, Method::explicit_euler);
  const auto r = evolution_residual_check(st, next);
  CHECK(r.residual_H < 5e-2);
  CHECK(r.residual_Ao2 < 5e-2);
}
