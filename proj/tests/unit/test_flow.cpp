#include <cmath>

#include "doctest.h"
#include "mcflab/flow.hpp"
#include "mcflab/run.hpp"
#include "mcflab/singularity.hpp"

using namespace mcflab;

namespace {

double max_displacement(const Hypersurface& a, const Hypersurface& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.node_count(); ++i) d = std::max(d, (a.position(i) - b.position(i)).norm());
  return d;
}

double mean_radius(const Hypersurface& s) {
  double sum = 0;
  for (std::size_t i = 0; i < s.node_count(); ++i) sum += s.position(i).norm();
  return sum / s.node_count();
}

}  // namespace

TEST_CASE("adaptive dt examples") {
  FlowConfig c;
  c.diffusion_number = 0;
  c.method = Method::explicit_euler;
  c.method_explicitly_set = true;
  const auto state = make_state(build_sphere(Backend::axi, 2, 1.0, 256), FlowMode::unnormalized);
  const auto f = curvature_field(state.surface, 0);
  c.dt_max = 1.0;
  CHECK(adaptive_dt(state, f, c) == doctest::Approx(0.05).epsilon(1e-5));
  c.dt_max = 0.01;
  CHECK(adaptive_dt(state, f, c) == doctest::Approx(0.01));
  auto small = make_state(build_sphere(Backend::axi, 2, 0.1, 256), FlowMode::unnormalized);
  c.dt_max = 1.0;
  // max|A|^2 = 200
  CHECK(adaptive_dt(small, curvature_field(small.surface, 0), c) == doctest::Approx(0.1 / 200).epsilon(1e-5));
}

TEST_CASE("config validation names the key") {
  FlowConfig c;
  c.cfl = 1.5;
  CHECK_THROWS_WITH(validate_config(c), "cfl out of (0,1]");
  c = FlowConfig{};
  c.dt_min = 1.0;
  CHECK_THROWS_WITH(validate_config(c), doctest::Contains("dt_min"));
}

TEST_CASE("one explicit step shrinks a sphere at speed n/R") {
  for (int n : {2, 3}) {
    const auto s0 = make_state(build_sphere(Backend::axi, n, 1.0, 512), FlowMode::unnormalized);
    const double dt = 1e-5;
    const auto s1 = step_mcf(s0, dt, Method::explicit_euler);
    CHECK(mean_radius(s1.surface) == doctest::Approx(1.0 - n * dt).epsilon(1e-8));
    CHECK(s1.t == doctest::Approx(dt));
  }
}

TEST_CASE("semi-implicit steps agree with explicit ones to first order") {
  const auto s0 = make_state(build_perturbed_sphere(Backend::axi, 2, 1.0, 2, 0.05, 256), FlowMode::unnormalized);
  const double dt = 1e-6;
  const auto e = step_mcf(s0, dt, Method::semi_implicit);
  const auto x = step_mcf(s0, dt, Method::explicit_euler);
  CHECK(max_displacement(e.surface, x.surface) < 1e-2 * dt);
}

TEST_CASE("a normalized step leaves a round sphere fixed") {
  for (Backend b : {Backend::axi, Backend::mesh}) {
    const auto s0 = make_state(build_sphere(b, 2, 1.0, b == Backend::axi ? 512 : 2000), FlowMode::normalized);
    const double dt = 1e-3;
    const auto f = curvature_field(s0.surface, 0);
    double hmax = 0;
    for (double h : f.mean_curvature) hmax = std::max(hmax, std::abs(h));
    for (Method m : {Method::explicit_euler, Method::semi_implicit}) {
      const auto s1 = step_normalized(s0, dt, m);
      CHECK(max_displacement(s0.surface, s1.surface) <= 1e-2 * dt * hmax);
      CHECK(total_area(s1.surface) == doctest::Approx(total_area(s0.surface)).epsilon(1e-12));
    }
  }
}

TEST_CASE("area renormalisation") {
  auto s = build_perturbed_sphere(Backend::axi, 3, 1.0, 2, 0.1, 256);
  const double f = renormalize_area(s, 5.0);
  CHECK(total_area(s) == doctest::Approx(5.0).epsilon(1e-13));
  CHECK(f > 0);
}

TEST_CASE("short sphere run goes extinct near T = R^2 / 2n") {
  FlowConfig c;
  const auto res = run_flow(build_sphere(Backend::axi, 2, 0.5, 64), c);
  CHECK(res.cause == StopCause::extinction);
  const auto e = estimate_singular_time(res.series, res.cause);
  CHECK(e.T_est == doctest::Approx(0.0625).epsilon(0.02));
  for (std::size_t i = 1; i < res.series.size(); ++i) CHECK(res.series[i].area < res.series[i - 1].area);
}

TEST_CASE("blow-up threshold below the initial value stops at step 0") {
  FlowConfig c;
  c.max_abs_A_stop = 1.0;
  const auto res = run_flow(build_sphere(Backend::axi, 2, 1.0, 64), c);
  CHECK(res.cause == StopCause::blow_up);
  REQUIRE(res.series.size() == 1);
  CHECK(res.series[0].step == 0);
}

TEST_CASE("run_flow is deterministic") {
  FlowConfig c;
  c.max_steps = 300;
  const auto s = build_perturbed_sphere(Backend::axi, 2, 1.0, 2, 0.1, 128);
  const auto a = run_flow(s, c), b = run_flow(s, c);
  REQUIRE(a.series.size() == b.series.size());
  for (std::size_t i = 0; i < a.series.size(); ++i) CHECK(series_csv_row(a.series[i]) == series_csv_row(b.series[i]));
}

TEST_CASE("mesh remesh keeps the surface closed") {
  auto s = build_ellipsoid(3, 1, 1, 800);
  RemeshPolicy p;
  RemeshReport rep;
  const auto r = remesh(s, p, &rep);
  CHECK(validate(r).ok());
  CHECK(std::abs(rep.area_drift) < 2e-2);
}

TEST_CASE("axi remesh preserves node count and area") {
  const auto s = build_dumbbell(2, 0.2, 1.0, 3.0, 256);
  RemeshPolicy p;
  p.density_gain = 2.0;
  RemeshReport rep;
  const auto r = remesh(s, p, &rep);
  CHECK(r.node_count() == s.node_count());
  CHECK(validate(r).ok());
  CHECK(std::abs(rep.area_drift) < 1e-4);
}
