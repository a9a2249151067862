#include <cmath>
#include <functional>

#include "doctest.h"
#include "mcflab/curvature.hpp"
#include "mcflab/geometry.hpp"

using namespace mcflab;

namespace {

double weighted_sum(const Hypersurface& s, const std::vector<double>& f) {
  double sum = 0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += s.weights()[i] * f[i];
  return sum;
}

// int |Ao|^2 for the polar profile rho(th) = R (1 + d P_l(-cos th)), from
// finite differences of the parametrisation and a midpoint rule in th
double perturbed_int_Ao2(int n, double R, int l, double d) {
  auto pos = [&](double th) {
    const double rho = R * (1 + d * legendre(l, -std::cos(th)));
    return std::pair<double, double>{-rho * std::cos(th), rho * std::sin(th)};
  };
  const int N = 20000;
  const double h = 1e-4;
  double sum = 0;
  for (int i = 0; i < N; ++i) {
    const double th = M_PI * (i + 0.5) / N;
    const auto [xm, rm] = pos(th - h);
    const auto [x0, r0] = pos(th);
    const auto [xp, rp] = pos(th + h);
    const double x1 = (xp - xm) / (2 * h), r1 = (rp - rm) / (2 * h);
    const double x2 = (xp - 2 * x0 + xm) / (h * h), r2 = (rp - 2 * r0 + rm) / (h * h);
    const double v = std::hypot(x1, r1);
    const double k_mer = -(x1 * r2 - r1 * x2) / (v * v * v);
    const double k_rot = x1 / (r0 * v);
    const double H = k_mer + (n - 1) * k_rot;
    const double Ao2 = (k_mer - H / n) * (k_mer - H / n) + (n - 1) * (k_rot - H / n) * (k_rot - H / n);
    sum += unit_sphere_area(n - 1) * std::pow(r0, n - 1) * v * Ao2;
  }
  return sum * M_PI / N;
}

}  // namespace

TEST_CASE("round spheres: H = n/R and Ao = 0") {
  for (int n : {2, 3}) {
    const double R = 0.7;
    const auto s = build_sphere(Backend::axi, n, R, 512);
    const auto f = curvature_field(s, 2);
    for (std::size_t i = 0; i < f.size(); ++i) {
      CHECK(f.mean_curvature[i] == doctest::Approx(n / R).epsilon(1e-6));
      CHECK(f.norm_Ao_sq[i] < 1e-10);
    }
    CHECK(tensor_norm_identity_check(f) < 1e-12);
  }
}

TEST_CASE("perturbed sphere int |Ao|^2 against a quadrature oracle") {
  for (int n : {2, 3})
    for (double d : {0.01, 0.05, 0.1}) {
      const auto s = build_perturbed_sphere(Backend::axi, n, 1.0, 2, d, 1024);
      const auto f = curvature_field(s, 0);
      const double oracle = perturbed_int_Ao2(n, 1.0, 2, d);
      CHECK(weighted_sum(s, f.norm_Ao_sq) == doctest::Approx(oracle).epsilon(1e-3));
    }
}

TEST_CASE("int |Ao|^2 grows quadratically in the amplitude") {
  auto I = [](double d) {
    const auto s = build_perturbed_sphere(Backend::axi, 2, 1.0, 2, d, 1024);
    return weighted_sum(s, curvature_field(s, 0).norm_Ao_sq);
  };
  const double r = I(0.02) / I(0.01);
  CHECK(r == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("mesh ellipsoid curvature at the axis points") {
  const auto s = build_ellipsoid(2, 1, 1, 4000);
  const auto f = curvature_field(s, 1);
  const auto& V = s.mesh().vertices;
  std::size_t tip = 0, side = 0;
  for (std::size_t i = 0; i < V.size(); ++i) {
    if ((V[i] - Vec3(2, 0, 0)).norm() < (V[tip] - Vec3(2, 0, 0)).norm()) tip = i;
    if ((V[i] - Vec3(0, 1, 0)).norm() < (V[side] - Vec3(0, 1, 0)).norm()) side = i;
  }
  // closed forms: kappa = a/b^2, a/c^2 at the tip; b/a^2, b/c^2 at the side
  CHECK(f.mean_curvature[tip] == doctest::Approx(4.0).epsilon(0.02));
  CHECK(f.mean_curvature[side] == doctest::Approx(1.25).epsilon(0.02));
  CHECK(f.norm_A_sq[tip] == doctest::Approx(8.0).epsilon(0.04));
  CHECK(f.norm_A_sq[side] == doctest::Approx(1.0625).epsilon(0.04));
}

TEST_CASE("mesh sphere is nearly umbilic") {
  const auto s = build_sphere(Backend::mesh, 2, 1.0, 2000);
  const auto f = curvature_field(s, 1);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(f.mean_curvature[i] == doctest::Approx(2.0).epsilon(1e-2));
    CHECK(f.norm_Ao_sq[i] < 1e-3);
  }
}

TEST_CASE("mesh backend rejects derivative orders above one") {
  const auto s = build_sphere(Backend::mesh, 2, 1.0, 500);
  try {
    curvature_field(s, 2);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unsupported);
  }
}

TEST_CASE("gradient pinch bound and checks") {
  CHECK(gradient_pinch_bound(2) == doctest::Approx(4.0));
  CHECK(gradient_pinch_bound(3) == doctest::Approx(3.75));
  const auto round = build_sphere(Backend::axi, 2, 1.0, 512);
  CHECK(gradient_pinch_check(round, curvature_field(round, 1)).vacuous);
  for (double d : {0.01, 0.1}) {
    const auto s = build_perturbed_sphere(Backend::axi, 2, 1.0, 2, d, 1024);
    const auto gp = gradient_pinch_check(s, curvature_field(s, 1));
    CHECK_FALSE(gp.vacuous);
    CHECK(gp.max_ratio <= 4.0 + 0.01);
  }
}

TEST_CASE("Kato holds on the battery shapes") {
  for (const auto& s : {build_perturbed_sphere(Backend::axi, 2, 1.0, 2, 0.1, 512),
                        build_dumbbell(2, 0.2, 1.0, 3.0, 512), build_ellipsoid(2, 1, 1, 2000)}) {
    const auto k = kato_check(s, curvature_field(s, 1));
    CHECK(k.exceeding.empty());
  }
}

TEST_CASE("curvature scale covariance") {
  for (Backend b : {Backend::axi, Backend::mesh}) {
    auto s = b == Backend::axi ? build_perturbed_sphere(b, 2, 1.0, 2, 0.1, 512) : build_ellipsoid(2, 1, 1, 1000);
    const int m = b == Backend::axi ? 2 : 1;
    const auto f0 = curvature_field(s, m);
    const double I0 = weighted_sum(s, f0.norm_Ao_sq);
    const double lam = 3.0;
    s.scale(lam);
    const auto f1 = curvature_field(s, m);
    for (std::size_t i = 0; i < f0.size(); ++i) {
      CHECK(f1.mean_curvature[i] == doctest::Approx(f0.mean_curvature[i] / lam).epsilon(1e-8));
      CHECK(f1.grad_A[0][i] == doctest::Approx(f0.grad_A[0][i] / (lam * lam)).epsilon(1e-6));
    }
    // n = 2: int |Ao|^2 is scale invariant
    CHECK(weighted_sum(s, f1.norm_Ao_sq) == doctest::Approx(I0).epsilon(1e-8));
  }
  auto s3 = build_perturbed_sphere(Backend::axi, 3, 1.0, 2, 0.1, 512);
  const double I0 = weighted_sum(s3, curvature_field(s3, 0).norm_Ao_sq);
  s3.scale(2.0);
  CHECK(weighted_sum(s3, curvature_field(s3, 0).norm_Ao_sq) == doctest::Approx(2.0 * I0).epsilon(1e-8));
}
