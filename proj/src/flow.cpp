#include "mcflab/flow.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>
#include <Eigen/Sparse>

#include "curvature_internal.hpp"

namespace mcflab {

const char* to_string(FlowMode m) { return m == FlowMode::normalized ? "normalized" : "unnormalized"; }
const char* to_string(Method m) { return m == Method::semi_implicit ? "semi_implicit" : "explicit"; }

FlowMode flow_mode_from_string(const std::string& s) {
  if (s == "unnormalized") return FlowMode::unnormalized;
  if (s == "normalized") return FlowMode::normalized;
  fail(ErrorCode::invalid_argument, "unknown mode '" + s + "' (valid: unnormalized, normalized)");
}

Method method_from_string(const std::string& s) {
  if (s == "explicit") return Method::explicit_euler;
  if (s == "semi_implicit") return Method::semi_implicit;
  fail(ErrorCode::invalid_argument, "unknown method '" + s + "' (valid: explicit, semi_implicit)");
}

void validate_config(const FlowConfig& c) {
  auto need = [](bool ok, const std::string& msg) { require(ok, ErrorCode::invalid_argument, msg); };
  need(c.cfl > 0.0 && c.cfl <= 1.0, "cfl out of (0,1]");
  need(c.dt_min > 0.0, "dt_min must be positive");
  need(c.dt_max > 0.0, "dt_max must be positive");
  need(c.dt_min <= c.dt_max, "dt_min must not exceed dt_max");
  need(c.diffusion_number >= 0.0, "diffusion_number must be non-negative");
  need(c.max_abs_A_stop >= 0.0, "max_abs_A_stop must be non-negative");
  need(c.area_stop_fraction > 0.0 && c.area_stop_fraction < 1.0, "area_stop_fraction out of (0,1)");
  need(c.steady_tol > 0.0, "steady_tol must be positive");
  need(c.steady_window >= 1, "steady_window must be at least 1");
  need(c.max_steps >= 0, "max_steps must be non-negative");
  need(c.m_max >= 0 && c.m_max <= 3, "m_max out of [0,3]");
  need(c.epsilon_knob > 0.0, "epsilon_knob must be positive");
  need(c.lambda0_knob > 0.0, "lambda0_knob must be positive");
  need(c.c0_knob > 0.0, "c0_knob must be positive");
  need(c.snapshot_every >= 0, "snapshot_every must be non-negative");
  need(c.remesh.check_every >= 1, "remesh_check_every must be at least 1");
  need(c.remesh.density_gain >= 0.0, "remesh_density_gain must be non-negative");
  need(c.remesh.trigger_ratio > 1.0, "remesh_trigger_ratio must exceed 1");
  need(c.remesh.max_adjacent_ratio > 1.0, "remesh_max_adjacent_ratio must exceed 1");
  need(c.remesh.curvature_gain >= 0.0, "remesh_curvature_gain must be non-negative");
}

Method effective_method(const FlowConfig& config, Backend backend) {
  if (config.method_explicitly_set) return config.method;
  return backend == Backend::mesh ? Method::semi_implicit : Method::explicit_euler;
}

FlowState make_state(Hypersurface surface, FlowMode mode) {
  FlowState s;
  s.surface = std::move(surface);
  s.mode = mode;
  s.initial_area = total_area(s.surface);
  return s;
}

namespace {

void check_stepped(const Hypersurface& s) {
  if (s.is_axi()) {
    const auto& nd = s.axi().nodes;
    for (std::size_t i = 1; i + 1 < nd.size(); ++i) {
      if (!(nd[i].r > 0.0) || !std::isfinite(nd[i].x))
        fail(ErrorCode::numerical, "step produced an interior node on the axis");
    }
    for (std::size_t i = 0; i + 1 < nd.size(); ++i) {
      if (!(std::hypot(nd[i + 1].x - nd[i].x, nd[i + 1].r - nd[i].r) > 0.0))
        fail(ErrorCode::numerical, "step produced a degenerate segment");
    }
    if (!(nd.back().x > nd.front().x)) fail(ErrorCode::numerical, "step inverted the profile");
    return;
  }
  const auto& m = s.mesh();
  double mean = 0.0;
  std::vector<double> areas(m.triangles.size());
  for (std::size_t k = 0; k < m.triangles.size(); ++k) {
    const auto& t = m.triangles[k];
    areas[k] = 0.5 * (m.vertices[t[1]] - m.vertices[t[0]]).cross(m.vertices[t[2]] - m.vertices[t[0]]).norm();
    if (!std::isfinite(areas[k])) fail(ErrorCode::numerical, "step produced non-finite positions");
    mean += areas[k];
  }
  mean /= double(areas.size());
  for (double a : areas)
    if (!(a > 1e-12 * mean)) fail(ErrorCode::numerical, "step produced a degenerate triangle");
}

// Tridiagonal solve (Thomas); a: sub, b: diag, c: super.
std::vector<double> thomas(std::vector<double> a, std::vector<double> b, std::vector<double> c, std::vector<double> d) {
  const std::size_t n = b.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = d[n - 1] / b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
  for (double v : x)
    if (!std::isfinite(v)) fail(ErrorCode::numerical, "tridiagonal solve failed");
  return x;
}

// Linearly implicit step on the profile, metric frozen at the old state.
// The increment solves (I - dt L) dx = dt vx and (I - dt (L - (n-1)/r^2)) dr = dt vr,
// with v the velocity from the reconstructed curvature: the implicit operator
// only damps, accuracy comes from v (L alone is first order next to the poles).
void axi_semi_implicit(AxiProfileSurface& p, double dt, const std::vector<double>& vx,
                       const std::vector<double>& vr) {
  const int N = int(p.nodes.size());
  const int n = p.n;
  const auto s = profile_arclength(p);
  auto rw = [&](int i, int j) { return std::pow(0.5 * (p.nodes[i].r + p.nodes[j].r), n - 1); };
  std::vector<double> lo(N, 0.0), di(N, 0.0), up(N, 0.0);
  for (int i = 1; i < N - 1; ++i) {
    const double hm = s[i] - s[i - 1], hp = s[i + 1] - s[i];
    const double denom = std::pow(p.nodes[i].r, n - 1) * 0.5 * (hm + hp);
    lo[i] = rw(i - 1, i) / hm / denom;
    up[i] = rw(i, i + 1) / hp / denom;
    di[i] = -(lo[i] + up[i]);
  }
  const double h0 = s[1] - s[0], h1 = s[N - 1] - s[N - 2];
  up[0] = 2.0 * n / (h0 * h0);
  di[0] = -up[0];
  lo[N - 1] = 2.0 * n / (h1 * h1);
  di[N - 1] = -lo[N - 1];

  std::vector<double> a(N), b(N), c(N);
  for (int i = 0; i < N; ++i) {
    a[i] = -dt * lo[i];
    b[i] = 1.0 - dt * di[i];
    c[i] = -dt * up[i];
  }
  std::vector<double> bx(N);
  for (int i = 0; i < N; ++i) bx[i] = dt * vx[i];
  const auto dx = thomas(a, b, c, bx);

  // r: interior unknowns only, r = 0 held at both poles.
  const int M = N - 2;
  std::vector<double> ar(M), br(M), cr(M), dr(M);
  for (int k = 0; k < M; ++k) {
    const int i = k + 1;
    ar[k] = k > 0 ? -dt * lo[i] : 0.0;
    cr[k] = k < M - 1 ? -dt * up[i] : 0.0;
    br[k] = 1.0 - dt * di[i] + dt * (n - 1) / (p.nodes[i].r * p.nodes[i].r);
    dr[k] = dt * vr[i];
  }
  const auto drn = thomas(ar, br, cr, dr);
  for (int i = 0; i < N; ++i) p.nodes[i].x += dx[i];
  for (int k = 0; k < M; ++k) p.nodes[k + 1].r += drn[k];
  p.nodes.front().r = 0.0;
  p.nodes.back().r = 0.0;
}

Eigen::SparseMatrix<double> mesh_system(const TriMeshSurface& m, double dt) {
  const int V = int(m.vertices.size());
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> diag(m.vertex_weights.begin(), m.vertex_weights.end());
  for (const auto& e : detail::cotangent_edges(m)) {
    trip.emplace_back(e.i, e.j, -dt * e.w);
    trip.emplace_back(e.j, e.i, -dt * e.w);
    diag[e.i] += dt * e.w;
    diag[e.j] += dt * e.w;
  }
  for (int i = 0; i < V; ++i) trip.emplace_back(i, i, diag[i]);
  Eigen::SparseMatrix<double> A(V, V);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

// (M - dt L) X_new = M rhs
void mesh_semi_implicit(TriMeshSurface& m, double dt, const std::vector<Vec3>& rhs) {
  const int V = int(m.vertices.size());
  const auto A = mesh_system(m, dt);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) fail(ErrorCode::numerical, "linear solve failure (factorization)");
  Eigen::MatrixXd B(V, 3);
  for (int i = 0; i < V; ++i) B.row(i) = m.vertex_weights[i] * rhs[i].transpose();
  const Eigen::MatrixXd X = solver.solve(B);
  if (solver.info() != Eigen::Success || !X.allFinite()) fail(ErrorCode::numerical, "linear solve failure");
  for (int i = 0; i < V; ++i) m.vertices[i] = X.row(i).transpose();
}

// Moves nodes by dt * (-H nu + g F); g = 0 is plain MCF.
void advance(Hypersurface& s, const CurvatureField& f, double dt, double g, Method method) {
  if (s.is_axi()) {
    auto& p = s.axi();
    const int N = int(p.nodes.size());
    if (method == Method::explicit_euler) {
      for (int i = 0; i < N; ++i) {
        const double H = f.mean_curvature[i];
        p.nodes[i].x += dt * (-H * f.normal[i].x() + g * p.nodes[i].x);
        p.nodes[i].r += dt * (-H * f.normal[i].y() + g * p.nodes[i].r);
      }
      p.nodes.front().r = 0.0;
      p.nodes.back().r = 0.0;
    } else {
      std::vector<double> vx(N), vr(N);
      for (int i = 0; i < N; ++i) {
        const double H = f.mean_curvature[i];
        vx[i] = -H * f.normal[i].x() + g * p.nodes[i].x;
        vr[i] = -H * f.normal[i].y() + g * p.nodes[i].r;
      }
      axi_semi_implicit(p, dt, vx, vr);
    }
  } else {
    auto& m = s.mesh();
    if (method == Method::explicit_euler) {
      for (std::size_t i = 0; i < m.vertices.size(); ++i)
        m.vertices[i] += dt * (-f.mean_curvature[i] * f.normal[i] + g * m.vertices[i]);
    } else {
      std::vector<Vec3> rhs(m.vertices.size());
      for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = m.vertices[i] * (1.0 + dt * g);
      mesh_semi_implicit(m, dt, rhs);
    }
  }
  s.refresh_weights();
  check_stepped(s);
}

}  // namespace

FlowState step_mcf(const FlowState& state, double dt, Method method) {
  return step_mcf(state, curvature_field(state.surface, 0), dt, method);
}

FlowState step_mcf(const FlowState& state, const CurvatureField& f, double dt, Method method) {
  require(state.mode == FlowMode::unnormalized, ErrorCode::precondition, "step_mcf requires unnormalized mode");
  require(dt >= 0.0 && std::isfinite(dt), ErrorCode::invalid_argument, "dt must be finite and non-negative");
  FlowState next = state;
  next.step += 1;
  next.dt_last = dt;
  if (dt == 0.0) return next;
  advance(next.surface, f, dt, 0.0, method);
  next.t += dt;
  return next;
}

double compute_h_tilde(const Hypersurface& surface, const CurvatureField& field) {
  const auto& w = surface.weights();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    num += w[i] * field.mean_curvature[i] * field.mean_curvature[i];
    den += w[i];
  }
  return num / den;
}

double compute_h_tilde(const Hypersurface& surface) { return compute_h_tilde(surface, curvature_field(surface, 0)); }

double renormalize_area(Hypersurface& surface, double target_area) {
  require(target_area > 0.0, ErrorCode::invalid_argument, "target_area must be positive");
  const double a = total_area(surface);
  require(a > 0.0 && std::isfinite(a), ErrorCode::numerical, "degenerate (zero-area) surface");
  const double scale = std::pow(target_area / a, 1.0 / surface.dimension());
  surface.scale(scale);
  return scale;
}

FlowState step_normalized(const FlowState& state, double dt_tilde, Method method, NormalizedStepInfo* info) {
  return step_normalized(state, curvature_field(state.surface, 0), dt_tilde, method, info);
}

FlowState step_normalized(const FlowState& state, const CurvatureField& f, double dt_tilde, Method method,
                          NormalizedStepInfo* info) {
  require(state.mode == FlowMode::normalized, ErrorCode::precondition, "step_normalized requires normalized mode");
  require(dt_tilde >= 0.0 && std::isfinite(dt_tilde), ErrorCode::invalid_argument, "dt must be finite and non-negative");
  require(encloses_origin(state.surface), ErrorCode::precondition, "origin not enclosed by the surface");
  const int n = state.surface.dimension();
  const double h = compute_h_tilde(state.surface, f);
  const double g = h / n;

  NormalizedStepInfo local;
  local.h_tilde = h;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double speed = -f.mean_curvature[i] + g * state.surface.position(i).dot(f.normal[i]);
    local.max_normal_speed = std::max(local.max_normal_speed, std::abs(speed));
  }

  FlowState next = state;
  next.step += 1;
  next.dt_last = dt_tilde;
  if (dt_tilde > 0.0) {
    advance(next.surface, f, dt_tilde, g, method);
    local.projection_scale = renormalize_area(next.surface, state.initial_area);
    local.step_scale = (1.0 + dt_tilde * g) * local.projection_scale;
    next.psi = state.psi * local.step_scale;
    next.t_tilde += dt_tilde;
    // dt~ = psi^2 dt keeps the normal speed equal to -H~ (see ledger).
    next.t += dt_tilde / (state.psi * state.psi);
  }
  if (info) *info = local;
  return next;
}

double adaptive_dt(const FlowState& state, const CurvatureField& field, const FlowConfig& config) {
  double amax2 = 0.0;
  for (double v : field.norm_A_sq) amax2 = std::max(amax2, v);
  const Method method = effective_method(config, state.surface.backend());
  double dt;
  if (method == Method::explicit_euler) {
    dt = amax2 > 0.0 ? config.cfl / amax2 : config.dt_max;
    if (config.diffusion_number > 0.0) {
      const double h = min_spacing(state.surface);
      dt = std::min(dt, config.diffusion_number * h * h);
    }
  } else {
    const double h = mean_spacing(state.surface);
    dt = amax2 > 0.0 ? config.cfl * h / std::sqrt(amax2) : config.dt_max;
  }
  return std::clamp(dt, config.dt_min, config.dt_max);
}

}  // namespace mcflab
