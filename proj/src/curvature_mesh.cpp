#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <Eigen/Dense>

#include "curvature_internal.hpp"
#include "mcflab/curvature.hpp"

namespace mcflab::detail {

namespace {

void tangent_frame(const Vec3& nrm, Vec3& t1, Vec3& t2) {
  const Vec3 ref = std::abs(nrm.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  t1 = (ref - ref.dot(nrm) * nrm).normalized();
  t2 = nrm.cross(t1);
}

// Least-squares fit of w(u, v) through the origin in the frame (t1, t2, nrm).
// Coefficients: u^2, uv, v^2, u, v, then (degree 3) u^3, u^2 v, u v^2, v^3.
template <int Degree>
Eigen::VectorXd fit_jet(const Vec3& origin, const Vec3& t1, const Vec3& t2, const Vec3& nrm,
                        const std::vector<Vec3>& pts) {
  constexpr int cols = Degree == 2 ? 5 : 9;
  Eigen::MatrixXd M(pts.size(), cols);
  Eigen::VectorXd rhs(pts.size());
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, (p - origin).norm());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Vec3 d = (pts[k] - origin) / scale;
    const double u = d.dot(t1), v = d.dot(t2), w = d.dot(nrm);
    const auto r = Eigen::Index(k);
    M(r, 0) = u * u;
    M(r, 1) = u * v;
    M(r, 2) = v * v;
    M(r, 3) = u;
    M(r, 4) = v;
    if constexpr (Degree == 3) {
      M(r, 5) = u * u * u;
      M(r, 6) = u * u * v;
      M(r, 7) = u * v * v;
      M(r, 8) = v * v * v;
    }
    rhs(r) = w;
  }
  Eigen::VectorXd c = M.colPivHouseholderQr().solve(rhs);
  // Undo the normalization: degree-k coefficients scale as scale^(1-k).
  for (int k = 0; k < 3; ++k) c(k) /= scale;
  if constexpr (Degree == 3)
    for (int k = 5; k < 9; ++k) c(k) /= scale * scale;
  return c;
}

std::uint64_t ekey(int a, int b) {
  return (std::uint64_t(std::min(a, b)) << 32) | std::uint64_t(std::max(a, b));
}

}  // namespace

std::vector<std::vector<int>> vertex_neighbors(const TriMeshSurface& m) {
  std::vector<std::vector<int>> nb(m.vertices.size());
  for (const auto& t : m.triangles) {
    for (int e = 0; e < 3; ++e) {
      nb[t[e]].push_back(t[(e + 1) % 3]);
      nb[t[e]].push_back(t[(e + 2) % 3]);
    }
  }
  for (auto& v : nb) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return nb;
}

std::vector<Vec3> vertex_normals(const TriMeshSurface& m) {
  std::vector<Vec3> nrm(m.vertices.size(), Vec3::Zero());
  for (const auto& t : m.triangles) {
    const Vec3 fn = (m.vertices[t[1]] - m.vertices[t[0]]).cross(m.vertices[t[2]] - m.vertices[t[0]]);
    for (int k = 0; k < 3; ++k) nrm[t[k]] += fn;
  }
  for (auto& v : nrm) v.normalize();
  return nrm;
}

std::vector<CotEdge> cotangent_edges(const TriMeshSurface& m) {
  std::unordered_map<std::uint64_t, double> w;
  w.reserve(m.triangles.size() * 2);
  for (const auto& t : m.triangles) {
    for (int e = 0; e < 3; ++e) {
      const int i = t[e], j = t[(e + 1) % 3], k = t[(e + 2) % 3];
      const Vec3 u = m.vertices[i] - m.vertices[k], v = m.vertices[j] - m.vertices[k];
      const double c = u.dot(v) / std::max(u.cross(v).norm(), 1e-300);
      w[ekey(i, j)] += 0.5 * c;
    }
  }
  std::vector<CotEdge> out;
  out.reserve(w.size());
  for (const auto& [key, val] : w) out.push_back({int(key >> 32), int(key & 0xffffffffu), val});
  std::sort(out.begin(), out.end(), [](const CotEdge& a, const CotEdge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  return out;
}

CurvatureField mesh_curvature(const TriMeshSurface& m, int m_max) {
  require(m_max >= 0 && m_max <= 1, ErrorCode::unsupported, "m_max beyond backend capability (mesh supports m <= 1)");
  const std::size_t V = m.vertices.size();
  CurvatureField f;
  f.n = 2;
  f.m_max = m_max;
  f.normal = vertex_normals(m);
  f.mean_curvature.assign(V, 0.0);
  f.principal.assign(V * 2, 0.0);
  f.norm_A_sq.assign(V, 0.0);
  f.norm_Ao_sq.assign(V, 0.0);
  f.derivative_extrapolated.assign(V, false);

  // Mean curvature normal via the cotangent operator.
  std::vector<Vec3> lap(V, Vec3::Zero());
  double edge_sum = 0.0;
  const auto edges = cotangent_edges(m);
  for (const auto& e : edges) {
    const Vec3 d = m.vertices[e.i] - m.vertices[e.j];
    lap[e.i] += e.w * d;
    lap[e.j] -= e.w * d;
    edge_sum += d.norm();
  }
  f.mean_spacing = edge_sum / double(edges.size());
  for (std::size_t i = 0; i < V; ++i) f.mean_curvature[i] = lap[i].dot(f.normal[i]) / m.vertex_weights[i];

  // Osculating jet over the 2-ring: a quadric fit tilts the frame onto the
  // tangent plane, then a cubic fit in that frame gives the shape operator and,
  // through its third derivatives, the Codazzi-symmetric tensor nabla A.
  const auto nb = vertex_neighbors(m);
  const bool derivs = m_max >= 1;
  if (derivs) {
    f.grad_A[0].assign(V, 0.0);
    f.grad_Ao[0].assign(V, 0.0);
    f.grad_H.assign(V, 0.0);
    f.grad_abs_Ao.assign(V, 0.0);
  }
  std::vector<int> ring;
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < V; ++i) {
    ring.clear();
    for (int j : nb[i]) {
      ring.push_back(j);
      for (int k : nb[j]) ring.push_back(k);
    }
    std::sort(ring.begin(), ring.end());
    ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
    pts.clear();
    for (int j : ring)
      if (std::size_t(j) != i) pts.push_back(m.vertices[j]);

    Vec3 nrm = f.normal[i], t1, t2;
    tangent_frame(nrm, t1, t2);
    const auto q0 = fit_jet<2>(m.vertices[i], t1, t2, nrm, pts);
    nrm = (nrm - q0(3) * t1 - q0(4) * t2).normalized();
    tangent_frame(nrm, t1, t2);
    const auto q = fit_jet<3>(m.vertices[i], t1, t2, nrm, pts);

    const double d = q(3), e = q(4);
    Eigen::Matrix2d I;
    I << 1 + d * d, d * e, d * e, 1 + e * e;
    Eigen::Matrix2d II;
    II << 2 * q(0), q(1), q(1), 2 * q(2);
    II /= std::sqrt(1 + d * d + e * e);
    // Symmetric form I^{-1/2} II I^{-1/2}; the normal is outward, so kappa = -eig.
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> isq(I);
    const Eigen::Matrix2d Ih = isq.operatorInverseSqrt();
    const Eigen::Matrix2d S = -(Ih * II * Ih);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(S);
    const double k1 = es.eigenvalues()(0), k2 = es.eigenvalues()(1);

    // Equal shift onto the cotangent H keeps H = sum of kappa exactly.
    const double H = f.mean_curvature[i];
    const double shift = 0.5 * (H - (k1 + k2));
    f.principal[2 * i] = k1 + shift;
    f.principal[2 * i + 1] = k2 + shift;
    const double diff = k1 - k2;
    f.norm_Ao_sq[i] = 0.5 * diff * diff;
    f.norm_A_sq[i] = f.norm_Ao_sq[i] + 0.5 * H * H;
    if (!derivs) continue;

    // c[i][j][k] = -w_ijk at the vertex.
    double c[2][2][2];
    c[0][0][0] = -6 * q(5);
    c[0][0][1] = c[0][1][0] = c[1][0][0] = -2 * q(6);
    c[0][1][1] = c[1][0][1] = c[1][1][0] = -2 * q(7);
    c[1][1][1] = -6 * q(8);
    double gA2 = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int k = 0; k < 2; ++k) gA2 += c[a][b][k] * c[a][b][k];
    const double gH[2] = {c[0][0][0] + c[1][1][0], c[0][0][1] + c[1][1][1]};
    const double gH2 = gH[0] * gH[0] + gH[1] * gH[1];
    double gAo[2][2][2];
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int k = 0; k < 2; ++k) gAo[a][b][k] = c[a][b][k] - (a == b ? 0.5 * gH[k] : 0.0);
    const Eigen::Matrix2d Ao = S - 0.5 * S.trace() * Eigen::Matrix2d::Identity();
    const double absAo = Ao.norm();
    double gN2 = 0.0;
    if (absAo > 1e-12 * (std::abs(k1) + std::abs(k2))) {
      for (int k = 0; k < 2; ++k) {
        double dk = 0.0;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) dk += Ao(a, b) * gAo[a][b][k];
        dk /= absAo;
        gN2 += dk * dk;
      }
    }
    f.grad_A[0][i] = std::sqrt(gA2);
    f.grad_Ao[0][i] = std::sqrt(std::max(0.0, gA2 - 0.5 * gH2));
    f.grad_H[i] = std::sqrt(gH2);
    f.grad_abs_Ao[i] = std::sqrt(gN2);
  }
  return f;
}

}  // namespace mcflab::detail
