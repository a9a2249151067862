// Curvature of hypersurfaces of revolution from their profile curve.
//
// Principal frame: e_0 along the profile, e_1..e_{n-1} tangent to the
// rotation orbit S^{n-1}. Covariant derivatives of rotation-invariant
// tensors reduce to arc-length derivatives plus the connection terms
//   nabla_a e_0 = (r'/r) e_a,   nabla_a e_b = -delta_ab (r'/r) e_0,
// so every nabla^m A is assembled componentwise on the profile.

#include <algorithm>
#include <array>
#include <cmath>

#include "curvature_internal.hpp"
#include "mcflab/curvature.hpp"

namespace mcflab::detail {

namespace {

struct Ghosted {
  const std::vector<ProfileNode>& nodes;
  int N;
  ProfileNode at(int i) const {
    if (i < 0) return {nodes[-i].x, -nodes[-i].r};
    if (i > N - 1) {
      const int j = 2 * (N - 1) - i;
      return {nodes[j].x, -nodes[j].r};
    }
    return nodes[i];
  }
};

// Tensor of rank k with n^k components per node.
struct NodeTensor {
  int n = 2;
  int rank = 0;
  int comps = 1;
  std::vector<double> v;  // node-major
  double& at(int node, int c) { return v[std::size_t(node) * comps + c]; }
  double at(int node, int c) const { return v[std::size_t(node) * comps + c]; }
};

int ipow(int b, int e) {
  int r = 1;
  while (e-- > 0) r *= b;
  return r;
}

// Three-point derivative on a non-uniform grid at interior node i.
double ddx(const std::vector<double>& s, const std::vector<double>& f, int i) {
  const double hm = s[i] - s[i - 1], hp = s[i + 1] - s[i];
  return (-hp / (hm * (hm + hp))) * f[i - 1] + ((hp - hm) / (hm * hp)) * f[i] + (hm / (hp * (hm + hp))) * f[i + 1];
}

// Finite-difference weights for derivatives 0..2 at z (Fornberg's recursion).
void fornberg_weights(const std::array<double, 5>& t, double z, std::array<std::array<double, 5>, 3>& w) {
  for (auto& row : w) row.fill(0.0);
  double c1 = 1.0, c4 = t[0] - z;
  w[0][0] = 1.0;
  for (int i = 1; i < 5; ++i) {
    const int mn = std::min(i, 2);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = t[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = t[i] - t[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) w[k][i] = c1 * (k * w[k - 1][i - 1] - c5 * w[k][i - 1]) / c2;
        w[0][i] = -c1 * c5 * w[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) w[k][j] = (c4 * w[k][j] - k * w[k - 1][j]) / c3;
      w[0][j] = c4 * w[0][j] / c3;
    }
    c1 = c2;
  }
}

// Value at a pole of an even function sampled at the two nearest nodes.
double even_extrapolate(double f1, double s1, double f2, double s2) {
  return (f1 * s2 * s2 - f2 * s1 * s1) / (s2 * s2 - s1 * s1);
}

NodeTensor covariant_derivative(const NodeTensor& T, const std::vector<double>& s, const std::vector<double>& conn,
                                int N) {
  NodeTensor out;
  out.n = T.n;
  out.rank = T.rank + 1;
  out.comps = T.comps * T.n;
  out.v.assign(std::size_t(N) * out.comps, 0.0);
  const int n = T.n, k = T.rank;
  std::vector<int> digits(k);
  std::vector<double> col(N);
  std::vector<int> zero_count(out.comps);

  for (int c = 0; c < out.comps; ++c) {
    const int i0 = c / T.comps;
    const int j = c % T.comps;
    int rem = j;
    for (int l = k - 1; l >= 0; --l) {
      digits[l] = rem % n;
      rem /= n;
    }
    int zeros = i0 == 0 ? 1 : 0;
    for (int l = 0; l < k; ++l) zeros += digits[l] == 0 ? 1 : 0;
    zero_count[c] = zeros;

    if (i0 == 0) {
      for (int i = 0; i < N; ++i) col[i] = T.at(i, j);
      for (int i = 1; i < N - 1; ++i) out.at(i, c) = ddx(s, col, i);
    } else {
      const int a = i0;
      for (int l = 0; l < k; ++l) {
        const int stride = ipow(n, k - 1 - l);
        if (digits[l] == 0) {
          const int jj = j + a * stride;
          for (int i = 1; i < N - 1; ++i) out.at(i, c) -= conn[i] * T.at(i, jj);
        } else if (digits[l] == a) {
          const int jj = j - a * stride;
          for (int i = 1; i < N - 1; ++i) out.at(i, c) += conn[i] * T.at(i, jj);
        }
      }
    }
  }
  // Poles: components odd under reflection through the pole vanish; even
  // ones are extrapolated from the neighbouring nodes.
  const double s1 = s[1] - s[0], s2 = s[2] - s[0];
  const double t1 = s[N - 1] - s[N - 2], t2 = s[N - 1] - s[N - 3];
  for (int c = 0; c < out.comps; ++c) {
    if (zero_count[c] % 2 == 1) {
      out.at(0, c) = 0.0;
      out.at(N - 1, c) = 0.0;
    } else {
      out.at(0, c) = even_extrapolate(out.at(1, c), s1, out.at(2, c), s2);
      out.at(N - 1, c) = even_extrapolate(out.at(N - 2, c), t1, out.at(N - 3, c), t2);
    }
  }
  return out;
}

std::vector<double> norms(const NodeTensor& T, int N) {
  std::vector<double> out(N);
  for (int i = 0; i < N; ++i) {
    double acc = 0.0;
    for (int c = 0; c < T.comps; ++c) acc += T.at(i, c) * T.at(i, c);
    out[i] = std::sqrt(acc);
  }
  return out;
}

NodeTensor diagonal_form(int n, int N, const std::vector<double>& k_profile, const std::vector<double>& k_rot) {
  NodeTensor T;
  T.n = n;
  T.rank = 2;
  T.comps = n * n;
  T.v.assign(std::size_t(N) * T.comps, 0.0);
  for (int i = 0; i < N; ++i) {
    T.at(i, 0) = k_profile[i];
    for (int a = 1; a < n; ++a) T.at(i, a * n + a) = k_rot[i];
  }
  return T;
}

}  // namespace

CurvatureField axi_curvature(const AxiProfileSurface& p, int m_max) {
  require(m_max >= 0 && m_max <= 3, ErrorCode::unsupported, "m_max beyond backend capability (axi supports m <= 3)");
  const int N = int(p.nodes.size());
  require(N >= 5, ErrorCode::precondition, "profile needs at least 5 nodes");
  const int n = p.n;
  Ghosted g{p.nodes, N};

  CurvatureField f;
  f.n = n;
  f.m_max = m_max;
  f.normal.resize(N);
  f.mean_curvature.resize(N);
  f.principal.resize(std::size_t(N) * n);
  f.norm_A_sq.resize(N);
  f.norm_Ao_sq.resize(N);
  f.derivative_extrapolated.assign(N, false);
  f.derivative_extrapolated.front() = true;
  f.derivative_extrapolated.back() = true;

  // Quartic reconstruction through five nodes (mirrored ghosts at the poles),
  // parametrized by cumulative chord length. Fourth-order accuracy keeps the
  // O(s^2) umbilic defect near each pole resolved.
  std::vector<double> kp(N), kr(N), conn(N, 0.0);
  std::array<double, 5> sg{};
  std::array<std::array<double, 5>, 3> w{};
  for (int i = 0; i < N; ++i) {
    ProfileNode pts[5];
    for (int k = 0; k < 5; ++k) pts[k] = g.at(i - 2 + k);
    sg[0] = 0.0;
    for (int k = 1; k < 5; ++k) sg[k] = sg[k - 1] + std::hypot(pts[k].x - pts[k - 1].x, pts[k].r - pts[k - 1].r);
    fornberg_weights(sg, sg[2], w);
    double x1 = 0, x2 = 0, r1 = 0, r2 = 0;
    for (int k = 0; k < 5; ++k) {
      x1 += w[1][k] * pts[k].x;
      x2 += w[2][k] * pts[k].x;
      r1 += w[1][k] * pts[k].r;
      r2 += w[2][k] * pts[k].r;
    }
    const double sp = std::hypot(x1, r1);
    kp[i] = -(x1 * r2 - r1 * x2) / (sp * sp * sp);
    const double tx = x1 / sp, tr = r1 / sp;
    f.normal[i] = Vec3(-tr, tx, 0.0);
    if (i == 0 || i == N - 1) {
      kr[i] = kp[i];
    } else {
      kr[i] = tx / pts[2].r;
      conn[i] = tr / pts[2].r;
    }
  }

  for (int i = 0; i < N; ++i) {
    const double H = kp[i] + (n - 1) * kr[i];
    f.mean_curvature[i] = H;
    f.principal[std::size_t(i) * n] = kp[i];
    for (int a = 1; a < n; ++a) f.principal[std::size_t(i) * n + a] = kr[i];
    const double d = kp[i] - kr[i];
    f.norm_Ao_sq[i] = double(n - 1) / n * d * d;
    f.norm_A_sq[i] = f.norm_Ao_sq[i] + H * H / n;
  }

  const auto s = profile_arclength(p);
  f.mean_spacing = s.back() / double(N - 1);
  if (m_max == 0) return f;

  f.grad_H.assign(N, 0.0);
  f.grad_abs_Ao.assign(N, 0.0);
  std::vector<double> absAo(N);
  for (int i = 0; i < N; ++i) absAo[i] = std::sqrt(f.norm_Ao_sq[i]);
  for (int i = 1; i < N - 1; ++i) {
    f.grad_H[i] = std::abs(ddx(s, f.mean_curvature, i));
    f.grad_abs_Ao[i] = std::abs(ddx(s, absAo, i));
  }

  NodeTensor A = diagonal_form(n, N, kp, kr);
  std::vector<double> kpo(N), kro(N);
  for (int i = 0; i < N; ++i) {
    kpo[i] = kp[i] - f.mean_curvature[i] / n;
    kro[i] = kr[i] - f.mean_curvature[i] / n;
  }
  NodeTensor Ao = diagonal_form(n, N, kpo, kro);
  for (int m = 1; m <= m_max; ++m) {
    A = covariant_derivative(A, s, conn, N);
    Ao = covariant_derivative(Ao, s, conn, N);
    f.grad_A[m - 1] = norms(A, N);
    f.grad_Ao[m - 1] = norms(Ao, N);
  }
  return f;
}

}  // namespace mcflab::detail

namespace mcflab {

std::vector<double> profile_scalar_laplacian(const AxiProfileSurface& p, const std::vector<double>& f) {
  const int N = int(p.nodes.size());
  const int n = p.n;
  std::vector<double> out(N, 0.0);
  const auto s = profile_arclength(p);
  auto rw = [&](int i, int j) { return std::pow(0.5 * (p.nodes[i].r + p.nodes[j].r), n - 1); };
  for (int i = 1; i < N - 1; ++i) {
    const double hm = s[i] - s[i - 1], hp = s[i + 1] - s[i];
    const double flux = rw(i, i + 1) * (f[i + 1] - f[i]) / hp - rw(i - 1, i) * (f[i] - f[i - 1]) / hm;
    out[i] = flux / (std::pow(p.nodes[i].r, n - 1) * 0.5 * (hm + hp));
  }
  const double h0 = s[1] - s[0], h1 = s[N - 1] - s[N - 2];
  out[0] = 2.0 * n * (f[1] - f[0]) / (h0 * h0);
  out[N - 1] = 2.0 * n * (f[N - 2] - f[N - 1]) / (h1 * h1);
  return out;
}

}  // namespace mcflab
