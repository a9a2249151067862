#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <vector>

#include <Eigen/Geometry>

#include "curvature_internal.hpp"
#include "mcflab/flow.hpp"

namespace mcflab {

namespace {

double weighted_Ao2(const Hypersurface& s, const CurvatureField& f) {
  double acc = 0.0;
  const auto& w = s.weights();
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * f.norm_Ao_sq[i];
  return acc;
}

// --- axisymmetric regridding ----------------------------------------------

// Target spacing at each node, normalized so that it sums to the profile
// length over N-1 segments, Lipschitz-limited so neighbours differ by at
// most the adjacent ratio.
std::vector<double> axi_target_spacing(const AxiProfileSurface& p, const CurvatureField& f, const RemeshPolicy& pol) {
  const int N = int(p.nodes.size());
  const auto s = profile_arclength(p);
  const double L = s.back();
  const double h0 = pol.density_gain * L / std::numbers::pi;
  std::vector<double> h(N);
  for (int i = 0; i < N; ++i) h[i] = 1.0 / (1.0 + std::sqrt(f.norm_A_sq[i]) * h0);
  const double slope = 0.8 * (pol.max_adjacent_ratio - 1.0);
  for (int pass = 0; pass < 4; ++pass) {
    // normalize: integral of 1/h over the profile equals N - 1
    double G = 0.0;
    for (int i = 0; i + 1 < N; ++i) G += 0.5 * (1.0 / h[i] + 1.0 / h[i + 1]) * (s[i + 1] - s[i]);
    const double c = G / (N - 1);
    for (double& v : h) v *= c;
    for (int i = 1; i < N; ++i) h[i] = std::min(h[i], h[i - 1] + slope * (s[i] - s[i - 1]));
    for (int i = N - 1; i-- > 0;) h[i] = std::min(h[i], h[i + 1] + slope * (s[i + 1] - s[i]));
  }
  double G = 0.0;
  for (int i = 0; i + 1 < N; ++i) G += 0.5 * (1.0 / h[i] + 1.0 / h[i + 1]) * (s[i + 1] - s[i]);
  const double c = G / (N - 1);
  for (double& v : h) v *= c;
  return h;
}

ProfileNode ghost(const std::vector<ProfileNode>& nd, int i) {
  const int N = int(nd.size());
  if (i < 0) return {nd[-i].x, -nd[-i].r};
  if (i > N - 1) {
    const int j = 2 * (N - 1) - i;
    return {nd[j].x, -nd[j].r};
  }
  return nd[i];
}

double ghost_s(const std::vector<double>& s, int i) {
  const int N = int(s.size());
  if (i < 0) return -s[-i];
  if (i > N - 1) return 2 * s[N - 1] - s[2 * (N - 1) - i];
  return s[i];
}

Hypersurface axi_regrid(const Hypersurface& surface, const RemeshPolicy& pol) {
  const auto& p = surface.axi();
  const int N = int(p.nodes.size());
  const auto f = curvature_field(surface, 0);
  const auto s = profile_arclength(p);
  const auto h = axi_target_spacing(p, f, pol);

  // cumulative node count G(s) = int 1/h ds; new node k sits at G = k
  std::vector<double> G(N, 0.0);
  for (int i = 1; i < N; ++i) G[i] = G[i - 1] + 0.5 * (1.0 / h[i - 1] + 1.0 / h[i]) * (s[i] - s[i - 1]);
  const double scale = (N - 1) / G.back();
  for (double& g : G) g *= scale;

  std::vector<ProfileNode> out(N);
  out.front() = p.nodes.front();
  out.back() = p.nodes.back();
  int seg = 0;
  for (int k = 1; k < N - 1; ++k) {
    const double target = double(k);
    while (seg + 1 < N - 1 && G[seg + 1] < target) ++seg;
    // invert the piecewise-quadratic G on this segment via its trapezoid form
    const double a = 1.0 / h[seg] * scale, b = 1.0 / h[seg + 1] * scale;
    const double ds = s[seg + 1] - s[seg];
    const double need = target - G[seg];
    double u;
    const double qa = 0.5 * (b - a) / ds, qb = a;
    if (std::abs(qa) * ds < 1e-12 * qb) {
      u = need / qb;
    } else {
      u = (-qb + std::sqrt(std::max(0.0, qb * qb + 4 * qa * need))) / (2 * qa);
    }
    const double sq = s[seg] + std::clamp(u, 0.0, ds);
    // four-point Lagrange interpolation in s with mirrored ghosts
    int j0 = seg - 1;
    double xs = 0.0, rs = 0.0;
    for (int a1 = 0; a1 < 4; ++a1) {
      double l = 1.0;
      const double sa = ghost_s(s, j0 + a1);
      for (int b1 = 0; b1 < 4; ++b1) {
        if (b1 == a1) continue;
        const double sb = ghost_s(s, j0 + b1);
        l *= (sq - sb) / (sa - sb);
      }
      const ProfileNode g = ghost(p.nodes, j0 + a1);
      xs += l * g.x;
      rs += l * g.r;
    }
    out[k] = {xs, rs};
  }
  return Hypersurface::from_profile(p.n, std::move(out));
}

// --- triangle-mesh remeshing ----------------------------------------------

struct MeshEditor {
  std::vector<Vec3> v;
  std::vector<std::array<int, 3>> t;
  std::vector<bool> dead_t;

  std::map<std::pair<int, int>, std::vector<int>> edge_faces() const {
    std::map<std::pair<int, int>, std::vector<int>> e;
    for (int k = 0; k < int(t.size()); ++k) {
      if (dead_t[k]) continue;
      for (int j = 0; j < 3; ++j) {
        const int a = t[k][j], b = t[k][(j + 1) % 3];
        e[{std::min(a, b), std::max(a, b)}].push_back(k);
      }
    }
    return e;
  }

  static int opposite(const std::array<int, 3>& f, int a, int b) {
    for (int j = 0; j < 3; ++j)
      if (f[j] != a && f[j] != b) return f[j];
    return -1;
  }

  Vec3 normal(const std::array<int, 3>& f) const { return (v[f[1]] - v[f[0]]).cross(v[f[2]] - v[f[0]]); }
};

int split_pass(MeshEditor& M, const std::vector<double>& target) {
  auto ef = M.edge_faces();
  std::vector<std::pair<double, std::pair<int, int>>> cand;
  for (const auto& [e, fs] : ef) {
    const double len = (M.v[e.first] - M.v[e.second]).norm();
    const double tgt = 0.5 * (target[e.first] + target[e.second]);
    if (fs.size() == 2 && len > 2.0 * tgt) cand.push_back({len / tgt, e});
  }
  std::sort(cand.rbegin(), cand.rend());
  std::vector<bool> touched(M.t.size(), false);
  int count = 0;
  for (const auto& c : cand) {
    const auto [a, b] = c.second;
    const auto& fs = ef[c.second];
    if (touched[fs[0]] || touched[fs[1]]) continue;
    const int m = int(M.v.size());
    M.v.push_back(0.5 * (M.v[a] + M.v[b]));
    for (int fk : fs) {
      const auto f = M.t[fk];
      // keep orientation: replace a by m in one copy, b by m in the other
      std::array<int, 3> f1 = f, f2 = f;
      for (int j = 0; j < 3; ++j) {
        if (f1[j] == b) f1[j] = m;
        if (f2[j] == a) f2[j] = m;
      }
      M.t[fk] = f1;
      M.t.push_back(f2);
      M.dead_t.push_back(false);
      touched[fk] = true;
      touched.push_back(true);
    }
    ++count;
  }
  return count;
}

int collapse_pass(MeshEditor& M, const std::vector<double>& target_in) {
  std::vector<double> target = target_in;
  target.resize(M.v.size(), 0.0);
  auto ef = M.edge_faces();
  std::vector<std::vector<int>> vf(M.v.size());
  for (int k = 0; k < int(M.t.size()); ++k)
    if (!M.dead_t[k])
      for (int j = 0; j < 3; ++j) vf[M.t[k][j]].push_back(k);
  auto ring = [&](int a) {
    std::set<int> r;
    for (int fk : vf[a])
      for (int j = 0; j < 3; ++j)
        if (M.t[fk][j] != a) r.insert(M.t[fk][j]);
    return r;
  };
  std::vector<std::pair<double, std::pair<int, int>>> cand;
  for (const auto& [e, fs] : ef) {
    const double tgt = 0.5 * (target[e.first] + target[e.second]);
    const double len = (M.v[e.first] - M.v[e.second]).norm();
    if (fs.size() == 2 && len < 0.5 * tgt) cand.push_back({len / tgt, e});
  }
  std::sort(cand.begin(), cand.end());
  std::vector<bool> touched_v(M.v.size(), false);
  int count = 0;
  for (const auto& c : cand) {
    const auto [a, b] = c.second;
    if (touched_v[a] || touched_v[b]) continue;
    const auto ra = ring(a), rb = ring(b);
    std::vector<int> common;
    std::set_intersection(ra.begin(), ra.end(), rb.begin(), rb.end(), std::back_inserter(common));
    if (common.size() != 2) continue;  // link condition
    if (ra.size() + rb.size() - 4 < 3) continue;
    bool bad = false;
    for (int o : common)
      if (ring(o).size() <= 3) bad = true;
    if (bad) continue;
    const Vec3 mid = 0.5 * (M.v[a] + M.v[b]);
    const double tgt = 0.5 * (target[a] + target[b]);
    // reject if it would create long edges or flip any surviving face
    for (int w : ra)
      if (w != b && (M.v[w] - mid).norm() > 1.6 * tgt) bad = true;
    for (int w : rb)
      if (w != a && (M.v[w] - mid).norm() > 1.6 * tgt) bad = true;
    if (bad) continue;
    std::vector<int> faces = vf[a];
    faces.insert(faces.end(), vf[b].begin(), vf[b].end());
    for (int fk : faces) {
      auto f = M.t[fk];
      const bool has_a = std::count(f.begin(), f.end(), a) > 0, has_b = std::count(f.begin(), f.end(), b) > 0;
      if (has_a && has_b) continue;
      const Vec3 n0 = M.normal(f);
      for (int& x : f)
        if (x == a || x == b) x = -1;
      std::array<Vec3, 3> p;
      for (int j = 0; j < 3; ++j) p[j] = f[j] < 0 ? mid : M.v[f[j]];
      const Vec3 n1 = (p[1] - p[0]).cross(p[2] - p[0]);
      if (n1.dot(n0) <= 0.2 * n0.norm() * n1.norm()) bad = true;
    }
    if (bad) continue;
    M.v[a] = mid;
    for (int fk : faces) {
      if (M.dead_t[fk]) continue;
      auto& f = M.t[fk];
      const bool has_a = std::count(f.begin(), f.end(), a) > 0, has_b = std::count(f.begin(), f.end(), b) > 0;
      if (has_a && has_b) {
        M.dead_t[fk] = true;
        continue;
      }
      for (int& x : f)
        if (x == b) x = a;
    }
    touched_v[a] = touched_v[b] = true;
    for (int w : ra) touched_v[w] = true;
    for (int w : rb) touched_v[w] = true;
    ++count;
  }
  return count;
}

int flip_pass(MeshEditor& M) {
  auto ef = M.edge_faces();
  std::vector<int> val(M.v.size(), 0);
  for (const auto& kv : ef) {
    val[kv.first.first]++;
    val[kv.first.second]++;
  }
  std::vector<bool> touched(M.t.size(), false);
  int count = 0;
  for (const auto& [e, fs] : ef) {
    if (fs.size() != 2 || touched[fs[0]] || touched[fs[1]]) continue;
    const int a = e.first, b = e.second;
    const int c = MeshEditor::opposite(M.t[fs[0]], a, b), d = MeshEditor::opposite(M.t[fs[1]], a, b);
    if (c == d || ef.count({std::min(c, d), std::max(c, d)})) continue;
    if (val[a] <= 3 || val[b] <= 3) continue;
    auto dev = [](int x) { return (x - 6) * (x - 6); };
    const int before = dev(val[a]) + dev(val[b]) + dev(val[c]) + dev(val[d]);
    const int after = dev(val[a] - 1) + dev(val[b] - 1) + dev(val[c] + 1) + dev(val[d] + 1);
    if (after >= before) continue;
    // orientation of face 0 decides the order of the new faces
    auto f0 = M.t[fs[0]];
    int ia = 0;
    while (f0[ia] != a) ++ia;
    const bool ab = f0[(ia + 1) % 3] == b;  // face 0 is (a, b, c)
    std::array<int, 3> n1, n2;
    if (ab) {
      n1 = {c, a, d};
      n2 = {d, b, c};
    } else {
      n1 = {c, d, a};
      n2 = {d, c, b};
    }
    const Vec3 before_n = M.normal(M.t[fs[0]]).normalized() + M.normal(M.t[fs[1]]).normalized();
    const Vec3 m1 = M.normal(n1), m2 = M.normal(n2);
    if (m1.dot(before_n) <= 0.5 * m1.norm() * before_n.norm() || m2.dot(before_n) <= 0.5 * m2.norm() * before_n.norm())
      continue;
    M.t[fs[0]] = n1;
    M.t[fs[1]] = n2;
    touched[fs[0]] = touched[fs[1]] = true;
    val[a]--;
    val[b]--;
    val[c]++;
    val[d]++;
    ++count;
  }
  return count;
}

Hypersurface mesh_remesh(const Hypersurface& surface, const RemeshPolicy& pol, RemeshReport& rep) {
  const auto& m = surface.mesh();
  const double h = mean_spacing(surface);
  std::vector<double> target(m.vertices.size(), h);
  if (pol.curvature_gain > 0.0) {
    const auto f = curvature_field(surface, 0);
    for (std::size_t i = 0; i < target.size(); ++i)
      target[i] = h / (1.0 + pol.curvature_gain * h * std::sqrt(f.norm_A_sq[i]));
  }
  MeshEditor M{m.vertices, m.triangles, std::vector<bool>(m.triangles.size(), false)};
  for (int it = 0; it < 4; ++it) {
    const int s = split_pass(M, [&] {
      std::vector<double> t2 = target;
      t2.resize(M.v.size(), h);
      return t2;
    }());
    rep.splits += s;
    // new vertices inherit the mean target of their edge
    target.resize(M.v.size(), h);
    if (s == 0) break;
  }
  for (int it = 0; it < 4; ++it) {
    const int c = collapse_pass(M, target);
    rep.collapses += c;
    if (c == 0) break;
  }
  for (int it = 0; it < 4; ++it) {
    const int fl = flip_pass(M);
    rep.flips += fl;
    if (fl == 0) break;
  }
  if (rep.splits + rep.collapses + rep.flips == 0) return surface;

  // compact
  std::vector<int> used(M.v.size(), 0);
  std::vector<std::array<int, 3>> tris;
  for (std::size_t k = 0; k < M.t.size(); ++k)
    if (!M.dead_t[k]) {
      tris.push_back(M.t[k]);
      for (int x : M.t[k]) used[x] = 1;
    }
  std::vector<int> remap(M.v.size(), -1);
  std::vector<Vec3> verts;
  for (std::size_t i = 0; i < M.v.size(); ++i)
    if (used[i]) {
      remap[i] = int(verts.size());
      verts.push_back(M.v[i]);
    }
  for (auto& t : tris)
    for (int& x : t) x = remap[x];
  return Hypersurface::from_mesh(std::move(verts), std::move(tris));
}

}  // namespace

bool needs_remesh(const Hypersurface& surface, const CurvatureField& f, const RemeshPolicy& pol) {
  if (!pol.enabled) return false;
  if (surface.is_axi()) {
    const auto& p = surface.axi();
    const int N = int(p.nodes.size());
    const auto s = profile_arclength(p);
    const auto h = axi_target_spacing(p, f, pol);
    for (int i = 0; i + 1 < N; ++i) {
      const double seg = s[i + 1] - s[i];
      const double want = 0.5 * (h[i] + h[i + 1]);
      if (seg > pol.trigger_ratio * want || seg < want / pol.trigger_ratio) return true;
      if (i > 0) {
        const double prev = s[i] - s[i - 1];
        const double q = std::max(seg / prev, prev / seg);
        if (q > pol.max_adjacent_ratio * pol.trigger_ratio) return true;
      }
    }
    return false;
  }
  const auto& m = surface.mesh();
  const double hm = mean_spacing(surface);
  for (const auto& t : m.triangles)
    for (int e = 0; e < 3; ++e) {
      const double len = (m.vertices[t[e]] - m.vertices[t[(e + 1) % 3]]).norm();
      double tgt = hm;
      if (pol.curvature_gain > 0.0) {
        const double a = 0.5 * (std::sqrt(f.norm_A_sq[t[e]]) + std::sqrt(f.norm_A_sq[t[(e + 1) % 3]]));
        tgt = hm / (1.0 + pol.curvature_gain * hm * a);
      }
      if (len > 2.0 * tgt || len < 0.5 * tgt) return true;
    }
  return false;
}

Hypersurface remesh(const Hypersurface& surface, const RemeshPolicy& policy, RemeshReport* report) {
  RemeshReport rep;
  Hypersurface out = surface.is_axi() ? axi_regrid(surface, policy) : mesh_remesh(surface, policy, rep);
  const auto vr = validate(out);
  if (!vr.ok()) fail(ErrorCode::precondition, "remesh would violate closedness: " + vr.summary());
  const double a0 = total_area(surface), a1 = total_area(out);
  rep.area_drift = (a1 - a0) / a0;
  rep.int_Ao2_drift = weighted_Ao2(out, curvature_field(out, 0)) - weighted_Ao2(surface, curvature_field(surface, 0));
  rep.changed = surface.is_axi() || rep.splits + rep.collapses + rep.flips > 0;
  if (report) *report = rep;
  return out;
}

}  // namespace mcflab
