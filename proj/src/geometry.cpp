#include "mcflab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <queue>
#include <sstream>
#include <unordered_map>

#include <Eigen/Geometry>

namespace mcflab {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

double cot(const Vec3& u, const Vec3& v) {
  const double s = u.cross(v).norm();
  return u.dot(v) / std::max(s, 1e-300);
}

std::vector<double> mixed_voronoi_weights(const TriMeshSurface& m) {
  std::vector<double> w(m.vertices.size(), 0.0);
  for (const auto& t : m.triangles) {
    const Vec3& p0 = m.vertices[t[0]];
    const Vec3& p1 = m.vertices[t[1]];
    const Vec3& p2 = m.vertices[t[2]];
    const double area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
    const Vec3 e01 = p1 - p0, e02 = p2 - p0, e12 = p2 - p1;
    const double d0 = e01.dot(e02);
    const double d1 = (-e01).dot(e12);
    const double d2 = (-e02).dot(-e12);
    if (d0 < 0.0) {
      w[t[0]] += area / 2;
      w[t[1]] += area / 4;
      w[t[2]] += area / 4;
    } else if (d1 < 0.0) {
      w[t[1]] += area / 2;
      w[t[0]] += area / 4;
      w[t[2]] += area / 4;
    } else if (d2 < 0.0) {
      w[t[2]] += area / 2;
      w[t[0]] += area / 4;
      w[t[1]] += area / 4;
    } else {
      const double c0 = cot(e01, e02);
      const double c1 = cot(-e01, e12);
      const double c2 = cot(-e02, -e12);
      w[t[0]] += (e01.squaredNorm() * c2 + e02.squaredNorm() * c1) / 8;
      w[t[1]] += (e01.squaredNorm() * c2 + e12.squaredNorm() * c0) / 8;
      w[t[2]] += (e02.squaredNorm() * c1 + e12.squaredNorm() * c0) / 8;
    }
  }
  return w;
}

std::vector<double> profile_weights(const AxiProfileSurface& p) {
  const std::size_t N = p.nodes.size();
  std::vector<double> w(N, 0.0);
  if (N < 2) return w;
  const double omega = unit_sphere_area(p.n - 1);
  std::vector<double> seg(N - 1);
  for (std::size_t i = 0; i + 1 < N; ++i)
    seg[i] = std::hypot(p.nodes[i + 1].x - p.nodes[i].x, p.nodes[i + 1].r - p.nodes[i].r);
  for (std::size_t i = 0; i < N; ++i) {
    const double left = i > 0 ? seg[i - 1] : 0.0;
    const double right = i + 1 < N ? seg[i] : 0.0;
    const double r = std::max(p.nodes[i].r, 0.0);
    w[i] = omega * std::pow(r, p.n - 1) * 0.5 * (left + right);
  }
  return w;
}

struct ParametricProfile {
  std::function<ProfileNode(double)> at;  // theta in [0, pi]
};

// Samples a parametric pole-to-pole curve at approximately equal arc length.
std::vector<ProfileNode> sample_by_arclength(const ParametricProfile& curve, int N) {
  const int M = 64 * (N - 1);
  std::vector<double> theta(M + 1), s(M + 1, 0.0);
  ProfileNode prev = curve.at(0.0);
  for (int k = 0; k <= M; ++k) {
    theta[k] = kPi * k / M;
    if (k > 0) {
      const ProfileNode cur = curve.at(theta[k]);
      s[k] = s[k - 1] + std::hypot(cur.x - prev.x, cur.r - prev.r);
      prev = cur;
    }
  }
  std::vector<ProfileNode> nodes(N);
  const double S = s[M];
  int k = 0;
  for (int i = 0; i < N; ++i) {
    double th;
    if (i == 0) {
      th = 0.0;
    } else if (i == N - 1) {
      th = kPi;
    } else {
      const double target = S * i / (N - 1);
      while (k + 1 < M && s[k + 1] < target) ++k;
      const double frac = (target - s[k]) / (s[k + 1] - s[k]);
      th = theta[k] + frac * (theta[k + 1] - theta[k]);
    }
    nodes[i] = curve.at(th);
  }
  nodes.front().r = 0.0;
  nodes.back().r = 0.0;
  return nodes;
}

// Geodesic sphere: each icosahedron face subdivided at frequency f and
// projected to the unit sphere. Two vertices sit on the x axis.
void geodesic_unit_sphere(int f, std::vector<Vec3>& verts, std::vector<std::array<int, 3>>& tris) {
  std::vector<Vec3> ico;
  const double lat = std::atan(0.5);
  ico.emplace_back(0, 0, 1);
  for (int k = 0; k < 5; ++k) {
    const double lon = 2 * kPi * k / 5;
    ico.emplace_back(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat));
  }
  for (int k = 0; k < 5; ++k) {
    const double lon = 2 * kPi * k / 5 + kPi / 5;
    ico.emplace_back(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), -std::sin(lat));
  }
  ico.emplace_back(0, 0, -1);
  for (auto& v : ico) v = Vec3(v.z(), v.x(), v.y());
  std::vector<std::array<int, 3>> faces;
  for (int k = 0; k < 5; ++k) {
    const int a = 1 + k, b = 1 + (k + 1) % 5;
    const int c = 6 + k, d = 6 + (k + 1) % 5;
    faces.push_back({0, a, b});
    faces.push_back({a, c, b});
    faces.push_back({b, c, d});
    faces.push_back({11, d, c});
  }
  for (auto& fc : faces) {
    const Vec3 nrm = (ico[fc[1]] - ico[fc[0]]).cross(ico[fc[2]] - ico[fc[0]]);
    if (nrm.dot(ico[fc[0]] + ico[fc[1]] + ico[fc[2]]) < 0) std::swap(fc[1], fc[2]);
  }

  verts = ico;
  std::map<std::tuple<int, int, int>, int> edge_points;
  auto edge_point = [&](int u, int v, int steps_from_u) -> int {
    if (u > v) {
      std::swap(u, v);
      steps_from_u = f - steps_from_u;
    }
    const auto key = std::make_tuple(u, v, steps_from_u);
    auto it = edge_points.find(key);
    if (it != edge_points.end()) return it->second;
    const Vec3 p = ico[u] + (ico[v] - ico[u]) * (double(steps_from_u) / f);
    verts.push_back(p.normalized());
    edge_points.emplace(key, int(verts.size()) - 1);
    return int(verts.size()) - 1;
  };

  tris.clear();
  for (const auto& fc : faces) {
    const int A = fc[0], B = fc[1], C = fc[2];
    // grid point with i steps toward B and j steps toward C
    std::vector<std::vector<int>> id(f + 1, std::vector<int>(f + 1, -1));
    for (int i = 0; i <= f; ++i) {
      for (int j = 0; i + j <= f; ++j) {
        const int k = f - i - j;
        int vid;
        if (i == 0 && j == 0) vid = A;
        else if (i == f) vid = B;
        else if (j == f) vid = C;
        else if (j == 0) vid = edge_point(A, B, i);
        else if (i == 0) vid = edge_point(A, C, j);
        else if (k == 0) vid = edge_point(B, C, j);
        else {
          const Vec3 p = (ico[A] * k + ico[B] * i + ico[C] * j) / f;
          verts.push_back(p.normalized());
          vid = int(verts.size()) - 1;
        }
        id[i][j] = vid;
      }
    }
    for (int i = 0; i < f; ++i) {
      for (int j = 0; i + j < f; ++j) {
        tris.push_back({id[i][j], id[i + 1][j], id[i][j + 1]});
        if (i + j + 1 < f) tris.push_back({id[i + 1][j], id[i + 1][j + 1], id[i][j + 1]});
      }
    }
  }
  for (auto& v : verts) v.normalize();
}

int frequency_for(int resolution) {
  const double f = std::sqrt(std::max(0.0, (resolution - 2) / 10.0));
  return std::max(1, int(std::ceil(f - 1e-9)));
}

std::vector<std::vector<std::pair<int, double>>> diameter_graph(const TriMeshSurface& m) {
  const std::size_t V = m.vertices.size();
  std::vector<std::vector<std::pair<int, double>>> adj(V);
  std::unordered_map<std::uint64_t, std::vector<int>> opposite;
  for (const auto& t : m.triangles) {
    for (int e = 0; e < 3; ++e) {
      const int a = t[e], b = t[(e + 1) % 3], c = t[(e + 2) % 3];
      opposite[edge_key(a, b)].push_back(c);
    }
  }
  auto add = [&](int a, int b) {
    const double d = (m.vertices[a] - m.vertices[b]).norm();
    adj[a].emplace_back(b, d);
    adj[b].emplace_back(a, d);
  };
  for (const auto& [key, opp] : opposite) {
    const int a = int(key >> 32), b = int(key & 0xffffffffu);
    add(a, b);
    if (opp.size() == 2 && opp[0] != opp[1]) add(opp[0], opp[1]);
  }
  return adj;
}

std::vector<double> dijkstra(const std::vector<std::vector<std::pair<int, double>>>& adj, int src) {
  std::vector<double> dist(adj.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[src] = 0.0;
  pq.emplace(0.0, src);
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (const auto& [v, w] : adj[u]) {
      if (d + w < dist[v]) {
        dist[v] = d + w;
        pq.emplace(dist[v], v);
      }
    }
  }
  return dist;
}

}  // namespace

const char* to_string(Backend b) { return b == Backend::mesh ? "mesh" : "axi"; }

Backend backend_from_string(const std::string& s) {
  if (s == "mesh") return Backend::mesh;
  if (s == "axi") return Backend::axi;
  fail(ErrorCode::invalid_argument, "unknown backend '" + s + "' (valid: mesh, axi)");
}

double unit_sphere_area(int k) {
  // |S^k| = 2 pi^{(k+1)/2} / Gamma((k+1)/2)
  return 2.0 * std::pow(kPi, 0.5 * (k + 1)) / std::tgamma(0.5 * (k + 1));
}

double legendre(int l, double z) {
  if (l == 0) return 1.0;
  double p0 = 1.0, p1 = z;
  for (int k = 2; k <= l; ++k) {
    const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

// --- Hypersurface ----------------------------------------------------------

Hypersurface::Hypersurface(TriMeshSurface mesh) : data_(std::move(mesh)) {}
Hypersurface::Hypersurface(AxiProfileSurface profile) : data_(std::move(profile)) {}

Hypersurface Hypersurface::from_mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> triangles) {
  TriMeshSurface m{std::move(vertices), std::move(triangles), {}};
  Hypersurface s(std::move(m));
  s.refresh_weights();
  return s;
}

Hypersurface Hypersurface::from_profile(int n, std::vector<ProfileNode> nodes) {
  require(n >= 2, ErrorCode::invalid_argument, "dimension n must be >= 2");
  AxiProfileSurface p{n, std::move(nodes), {}};
  Hypersurface s(std::move(p));
  s.refresh_weights();
  return s;
}

int Hypersurface::dimension() const { return is_mesh() ? 2 : axi().n; }

std::size_t Hypersurface::node_count() const {
  return is_mesh() ? mesh().vertices.size() : axi().nodes.size();
}

const std::vector<double>& Hypersurface::weights() const {
  return is_mesh() ? mesh().vertex_weights : axi().node_weights;
}

void Hypersurface::refresh_weights() {
  if (is_mesh()) mesh().vertex_weights = mixed_voronoi_weights(mesh());
  else axi().node_weights = profile_weights(axi());
}

void Hypersurface::scale(double factor) {
  if (is_mesh()) {
    for (auto& v : mesh().vertices) v *= factor;
    for (auto& w : mesh().vertex_weights) w *= factor * factor;
  } else {
    auto& p = axi();
    for (auto& nd : p.nodes) {
      nd.x *= factor;
      nd.r *= factor;
    }
    const double wf = std::pow(factor, p.n);
    for (auto& w : p.node_weights) w *= wf;
  }
}

Vec3 Hypersurface::position(std::size_t i) const {
  if (is_mesh()) return mesh().vertices[i];
  const auto& nd = axi().nodes[i];
  return {nd.x, nd.r, 0.0};
}

// --- constructors ----------------------------------------------------------

Hypersurface build_sphere(Backend backend, int n, double radius, int resolution) {
  return build_perturbed_sphere(backend, n, radius, 2, 0.0, resolution);
}

Hypersurface build_perturbed_sphere(Backend backend, int n, double radius, int mode, double amplitude,
                                    int resolution) {
  require(radius > 0, ErrorCode::invalid_argument, "radius must be positive");
  require(mode >= 2, ErrorCode::invalid_argument, "unsupported mode " + std::to_string(mode) + " (need l >= 2)");
  require(std::abs(amplitude) < 0.5, ErrorCode::invalid_argument, "amplitude out of range (|delta| < 0.5)");
  const double R = radius, d = amplitude;
  const int l = mode;
  if (backend == Backend::mesh) {
    require(n == 2, ErrorCode::invalid_argument, "invalid dimension: mesh backend requires n = 2");
    require(resolution >= 12, ErrorCode::invalid_argument, "resolution below minimum (12 vertices)");
    std::vector<Vec3> verts;
    std::vector<std::array<int, 3>> tris;
    geodesic_unit_sphere(frequency_for(resolution), verts, tris);
    for (auto& v : verts) {
      const double rho = d == 0.0 ? R : R * (1.0 + d * legendre(l, v.x()));
      v *= rho;
    }
    return Hypersurface::from_mesh(std::move(verts), std::move(tris));
  }
  require(n >= 2, ErrorCode::invalid_argument, "invalid dimension: n must be >= 2");
  require(resolution >= 16, ErrorCode::invalid_argument, "resolution below minimum (16 profile nodes)");
  ParametricProfile curve{[=](double th) {
    const double rho = d == 0.0 ? R : R * (1.0 + d * legendre(l, -std::cos(th)));
    return ProfileNode{-rho * std::cos(th), rho * std::sin(th)};
  }};
  return Hypersurface::from_profile(n, sample_by_arclength(curve, resolution));
}

Hypersurface build_dumbbell(int n, double neck_radius, double bulb_radius, double bulb_separation,
                            int resolution) {
  require(n >= 2, ErrorCode::invalid_argument, "invalid dimension: n must be >= 2");
  require(neck_radius > 0 && bulb_radius > 0 && bulb_separation >= 0, ErrorCode::invalid_argument,
          "dumbbell parameters must be positive");
  require(neck_radius < bulb_radius, ErrorCode::invalid_argument,
          "geometric parameters inconsistent: neck_radius must be smaller than bulb_radius");
  require(resolution >= 16, ErrorCode::invalid_argument, "resolution below minimum (16 profile nodes)");
  // r^2 = (L^2 - x^2) p(x^2 / L^2): regular poles at x = +-L, r(0) = neck.
  const double c = 0.5 * bulb_separation;
  const double L = c + bulb_radius;
  const double beta = neck_radius * neck_radius / (L * L);
  const double alpha = bulb_radius * bulb_radius / (L * L - c * c);
  constexpr double kNeckWidth = 3.0;
  ParametricProfile curve{[=](double th) {
    const double v = std::cos(th) * std::cos(th);
    const double p = beta + (alpha - beta) * (1.0 - std::exp(-kNeckWidth * v));
    return ProfileNode{-L * std::cos(th), L * std::sin(th) * std::sqrt(p)};
  }};
  return Hypersurface::from_profile(n, sample_by_arclength(curve, resolution));
}

Hypersurface build_ellipsoid(double a, double b, double c, int resolution) {
  require(a > 0 && b > 0 && c > 0, ErrorCode::invalid_argument, "non-positive axis");
  require(resolution >= 12, ErrorCode::invalid_argument, "resolution below minimum (12 vertices)");
  std::vector<Vec3> verts;
  std::vector<std::array<int, 3>> tris;
  geodesic_unit_sphere(frequency_for(resolution), verts, tris);
  for (auto& v : verts) v = Vec3(a * v.x(), b * v.y(), c * v.z());
  return Hypersurface::from_mesh(std::move(verts), std::move(tris));
}

// --- measurements ----------------------------------------------------------

double total_area(const Hypersurface& surface) {
  double a = 0.0;
  for (double w : surface.weights()) a += w;
  return a;
}

std::vector<double> profile_arclength(const AxiProfileSurface& p) {
  std::vector<double> s(p.nodes.size(), 0.0);
  for (std::size_t i = 1; i < p.nodes.size(); ++i)
    s[i] = s[i - 1] + std::hypot(p.nodes[i].x - p.nodes[i - 1].x, p.nodes[i].r - p.nodes[i - 1].r);
  return s;
}

double mesh_graph_diameter(const TriMeshSurface& m, bool exact) {
  const auto adj = diameter_graph(m);
  const std::size_t V = adj.size();
  double best = 0.0;
  auto sweep = [&](int src, int& far) {
    const auto d = dijkstra(adj, src);
    double mx = 0.0;
    far = src;
    for (std::size_t v = 0; v < V; ++v) {
      require(std::isfinite(d[v]), ErrorCode::precondition, "disconnected surface");
      if (d[v] > mx) {
        mx = d[v];
        far = int(v);
      }
    }
    return mx;
  };
  if (exact) {
    for (std::size_t s = 0; s < V; ++s) {
      int far;
      best = std::max(best, sweep(int(s), far));
    }
    return best;
  }
  int cur = 0;
  for (int it = 0; it < 6; ++it) {
    int far;
    const double d = sweep(cur, far);
    if (d <= best && it > 1) break;
    best = std::max(best, d);
    cur = far;
  }
  return best;
}

double intrinsic_diameter(const Hypersurface& surface) {
  if (surface.is_mesh()) {
    const auto& m = surface.mesh();
    return mesh_graph_diameter(m, m.vertices.size() <= 2500);
  }
  return profile_arclength(surface.axi()).back();
}

double mean_spacing(const Hypersurface& surface) {
  if (surface.is_axi()) {
    const auto s = profile_arclength(surface.axi());
    return s.back() / double(s.size() - 1);
  }
  const auto& m = surface.mesh();
  std::unordered_map<std::uint64_t, double> edges;
  for (const auto& t : m.triangles)
    for (int e = 0; e < 3; ++e)
      edges.emplace(edge_key(t[e], t[(e + 1) % 3]), (m.vertices[t[e]] - m.vertices[t[(e + 1) % 3]]).norm());
  double sum = 0.0;
  for (const auto& kv : edges) sum += kv.second;
  return sum / double(edges.size());
}

double min_spacing(const Hypersurface& surface) {
  double h = std::numeric_limits<double>::infinity();
  if (surface.is_axi()) {
    const auto& nd = surface.axi().nodes;
    for (std::size_t i = 0; i + 1 < nd.size(); ++i)
      h = std::min(h, std::hypot(nd[i + 1].x - nd[i].x, nd[i + 1].r - nd[i].r));
    return h;
  }
  const auto& m = surface.mesh();
  for (const auto& t : m.triangles)
    for (int e = 0; e < 3; ++e) h = std::min(h, (m.vertices[t[e]] - m.vertices[t[(e + 1) % 3]]).norm());
  return h;
}

Vec3 area_centroid(const Hypersurface& surface) {
  const auto& w = surface.weights();
  Vec3 c = Vec3::Zero();
  double W = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    c += w[i] * surface.position(i);
    W += w[i];
  }
  c /= W;
  if (surface.is_axi()) c = Vec3(c.x(), 0.0, 0.0);
  return c;
}

bool encloses_origin(const Hypersurface& surface) {
  if (surface.is_axi()) {
    const auto& nd = surface.axi().nodes;
    return nd.front().x < 0.0 && nd.back().x > 0.0;
  }
  const auto& m = surface.mesh();
  const Vec3 dir = Vec3(0.5772156649, 0.3183098862, 0.7390851332).normalized();
  int hits = 0;
  for (const auto& t : m.triangles) {
    const Vec3& p0 = m.vertices[t[0]];
    const Vec3 e1 = m.vertices[t[1]] - p0, e2 = m.vertices[t[2]] - p0;
    const Vec3 pv = dir.cross(e2);
    const double det = e1.dot(pv);
    if (std::abs(det) < 1e-300) continue;
    const Vec3 tv = -p0;
    const double u = tv.dot(pv) / det;
    if (u < 0.0 || u > 1.0) continue;
    const Vec3 qv = tv.cross(e1);
    const double v = dir.dot(qv) / det;
    if (v < 0.0 || u + v > 1.0) continue;
    if (e2.dot(qv) / det > 0.0) ++hits;
  }
  return hits % 2 == 1;
}

void recenter(Hypersurface& surface) {
  const Vec3 c = area_centroid(surface);
  if (surface.is_axi()) {
    for (auto& nd : surface.axi().nodes) nd.x -= c.x();
  } else {
    for (auto& v : surface.mesh().vertices) v -= c;
  }
}

// --- validation ------------------------------------------------------------

bool ValidationReport::has(const std::string& kind) const {
  return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; });
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& v : violations) os << v.kind << " (" << v.locations.size() << "): " << v.detail << "\n";
  return os.str();
}

ValidationReport validate(const Hypersurface& surface) {
  ValidationReport rep;
  const auto& w = surface.weights();
  if (surface.is_mesh()) {
    const auto& m = surface.mesh();
    std::map<std::pair<int, int>, int> directed;
    std::map<std::pair<int, int>, int> undirected;
    for (const auto& t : m.triangles) {
      for (int e = 0; e < 3; ++e) {
        const int a = t[e], b = t[(e + 1) % 3];
        directed[{a, b}]++;
        undirected[{std::min(a, b), std::max(a, b)}]++;
      }
    }
    Violation open{"open edge", {}, ""}, nonmanifold{"nonmanifold edge", {}, ""};
    std::ostringstream od;
    for (const auto& [e, cnt] : undirected) {
      if (cnt == 1) {
        open.locations.push_back(std::size_t(e.first));
        open.locations.push_back(std::size_t(e.second));
        od << "(" << e.first << "," << e.second << ") ";
      } else if (cnt > 2) {
        nonmanifold.locations.push_back(std::size_t(e.first));
        nonmanifold.locations.push_back(std::size_t(e.second));
      }
    }
    open.detail = od.str();
    if (!open.locations.empty()) rep.violations.push_back(open);
    if (!nonmanifold.locations.empty()) rep.violations.push_back(nonmanifold);
    Violation orient{"inconsistent orientation", {}, "directed edge used twice"};
    for (const auto& [e, cnt] : directed) {
      if (cnt > 1) {
        orient.locations.push_back(std::size_t(e.first));
        orient.locations.push_back(std::size_t(e.second));
      }
    }
    if (!orient.locations.empty()) rep.violations.push_back(orient);

    double mean_area = 0.0;
    std::vector<double> areas(m.triangles.size());
    for (std::size_t f = 0; f < m.triangles.size(); ++f) {
      const auto& t = m.triangles[f];
      areas[f] = 0.5 * (m.vertices[t[1]] - m.vertices[t[0]]).cross(m.vertices[t[2]] - m.vertices[t[0]]).norm();
      mean_area += areas[f];
    }
    const double total = mean_area;
    mean_area /= std::max<std::size_t>(1, areas.size());
    Violation degen{"degenerate triangle", {}, "area below 1e-12 x mean"};
    for (std::size_t f = 0; f < areas.size(); ++f)
      if (areas[f] <= 1e-12 * mean_area) degen.locations.push_back(f);
    if (!degen.locations.empty()) rep.violations.push_back(degen);

    Violation nonpos{"nonpositive weight", {}, ""};
    double wsum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      wsum += w[i];
      if (!(w[i] > 0.0)) nonpos.locations.push_back(i);
    }
    if (!nonpos.locations.empty()) rep.violations.push_back(nonpos);
    if (w.size() != m.vertices.size() || std::abs(wsum - total) > 1e-9 * total)
      rep.violations.push_back({"weight sum", {}, "vertex weights do not sum to the surface area"});
    return rep;
  }

  const auto& p = surface.axi();
  const auto& nd = p.nodes;
  if (p.n < 2) rep.violations.push_back({"dimension", {}, "n must be >= 2"});
  if (nd.size() < 3) {
    rep.violations.push_back({"too few nodes", {}, "profile needs at least 3 nodes"});
    return rep;
  }
  Violation pole{"open pole", {}, "profile endpoints must lie on the axis"};
  if (nd.front().r != 0.0) pole.locations.push_back(0);
  if (nd.back().r != 0.0) pole.locations.push_back(nd.size() - 1);
  if (!pole.locations.empty()) rep.violations.push_back(pole);
  Violation interior{"interior pole", {}, "interior node with r <= 0"};
  for (std::size_t i = 1; i + 1 < nd.size(); ++i)
    if (!(nd[i].r > 0.0)) interior.locations.push_back(i);
  if (!interior.locations.empty()) rep.violations.push_back(interior);
  Violation ratio{"spacing ratio", {}, "adjacent segment length ratio exceeds 4"};
  Violation zero{"degenerate segment", {}, "zero-length profile segment"};
  for (std::size_t i = 0; i + 1 < nd.size(); ++i) {
    const double h0 = std::hypot(nd[i + 1].x - nd[i].x, nd[i + 1].r - nd[i].r);
    if (!(h0 > 0.0)) zero.locations.push_back(i);
    if (i + 2 < nd.size()) {
      const double h1 = std::hypot(nd[i + 2].x - nd[i + 1].x, nd[i + 2].r - nd[i + 1].r);
      if (h0 > 0 && h1 > 0 && std::max(h0 / h1, h1 / h0) > 4.0) ratio.locations.push_back(i + 1);
    }
  }
  if (!zero.locations.empty()) rep.violations.push_back(zero);
  if (!ratio.locations.empty()) rep.violations.push_back(ratio);
  Violation nonpos{"nonpositive weight", {}, "interior node weight <= 0"};
  for (std::size_t i = 1; i + 1 < w.size(); ++i)
    if (!(w[i] > 0.0)) nonpos.locations.push_back(i);
  if (!nonpos.locations.empty()) rep.violations.push_back(nonpos);
  if (w.size() != nd.size()) rep.violations.push_back({"weight sum", {}, "weight count mismatch"});
  return rep;
}

}  // namespace mcflab
