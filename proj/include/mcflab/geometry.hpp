#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "mcflab/error.hpp"

namespace mcflab {

using Vec3 = Eigen::Vector3d;

enum class Backend { mesh, axi };

const char* to_string(Backend b);
Backend backend_from_string(const std::string& s);

/// Closed oriented triangle mesh in R^3 (hypersurface dimension 2).
struct TriMeshSurface {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  /// Mixed Voronoi area per vertex; sums to the total mesh area.
  std::vector<double> vertex_weights;
};

struct ProfileNode {
  double x = 0.0;  // axis coordinate
  double r = 0.0;  // distance from the axis
};

/// Profile curve (x, r) from pole to pole generating a hypersurface of
/// revolution M^n in R^{n+1}. Node i carries the weight
/// |S^{n-1}| r_i^{n-1} (s_{i+1} - s_{i-1}) / 2.
struct AxiProfileSurface {
  int n = 2;
  std::vector<ProfileNode> nodes;
  std::vector<double> node_weights;
};

class Hypersurface {
 public:
  Hypersurface() = default;
  explicit Hypersurface(TriMeshSurface mesh);
  explicit Hypersurface(AxiProfileSurface profile);

  /// Builds a mesh surface and computes its vertex weights.
  static Hypersurface from_mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> triangles);
  /// Builds a profile surface and computes its node weights.
  static Hypersurface from_profile(int n, std::vector<ProfileNode> nodes);

  Backend backend() const { return std::holds_alternative<TriMeshSurface>(data_) ? Backend::mesh : Backend::axi; }
  bool is_mesh() const { return backend() == Backend::mesh; }
  bool is_axi() const { return backend() == Backend::axi; }
  int dimension() const;
  std::size_t node_count() const;

  const TriMeshSurface& mesh() const { return std::get<TriMeshSurface>(data_); }
  const AxiProfileSurface& axi() const { return std::get<AxiProfileSurface>(data_); }
  TriMeshSurface& mesh() { return std::get<TriMeshSurface>(data_); }
  AxiProfileSurface& axi() { return std::get<AxiProfileSurface>(data_); }

  const std::vector<double>& weights() const;

  /// Recomputes the measure weights after node positions change.
  void refresh_weights();

  /// Multiplies every node position by `factor` (about the origin).
  void scale(double factor);

  /// Node position embedded in R^3. Axi nodes map to (x, r, 0).
  Vec3 position(std::size_t i) const;

 private:
  std::variant<TriMeshSurface, AxiProfileSurface> data_;
};

// --- constructors ---------------------------------------------------------

Hypersurface build_sphere(Backend backend, int n, double radius, int resolution);
Hypersurface build_perturbed_sphere(Backend backend, int n, double radius, int mode, double amplitude,
                                    int resolution);
Hypersurface build_dumbbell(int n, double neck_radius, double bulb_radius, double bulb_separation,
                            int resolution);
Hypersurface build_ellipsoid(double a, double b, double c, int resolution);

// --- measurements ---------------------------------------------------------

/// Area of the unit sphere S^k in R^{k+1}.
double unit_sphere_area(int k);

double total_area(const Hypersurface& surface);

/// Graph-geodesic diameter. Mesh: Dijkstra on the edge graph augmented
/// with the opposite-vertex diagonals of each edge (exact all-pairs for
/// small meshes, repeated farthest-point sweeps otherwise). Axi: profile
/// arc length from pole to pole.
double intrinsic_diameter(const Hypersurface& surface);
double mesh_graph_diameter(const TriMeshSurface& mesh, bool exact);

/// Mean node spacing: mean edge length (mesh) or mean profile segment (axi).
double mean_spacing(const Hypersurface& surface);
/// Smallest edge / segment length.
double min_spacing(const Hypersurface& surface);

/// Cumulative chord length along a profile; s[0] = 0.
std::vector<double> profile_arclength(const AxiProfileSurface& p);

/// Per-node area centroid of the surface measure.
Vec3 area_centroid(const Hypersurface& surface);

/// True when the origin lies inside the enclosed region (ray parity).
bool encloses_origin(const Hypersurface& surface);

/// Translates the surface so that its area centroid sits at the origin.
void recenter(Hypersurface& surface);

struct Violation {
  std::string kind;
  std::vector<std::size_t> locations;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(const std::string& kind) const;
  std::string summary() const;
};

ValidationReport validate(const Hypersurface& surface);

/// Legendre polynomial P_l(z) by the three-term recurrence.
double legendre(int l, double z);

}  // namespace mcflab
