#pragma once

#include <vector>

#include "mcflab/curvature.hpp"

namespace mcflab::detail {

CurvatureField axi_curvature(const AxiProfileSurface& p, int m_max);
CurvatureField mesh_curvature(const TriMeshSurface& m, int m_max);

/// One-ring neighbours per vertex, sorted ascending.
std::vector<std::vector<int>> vertex_neighbors(const TriMeshSurface& m);

/// Area-weighted unit vertex normals.
std::vector<Vec3> vertex_normals(const TriMeshSurface& m);

/// Cotangent weights (cot a + cot b) / 2 per undirected edge, as triplets.
struct CotEdge {
  int i, j;
  double w;
};
std::vector<CotEdge> cotangent_edges(const TriMeshSurface& m);

}  // namespace mcflab::detail
