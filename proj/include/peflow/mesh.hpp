// Closed intrinsic triangle meshes: connectivity plus positive edge lengths.
// No embedding is stored; areas, angles, cotangents, and the stiffness matrix
// all derive from the lengths, so flat tori and hyperbolic surfaces are as
// first-class as embedded spheres.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <map>
#include <utility>
#include <vector>

namespace peflow {

using ScalarField = Eigen::VectorXd;

using FaceList = std::vector<std::array<int, 3>>;
using EdgeLengthMap = std::map<std::pair<int, int>, double>;

// Immutable after build_mesh; every field below is precomputed there.
struct TriangleMesh {
  int nv = 0;   // vertices
  int ne = 0;   // edges
  int nf = 0;   // faces
  int chi = 0;  // Euler characteristic V - E + F

  FaceList faces;                        // oriented vertex triples (a, b, c)
  std::vector<std::pair<int, int>> edges;  // undirected, stored (i < j), ascending

  Eigen::VectorXd edge_len;  // per edge, aligned with `edges`
  Eigen::VectorXd w;         // cotan weight per edge, w_ij = (cot alpha + cot beta)/2
  Eigen::VectorXd area_f;    // face areas
  Eigen::MatrixX3d cot;      // cot of the interior angle at corner k of face f
  Eigen::MatrixX3d theta;    // interior angle at corner k of face f
  Eigen::VectorXd A0;        // barycentric vertex area (third of incident faces)
  Eigen::VectorXd delta;     // angle defect: 2*pi minus the angle sum at the vertex

  // Cotan stiffness: K_ij = -w_ij off diagonal, row sums zero. Positive
  // semidefinite on the meshes shipped here (Delaunay-like); f'Kf equals
  // twice the total face Dirichlet energy of f.
  Eigen::SparseMatrix<double> K;

  double edge_length(int i, int j) const;  // throws ShapeMismatch if absent
  int edge_index(int i, int j) const;      // -1 if absent

  std::map<std::pair<int, int>, int> edge_lookup;
};

// Validates that the input is a closed oriented 2-manifold (every edge
// bordered by exactly two faces traversing it in opposite directions, no
// isolated vertices) and that each face satisfies the strict triangle
// inequality; then precomputes all derived geometry.
//
// Throws: NonManifold, InconsistentOrientation, DegenerateFace,
// ValidationError (missing/invalid lengths, bad indices).
TriangleMesh build_mesh(const FaceList& faces, const EdgeLengthMap& edge_lengths);

// (laplace0 f)_i = (1/A0_i) * sum_j w_ij (f_j - f_i).
// Negative semidefinite as a quadratic form against the A0 measure; vanishes
// on constants exactly (weight cancellation).
ScalarField laplace0(const TriangleMesh& mesh, const ScalarField& f);

// Background curvature from angle defects: R0_i = 2 delta_i / A0_i.
// Integrating R0 against A0 gives 4*pi*chi exactly (discrete Gauss-Bonnet).
ScalarField background_curvature(const TriangleMesh& mesh);

}  // namespace peflow
