#include "peflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "peflow/errors.hpp"

namespace peflow {

namespace {

std::pair<int, int> ordered(int i, int j) { return {std::min(i, j), std::max(i, j)}; }

// Kahan's numerically stable Heron formula. Requires x >= y >= z; the
// product is positive exactly when the strict triangle inequality holds.
double triangle_area(double x, double y, double z) {
  double s = (x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z));
  if (!(s > 0.0)) return -1.0;
  return 0.25 * std::sqrt(s);
}

}  // namespace

double TriangleMesh::edge_length(int i, int j) const {
  int e = edge_index(i, j);
  if (e < 0)
    throw ShapeMismatch("edge_length: no edge between vertices " + std::to_string(i) +
                        " and " + std::to_string(j));
  return edge_len[e];
}

int TriangleMesh::edge_index(int i, int j) const {
  auto it = edge_lookup.find(ordered(i, j));
  return it == edge_lookup.end() ? -1 : it->second;
}

TriangleMesh build_mesh(const FaceList& faces, const EdgeLengthMap& edge_lengths) {
  if (faces.empty()) throw ValidationError("build_mesh: no faces");

  TriangleMesh m;
  m.faces = faces;
  m.nf = static_cast<int>(faces.size());

  int max_index = -1;
  for (const auto& f : faces)
    for (int v : f) {
      if (v < 0) throw ValidationError("build_mesh: negative vertex index");
      max_index = std::max(max_index, v);
    }
  m.nv = max_index + 1;

  // Normalize the length table and reject nonsense before any geometry.
  EdgeLengthMap lengths;
  for (const auto& [key, len] : edge_lengths) {
    if (!(len > 0.0) || !std::isfinite(len))
      throw ValidationError("build_mesh: nonpositive edge length");
    auto norm = ordered(key.first, key.second);
    auto [it, inserted] = lengths.emplace(norm, len);
    if (!inserted && it->second != len)
      throw ValidationError("build_mesh: conflicting lengths for one edge");
  }
  auto length_of = [&](int i, int j) -> double {
    auto it = lengths.find(ordered(i, j));
    if (it == lengths.end())
      throw ValidationError("build_mesh: missing length for edge (" + std::to_string(i) +
                            ", " + std::to_string(j) + ")");
    return it->second;
  };

  // Closed oriented 2-manifold: each directed edge used once, and its
  // reverse used once by the neighboring face.
  std::map<std::pair<int, int>, int> directed;
  for (int fi = 0; fi < m.nf; ++fi) {
    auto [a, b, c] = faces[fi];
    if (a == b || b == c || c == a)
      throw DegenerateFace("face " + std::to_string(fi) + " repeats a vertex");
    for (auto [i, j] : {std::pair{a, b}, std::pair{b, c}, std::pair{c, a}}) {
      auto [it, inserted] = directed.emplace(std::pair{i, j}, fi);
      if (!inserted)
        throw InconsistentOrientation("directed edge (" + std::to_string(i) + ", " +
                                      std::to_string(j) + ") used by faces " +
                                      std::to_string(it->second) + " and " +
                                      std::to_string(fi));
    }
  }
  for (const auto& [e, fi] : directed) {
    if (!directed.count({e.second, e.first}))
      throw NonManifold("edge (" + std::to_string(e.first) + ", " +
                        std::to_string(e.second) + ") borders only one face");
  }

  // Per-face geometry: areas, cotangents, interior angles.
  m.area_f.resize(m.nf);
  m.cot.resize(m.nf, 3);
  m.theta.resize(m.nf, 3);
  for (int fi = 0; fi < m.nf; ++fi) {
    auto [a, b, c] = faces[fi];
    double la = length_of(b, c);  // opposite corner a
    double lb = length_of(c, a);
    double lc = length_of(a, b);

    double x = la, y = lb, z = lc;
    if (x < y) std::swap(x, y);
    if (y < z) std::swap(y, z);
    if (x < y) std::swap(x, y);
    double A = triangle_area(x, y, z);
    if (A <= 0.0)
      throw DegenerateFace("face " + std::to_string(fi) +
                           " violates the strict triangle inequality");
    m.area_f[fi] = A;

    const double opp[3] = {la, lb, lc};
    const double e1[3] = {lb, lc, la};
    const double e2[3] = {lc, la, lb};
    for (int k = 0; k < 3; ++k) {
      double num = e1[k] * e1[k] + e2[k] * e2[k] - opp[k] * opp[k];
      m.cot(fi, k) = num / (4.0 * A);
      double cosv = std::clamp(num / (2.0 * e1[k] * e2[k]), -1.0, 1.0);
      m.theta(fi, k) = std::acos(cosv);
    }
  }

  // Vertex areas (barycentric thirds) and angle defects.
  m.A0 = Eigen::VectorXd::Zero(m.nv);
  Eigen::VectorXd angle_sum = Eigen::VectorXd::Zero(m.nv);
  for (int fi = 0; fi < m.nf; ++fi) {
    auto [a, b, c] = faces[fi];
    const int vs[3] = {a, b, c};
    for (int k = 0; k < 3; ++k) {
      m.A0[vs[k]] += m.area_f[fi] / 3.0;
      angle_sum[vs[k]] += m.theta(fi, k);
    }
  }
  for (int v = 0; v < m.nv; ++v)
    if (m.A0[v] == 0.0)
      throw NonManifold("vertex " + std::to_string(v) + " has no incident face");
  m.delta = Eigen::VectorXd::Constant(m.nv, 2.0 * std::numbers::pi) - angle_sum;

  // Undirected edges, lengths, cotan weights.
  std::map<std::pair<int, int>, double> weight;
  for (int fi = 0; fi < m.nf; ++fi) {
    auto [a, b, c] = faces[fi];
    const std::pair<int, int> opp_edge[3] = {{b, c}, {c, a}, {a, b}};
    for (int k = 0; k < 3; ++k)
      weight[ordered(opp_edge[k].first, opp_edge[k].second)] += 0.5 * m.cot(fi, k);
  }
  m.ne = static_cast<int>(weight.size());
  m.edges.reserve(m.ne);
  m.edge_len.resize(m.ne);
  m.w.resize(m.ne);
  int e = 0;
  for (const auto& [key, wv] : weight) {
    m.edges.push_back(key);
    m.edge_len[e] = length_of(key.first, key.second);
    m.w[e] = wv;
    m.edge_lookup[key] = e;
    ++e;
  }
  m.chi = m.nv - m.ne + m.nf;

  // Stiffness matrix with exact zero row sums by construction.
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(4 * m.ne);
  for (int k = 0; k < m.ne; ++k) {
    auto [i, j] = m.edges[k];
    double wv = m.w[k];
    trips.emplace_back(i, j, -wv);
    trips.emplace_back(j, i, -wv);
    trips.emplace_back(i, i, wv);
    trips.emplace_back(j, j, wv);
  }
  m.K.resize(m.nv, m.nv);
  m.K.setFromTriplets(trips.begin(), trips.end());

  // Combinatorial Gauss-Bonnet: the defect sum is forced to 2 pi chi by the
  // angle sums alone; a larger discrepancy means broken input.
  double defect_sum = m.delta.sum();
  double target = 2.0 * std::numbers::pi * m.chi;
  if (std::abs(defect_sum - target) > 1e-9 * (1.0 + m.nv / 1000.0))
    throw ValidationError("build_mesh: angle defect sum " + std::to_string(defect_sum) +
                          " deviates from 2 pi chi = " + std::to_string(target));

  return m;
}

ScalarField laplace0(const TriangleMesh& mesh, const ScalarField& f) {
  if (f.size() != mesh.nv)
    throw ShapeMismatch("laplace0: field length " + std::to_string(f.size()) +
                        " vs " + std::to_string(mesh.nv) + " vertices");
  return (-(mesh.K * f).array() / mesh.A0.array()).matrix();
}

ScalarField background_curvature(const TriangleMesh& mesh) {
  return (2.0 * mesh.delta.array() / mesh.A0.array()).matrix();
}

}  // namespace peflow
