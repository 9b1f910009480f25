#include "peflow/meshgen.hpp"

#include <array>
#include <cmath>
#include <map>

#include "peflow/errors.hpp"

namespace peflow {

namespace {

using Vec3 = std::array<double, 3>;

Vec3 normalized(const Vec3& v) {
  double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return {v[0] / n, v[1] / n, v[2] / n};
}

double distance(const Vec3& a, const Vec3& b) {
  double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Genus-2 triangulation with minimum vertex count for all-negative defects:
// V - E + F = -2 with every vertex of degree 7 forces V = 12, E = 42, F = 28.
constexpr std::array<std::array<int, 3>, 28> kGenus2Faces = {{
    {0, 1, 2},   {0, 2, 3},   {0, 3, 4},  {0, 4, 5},   {0, 5, 6},  {0, 6, 7},
    {0, 7, 1},   {2, 1, 4},   {4, 1, 5},  {4, 3, 8},   {2, 4, 9},  {4, 8, 9},
    {3, 2, 5},   {2, 9, 10},  {5, 2, 10}, {6, 5, 10},  {5, 1, 3},  {10, 9, 7},
    {6, 10, 11}, {10, 7, 8},  {11, 10, 8}, {7, 6, 8},  {8, 3, 11}, {9, 8, 6},
    {3, 1, 11},  {1, 7, 11},  {7, 9, 11}, {6, 11, 9},
}};

}  // namespace

TriangleMesh generate_icosphere(int level, double radius) {
  if (level < 0 || level > 8)
    throw BadParams("icosphere: level must be in [0, 8]");
  if (!(radius > 0.0)) throw BadParams("icosphere: radius must be positive");

  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : verts) v = normalized(v);
  FaceList faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                    {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                    {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                    {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int i, int j) {
      auto key = std::minmax(i, j);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 m = normalized({verts[i][0] + verts[j][0], verts[i][1] + verts[j][1],
                           verts[i][2] + verts[j][2]});
      int idx = static_cast<int>(verts.size());
      verts.push_back(m);
      midpoint.emplace(key, idx);
      return idx;
    };
    FaceList next;
    next.reserve(4 * faces.size());
    for (auto [a, b, c] : faces) {
      int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
      next.push_back({a, ab, ca});
      next.push_back({ab, b, bc});
      next.push_back({ca, bc, c});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  EdgeLengthMap lengths;
  for (auto [a, b, c] : faces)
    for (auto [i, j] : {std::pair{a, b}, std::pair{b, c}, std::pair{c, a}})
      lengths[std::minmax(i, j)] = radius * distance(verts[i], verts[j]);
  return build_mesh(faces, lengths);
}

TriangleMesh generate_flat_torus(int nx, int ny, double Lx, double Ly) {
  if (nx < 3 || ny < 3)
    throw BadParams("flat_torus: nx and ny must be at least 3");
  if (!(Lx > 0.0) || !(Ly > 0.0))
    throw BadParams("flat_torus: side lengths must be positive");

  double dx = Lx / nx, dy = Ly / ny;
  double dd = std::hypot(dx, dy);
  auto vid = [&](int i, int j) {
    return ((i % nx + nx) % nx) * ny + ((j % ny + ny) % ny);
  };
  FaceList faces;
  faces.reserve(2 * nx * ny);
  EdgeLengthMap lengths;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1),
          v11 = vid(i + 1, j + 1);
      faces.push_back({v00, v10, v11});
      faces.push_back({v00, v11, v01});
      lengths[std::minmax(v00, v10)] = dx;
      lengths[std::minmax(v00, v01)] = dy;
      lengths[std::minmax(v00, v11)] = dd;
    }
  return build_mesh(faces, lengths);
}

TriangleMesh generate_genus2(double scale) {
  if (!(scale > 0.0)) throw BadParams("genus2: scale must be positive");
  FaceList faces(kGenus2Faces.begin(), kGenus2Faces.end());
  EdgeLengthMap lengths;
  for (auto [a, b, c] : faces)
    for (auto [i, j] : {std::pair{a, b}, std::pair{b, c}, std::pair{c, a}})
      lengths[std::minmax(i, j)] = scale;
  return build_mesh(faces, lengths);
}

}  // namespace peflow
