#include "peflow/metric.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "peflow/errors.hpp"

namespace peflow {

namespace {

void check_field(const TriangleMesh& mesh, const ScalarField& f, const char* who) {
  if (f.size() != mesh.nv)
    throw ShapeMismatch(std::string(who) + ": field length " + std::to_string(f.size()) +
                        " vs " + std::to_string(mesh.nv) + " vertices");
}

void check_p(double p, const char* who) {
  if (!(p > 1.0)) throw InvalidP(std::string(who) + ": requires p > 1");
}

}  // namespace

ConformalMetric::ConformalMetric(const TriangleMesh& m, Eigen::VectorXd u_field)
    : mesh(&m), u(std::move(u_field)) {
  check_field(m, u, "ConformalMetric");
  mu = (2.0 * u.array()).exp() * m.A0.array();
  area = mu.sum();
  if (!std::isfinite(area) || !(mu.minCoeff() > 0.0))
    throw ValidationError("ConformalMetric: measure must be positive and finite");
}

ScalarField scalar_curvature(const ConformalMetric& g) {
  const TriangleMesh& mesh = *g.mesh;
  ScalarField lap_u = laplace0(mesh, g.u);
  return ((-2.0 * g.u.array()).exp() *
          (background_curvature(mesh).array() - 2.0 * lap_u.array()))
      .matrix();
}

double integrate(const ConformalMetric& g, const ScalarField& field) {
  check_field(*g.mesh, field, "integrate");
  return field.dot(g.mu);
}

double average_scalar_curvature(const ConformalMetric& g) {
  return integrate(g, scalar_curvature(g)) / g.area;
}

double gauss_bonnet_average(const ConformalMetric& g) {
  return 4.0 * std::numbers::pi * g.mesh->chi / g.area;
}

double min_gauss_curvature(const ConformalMetric& g) {
  return scalar_curvature(g).minCoeff() / 2.0;
}

Eigen::VectorXd face_gradient_sq(const TriangleMesh& mesh, const ScalarField& f) {
  check_field(mesh, f, "face_gradient_sq");
  Eigen::VectorXd out(mesh.nf);
  for (int fi = 0; fi < mesh.nf; ++fi) {
    auto [a, b, c] = mesh.faces[fi];
    double dbc = f[b] - f[c], dca = f[c] - f[a], dab = f[a] - f[b];
    out[fi] = (mesh.cot(fi, 0) * dbc * dbc + mesh.cot(fi, 1) * dca * dca +
               mesh.cot(fi, 2) * dab * dab) /
              (2.0 * mesh.area_f[fi]);
  }
  return out;
}

Eigen::VectorXd face_u_mean(const TriangleMesh& mesh, const Eigen::VectorXd& u) {
  check_field(mesh, u, "face_u_mean");
  Eigen::VectorXd out(mesh.nf);
  for (int fi = 0; fi < mesh.nf; ++fi) {
    auto [a, b, c] = mesh.faces[fi];
    out[fi] = (u[a] + u[b] + u[c]) / 3.0;
  }
  return out;
}

double dirichlet_p_energy(const ConformalMetric& g, const ScalarField& f, double p,
                          double eps_reg) {
  check_p(p, "dirichlet_p_energy");
  const TriangleMesh& mesh = *g.mesh;
  check_field(mesh, f, "dirichlet_p_energy");
  Eigen::VectorXd gsq = face_gradient_sq(mesh, f);
  Eigen::VectorXd ub = face_u_mean(mesh, g.u);
  double ex = p / 2.0;
  double total = 0.0;
  for (int fi = 0; fi < mesh.nf; ++fi) {
    double ge = gsq[fi] + eps_reg * eps_reg;
    double pw = (ex == 1.0) ? ge : std::pow(ge, ex);
    total += mesh.area_f[fi] * std::exp((2.0 - p) * ub[fi]) * pw;
  }
  return total;
}

ScalarField dirichlet_p_energy_gradient(const ConformalMetric& g, const ScalarField& f,
                                        double p, double eps_reg) {
  check_p(p, "dirichlet_p_energy_gradient");
  const TriangleMesh& mesh = *g.mesh;
  check_field(mesh, f, "dirichlet_p_energy_gradient");
  Eigen::VectorXd gsq = face_gradient_sq(mesh, f);
  Eigen::VectorXd ub = face_u_mean(mesh, g.u);
  ScalarField out = ScalarField::Zero(mesh.nv);
  for (int fi = 0; fi < mesh.nf; ++fi) {
    double ge = gsq[fi] + eps_reg * eps_reg;
    // Subgradient 0 where the regularized gradient vanishes (only possible
    // at eps_reg = 0 on a flat face).
    if (ge <= 0.0) continue;
    double coef = std::exp((2.0 - p) * ub[fi]) * (p / 2.0) *
                  ((p / 2.0 - 1.0) == 0.0 ? 1.0 : std::pow(ge, p / 2.0 - 1.0));
    auto [a, b, c] = mesh.faces[fi];
    double ca = mesh.cot(fi, 0), cb = mesh.cot(fi, 1), cc = mesh.cot(fi, 2);
    out[a] += coef * (cb * (f[a] - f[c]) + cc * (f[a] - f[b]));
    out[b] += coef * (cc * (f[b] - f[a]) + ca * (f[b] - f[c]));
    out[c] += coef * (ca * (f[c] - f[b]) + cb * (f[c] - f[a]));
  }
  return out;
}

double p_mass(const ConformalMetric& g, const ScalarField& f, double p) {
  check_p(p, "p_mass");
  check_field(*g.mesh, f, "p_mass");
  if (p == 2.0) return (f.array().square() * g.mu.array()).sum();
  return (f.array().abs().pow(p) * g.mu.array()).sum();
}

double sgnpow(double x, double q) {
  if (x == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(x), q), x);
}

}  // namespace peflow
