// Conformal metrics g = e^{2u} g0 over a background TriangleMesh, and the
// measures, curvature, and p-Dirichlet energies computed from them. All
// operations are pure; a metric never mutates its mesh.
#pragma once

#include <Eigen/Dense>

#include "peflow/mesh.hpp"

namespace peflow {

struct ConformalMetric {
  const TriangleMesh* mesh = nullptr;
  Eigen::VectorXd u;   // per-vertex conformal exponent
  Eigen::VectorXd mu;  // vertex measure e^{2 u_i} A0_i
  double area = 0.0;   // sum of mu

  ConformalMetric() = default;
  ConformalMetric(const TriangleMesh& m, Eigen::VectorXd u_field);
};

// R = e^{-2u} (R0 - 2 laplace0 u). The integral of R against mu equals
// 4*pi*chi for every u (the Laplacian term cancels antisymmetrically).
ScalarField scalar_curvature(const ConformalMetric& g);

// sum_i field_i mu_i
double integrate(const ConformalMetric& g, const ScalarField& field);

// r = (integral of R) / Area, from the discrete quadrature.
double average_scalar_curvature(const ConformalMetric& g);

// The value r is forced to by Gauss-Bonnet: 4*pi*chi / Area. Logged next to
// the quadrature value for drift monitoring; the two agree to rounding.
double gauss_bonnet_average(const ConformalMetric& g);

// kappa_g = min_i R_i / 2
double min_gauss_curvature(const ConformalMetric& g);

// Intrinsic squared norm of the piecewise-linear gradient of f per face,
// with respect to the background metric:
//   |grad f|^2_f = [cot_a (f_b-f_c)^2 + cot_b (f_c-f_a)^2 + cot_c (f_a-f_b)^2]
//                  / (2 area_f)
Eigen::VectorXd face_gradient_sq(const TriangleMesh& mesh, const ScalarField& f);

// Arithmetic mean of the three corner u values per face (the face conformal
// factor enters energies as e^{(2-p) ubar}; the mean-in-exponent choice keeps
// the constant-shift identities exact).
Eigen::VectorXd face_u_mean(const TriangleMesh& mesh, const Eigen::VectorXd& u);

// E_p(f) = sum_f area_f e^{(2-p) ubar_f} (|grad f|^2_f + eps_reg^2)^{p/2}.
// With eps_reg = 0 this is the exact discrete p-Dirichlet energy of f in the
// metric g; at p = 2 it reduces to the cotan form (1/2) sum_ij w_ij (f_i-f_j)^2
// identically. Replacing u by u + c multiplies the value by e^{(2-p)c} exactly.
double dirichlet_p_energy(const ConformalMetric& g, const ScalarField& f, double p,
                          double eps_reg);

// Gradient of dirichlet_p_energy with respect to the vertex values of f.
// On faces where |grad f|^2 + eps_reg^2 = 0 the (sub)gradient 0 is returned.
ScalarField dirichlet_p_energy_gradient(const ConformalMetric& g, const ScalarField& f,
                                        double p, double eps_reg);

// sum_i |f_i|^p mu_i; scales by e^{2c} under u -> u + c exactly.
double p_mass(const ConformalMetric& g, const ScalarField& f, double p);

// sign(x) |x|^q, with sgnpow(0, q) = 0 for q > 0.
double sgnpow(double x, double q);

}  // namespace peflow
