// First eigenvalue of the p-Laplace operator on a conformal metric:
//
//   lambda_{1,p} = inf  E_p(f) / M_p(f)   over nonzero f with
//                  integral of |f|^{p-2} f dmu = 0   (median constraint),
//
// solved by projected descent over random restarts, with a p = 2 linear
// oracle (inverse power iteration) and the eigenfunction transport used to
// warm-start solves along a flow.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "peflow/metric.hpp"

namespace peflow {

struct EigenConfig {
  double p = 2.0;
  double tol_lambda = 1e-8;    // relative lambda stability window
  double tol_residual = 1e-6;  // relative Euler-Lagrange residual gate
  int max_iters = 5000;        // per regularization stage
  int restarts = 8;
  // Regularizer schedule for p < 2 (the gradient of |grad f|^p is singular
  // where grad f = 0). Ignored for p >= 2, where a single unregularized
  // stage suffices. Strictly decreasing.
  std::vector<double> eps_schedule = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
  std::uint64_t rng_seed = 1234;
};

struct EigenSolution {
  double lambda = 0.0;
  ScalarField f;             // p-normalized, recentered
  double s0_residual = 0.0;  // |integral of |f|^{p-2} f dmu| at the returned f
  double el_residual = 0.0;  // weighted Euler-Lagrange residual norm (absolute)
  int iterations = 0;        // accepted descent steps, summed over stages
  bool converged = false;
  double p = 2.0;
};

struct RecenterResult {
  double s0 = 0.0;
  ScalarField shifted;  // f + s0
};

// Solves F'(s) = p * integral of |f+s|^{p-2} (f+s) dmu = 0 for the unique
// root s0 (F' is strictly increasing in s). Bracketing bisection on
// [-max f, -min f], polished by Newton when p >= 2; bisection only for
// p < 2, where F'' can blow up at crossings. Throws ConstantInput when f
// has no range to bracket a sign change.
RecenterResult recenter(const ConformalMetric& g, const ScalarField& f, double p);

// E_p(f) / M_p(f) with the unregularized energy. Requires a non-constant,
// recentered f (NotRecentered otherwise); scaling f by any nonzero constant
// leaves the value unchanged.
double rayleigh(const ConformalMetric& g, const ScalarField& f, double p);

// Weighted norm of the Euler-Lagrange residual
//   r_i = (1/(p mu_i)) dE_p/df_i - lambda |f_i|^{p-2} f_i,
// returned as (sum_i r_i^2 mu_i)^{1/2}. Zero exactly at a critical point.
double el_residual(const ConformalMetric& g, const ScalarField& f, double p,
                   double lambda);

// Multi-restart projected descent on the Rayleigh quotient. Each accepted
// step is an Armijo-backtracked (factor 0.5, initial step 1/lambda) move
// along a Hessian-preconditioned gradient of the eps-regularized energy,
// followed by recentering and p-normalization; eps anneals down the
// schedule for p < 2. A solution is converged when lambda is stable to
// tol_lambda over a 20-iteration window AND the relative Euler-Lagrange
// residual is below tol_residual. Restarts are merged by (converged,
// smallest lambda, restart index). When `init` is given it seeds restart 0
// (warm start); remaining restarts stay random.
EigenSolution solve_first_eigen(const ConformalMetric& g, const EigenConfig& config,
                                const ScalarField* init = nullptr);

struct LinearEigenResult {
  double lambda = 0.0;
  ScalarField f;  // mu-orthogonal to constants, mu-normalized
  int iterations = 0;
};

// p = 2 oracle: inverse power iteration on the generalized problem
// K x = lambda M x restricted mu-orthogonal to constants, with a small
// fixed shift to make the factorization definite. Throws SolverBreakdown
// if the shifted factorization fails repeatedly (retried with jitter).
LinearEigenResult linear_first_eigen(const ConformalMetric& g);

// Transport of a test function between conformal metrics on one mesh:
//   f' = f * e^{2 (u_from - u_to) / (p-1)},  then p-normalized in g_to.
// Preserves the median constraint exactly: the weight turns mu_from into
// mu_to pointwise inside |f'|^{p-2} f', so a recentered f stays recentered.
ScalarField transport_test_function(const ConformalMetric& g_from,
                                    const ConformalMetric& g_to,
                                    const ScalarField& f, double p);

}  // namespace peflow
