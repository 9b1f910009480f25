// Closed-form monotone quantities along the flows, eigenvalue rate formulas,
// and the monotonicity / comparison / continuity checkers. Evaluators are
// pure; checkers consume immutable series and return reports.
#pragma once

#include <json.hpp>

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "peflow/flow.hpp"
#include "peflow/metric.hpp"
#include "peflow/peigen.hpp"

namespace peflow {

enum class ChiSign { negative, zero, positive };
enum class Direction { increasing, decreasing };

// Families proved monotone along the *unnormalized* flows.
enum class UnnormFamily {
  t10b,          // lambda (rho0^{-1} - 2 a t)^{1/(2a)}, increasing
  norma1,        // lambda (sigma0^{-1} - (2n/p^2) t)^{p^2/(2n)}, decreasing
  yamadiff_inc,  // Yamabe increasing branch (p >= n and 1 < p < n forms)
  yamadiff_dec,  // Yamabe decreasing branch
};

struct BoundParams {
  double rho0 = 0.0;    // min of R(0)
  double sigma0 = 0.0;  // max of R(0)
  double C = 0.0;       // curvature-sandwich constant estimate
  double r = 0.0;       // average scalar curvature (exactly 0.0 when chi = 0)
  double p = 2.0;
  int n = 2;

  double a() const { return std::max(1.0 / n, n / (p * p)); }
};

// Smallest constant making the exponential curvature sandwich hold at t = 0:
//   r < 0:  max |R0 - r|
//   r = 0:  max |R0|          (floored at 1e-12)
//   r > 0:  max(-min R0, max R0 - r, 1e-12)
// Validity along the trajectory is checked by the harness, never assumed.
double estimate_C(const ScalarField& R0, double r);

// Increasing quantity along the normalized flow; six branches by sign of chi
// and the p-regime (p >= 2 vs 1 < p < 2). Throws BranchMismatch when the
// sign of params.r contradicts chi.
double q_coro17(double lambda, double t, const BoundParams& params, ChiSign chi);

// Decreasing counterpart, same branch structure.
double q_thm19(double lambda, double t, const BoundParams& params, ChiSign chi);

// Monotone families along the unnormalized flows; throws PastBlowup once a
// bracketed factor reaches zero, BranchMismatch when the family needs
// positive initial curvature (t10b: rho0 > 0, norma1: sigma0 > 0) and the
// params do not provide it.
double q_unnorm_family(double lambda, double t, const BoundParams& params,
                       UnnormFamily which);

// d lambda / dt predicted at a converged eigensolution:
//   normalized Ricci:    lambda I_R + (p/2 - 1) J_R - (p/2) r lambda
//   unnormalized/Yamabe: lambda I_R + (p/2 - 1) J_R
// with I_R the |f|^p-weighted curvature integral and J_R the |df|^p-weighted
// one (face quadrature with face-mean R). For the normalized kind the value
// is cross-checked against the general-conformal evaluation at
// phi = (R - r)/2, an algebraic identity at quadrature level. For
// general_conformal pass phi explicitly. Throws NotConverged on an
// unconverged input.
double predicted_rate(const ConformalMetric& g, const EigenSolution& sol,
                      FlowKind kind, double p, const ScalarField* phi = nullptr);

// Rate for the general conformal deformation dg/dt = -2 phi g:
//   2 lambda I_phi + (p - 2) J_phi.
double predicted_rate_conformal(const ConformalMetric& g, const EigenSolution& sol,
                                const ScalarField& phi, double p);

// Maximum-principle lower bound for the unnormalized rate under the 2-D
// pinching hypothesis (1/2 - 1/p) R >= -eps_pinch pointwise (checked;
// PinchingViolated otherwise):
//   lambda * integral of |f|^p (R - p eps_pinch) dmu.
// predicted_rate of the unnormalized kind dominates this exactly at the
// quadrature level whenever the hypothesis holds.
double rate_lower_bound(const ConformalMetric& g, const EigenSolution& sol, double p,
                        double eps_pinch);

struct QuantitySample {
  double t = 0.0;
  double lambda = 0.0;
  double q = 0.0;
};

struct QuantitySeries {
  std::string name;
  Direction direction = Direction::increasing;
  std::vector<QuantitySample> samples;  // strictly increasing t
  double tol = 1e-6;                    // slack per unit of max(1, |q|)
};

struct MonotoneReport {
  std::string name;
  Direction direction = Direction::increasing;
  bool pass = false;
  double worst_violation = 0.0;  // largest raw backward move (0 when monotone)
  double t_at_worst = 0.0;
  double tol = 0.0;
};

// Passes iff every consecutive move satisfies
//   direction-signed (q_{i+1} - q_i) >= -tol * max(1, |q_i|).
// The report carries the raw worst backward move so stricter audits remain
// possible.
MonotoneReport assert_monotone(const QuantitySeries& series);

struct ComparisonReport {
  double ratio = 0.0;      // lambda_bar / lambda_g
  double threshold = 0.0;  // lower bound on the ratio
  double upper = std::numeric_limits<double>::infinity();
  double margin = 0.0;  // ratio / threshold - 1
  bool pass = false;
  double p = 2.0;
  double slack = 0.0;
};

// lambda(g_bar)/lambda(g) >= (kappa_bar/kappa_g)^{p/2} for p >= 2 on chi < 0
// (kappas must be negative; WrongSign otherwise), with the rough two-sided
// estimates for 1 < p < 2 built from C and r = 2 kappa_bar:
//   lower: e^{(1-p/2) C/r} (kappa_bar/kappa_g)
//   upper: e^{-C/r} (kappa_bar/kappa_g)^{p/2-1}
// and for p >= 2 the upper estimate e^{-(p/2) C/r} when C is supplied.
// C is required for 1 < p < 2 (BranchMismatch if NaN).
ComparisonReport check_comparison(double lambda_g, double lambda_bar, double kappa_g,
                                  double kappa_bar, double p,
                                  double C = std::numeric_limits<double>::quiet_NaN(),
                                  double slack = 2e-2);

// ((1+eps)^{-(n+p/2)}, (1+eps)^{(n+p/2)}); throws NegativeEps.
std::pair<double, double> continuity_bounds(double eps, int n, double p);

struct ContinuityReport {
  double ratio = 0.0;  // lambda_1 / lambda_2
  double lo = 0.0;
  double hi = 0.0;
  bool pass = false;
  double eps = 0.0;
  double p = 2.0;
  bool converged = false;  // both solves converged
};

// Builds u2 = u1 + w with |w| <= (1/2) ln(1+eps) (uniform, seeded), solves
// both metrics with `solver`, and checks lambda_1/lambda_2 against
// continuity_bounds with 1e-3 slack.
ContinuityReport check_continuity(const ConformalMetric& g, double eps, double p,
                                  const EigenConfig& solver,
                                  std::uint64_t perturb_seed);

const char* to_string(Direction d);
const char* to_string(ChiSign s);

void to_json(nlohmann::json& j, const MonotoneReport& r);
void to_json(nlohmann::json& j, const ComparisonReport& r);
void to_json(nlohmann::json& j, const ContinuityReport& r);

}  // namespace peflow
