// Conformal curvature flows on surfaces. Every flow here is a scalar PDE in
// the conformal exponent u (exact in 2-D, where Ric = (R/2) g):
//
//   normalized Ricci      du/dt = (r - R)/2
//   unnormalized Ricci    du/dt = -R/2
//   Yamabe (2-D)          du/dt = -R/2   (identical vector field in 2-D)
//   general conformal     du/dt = -phi   (deformation dg/dt = -2 phi g)
//
// integrated by classical RK4, plus the closed-form curvature-bound oracles
// and the unnormalized-to-normalized time/scale map.
#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "peflow/metric.hpp"
#include "peflow/peigen.hpp"

namespace peflow {

enum class FlowKind { normalized_ricci, unnormalized_ricci, yamabe_2d, general_conformal };

struct FlowState {
  double t = 0.0;
  ConformalMetric metric;
  ScalarField R;  // scalar curvature of `metric`
  double r = 0.0;  // average scalar curvature
  // integral of r dtau from t = 0, accumulated with the RK4 stage weights so
  // it matches the u-evolution quadrature exactly; feeds c(t) = exp of it.
  double r_integral = 0.0;
  double area_target = 0.0;       // Area(0), restored by the area projection
  double projection_drift = 0.0;  // |pre-projection area - target| / target, last step
};

FlowState make_flow_state(const ConformalMetric& g);

// phi supplier for general_conformal: receives the stage metric and its
// curvature; returns per-vertex phi.
using PhiSupplier =
    std::function<ScalarField(const ConformalMetric&, const ScalarField& R, double r)>;

struct FlowSpec {
  FlowKind kind = FlowKind::normalized_ricci;
  double dt = 1e-3;
  double t_end = 1.0;
  double blowup_safety = 0.8;  // fraction of the closed-form blow-up estimate
  int sample_stride = 1;
  bool area_projection = true;  // normalized kinds only
  PhiSupplier phi;              // required for general_conformal
};

// One step of size spec.dt. The step is internally subdivided (halving) until
// max|du/dt| * h <= 0.1; each substep is one RK4 stage sweep with R and r
// recomputed at every stage. For normalized kinds with area_projection on, a
// constant is added to u afterwards restoring the target area (an exact
// homothety); the pre-projection relative drift is recorded on the state.
// Throws BlowupDetected (max|R| > 1e6) and StepUnderflow (h below 1e-12).
FlowState step(const FlowState& state, const FlowSpec& spec);

struct Trajectory {
  std::vector<FlowState> samples;  // always includes t = 0
  std::vector<EigenSolution> eigen;  // aligned with samples; empty if not requested
  FlowSpec spec;
  double t_end_clamped = 0.0;  // actual end time after any blow-up clamp
  bool clamped = false;
};

// Integrates round(t_end/dt) steps, sampling every sample_stride steps plus
// the final step. For unnormalized kinds with min R(0) > 0 the end time is
// clamped to blowup_safety / (2 a rho0), the closed-form blow-up estimate
// (a = max{1/2, 2/p^2} with p from eigen_config when present, else 1/2).
// When eigen_config is present, lambda is solved at every sample: the first
// cold, later ones warm-started from the transported previous eigenfunction
// with a single restart. Per-sample NotConverged is recorded, never fatal.
Trajectory run(const ConformalMetric& g0, const FlowSpec& spec,
               const EigenConfig* eigen_config = nullptr);

struct NormalizeMap {
  std::vector<double> c;             // c(t) = exp(integral of r)
  std::vector<double> t_tilde;       // trapezoid of c over the samples
  std::vector<double> lambda_tilde;  // c^{-p/2} lambda
};

// Scale map from an unnormalized trajectory with lambda samples to the
// normalized picture. Throws MissingLambda when the trajectory carries no
// eigen solutions.
NormalizeMap normalize_map(const Trajectory& traj, double p);

// Exact solution of dx/dt = k x^2: x(t) = 1/(x0^{-1} - k t).
// Throws PastBlowup at or beyond t = 1/(k x0) when x0 > 0.
double power_bound(double t, double x0, double k);

// Sharp lower bound for R along the normalized flow with r < 0:
//   R(t) >= r / (1 - (1 - r/rho0) e^{rt}).
// Throws DenominatorVanishes if the denominator crosses zero on [0, t].
double sharp_lower_bound(double t, double r, double rho0);

// Exponential curvature sandwich (branch by sign of r):
//   r < 0:  (r - C e^{rt},  r + C e^{rt})
//   r = 0:  (-C/(1 + C t),  C)
//   r > 0:  (-C e^{rt},  r + C e^{rt})
// Throws NegativeC.
std::pair<double, double> chow_knopf_bounds(double t, double r, double C);

}  // namespace peflow
