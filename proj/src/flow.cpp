#include "peflow/flow.hpp"

#include <cmath>
#include <utility>

#include "peflow/errors.hpp"

namespace peflow {

namespace {

struct Stage {
  ScalarField rhs;
  double r = 0.0;
};

Stage stage_rhs(const TriangleMesh& mesh, const ScalarField& u,
                const FlowSpec& spec) {
  ConformalMetric g(mesh, u);
  ScalarField R = scalar_curvature(g);
  if (R.cwiseAbs().maxCoeff() > 1e6)
    throw BlowupDetected("curvature magnitude exceeded 1e6");
  Stage st;
  st.r = integrate(g, R) / g.area;
  switch (spec.kind) {
    case FlowKind::unnormalized_ricci:
    case FlowKind::yamabe_2d:
      st.rhs = -0.5 * R;
      break;
    case FlowKind::normalized_ricci:
      st.rhs = 0.5 * (st.r - R.array()).matrix();
      break;
    case FlowKind::general_conformal:
      st.rhs = -spec.phi(g, R, st.r);
      break;
  }
  return st;
}

// One classical RK4 substep of size h on u, accumulating the r-integral with
// the same stage weights so c(t) = exp(integral) is consistent with the
// u-quadrature.
void rk4_substep(const TriangleMesh& mesh, ScalarField& u, double& r_integral,
                 double h, const FlowSpec& spec, const Stage& s1) {
  Stage s2 = stage_rhs(mesh, u + 0.5 * h * s1.rhs, spec);
  Stage s3 = stage_rhs(mesh, u + 0.5 * h * s2.rhs, spec);
  Stage s4 = stage_rhs(mesh, u + h * s3.rhs, spec);
  u += (h / 6.0) * (s1.rhs + 2.0 * s2.rhs + 2.0 * s3.rhs + s4.rhs);
  r_integral += (h / 6.0) * (s1.r + 2.0 * s2.r + 2.0 * s3.r + s4.r);
}

void check_spec(const FlowSpec& spec) {
  if (!(spec.dt > 0.0)) throw BadParams("flow dt must be positive");
  if (!(spec.t_end > 0.0)) throw BadParams("flow t_end must be positive");
  if (!(spec.blowup_safety > 0.0 && spec.blowup_safety < 1.0))
    throw BadParams("blowup_safety must lie in (0, 1)");
  if (spec.sample_stride < 1) throw BadParams("sample_stride must be >= 1");
  if (spec.kind == FlowKind::general_conformal && !spec.phi)
    throw BadParams("general_conformal requires a phi supplier");
}

}  // namespace

FlowState make_flow_state(const ConformalMetric& g) {
  FlowState st{0.0, g, scalar_curvature(g), 0.0, 0.0, g.area, 0.0};
  st.r = integrate(g, st.R) / g.area;
  return st;
}

FlowState step(const FlowState& state, const FlowSpec& spec) {
  check_spec(spec);
  const TriangleMesh& mesh = *state.metric.mesh;
  ScalarField u = state.metric.u;
  double r_integral = state.r_integral;

  // Advance by exactly spec.dt, halving the substep whenever the explicit
  // stability proxy max|du/dt| * h exceeds 0.1.
  double remaining = spec.dt;
  double h = spec.dt;
  while (remaining > 0.0) {
    if (h > remaining) h = remaining;
    Stage s1 = stage_rhs(mesh, u, spec);
    double speed = s1.rhs.cwiseAbs().maxCoeff();
    if (speed * h > 0.1) {
      h *= 0.5;
      if (h < 1e-12) throw StepUnderflow("flow substep fell below 1e-12");
      continue;
    }
    rk4_substep(mesh, u, r_integral, h, spec, s1);
    remaining -= h;
  }

  FlowState next = state;
  next.t = state.t + spec.dt;
  next.r_integral = r_integral;
  next.projection_drift = 0.0;
  if (spec.kind == FlowKind::normalized_ricci && spec.area_projection) {
    ConformalMetric raw(mesh, u);
    next.projection_drift =
        std::abs(raw.area - state.area_target) / state.area_target;
    u.array() += 0.5 * std::log(state.area_target / raw.area);
  }
  next.metric = ConformalMetric(mesh, u);
  next.R = scalar_curvature(next.metric);
  next.r = integrate(next.metric, next.R) / next.metric.area;
  return next;
}

Trajectory run(const ConformalMetric& g0, const FlowSpec& spec,
               const EigenConfig* eigen_config) {
  check_spec(spec);
  Trajectory traj;
  traj.spec = spec;

  double t_end = spec.t_end;
  bool clamped = false;
  if (spec.kind == FlowKind::unnormalized_ricci ||
      spec.kind == FlowKind::yamabe_2d) {
    double rho0 = scalar_curvature(g0).minCoeff();
    if (rho0 > 0.0) {
      double a = 0.5;
      if (eigen_config)
        a = std::max(0.5, 2.0 / (eigen_config->p * eigen_config->p));
      double t_safe = spec.blowup_safety / (2.0 * a * rho0);
      if (t_end > t_safe) {
        t_end = t_safe;
        clamped = true;
      }
    }
  }
  traj.t_end_clamped = t_end;
  traj.clamped = clamped;

  FlowSpec stepper = spec;
  stepper.t_end = t_end;

  FlowState state = make_flow_state(g0);
  auto record = [&](const FlowState& st) {
    traj.samples.push_back(st);
    if (!eigen_config) return;
    EigenConfig cfg = *eigen_config;
    if (traj.eigen.empty()) {
      traj.eigen.push_back(solve_first_eigen(st.metric, cfg));
      return;
    }
    // Warm start: transport the previous eigenfunction to the new metric,
    // recenter, and refine with a single restart.
    const EigenSolution& prev = traj.eigen.back();
    const ConformalMetric& g_prev =
        traj.samples[traj.samples.size() - 2].metric;
    ScalarField init =
        transport_test_function(g_prev, st.metric, prev.f, cfg.p);
    init = recenter(st.metric, init, cfg.p).shifted;
    cfg.restarts = 1;
    EigenSolution sol = solve_first_eigen(st.metric, cfg, &init);
    if (!sol.converged) {
      // Warm refinement is an accelerator, not a guarantee: retry with the
      // caller's full restart budget. Keep whichever solution has the
      // smaller Rayleigh value; the eigenvalue is a minimum, so a converged
      // retry that settled in a higher basin does not supersede the tracked
      // branch.
      EigenSolution cold = solve_first_eigen(st.metric, *eigen_config);
      if (cold.lambda < sol.lambda) sol = std::move(cold);
    }
    traj.eigen.push_back(std::move(sol));
  };

  record(state);
  int n = static_cast<int>(std::llround(t_end / spec.dt));
  if (n < 1) n = 1;
  for (int k = 0; k < n; ++k) {
    state = step(state, stepper);
    if ((k + 1) % spec.sample_stride == 0 || k == n - 1) record(state);
  }
  return traj;
}

NormalizeMap normalize_map(const Trajectory& traj, double p) {
  if (traj.eigen.empty())
    throw MissingLambda("trajectory carries no eigenvalue samples");
  if (!(p > 1.0)) throw InvalidP("p must exceed 1");
  NormalizeMap map;
  size_t n = traj.samples.size();
  map.c.resize(n);
  map.t_tilde.resize(n);
  map.lambda_tilde.resize(n);
  for (size_t k = 0; k < n; ++k) {
    map.c[k] = std::exp(traj.samples[k].r_integral);
    if (k == 0) {
      map.t_tilde[k] = 0.0;
    } else {
      double dt = traj.samples[k].t - traj.samples[k - 1].t;
      map.t_tilde[k] =
          map.t_tilde[k - 1] + 0.5 * dt * (map.c[k - 1] + map.c[k]);
    }
    map.lambda_tilde[k] =
        std::pow(map.c[k], -p / 2.0) * traj.eigen[k].lambda;
  }
  return map;
}

double power_bound(double t, double x0, double k) {
  if (x0 == 0.0) throw BadParams("power_bound requires x0 != 0");
  if (k * x0 > 0.0 && t >= 1.0 / (k * x0))
    throw PastBlowup("time at or beyond the hyperbolic blow-up");
  return 1.0 / (1.0 / x0 - k * t);
}

double sharp_lower_bound(double t, double r, double rho0) {
  if (!(r < 0.0)) throw BadParams("sharp_lower_bound requires r < 0");
  double denom = 1.0 - (1.0 - r / rho0) * std::exp(r * t);
  // With rho0 <= r < 0 the denominator stays in (0, 1]; a vanishing value can
  // only come from inconsistent inputs (e.g. rho0 > 0).
  if (!(std::abs(denom) > 1e-14))
    throw DenominatorVanishes("sharp lower bound denominator vanished");
  return r / denom;
}

std::pair<double, double> chow_knopf_bounds(double t, double r, double C) {
  if (C < 0.0) throw NegativeC("curvature-bound constant must be >= 0");
  if (r < 0.0) {
    double e = C * std::exp(r * t);
    return {r - e, r + e};
  }
  if (r == 0.0) return {-C / (1.0 + C * t), C};
  return {-C * std::exp(r * t), r + C * std::exp(r * t)};
}

}  // namespace peflow
