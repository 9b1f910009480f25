// Unit tests for the conformal flow integrator: fixed points, the exact
// average-curvature law on shrinking spheres, area projection, sampling,
// the normalized time/scale map, and the closed-form bound oracles.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "peflow/errors.hpp"
#include "peflow/flow.hpp"
#include "peflow/meshgen.hpp"
#include "peflow/metric.hpp"
#include "peflow/rng.hpp"

using namespace peflow;

namespace {

constexpr double kPi = std::numbers::pi;

double curvature_spread(const FlowState& st) {
  return (st.R.array() - st.r).abs().maxCoeff();
}

}  // namespace

TEST_CASE("make_flow_state: consistent caches") {
  TriangleMesh m = generate_genus2();
  Rng rng(3);
  ConformalMetric g(m, rng.uniform_field(m.nv, -0.2, 0.2));
  FlowState st = make_flow_state(g);
  CHECK(st.t == 0.0);
  CHECK(st.area_target == g.area);
  CHECK(st.r == doctest::Approx(average_scalar_curvature(g)).epsilon(1e-14));
  CHECK((st.R - scalar_curvature(g)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("step: uniform genus-2 metric is an exact normalized fixed point") {
  // Every vertex has the same degree and every edge the same length, so
  // R = r identically and the normalized right-hand side vanishes.
  TriangleMesh m = generate_genus2();
  ConformalMetric g(m, ScalarField::Zero(m.nv));
  CHECK(curvature_spread(make_flow_state(g)) < 1e-12);

  FlowSpec spec;
  spec.kind = FlowKind::normalized_ricci;
  spec.dt = 1e-3;
  FlowState st = step(make_flow_state(g), spec);
  CHECK(st.metric.u.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(st.t == doctest::Approx(1e-3));
}

TEST_CASE("step: round sphere moves at most 1e-8 per tiny normalized step") {
  TriangleMesh m = generate_icosphere(2);
  ConformalMetric g(m, ScalarField::Zero(m.nv));
  FlowSpec spec;
  spec.kind = FlowKind::normalized_ricci;
  spec.dt = 1e-8;
  FlowState st = step(make_flow_state(g), spec);
  CHECK(st.metric.u.cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("step: flat torus is stationary under every flow kind") {
  TriangleMesh m = generate_flat_torus(8, 8, 1.0, 1.0);
  ConformalMetric g(m, ScalarField::Zero(m.nv));
  for (FlowKind kind :
       {FlowKind::normalized_ricci, FlowKind::unnormalized_ricci,
        FlowKind::yamabe_2d, FlowKind::general_conformal}) {
    FlowSpec spec;
    spec.kind = kind;
    spec.dt = 1e-3;
    if (kind == FlowKind::general_conformal)
      spec.phi = [](const ConformalMetric&, const ScalarField& R, double r) {
        return ScalarField(0.5 * (R.array() - r).matrix());
      };
    FlowState st = step(make_flow_state(g), spec);
    CHECK(st.metric.u.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("run: shrinking sphere obeys the exact average-curvature law") {
  // Unnormalized flow keeps the total curvature at its topological value, so
  // the area shrinks linearly and r(t) = r0 / (1 - r0 t) exactly; with the
  // continuum r0 = 2 this is 10/3 at t = 0.2.
  TriangleMesh m = generate_icosphere(3);
  ConformalMetric g(m, ScalarField::Zero(m.nv));
  FlowSpec spec;
  spec.kind = FlowKind::unnormalized_ricci;
  spec.dt = 1e-3;
  spec.t_end = 0.2;
  spec.sample_stride = 50;
  Trajectory traj = run(g, spec);
  CHECK_FALSE(traj.clamped);
  double r0 = traj.samples.front().r;
  CHECK(r0 == doctest::Approx(2.0).epsilon(0.01));
  double area0 = traj.samples.front().metric.area;
  for (const FlowState& st : traj.samples) {
    CHECK(st.r == doctest::Approx(r0 / (1.0 - r0 * st.t)).epsilon(1e-9));
    CHECK(st.metric.area ==
          doctest::Approx(area0 - 8.0 * kPi * st.t).epsilon(1e-9));
  }
  CHECK(traj.samples.back().r == doctest::Approx(10.0 / 3.0).epsilon(0.02));
}

TEST_CASE("run: area projection restores the target exactly each step") {
  TriangleMesh m = generate_genus2();
  Rng rng(9);
  ConformalMetric g(m, rng.uniform_field(m.nv, -0.1, 0.1));
  FlowSpec spec;
  spec.kind = FlowKind::normalized_ricci;
  spec.dt = 1e-3;
  spec.t_end = 0.05;
  spec.sample_stride = 5;
  Trajectory traj = run(g, spec);
  for (size_t k = 1; k < traj.samples.size(); ++k) {
    const FlowState& st = traj.samples[k];
    CHECK(st.metric.area == doctest::Approx(g.area).epsilon(1e-13));
    CHECK(st.projection_drift <= 1e-8);
    double total = integrate(st.metric, st.R);
    CHECK(total == doctest::Approx(-8.0 * kPi).epsilon(1e-10));
  }
}

TEST_CASE("run: sample counts follow the stride contract") {
  TriangleMesh m = generate_flat_torus(4, 4, 1.0, 1.0);
  ConformalMetric g(m, ScalarField::Zero(m.nv));
  FlowSpec spec;
  spec.dt = 1e-2;
  spec.t_end = 1.0;
  for (int stride : {1, 7}) {
    spec.sample_stride = stride;
    Trajectory traj = run(g, spec);
    int expected = (100 + stride - 1) / stride + 1;
    CHECK(static_cast<int>(traj.samples.size()) == expected);
    for (size_t k = 1; k < traj.samples.size(); ++k)
      CHECK(traj.samples[k].t > traj.samples[k - 1].t);
    CHECK(traj.samples.back().t == doctest::Approx(1.0));
  }
}

TEST_CASE("run: curvature spread does not grow on the normalized sphere") {
  TriangleMesh m = generate_icosphere(2);
  ConformalMetric g(m, ScalarField::Zero(m.nv));
  FlowSpec spec;
  spec.kind = FlowKind::normalized_ricci;
  spec.dt = 1e-3;
  spec.t_end = 0.1;
  spec.sample_stride = 10;
  Trajectory traj = run(g, spec);
  double initial = curvature_spread(traj.samples.front());
  for (const FlowState& st : traj.samples)
    CHECK(curvature_spread(st) <= initial * (1.0 + 1e-6));
}

TEST_CASE("run: normalized flow flattens a perturbed genus-2 metric") {
  TriangleMesh m = generate_genus2();
  Rng rng(17);
  ConformalMetric g(m, rng.uniform_field(m.nv, -0.1, 0.1));
  FlowSpec spec;
  spec.kind = FlowKind::normalized_ricci;
  spec.dt = 5e-3;
  spec.t_end = 0.5;
  spec.sample_stride = 10;
  Trajectory traj = run(g, spec);
  for (size_t k = 1; k < traj.samples.size(); ++k)
    CHECK(curvature_spread(traj.samples[k]) <
          curvature_spread(traj.samples[k - 1]));
}

TEST_CASE("run: blow-up clamp on positively curved unnormalized flows") {
  TriangleMesh m = generate_icosphere(2);
  ConformalMetric g(m, ScalarField::Zero(m.nv));
  double rho0 = scalar_curvature(g).minCoeff();
  FlowSpec spec;
  spec.kind = FlowKind::unnormalized_ricci;
  spec.dt = 1e-3;
  spec.t_end = 10.0;
  spec.sample_stride = 1000;

  Trajectory traj = run(g, spec);
  CHECK(traj.clamped);
  CHECK(traj.t_end_clamped == doctest::Approx(0.8 / rho0).epsilon(1e-12));

  EigenConfig cfg;
  cfg.p = 1.5;
  cfg.restarts = 1;
  cfg.max_iters = 50;
  Trajectory traj2 = run(g, spec, &cfg);
  double a = std::max(0.5, 2.0 / (1.5 * 1.5));
  CHECK(traj2.t_end_clamped ==
        doctest::Approx(0.8 / (2.0 * a * rho0)).epsilon(1e-12));
}

TEST_CASE("normalize_map: scale map matches the closed sphere solution") {
  TriangleMesh m = generate_icosphere(2);
  ConformalMetric g(m, ScalarField::Zero(m.nv));
  FlowSpec spec;
  spec.kind = FlowKind::unnormalized_ricci;
  spec.dt = 1e-3;
  spec.t_end = 0.25;
  spec.sample_stride = 5;  // t_tilde is a trapezoid over samples
  EigenConfig cfg;
  cfg.p = 2.0;
  cfg.restarts = 1;
  Trajectory traj = run(g, spec, &cfg);
  NormalizeMap map = normalize_map(traj, cfg.p);

  CHECK(map.c.front() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(map.t_tilde.front() == 0.0);
  CHECK(map.lambda_tilde.front() ==
        doctest::Approx(traj.eigen.front().lambda).epsilon(1e-14));

  double r0 = traj.samples.front().r;
  for (size_t k = 0; k < traj.samples.size(); ++k) {
    double t = traj.samples[k].t;
    CHECK(map.c[k] == doctest::Approx(1.0 / (1.0 - r0 * t)).epsilon(1e-9));
    double t_tilde_exact = -std::log(1.0 - r0 * t) / r0;
    CHECK(map.t_tilde[k] == doctest::Approx(t_tilde_exact).epsilon(5e-4));
  }

  Trajectory bare = run(g, spec);
  CHECK_THROWS_AS(normalize_map(bare, 2.0), MissingLambda);
}

TEST_CASE("step: error conditions") {
  TriangleMesh m = generate_genus2();

  SUBCASE("curvature blow-up is detected") {
    ConformalMetric g(m, ScalarField::Constant(m.nv, -10.0));
    FlowSpec spec;
    spec.kind = FlowKind::unnormalized_ricci;
    spec.dt = 1e-6;
    CHECK_THROWS_AS(step(make_flow_state(g), spec), BlowupDetected);
  }
  SUBCASE("step underflow on an impossibly fast supplier") {
    ConformalMetric g(m, ScalarField::Zero(m.nv));
    FlowSpec spec;
    spec.kind = FlowKind::general_conformal;
    spec.dt = 1e-3;
    spec.phi = [](const ConformalMetric& gm, const ScalarField&, double) {
      return ScalarField(ScalarField::Constant(gm.mesh->nv, 1e12));
    };
    CHECK_THROWS_AS(step(make_flow_state(g), spec), StepUnderflow);
  }
  SUBCASE("spec validation") {
    ConformalMetric g(m, ScalarField::Zero(m.nv));
    FlowState st = make_flow_state(g);
    FlowSpec spec;
    spec.dt = 0.0;
    CHECK_THROWS_AS(step(st, spec), BadParams);
    spec = FlowSpec{};
    spec.blowup_safety = 1.0;
    CHECK_THROWS_AS(step(st, spec), BadParams);
    spec = FlowSpec{};
    spec.sample_stride = 0;
    CHECK_THROWS_AS(step(st, spec), BadParams);
    spec = FlowSpec{};
    spec.kind = FlowKind::general_conformal;
    CHECK_THROWS_AS(step(st, spec), BadParams);
  }
}

TEST_CASE("power_bound: hyperbolic growth closed form") {
  CHECK(power_bound(0.0, 2.0, 1.0) == doctest::Approx(2.0));
  CHECK(power_bound(0.25, 2.0, 1.0) == doctest::Approx(4.0).epsilon(1e-14));
  double prev = power_bound(0.0, -3.0, 1.0);
  for (double t : {1.0, 5.0, 50.0}) {
    double v = power_bound(t, -3.0, 1.0);
    CHECK(v > prev);
    CHECK(v < 0.0);
    prev = v;
  }
  CHECK_THROWS_AS(power_bound(0.5, 2.0, 1.0), PastBlowup);
  CHECK_THROWS_AS(power_bound(1.0, 2.0, 1.0), PastBlowup);
  CHECK_THROWS_AS(power_bound(0.1, 0.0, 1.0), BadParams);
}

TEST_CASE("sharp_lower_bound: endpoints and the half-life value") {
  CHECK(sharp_lower_bound(0.0, -2.0, -4.0) == doctest::Approx(-4.0).epsilon(1e-14));
  CHECK(sharp_lower_bound(100.0, -2.0, -4.0) == doctest::Approx(-2.0).epsilon(1e-12));
  double t_half = 0.5 * std::log(2.0);
  CHECK(sharp_lower_bound(t_half, -2.0, -4.0) ==
        doctest::Approx(-8.0 / 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(sharp_lower_bound(0.1, 1.0, -4.0), BadParams);
}

TEST_CASE("chow_knopf_bounds: branch arithmetic") {
  auto [lo0, hi0] = chow_knopf_bounds(0.5, 0.0, 2.0);
  CHECK(lo0 == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(hi0 == doctest::Approx(2.0).epsilon(1e-14));

  auto [lon, hin] = chow_knopf_bounds(0.0, -2.0, 0.7);
  CHECK(lon == doctest::Approx(-2.7).epsilon(1e-14));
  CHECK(hin == doctest::Approx(-1.3).epsilon(1e-14));

  auto [lof, hif] = chow_knopf_bounds(50.0, -2.0, 0.7);
  CHECK(lof == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(hif == doctest::Approx(-2.0).epsilon(1e-10));

  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    double t = rng.uniform(0.0, 3.0);
    double r = rng.uniform(-2.0, 2.0);
    double C = rng.uniform(0.0, 5.0);
    auto [lo, hi] = chow_knopf_bounds(t, r, C);
    CHECK(lo <= hi);
  }
  CHECK_THROWS_AS(chow_knopf_bounds(0.1, 1.0, -0.5), NegativeC);
}
