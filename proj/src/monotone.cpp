#include "peflow/monotone.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "peflow/errors.hpp"
#include "peflow/rng.hpp"

namespace peflow {

namespace {

void check_p(double p, const char* where) {
  if (!(p > 1.0)) {
    throw InvalidP(std::string(where) + ": p must exceed 1, got " + std::to_string(p));
  }
}

void check_branch(double r, ChiSign chi, const char* where) {
  const bool ok = (chi == ChiSign::negative && r < 0.0) ||
                  (chi == ChiSign::zero && r == 0.0) ||
                  (chi == ChiSign::positive && r > 0.0);
  if (!ok) {
    throw BranchMismatch(std::string(where) + ": r = " + std::to_string(r) +
                         " contradicts the chi " + to_string(chi) + " branch");
  }
}

void check_converged(const EigenSolution& sol, const char* where) {
  if (!sol.converged) {
    throw NotConverged(std::string(where) + ": the eigensolution did not converge");
  }
}

// B(t) = rho0/r + (1 - rho0/r) e^{rt}. Equals 1 at t = 0; for r < 0 with
// rho0 <= r it is nondecreasing, so the powers below stay real.
double negative_chi_bracket(double t, double r, double rho0) {
  const double q = rho0 / r;
  return q - q * std::exp(r * t) + std::exp(r * t);
}

double blowup_guard(double factor, const char* family) {
  if (factor <= 0.0) {
    throw PastBlowup(std::string("q_unnorm_family: ") + family +
                     " bracket reached " + std::to_string(factor));
  }
  return factor;
}

// sum_i |f_i|^p X_i mu_i
double vertex_rate_integral(const ConformalMetric& g, const ScalarField& f, double p,
                            const ScalarField& X) {
  return (f.array().abs().pow(p) * X.array() * g.mu.array()).sum();
}

// sum_f area_f e^{(2-p) ubar_f} |grad f|_f^p Xbar_f, with the face mean of X.
// Faces where the squared gradient is nonpositive (constant f up to rounding)
// contribute nothing, matching the energy assembly.
double face_rate_integral(const ConformalMetric& g, const ScalarField& f, double p,
                          const ScalarField& X) {
  const TriangleMesh& mesh = *g.mesh;
  const Eigen::VectorXd gsq = face_gradient_sq(mesh, f);
  const Eigen::VectorXd ub = face_u_mean(mesh, g.u);
  double total = 0.0;
  for (int fi = 0; fi < mesh.nf; ++fi) {
    if (gsq[fi] <= 0.0) continue;
    const auto& tri = mesh.faces[fi];
    const double xbar = (X[tri[0]] + X[tri[1]] + X[tri[2]]) / 3.0;
    total += mesh.area_f[fi] * std::exp((2.0 - p) * ub[fi]) *
             std::pow(gsq[fi], p / 2.0) * xbar;
  }
  return total;
}

void check_solution_shape(const ConformalMetric& g, const EigenSolution& sol,
                          const char* where) {
  if (sol.f.size() != g.mu.size()) {
    throw ShapeMismatch(std::string(where) + ": eigenfunction has " +
                        std::to_string(sol.f.size()) + " entries, metric has " +
                        std::to_string(g.mu.size()));
  }
}

}  // namespace

double estimate_C(const ScalarField& R0, double r) {
  if (R0.size() == 0) {
    throw ShapeMismatch("estimate_C: empty curvature field");
  }
  if (r < 0.0) return (R0.array() - r).abs().maxCoeff();
  if (r == 0.0) return std::max(R0.array().abs().maxCoeff(), 1e-12);
  return std::max({-R0.minCoeff(), R0.maxCoeff() - r, 1e-12});
}

double q_coro17(double lambda, double t, const BoundParams& params, ChiSign chi) {
  check_p(params.p, "q_coro17");
  check_branch(params.r, chi, "q_coro17");
  const double p = params.p;
  const double C = params.C;
  const double r = params.r;
  switch (chi) {
    case ChiSign::negative: {
      const double B = negative_chi_bracket(t, r, params.rho0);
      if (p >= 2.0) return lambda * std::pow(B, p / 2.0);
      return lambda * B * std::exp((1.0 - p / 2.0) * (C / r) * std::exp(r * t));
    }
    case ChiSign::zero:
      if (p >= 2.0) return lambda * std::pow(1.0 + C * t, p / 2.0);
      return lambda * (1.0 + C * t) * std::exp((1.0 - p / 2.0) * C * t);
    case ChiSign::positive:
      if (p >= 2.0) {
        return std::log(lambda) + (p / 2.0) * ((C / r) * std::exp(r * t) + r * t);
      }
      return std::log(lambda) + (2.0 - p / 2.0) * (C / r) * std::exp(r * t) + r * t;
  }
  throw BranchMismatch("q_coro17: unhandled chi branch");
}

double q_thm19(double lambda, double t, const BoundParams& params, ChiSign chi) {
  check_p(params.p, "q_thm19");
  check_branch(params.r, chi, "q_thm19");
  const double p = params.p;
  const double C = params.C;
  const double r = params.r;
  switch (chi) {
    case ChiSign::negative: {
      if (p >= 2.0) return std::log(lambda) - (p / 2.0) * (C / r) * std::exp(r * t);
      const double B = negative_chi_bracket(t, r, params.rho0);
      return lambda * std::pow(B, p / 2.0 - 1.0) * std::exp(-(C / r) * std::exp(r * t));
    }
    case ChiSign::zero:
      if (p >= 2.0) return std::log(lambda) - (p / 2.0) * C * t;
      return lambda * std::pow(1.0 + C * t, p / 2.0 - 1.0) * std::exp(-C * t);
    case ChiSign::positive:
      if (p >= 2.0) return std::log(lambda) - (p / 2.0) * (C / r) * std::exp(r * t);
      return std::log(lambda) - (2.0 - p / 2.0) * (C / r) * std::exp(r * t) -
             (1.0 - p / 2.0) * r * t;
  }
  throw BranchMismatch("q_thm19: unhandled chi branch");
}

double q_unnorm_family(double lambda, double t, const BoundParams& params,
                       UnnormFamily which) {
  check_p(params.p, "q_unnorm_family");
  const double p = params.p;
  const double n = static_cast<double>(params.n);
  switch (which) {
    case UnnormFamily::t10b: {
      if (params.rho0 <= 0.0) {
        throw BranchMismatch("q_unnorm_family: t10b needs min R(0) > 0, got " +
                             std::to_string(params.rho0));
      }
      const double a = params.a();
      const double bracket = blowup_guard(1.0 / params.rho0 - 2.0 * a * t, "t10b");
      return lambda * std::pow(bracket, 1.0 / (2.0 * a));
    }
    case UnnormFamily::norma1: {
      if (params.sigma0 <= 0.0) {
        throw BranchMismatch("q_unnorm_family: norma1 needs max R(0) > 0, got " +
                             std::to_string(params.sigma0));
      }
      const double bracket =
          blowup_guard(1.0 / params.sigma0 - (2.0 * n / (p * p)) * t, "norma1");
      return lambda * std::pow(bracket, p * p / (2.0 * n));
    }
    case UnnormFamily::yamadiff_inc: {
      if (p >= n) {
        return lambda * std::pow(blowup_guard(1.0 - params.rho0 * t, "yamadiff"), p / 2.0);
      }
      const double f_rho = blowup_guard(1.0 - params.rho0 * t, "yamadiff");
      const double f_sigma = blowup_guard(1.0 - params.sigma0 * t, "yamadiff");
      return lambda * std::pow(f_rho, n / 2.0) * std::pow(f_sigma, (p - n) / 2.0);
    }
    case UnnormFamily::yamadiff_dec: {
      if (p >= n) {
        return lambda * std::pow(blowup_guard(1.0 - params.sigma0 * t, "yamadiff"), p / 2.0);
      }
      const double f_rho = blowup_guard(1.0 - params.rho0 * t, "yamadiff");
      const double f_sigma = blowup_guard(1.0 - params.sigma0 * t, "yamadiff");
      return lambda * std::pow(f_rho, (p - n) / 2.0) * std::pow(f_sigma, n / 2.0);
    }
  }
  throw BranchMismatch("q_unnorm_family: unhandled family");
}

double predicted_rate(const ConformalMetric& g, const EigenSolution& sol,
                      FlowKind kind, double p, const ScalarField* phi) {
  check_converged(sol, "predicted_rate");
  check_p(p, "predicted_rate");
  check_solution_shape(g, sol, "predicted_rate");
  if (sol.p != p) {
    throw BadParams("predicted_rate: p = " + std::to_string(p) +
                    " disagrees with the eigensolution p = " + std::to_string(sol.p));
  }
  if (kind == FlowKind::general_conformal) {
    if (phi == nullptr) {
      throw BadParams("predicted_rate: the general conformal kind needs a phi field");
    }
    return predicted_rate_conformal(g, sol, *phi, p);
  }
  const ScalarField R = scalar_curvature(g);
  const double lambda = sol.lambda;
  const double vert = lambda * vertex_rate_integral(g, sol.f, p, R);
  const double face = (p / 2.0 - 1.0) * face_rate_integral(g, sol.f, p, R);
  if (kind == FlowKind::unnormalized_ricci || kind == FlowKind::yamabe_2d) {
    return vert + face;
  }
  const double r = average_scalar_curvature(g);
  const double drift = (p / 2.0) * r * lambda;
  const double direct = vert + face - drift;
  // The same rate through the conformal route at phi = (R - r)/2. The two
  // agree as an algebraic identity for a normalized critical point, so a gap
  // beyond rounding means a broken quadrature, not a bad input.
  const ScalarField ph = ((R.array() - r) / 2.0).matrix();
  const double via_phi = predicted_rate_conformal(g, sol, ph, p);
  const double scale = std::abs(vert) + std::abs(face) + std::abs(drift);
  if (std::abs(direct - via_phi) > 1e-10 * std::max(scale, 1e-30)) {
    throw ValidationError("predicted_rate: normalized and conformal evaluations differ: " +
                          std::to_string(direct) + " vs " + std::to_string(via_phi));
  }
  return direct;
}

double predicted_rate_conformal(const ConformalMetric& g, const EigenSolution& sol,
                                const ScalarField& phi, double p) {
  check_converged(sol, "predicted_rate_conformal");
  check_p(p, "predicted_rate_conformal");
  check_solution_shape(g, sol, "predicted_rate_conformal");
  if (phi.size() != g.mu.size()) {
    throw ShapeMismatch("predicted_rate_conformal: phi has " + std::to_string(phi.size()) +
                        " entries, metric has " + std::to_string(g.mu.size()));
  }
  return 2.0 * sol.lambda * vertex_rate_integral(g, sol.f, p, phi) +
         (p - 2.0) * face_rate_integral(g, sol.f, p, phi);
}

double rate_lower_bound(const ConformalMetric& g, const EigenSolution& sol, double p,
                        double eps_pinch) {
  check_converged(sol, "rate_lower_bound");
  check_p(p, "rate_lower_bound");
  check_solution_shape(g, sol, "rate_lower_bound");
  const ScalarField R = scalar_curvature(g);
  const double pinch = 0.5 - 1.0 / p;
  for (Eigen::Index i = 0; i < R.size(); ++i) {
    // Tiny cushion so equality cases survive the rounding in R.
    const double slack = 1e-12 * std::max(1.0, std::abs(R[i]));
    if (pinch * R[i] < -eps_pinch - slack) {
      throw PinchingViolated("rate_lower_bound: (1/2 - 1/p) R = " +
                             std::to_string(pinch * R[i]) + " below -eps_pinch = " +
                             std::to_string(-eps_pinch) + " at vertex " + std::to_string(i));
    }
  }
  const ScalarField shifted = (R.array() - p * eps_pinch).matrix();
  return sol.lambda * vertex_rate_integral(g, sol.f, p, shifted);
}

MonotoneReport assert_monotone(const QuantitySeries& series) {
  MonotoneReport report;
  report.name = series.name;
  report.direction = series.direction;
  report.tol = series.tol;
  report.pass = true;
  report.worst_violation = 0.0;
  report.t_at_worst = series.samples.empty() ? 0.0 : series.samples.front().t;
  const double sign = series.direction == Direction::increasing ? 1.0 : -1.0;
  for (std::size_t i = 0; i + 1 < series.samples.size(); ++i) {
    const QuantitySample& a = series.samples[i];
    const QuantitySample& b = series.samples[i + 1];
    const double move = sign * (b.q - a.q);
    if (-move > report.worst_violation) {
      report.worst_violation = -move;
      report.t_at_worst = b.t;
    }
    if (!(move >= -series.tol * std::max(1.0, std::abs(a.q)))) {
      report.pass = false;
    }
  }
  return report;
}

ComparisonReport check_comparison(double lambda_g, double lambda_bar, double kappa_g,
                                  double kappa_bar, double p, double C, double slack) {
  check_p(p, "check_comparison");
  if (kappa_g >= 0.0 || kappa_bar >= 0.0) {
    throw WrongSign("check_comparison: needs negative constant curvatures, got kappa_g = " +
                    std::to_string(kappa_g) + ", kappa_bar = " + std::to_string(kappa_bar));
  }
  ComparisonReport report;
  report.p = p;
  report.slack = slack;
  report.ratio = lambda_bar / lambda_g;
  const double kratio = kappa_bar / kappa_g;
  const double r = 2.0 * kappa_bar;
  if (p >= 2.0) {
    report.threshold = std::pow(kratio, p / 2.0);
    if (!std::isnan(C)) report.upper = std::exp(-(p / 2.0) * C / r);
  } else {
    if (std::isnan(C)) {
      throw BranchMismatch("check_comparison: the 1 < p < 2 estimates need C");
    }
    report.threshold = std::exp((1.0 - p / 2.0) * C / r) * kratio;
    report.upper = std::exp(-C / r) * std::pow(kratio, p / 2.0 - 1.0);
  }
  report.margin = report.ratio / report.threshold - 1.0;
  report.pass = report.ratio >= report.threshold * (1.0 - slack);
  if (std::isfinite(report.upper)) {
    report.pass = report.pass && report.ratio <= report.upper * (1.0 + slack);
  }
  return report;
}

std::pair<double, double> continuity_bounds(double eps, int n, double p) {
  if (eps < 0.0) {
    throw NegativeEps("continuity_bounds: eps = " + std::to_string(eps));
  }
  check_p(p, "continuity_bounds");
  const double expo = static_cast<double>(n) + p / 2.0;
  return {std::pow(1.0 + eps, -expo), std::pow(1.0 + eps, expo)};
}

ContinuityReport check_continuity(const ConformalMetric& g, double eps, double p,
                                  const EigenConfig& solver, std::uint64_t perturb_seed) {
  const auto [lo, hi] = continuity_bounds(eps, 2, p);
  Rng rng(perturb_seed);
  const double half_log = 0.5 * std::log1p(eps);
  const ScalarField w =
      rng.uniform_field(static_cast<int>(g.u.size()), -half_log, half_log);
  const ConformalMetric perturbed(*g.mesh, g.u + w);
  EigenConfig config = solver;
  config.p = p;
  const EigenSolution base = solve_first_eigen(g, config);
  const EigenSolution other = solve_first_eigen(perturbed, config);
  ContinuityReport report;
  report.ratio = base.lambda / other.lambda;
  report.lo = lo;
  report.hi = hi;
  report.eps = eps;
  report.p = p;
  report.converged = base.converged && other.converged;
  report.pass = report.converged && report.ratio >= lo * (1.0 - 1e-3) &&
                report.ratio <= hi * (1.0 + 1e-3);
  return report;
}

const char* to_string(Direction d) {
  return d == Direction::increasing ? "increasing" : "decreasing";
}

const char* to_string(ChiSign s) {
  switch (s) {
    case ChiSign::negative:
      return "negative";
    case ChiSign::zero:
      return "zero";
    case ChiSign::positive:
      return "positive";
  }
  return "unknown";
}

void to_json(nlohmann::json& j, const MonotoneReport& r) {
  j = nlohmann::json{{"name", r.name},
                     {"direction", to_string(r.direction)},
                     {"pass", r.pass},
                     {"worst_violation", r.worst_violation},
                     {"t_at_worst", r.t_at_worst},
                     {"tol", r.tol}};
}

void to_json(nlohmann::json& j, const ComparisonReport& r) {
  j = nlohmann::json{{"ratio", r.ratio},
                     {"threshold", r.threshold},
                     {"margin", r.margin},
                     {"pass", r.pass},
                     {"p", r.p},
                     {"slack", r.slack}};
  j["upper"] = std::isfinite(r.upper) ? nlohmann::json(r.upper) : nlohmann::json();
}

void to_json(nlohmann::json& j, const ContinuityReport& r) {
  j = nlohmann::json{{"ratio", r.ratio}, {"lo", r.lo},   {"hi", r.hi},
                     {"pass", r.pass},   {"eps", r.eps}, {"p", r.p},
                     {"converged", r.converged}};
}

}  // namespace peflow
