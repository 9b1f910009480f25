#include "peflow/peigen.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "peflow/errors.hpp"
#include "peflow/rng.hpp"

namespace peflow {

namespace {

using SparseMat = Eigen::SparseMatrix<double>;
using Factorization = Eigen::SimplicialLDLT<SparseMat>;

void check_shape(const ConformalMetric& g, const ScalarField& f) {
  if (f.size() != g.mesh->nv)
    throw ShapeMismatch("field length does not match mesh vertex count");
}

void check_p(double p) {
  if (!(p > 1.0)) throw InvalidP("p must exceed 1");
}

// d/ds of the p-mass of f+s: p * sum |f+s|^{p-2}(f+s) mu (2*sum (f+s) mu at
// p = 2, where the power is the identity).
double shifted_mass_derivative(const ScalarField& f, double s,
                               const Eigen::VectorXd& mu, double p) {
  const int n = static_cast<int>(f.size());
  double acc = 0.0;
  if (p == 2.0) {
    for (int i = 0; i < n; ++i) acc += (f[i] + s) * mu[i];
    return 2.0 * acc;
  }
  for (int i = 0; i < n; ++i) acc += sgnpow(f[i] + s, p - 1.0) * mu[i];
  return p * acc;
}

ScalarField p_normalize(const ConformalMetric& g, const ScalarField& f,
                        double p) {
  double mass = p_mass(g, f, p);
  if (!(mass > 0.0)) throw ConstantInput("cannot normalize a zero field");
  return f / std::pow(mass, 1.0 / p);
}

// Exact Hessian of the eps-regularized p-Dirichlet energy. Per face with
// corners (a, b, c), writing g for the squared face gradient and
// e = exp((2-p) ubar):
//   d2E = A e [ h1 * d2g + h2 * dg dg^T ],
//   h1 = (p/2)(g + eps^2)^{p/2-1},  h2 = (p/2)(p/2-1)(g + eps^2)^{p/2-2},
// where d2g has the cotan corner structure C/A and dg is assembled from the
// same corner differences as the gradient. Convexity of v -> (|v|^2+eps^2)^{p/2}
// for p >= 1 makes the assembled matrix positive semidefinite.
SparseMat energy_hessian(const ConformalMetric& g, const ScalarField& f,
                         double p, double eps) {
  const TriangleMesh& mesh = *g.mesh;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * mesh.nf + mesh.nv);
  for (int fi = 0; fi < mesh.nf; ++fi) {
    auto [a, b, c] = mesh.faces[fi];
    double ca = mesh.cot(fi, 0), cb = mesh.cot(fi, 1), cc = mesh.cot(fi, 2);
    double A = mesh.area_f[fi];
    double gval = (ca * (f[b] - f[c]) * (f[b] - f[c]) +
                   cb * (f[c] - f[a]) * (f[c] - f[a]) +
                   cc * (f[a] - f[b]) * (f[a] - f[b])) /
                  (2.0 * A);
    double ge = gval + eps * eps;
    double e = std::exp((2.0 - p) * (g.u[a] + g.u[b] + g.u[c]) / 3.0);
    double h1 = (p / 2.0) * std::pow(ge, p / 2.0 - 1.0);
    double h2 = (p / 2.0) * (p / 2.0 - 1.0) * std::pow(ge, p / 2.0 - 2.0);
    double invA = 1.0 / A;
    double dg[3] = {invA * (cb * (f[a] - f[c]) + cc * (f[a] - f[b])),
                    invA * (cc * (f[b] - f[a]) + ca * (f[b] - f[c])),
                    invA * (ca * (f[c] - f[b]) + cb * (f[c] - f[a]))};
    double Cm[3][3] = {{cb + cc, -cc, -cb},
                       {-cc, cc + ca, -ca},
                       {-cb, -ca, ca + cb}};
    double w1 = A * e * h1 * invA;
    double w2 = A * e * h2;
    int corner[3] = {a, b, c};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trips.emplace_back(corner[i], corner[j],
                           w1 * Cm[i][j] + w2 * dg[i] * dg[j]);
  }
  for (int i = 0; i < g.mesh->nv; ++i) trips.emplace_back(i, i, 1e-300);
  SparseMat H(mesh.nv, mesh.nv);
  H.setFromTriplets(trips.begin(), trips.end());
  return H;
}

// Shifted-Hessian preconditioner: H(f, eps) + sigma M with
// sigma = 1e-3 tr(H) / Area, refactorized on demand. A failed factorization
// is retried with sigma inflated tenfold before giving up.
class HessianPreconditioner {
 public:
  HessianPreconditioner(const ConformalMetric& g, double p)
      : g_(g), p_(p), mass_total_(g.mu.sum()) {}

  void rebuild(const ScalarField& f, double eps) {
    SparseMat H = energy_hessian(g_, f, p_, std::max(eps, 1e-10));
    double sigma = 1e-3 * trace_of(H) / mass_total_;
    for (int attempt = 0; attempt < 4; ++attempt) {
      SparseMat shifted = H;
      for (int i = 0; i < g_.mesh->nv; ++i)
        shifted.coeffRef(i, i) += sigma * g_.mu[i];
      ldlt_.compute(shifted);
      if (ldlt_.info() == Eigen::Success) return;
      sigma *= 10.0;
    }
    throw SolverBreakdown("Hessian preconditioner factorization failed");
  }

  ScalarField solve(const ScalarField& rhs) const {
    return ldlt_.solve(rhs);
  }

 private:
  static double trace_of(const SparseMat& H) {
    double tr = 0.0;
    for (int i = 0; i < H.rows(); ++i) tr += H.coeff(i, i);
    return tr;
  }

  const ConformalMetric& g_;
  double p_;
  double mass_total_;
  Factorization ldlt_;
};

struct ResidualReport {
  double relative = 0.0;
  double absolute = 0.0;
  double lambda = 0.0;
};

// Relative Euler-Lagrange residual: the absolute residual norm scaled by
// lambda * (sum |f|^{2(p-1)} mu)^{1/2}, the size of the lambda-term itself.
ResidualReport relative_residual(const ConformalMetric& g, const ScalarField& f,
                                 double p) {
  ResidualReport rep;
  rep.lambda = rayleigh(g, f, p);
  rep.absolute = el_residual(g, f, p, rep.lambda);
  double scale = 0.0;
  for (int i = 0; i < f.size(); ++i)
    scale += std::pow(std::abs(f[i]), 2.0 * (p - 1.0)) * g.mu[i];
  scale = rep.lambda * std::sqrt(scale);
  rep.relative = rep.absolute / std::max(scale, 1e-300);
  return rep;
}

}  // namespace

RecenterResult recenter(const ConformalMetric& g, const ScalarField& f,
                        double p) {
  check_shape(g, f);
  check_p(p);
  double lo = -f.maxCoeff();
  double hi = -f.minCoeff();
  if (hi - lo < 1e-300) throw ConstantInput("recenter requires a non-constant field");

  // F' is strictly increasing with F'(lo) <= 0 <= F'(hi); bisect, keeping the
  // nonpositive end at lo, down to one-ulp resolution of the field scale
  // (f + s is evaluated in doubles, so a finer shift cannot change F'). For
  // p < 2 the root can sit against a kink of F' where the slope is
  // unbounded, so the final choice is whichever endpoint has the smaller
  // residual: no representable shift does better.
  const double wtol = std::ldexp(std::max(std::abs(lo), std::abs(hi)), -52);
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi || hi - lo <= wtol) break;
    if (shifted_mass_derivative(f, mid, g.mu, p) <= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  double s0 = std::abs(shifted_mass_derivative(f, lo, g.mu, p)) <=
                      std::abs(shifted_mass_derivative(f, hi, g.mu, p))
                  ? lo
                  : hi;

  // Newton polish; only for p >= 2, where F'' stays bounded.
  if (p >= 2.0) {
    const int n = static_cast<int>(f.size());
    for (int it = 0; it < 50; ++it) {
      double d1 = 0.0, d2 = 0.0;
      for (int i = 0; i < n; ++i) {
        double x = f[i] + s0;
        double ax = std::pow(std::abs(x), p - 2.0);
        d1 += ax * x * g.mu[i];
        d2 += ax * g.mu[i];
      }
      d1 *= p;
      d2 *= p * (p - 1.0);
      if (d2 <= 0.0) break;
      double step = d1 / d2;
      s0 -= step;
      if (std::abs(step) < 1e-17 * (1.0 + std::abs(s0))) break;
    }
  }

  RecenterResult out;
  out.s0 = s0;
  out.shifted = f.array() + s0;
  return out;
}

double rayleigh(const ConformalMetric& g, const ScalarField& f, double p) {
  check_shape(g, f);
  check_p(p);
  if (f.maxCoeff() - f.minCoeff() < 1e-300)
    throw ConstantInput("rayleigh quotient of a constant field");
  double constraint = 0.0, scale = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    constraint += sgnpow(f[i], p - 1.0) * g.mu[i];
    scale += std::pow(std::abs(f[i]), p - 1.0) * g.mu[i];
  }
  if (std::abs(constraint) > 1e-6 * scale)
    throw NotRecentered("field violates the median constraint");
  return dirichlet_p_energy(g, f, p, 0.0) / p_mass(g, f, p);
}

double el_residual(const ConformalMetric& g, const ScalarField& f, double p,
                   double lambda) {
  check_shape(g, f);
  check_p(p);
  ScalarField gE = dirichlet_p_energy_gradient(g, f, p, 0.0);
  double acc = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    double r = gE[i] / (p * g.mu[i]) - lambda * sgnpow(f[i], p - 1.0);
    acc += r * r * g.mu[i];
  }
  return std::sqrt(acc);
}

EigenSolution solve_first_eigen(const ConformalMetric& g,
                                const EigenConfig& config,
                                const ScalarField* init) {
  check_p(config.p);
  if (config.restarts < 1) throw BadParams("restarts must be at least 1");
  if (config.max_iters < 1) throw BadParams("max_iters must be at least 1");
  if (!(config.tol_lambda > 0.0) || !(config.tol_residual > 0.0))
    throw BadParams("tolerances must be positive");
  if (init) check_shape(g, *init);

  const double p = config.p;
  const int n = g.mesh->nv;
  std::vector<double> schedule;
  if (p >= 2.0) {
    schedule = {0.0};
  } else {
    schedule = config.eps_schedule;
    if (schedule.empty()) throw BadParams("eps_schedule must be nonempty for p < 2");
    for (size_t k = 1; k < schedule.size(); ++k)
      if (!(schedule[k] < schedule[k - 1]))
        throw BadParams("eps_schedule must be strictly decreasing");
    if (schedule.back() > 1e-8)
      throw BadParams("eps_schedule must reach 1e-8 or below");
  }

  EigenSolution best;
  bool have_best = false;

  for (int rs = 0; rs < config.restarts; ++rs) {
    ScalarField f;
    if (rs == 0 && init) {
      f = *init;
    } else {
      Rng rng(config.rng_seed + static_cast<std::uint64_t>(rs));
      f = rng.uniform_field(n, -1.0, 1.0);
    }
    f = recenter(g, f, p).shifted;
    f = p_normalize(g, f, p);

    HessianPreconditioner precond(g, p);
    int total_steps = 0;

    for (size_t stage = 0; stage < schedule.size(); ++stage) {
      double eps = schedule[stage];
      bool final_stage = (stage + 1 == schedule.size());
      std::deque<double> hist;
      precond.rebuild(f, eps);

      for (int it = 0; it < config.max_iters; ++it) {
        if (it > 0 && it % 30 == 0) precond.rebuild(f, eps);
        double lam_eps =
            dirichlet_p_energy(g, f, p, eps) / p_mass(g, f, p);
        ScalarField gE = dirichlet_p_energy_gradient(g, f, p, eps);
        ScalarField resid(n);
        for (int i = 0; i < n; ++i)
          resid[i] = gE[i] - lam_eps * p * sgnpow(f[i], p - 1.0) * g.mu[i];
        ScalarField d = std::max(lam_eps, 1e-12) * precond.solve(resid);
        double slope = resid.dot(d);
        if (slope <= 0.0) break;

        // Armijo backtracking on the regularized Rayleigh quotient, with
        // recentering and normalization folded into each trial point.
        double s = 1.0 / std::max(lam_eps, 1e-12);
        bool accepted = false;
        ScalarField fn;
        for (int bt = 0; bt < 40; ++bt) {
          fn = f - s * d;
          try {
            fn = recenter(g, fn, p).shifted;
          } catch (const ConstantInput&) {
            s *= 0.5;
            continue;
          }
          fn = p_normalize(g, fn, p);
          double q = dirichlet_p_energy(g, fn, p, eps) / p_mass(g, fn, p);
          if (q <= lam_eps - 1e-4 * s * slope) {
            accepted = true;
            break;
          }
          s *= 0.5;
        }
        if (!accepted) break;
        f = fn;
        ++total_steps;

        hist.push_back(rayleigh(g, f, p));
        if (hist.size() > 20) {
          hist.pop_front();
          double span = *std::max_element(hist.begin(), hist.end()) -
                        *std::min_element(hist.begin(), hist.end());
          if (span < config.tol_lambda * std::abs(hist.back())) {
            if (!final_stage) break;
            if (relative_residual(g, f, p).relative <= config.tol_residual)
              break;
          }
        }
      }
    }

    // Residual polish: damped Newton steps on the optimality system accepted
    // only when they shrink the relative residual. Recovers the last digits
    // when the energy descent has flattened out near the minimizer.
    double eps_pol = schedule.back();
    ResidualReport rep = relative_residual(g, f, p);
    for (int it = 0; it < 50; ++it) {
      if (rep.relative <= 0.01 * config.tol_residual) break;
      precond.rebuild(f, eps_pol);
      double lam_eps =
          dirichlet_p_energy(g, f, p, eps_pol) / p_mass(g, f, p);
      ScalarField gE = dirichlet_p_energy_gradient(g, f, p, eps_pol);
      ScalarField resid(n);
      for (int i = 0; i < n; ++i)
        resid[i] = gE[i] - lam_eps * p * sgnpow(f[i], p - 1.0) * g.mu[i];
      ScalarField d = precond.solve(resid);
      bool improved = false;
      double s = 1.0;
      for (int bt = 0; bt < 6; ++bt) {
        ScalarField fn = f - s * d;
        try {
          fn = recenter(g, fn, p).shifted;
        } catch (const ConstantInput&) {
          s *= 0.5;
          continue;
        }
        fn = p_normalize(g, fn, p);
        ResidualReport rep2 = relative_residual(g, fn, p);
        if (rep2.relative < rep.relative) {
          f = fn;
          rep = rep2;
          improved = true;
          ++total_steps;
          break;
        }
        s *= 0.5;
      }
      if (!improved) break;
    }

    bool converged = rep.relative <= config.tol_residual;
    if (!have_best || std::pair(converged, -rep.lambda) >
                          std::pair(best.converged, -best.lambda)) {
      best.lambda = rep.lambda;
      best.f = f;
      best.el_residual = rep.absolute;
      best.iterations = total_steps;
      best.converged = converged;
      best.p = p;
      double constraint = 0.0;
      for (int i = 0; i < n; ++i)
        constraint += sgnpow(f[i], p - 1.0) * g.mu[i];
      best.s0_residual = std::abs(constraint);
      have_best = true;
    }
  }
  return best;
}

LinearEigenResult linear_first_eigen(const ConformalMetric& g) {
  const TriangleMesh& mesh = *g.mesh;
  const Eigen::VectorXd& mu = g.mu;
  const double total = g.area;

  double sigma = 1e-3 * 4.0 * std::numbers::pi * std::numbers::pi / total;
  Factorization ldlt;
  for (int attempt = 0;; ++attempt) {
    SparseMat shifted = mesh.K;
    for (int i = 0; i < mesh.nv; ++i) shifted.coeffRef(i, i) += sigma * mu[i];
    ldlt.compute(shifted);
    if (ldlt.info() == Eigen::Success) break;
    if (attempt >= 3)
      throw SolverBreakdown("shifted stiffness factorization failed");
    sigma *= 10.0;
  }

  auto project = [&](ScalarField& x) { x.array() -= x.dot(mu) / total; };
  auto mu_normalize = [&](ScalarField& x) {
    x /= std::sqrt(x.cwiseProduct(x).dot(mu));
  };

  Rng rng(12345);
  ScalarField x = rng.uniform_field(mesh.nv, -1.0, 1.0);
  double lam = 0.0, lam_old = 0.0;
  int it = 0;
  for (; it < 500; ++it) {
    project(x);
    mu_normalize(x);
    ScalarField Kx = mesh.K * x;
    lam = x.dot(Kx) / x.cwiseProduct(x).dot(mu);
    // Converge on the pair, not just the value: the eigenvalue settles one
    // squared convergence factor ahead of the eigenvector, so also require a
    // small generalized residual |Kx/mu - lam x| in the mu-norm.
    double res = 0.0;
    for (int i = 0; i < mesh.nv; ++i) {
      double r = Kx[i] / mu[i] - lam * x[i];
      res += r * r * mu[i];
    }
    res = std::sqrt(res);
    if (std::abs(lam - lam_old) <= 1e-12 * std::abs(lam) &&
        res <= 1e-9 * std::abs(lam))
      break;
    lam_old = lam;
    ScalarField y = ldlt.solve(mu.cwiseProduct(x));
    project(y);
    x = y;
  }
  project(x);
  mu_normalize(x);

  LinearEigenResult out;
  out.lambda = x.dot(mesh.K * x) / x.cwiseProduct(x).dot(mu);
  out.f = x;
  out.iterations = it;
  return out;
}

ScalarField transport_test_function(const ConformalMetric& g_from,
                                    const ConformalMetric& g_to,
                                    const ScalarField& f, double p) {
  if (g_from.mesh != g_to.mesh)
    throw MeshMismatch("transport requires metrics on the same mesh");
  check_shape(g_from, f);
  check_p(p);
  // The weight converts the constraint measure: |f'|^{p-2} f' dmu_to equals
  // |f|^{p-2} f dmu_from pointwise, so recentered fields stay recentered.
  ScalarField out(f.size());
  for (int i = 0; i < f.size(); ++i)
    out[i] = f[i] * std::exp(2.0 * (g_from.u[i] - g_to.u[i]) / (p - 1.0));
  return p_normalize(g_to, out, p);
}

}  // namespace peflow
