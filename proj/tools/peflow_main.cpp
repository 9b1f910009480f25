// Command-line driver: mesh generation and inspection, single eigensolves,
// curvature flows, config-driven experiments, and the acceptance suite.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "peflow/errors.hpp"
#include "peflow/experiment.hpp"
#include "peflow/flow.hpp"
#include "peflow/meshio.hpp"
#include "peflow/metric.hpp"
#include "peflow/peigen.hpp"
#include "peflow/verify.hpp"

namespace {

using namespace peflow;

constexpr double kPi = std::numbers::pi;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

FlowKind flow_kind_from_name(const std::string& name) {
  if (name == "normalized_ricci") return FlowKind::normalized_ricci;
  if (name == "unnormalized_ricci") return FlowKind::unnormalized_ricci;
  if (name == "yamabe_2d") return FlowKind::yamabe_2d;
  throw BadParams("flow: unknown kind `" + name +
                  "` (expected normalized_ricci, unnormalized_ricci, or yamabe_2d)");
}

void print_mesh_info(const TriangleMesh& mesh) {
  std::cout << "vertices " << mesh.nv << "  edges " << mesh.ne << "  faces " << mesh.nf
            << "  chi " << mesh.chi << "\n";
  std::cout << "area " << mesh.area_f.sum() << "  edge length [" << mesh.edge_len.minCoeff()
            << ", " << mesh.edge_len.maxCoeff() << "]\n";
  std::cout << "total angle defect " << mesh.delta.sum() << "  (2 pi chi = "
            << 2.0 * kPi * mesh.chi << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-Laplace first eigenvalues along conformal curvature flows"};
  app.require_subcommand(1);
  int exit_code = 0;

  // mesh gen / mesh info
  CLI::App* mesh_cmd = app.add_subcommand("mesh", "generate or inspect triangle meshes");
  mesh_cmd->require_subcommand(1);

  std::string gen_kind;
  int gen_level = 2;
  double gen_radius = 1.0;
  int gen_nx = 16;
  int gen_ny = 16;
  double gen_lx = 2.0 * kPi;
  double gen_ly = 2.0 * kPi;
  double gen_scale = 1.0;
  std::string gen_out;
  CLI::App* gen = mesh_cmd->add_subcommand("gen", "generate a builtin mesh as intrinsic JSON");
  gen->add_option("--kind", gen_kind, "icosphere | flat_torus | genus2")->required();
  gen->add_option("--level", gen_level, "icosphere subdivision level");
  gen->add_option("--radius", gen_radius, "icosphere radius");
  gen->add_option("--nx", gen_nx, "flat torus grid count in x");
  gen->add_option("--ny", gen_ny, "flat torus grid count in y");
  gen->add_option("--lx", gen_lx, "flat torus period in x");
  gen->add_option("--ly", gen_ly, "flat torus period in y");
  gen->add_option("--scale", gen_scale, "genus-2 edge length scale");
  gen->add_option("--out", gen_out, "output path for the intrinsic JSON")->required();
  gen->callback([&] {
    nlohmann::json source;
    if (gen_kind == "icosphere") {
      source = {{"kind", "icosphere"}, {"level", gen_level}, {"radius", gen_radius}};
    } else if (gen_kind == "flat_torus") {
      source = {{"kind", "flat_torus"}, {"nx", gen_nx}, {"ny", gen_ny}, {"Lx", gen_lx},
                {"Ly", gen_ly}};
    } else if (gen_kind == "genus2") {
      source = {{"kind", "genus2"}, {"scale", gen_scale}};
    } else {
      throw BadParams("mesh gen: unknown kind `" + gen_kind + "`");
    }
    const TriangleMesh mesh = resolve_mesh(source);
    save_mesh_json(mesh, gen_out);
    std::cout << "wrote " << gen_out << "\n";
    print_mesh_info(mesh);
  });

  std::string info_path;
  CLI::App* info = mesh_cmd->add_subcommand("info", "print mesh counts and geometry summary");
  info->add_option("path", info_path, "mesh file (.obj or intrinsic .json)")->required();
  info->callback([&] { print_mesh_info(load_mesh(info_path)); });

  // eigen
  std::string eigen_mesh;
  EigenConfig eigen_cfg;
  CLI::App* eigen = app.add_subcommand("eigen", "solve the first p-Laplace eigenvalue");
  eigen->add_option("--mesh", eigen_mesh, "mesh file (.obj or intrinsic .json)")->required();
  eigen->add_option("--p", eigen_cfg.p, "exponent p > 1");
  eigen->add_option("--restarts", eigen_cfg.restarts, "random restarts");
  eigen->add_option("--tol-lambda", eigen_cfg.tol_lambda, "eigenvalue stability tolerance");
  eigen->add_option("--tol-residual", eigen_cfg.tol_residual, "Euler-Lagrange residual tolerance");
  eigen->add_option("--max-iters", eigen_cfg.max_iters, "iteration cap per restart");
  eigen->add_option("--seed", eigen_cfg.rng_seed, "restart RNG seed");
  eigen->callback([&] {
    const TriangleMesh mesh = load_mesh(eigen_mesh);
    const ConformalMetric g(mesh, ScalarField::Zero(mesh.nv));
    const EigenSolution sol = solve_first_eigen(g, eigen_cfg);
    std::cout << "lambda " << fmt17(sol.lambda) << "\n";
    std::cout << "converged " << (sol.converged ? "yes" : "no") << "  iterations "
              << sol.iterations << "\n";
    std::cout << "median residual " << sol.s0_residual << "  relative EL residual "
              << sol.el_residual << "\n";
    if (!sol.converged) exit_code = 1;
  });

  // flow
  std::string flow_mesh;
  std::string flow_kind = "normalized_ricci";
  std::string flow_out;
  FlowSpec flow_spec;
  CLI::App* flow_cmd = app.add_subcommand("flow", "run a conformal curvature flow");
  flow_cmd->add_option("--mesh", flow_mesh, "mesh file (.obj or intrinsic .json)")->required();
  flow_cmd->add_option("--kind", flow_kind,
                       "normalized_ricci | unnormalized_ricci | yamabe_2d");
  flow_cmd->add_option("--dt", flow_spec.dt, "time step");
  flow_cmd->add_option("--t-end", flow_spec.t_end, "end time (clamped near blow-up)");
  flow_cmd->add_option("--stride", flow_spec.sample_stride, "steps between samples");
  flow_cmd->add_option("--out", flow_out, "optional CSV path for the sampled series");
  flow_cmd->callback([&] {
    const TriangleMesh mesh = load_mesh(flow_mesh);
    const ConformalMetric g0(mesh, ScalarField::Zero(mesh.nv));
    flow_spec.kind = flow_kind_from_name(flow_kind);
    const Trajectory traj = run(g0, flow_spec);
    const FlowState& last = traj.samples.back();
    std::cout << "samples " << traj.samples.size() << "  t_end " << fmt17(last.t)
              << (traj.clamped ? " (clamped)" : "") << "\n";
    std::cout << "r " << fmt17(last.r) << "  R in [" << fmt17(last.R.minCoeff()) << ", "
              << fmt17(last.R.maxCoeff()) << "]  area " << fmt17(last.metric.area) << "\n";
    if (!flow_out.empty()) {
      std::ofstream out(flow_out);
      if (!out) throw ParseError(flow_out + ": cannot open output file");
      out << "t,r,R_min,R_max,area\n";
      for (const FlowState& st : traj.samples) {
        out << fmt17(st.t) << "," << fmt17(st.r) << "," << fmt17(st.R.minCoeff()) << ","
            << fmt17(st.R.maxCoeff()) << "," << fmt17(st.metric.area) << "\n";
      }
      std::cout << "wrote " << flow_out << "\n";
    }
  });

  // experiment run
  CLI::App* experiment = app.add_subcommand("experiment", "config-driven experiment");
  experiment->require_subcommand(1);
  std::string config_path;
  CLI::App* exp_run = experiment->add_subcommand("run", "run an experiment from a JSON config");
  exp_run->add_option("config", config_path, "experiment config JSON")->required();
  exp_run->callback([&] {
    const ExperimentResult res = run_experiment(load_experiment_config(config_path));
    std::cout << "series " << res.csv_path << "\n";
    std::cout << "report " << res.report_path << "\n";
    std::cout << "ok " << (res.ok ? "true" : "false") << "\n";
    if (!res.ok) exit_code = 1;
  });

  // verify
  std::string level_name = "full";
  CLI::App* verify = app.add_subcommand("verify", "run the acceptance criteria");
  verify->add_option("--level", level_name, "fast | full")
      ->check(CLI::IsMember({"fast", "full"}));
  verify->callback([&] {
    const VerifyLevel level = level_name == "fast" ? VerifyLevel::fast : VerifyLevel::full;
    const VerifySummary summary = verify_suite(level, std::cout);
    exit_code = summary.failures;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
