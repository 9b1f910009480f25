// Unit tests for the harness layer: mesh file I/O, mesh resolution from
// config blocks, experiment config parsing, the config hash, and the
// experiment driver's CSV / report outputs.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "peflow/errors.hpp"
#include "peflow/experiment.hpp"
#include "peflow/meshgen.hpp"
#include "peflow/meshio.hpp"

using namespace peflow;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

constexpr double kPi = std::numbers::pi;

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "peflow-harness-tests";
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path path = temp_dir() / name;
  std::ofstream out(path);
  out << text;
  return path;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

// Unit cube, each square face split along a diagonal; consistently oriented.
const char* kCubeObj =
    "# unit cube\n"
    "v 0 0 0\n"
    "v 1 0 0\n"
    "v 1 1 0\n"
    "v 0 1 0\n"
    "v 0 0 1\n"
    "v 1 0 1\n"
    "v 1 1 1\n"
    "v 0 1 1\n"
    "f 1 4 3\n"
    "f 1 3 2\n"
    "f 5 6 7\n"
    "f 5 7 8\n"
    "f 1 2 6\n"
    "f 1 6 5\n"
    "f 2 3 7\n"
    "f 2 7 6\n"
    "f 3 4 8\n"
    "f 3 8 7\n"
    "f 4 1 5\n"
    "f 4 5 8\n";

json minimal_config() {
  return json::parse(R"({
    "mesh": {"kind": "icosphere", "level": 1},
    "flow": {"kind": "normalized_ricci", "dt": 1e-3, "t_end": 0.02}
  })");
}

}  // namespace

TEST_CASE("obj loader reconstructs the cube") {
  const fs::path path = write_file("cube.obj", kCubeObj);
  const TriangleMesh mesh = load_mesh_obj(path.string());

  CHECK(mesh.nv == 8);
  CHECK(mesh.ne == 18);
  CHECK(mesh.nf == 12);
  CHECK(mesh.chi == 2);

  // Axis edges have length 1, face diagonals sqrt(2).
  CHECK(mesh.edge_len.minCoeff() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mesh.edge_len.maxCoeff() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

  // Every corner gathers three right angles, so each of the eight defects is
  // pi/2 and their total matches the topological constant 2 pi chi.
  for (int i = 0; i < mesh.nv; ++i)
    CHECK(mesh.delta[i] == doctest::Approx(kPi / 2).epsilon(1e-12));
  CHECK(mesh.delta.sum() == doctest::Approx(4 * kPi).epsilon(1e-12));
}

TEST_CASE("obj loader rejects malformed input") {
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_mesh_obj((temp_dir() / "absent.obj").string()), ParseError);
  }
  SUBCASE("short face line") {
    const fs::path path = write_file("bad_face.obj", "v 0 0 0\nf 1 2\n");
    CHECK_THROWS_AS(load_mesh_obj(path.string()), ParseError);
  }
  SUBCASE("vertex index out of range") {
    const fs::path path =
        write_file("bad_index.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n");
    try {
      load_mesh_obj(path.string());
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      // Diagnostics carry the file and line of the offending input.
      CHECK(std::string(e.what()).find("bad_index.obj:4") != std::string::npos);
      CHECK(std::string(e.what()).find("out of range") != std::string::npos);
    }
  }
  SUBCASE("unsupported keyword") {
    const fs::path path = write_file("bad_keyword.obj", "v 0 0 0\nvn 0 0 1\n");
    CHECK_THROWS_AS(load_mesh_obj(path.string()), ParseError);
  }
  SUBCASE("trailing tokens after a vertex") {
    const fs::path path = write_file("bad_vertex.obj", "v 0 0 0 1\n");
    CHECK_THROWS_AS(load_mesh_obj(path.string()), ParseError);
  }
}

TEST_CASE("intrinsic json round-trip is bit-exact") {
  const fs::path path = temp_dir() / "roundtrip.json";

  SUBCASE("flat torus") {
    const TriangleMesh g = generate_flat_torus(4, 4, 1.25, 2.5);
    save_mesh_json(g, path.string());
    const TriangleMesh back = load_mesh_json(path.string());
    REQUIRE(back.nv == g.nv);
    REQUIRE(back.ne == g.ne);
    CHECK(back.faces == g.faces);
    CHECK(back.edges == g.edges);
    for (int e = 0; e < g.ne; ++e) CHECK(back.edge_len[e] == g.edge_len[e]);
  }
  SUBCASE("scaled genus-2 asset") {
    const TriangleMesh g = generate_genus2(0.75);
    save_mesh_json(g, path.string());
    const TriangleMesh back = load_mesh_json(path.string());
    REQUIRE(back.ne == g.ne);
    CHECK(back.faces == g.faces);
    for (int e = 0; e < g.ne; ++e) CHECK(back.edge_len[e] == g.edge_len[e]);
  }
}

TEST_CASE("load_mesh dispatches on the file extension") {
  const fs::path obj = write_file("dispatch.obj", kCubeObj);
  CHECK(load_mesh(obj.string()).nv == 8);

  const fs::path js = temp_dir() / "dispatch.json";
  save_mesh_json(generate_flat_torus(4, 4, 1.0, 1.0), js.string());
  CHECK(load_mesh(js.string()).nv == 16);
}

TEST_CASE("resolve_mesh builds every source kind") {
  SUBCASE("icosphere") {
    const TriangleMesh g =
        resolve_mesh(json{{"kind", "icosphere"}, {"level", 1}, {"radius", 2.0}});
    CHECK(g.nv == 42);
    CHECK(g.chi == 2);
  }
  SUBCASE("flat torus") {
    const TriangleMesh g = resolve_mesh(
        json{{"kind", "flat_torus"}, {"nx", 4}, {"ny", 5}, {"Lx", 1.0}, {"Ly", 2.0}});
    CHECK(g.nv == 20);
    CHECK(g.chi == 0);
  }
  SUBCASE("genus 2") {
    const TriangleMesh g = resolve_mesh(json{{"kind", "genus2"}, {"scale", 0.5}});
    CHECK(g.nv == 12);
    CHECK(g.chi == -2);
  }
  SUBCASE("file") {
    const fs::path path = write_file("resolve.obj", kCubeObj);
    const TriangleMesh g = resolve_mesh(json{{"kind", "file"}, {"path", path.string()}});
    CHECK(g.nv == 8);
  }
  SUBCASE("rejections") {
    CHECK_THROWS_AS(resolve_mesh(json{{"kind", "klein_bottle"}}), BadParams);
    CHECK_THROWS_AS(resolve_mesh(json{{"kind", "icosphere"}}), BadParams);
    CHECK_THROWS_AS(resolve_mesh(json{{"kind", "flat_torus"}, {"nx", 4}}), BadParams);
    CHECK_THROWS_AS(resolve_mesh(json{{"kind", "file"}}), BadParams);
    CHECK_THROWS_AS(resolve_mesh(json::object()), BadParams);
  }
}

TEST_CASE("experiment config parsing applies defaults and validates") {
  SUBCASE("defaults") {
    const ExperimentConfig cfg = parse_experiment_config(minimal_config());
    CHECK(cfg.p == 2.0);
    CHECK(cfg.eigen.p == 2.0);
    CHECK(cfg.quantities.empty());
    CHECK(cfg.csv_name == "series.csv");
    CHECK(cfg.report_name == "report.json");
    CHECK(cfg.initial_u.kind == InitialU::Kind::zero);
  }
  SUBCASE("explicit fields reach the config") {
    json doc = minimal_config();
    doc["p"] = 2.5;
    doc["eigen"] = {{"restarts", 3}, {"rng_seed", 99}};
    doc["initial_u"] = {{"kind", "random"}, {"amplitude", 0.2}, {"seed", 7}};
    doc["quantities"] = {"coro17"};
    const ExperimentConfig cfg = parse_experiment_config(doc);
    CHECK(cfg.p == 2.5);
    CHECK(cfg.eigen.p == 2.5);
    CHECK(cfg.eigen.restarts == 3);
    CHECK(cfg.eigen.rng_seed == 99);
    CHECK(cfg.initial_u.kind == InitialU::Kind::random);
    CHECK(cfg.initial_u.amplitude == 0.2);
    CHECK(cfg.initial_u.seed == 7);
    REQUIRE(cfg.quantities.size() == 1);
    CHECK(cfg.quantities[0] == "coro17");
  }
  SUBCASE("p at or below 1 is rejected") {
    json doc = minimal_config();
    doc["p"] = 1.0;
    CHECK_THROWS_AS(parse_experiment_config(doc), BadParams);
  }
  SUBCASE("unknown quantity is rejected") {
    json doc = minimal_config();
    doc["quantities"] = {"thm42"};
    CHECK_THROWS_AS(parse_experiment_config(doc), BadParams);
  }
  SUBCASE("general conformal flow needs a supplier, not a config") {
    json doc = minimal_config();
    doc["flow"]["kind"] = "general_conformal";
    CHECK_THROWS_AS(parse_experiment_config(doc), BadParams);
  }
  SUBCASE("missing mesh block is rejected") {
    json doc = minimal_config();
    doc.erase("mesh");
    CHECK_THROWS_AS(parse_experiment_config(doc), BadParams);
  }
}

TEST_CASE("output directory env override wins over the document") {
  json doc = minimal_config();
  doc["output"] = {{"dir", "from-doc"}};

  const fs::path dir = temp_dir() / "env-override";
  setenv("PEFLOW_OUTPUT_DIR", dir.string().c_str(), 1);
  const ExperimentConfig with_env = parse_experiment_config(doc);
  unsetenv("PEFLOW_OUTPUT_DIR");
  CHECK(with_env.output_dir == dir.string());

  const ExperimentConfig without_env = parse_experiment_config(doc);
  CHECK(without_env.output_dir == "from-doc");
}

TEST_CASE("config hash is the 64-bit fnv-1a of the canonical dump") {
  const std::string h1 = config_hash(json::parse(R"({"a":1,"b":2})"));
  const std::string h2 = config_hash(json::parse(R"({"b":2,"a":1})"));
  const std::string h3 = config_hash(json::parse(R"({"a":1,"b":3})"));

  CHECK(h1 == "a0ebc03bdc71de7b");
  CHECK(h3 == "a0efc43bdc75ce1e");
  CHECK(h1.size() == 16);
  // Key order does not matter (objects dump sorted); values do.
  CHECK(h1 == h2);
  CHECK(h1 != h3);
}

TEST_CASE("experiment driver writes the series and the report") {
  json doc = minimal_config();
  doc["flow"]["sample_stride"] = 2;
  doc["eigen"] = {{"restarts", 2}, {"tol_lambda", 1e-9}, {"tol_residual", 1e-6},
                  {"rng_seed", 7}};
  doc["initial_u"] = {{"kind", "random"}, {"amplitude", 0.1}, {"seed", 5}};
  doc["output"] = {{"dir", (temp_dir() / "exp1").string()}};

  const ExperimentConfig cfg = parse_experiment_config(doc);
  const ExperimentResult res = run_experiment(cfg);
  CHECK(res.ok);

  const std::string csv = read_file(res.csv_path);
  // 20 steps at stride 2 plus the initial state: 11 samples.
  CHECK(count_lines(csv) == 12);
  CHECK(csv.rfind("t,lambda,converged,r,R_min,R_max,area,coro17,thm19\n", 0) == 0);

  const json report = json::parse(read_file(res.report_path));
  CHECK(report["ok"] == true);
  CHECK(report["samples"] == 11);
  CHECK(report["mesh"]["nv"] == 42);
  CHECK(report["mesh"]["chi"] == 2);
  CHECK(report["config_hash"] == config_hash(cfg.raw));
  CHECK(report["auto_quantities"] == true);
  CHECK(report["sandwich"]["checked"] == true);
  CHECK(report["sandwich"]["pass"] == true);
  CHECK(report["monotone"]["coro17"]["status"] == "checked");
  CHECK(report["monotone"]["thm19"]["status"] == "checked");
  CHECK(report["bound_params"]["r"] > 0.0);
  CHECK(report["seeds"]["eigen_rng"] == 7);
  CHECK(report["seeds"]["initial_u"] == 5);

  // Identical config, different destination: byte-identical series.
  const fs::path dir2 = temp_dir() / "exp2";
  setenv("PEFLOW_OUTPUT_DIR", dir2.string().c_str(), 1);
  const ExperimentConfig cfg2 = parse_experiment_config(doc);
  unsetenv("PEFLOW_OUTPUT_DIR");
  const ExperimentResult res2 = run_experiment(cfg2);
  CHECK(res2.csv_path != res.csv_path);
  CHECK(read_file(res2.csv_path) == csv);
}

TEST_CASE("experiment failures leave a marked partial result") {
  SUBCASE("unreadable initial data") {
    json doc = minimal_config();
    doc["initial_u"] = {{"kind", "file"}, {"path", (temp_dir() / "absent.json").string()}};
    doc["output"] = {{"dir", (temp_dir() / "exp-fail").string()}};
    const ExperimentConfig cfg = parse_experiment_config(doc);

    CHECK_THROWS_AS(run_experiment(cfg), ParseError);

    const std::string csv = read_file(temp_dir() / "exp-fail" / "series.csv");
    CHECK(csv.rfind("# failed: ", 0) == 0);
    const json report = json::parse(read_file(temp_dir() / "exp-fail" / "report.json"));
    CHECK(report["ok"] == false);
    CHECK(report.contains("error"));
  }
  SUBCASE("quantity outside the flow's family") {
    json doc = minimal_config();
    doc["quantities"] = {"t10b"};
    doc["output"] = {{"dir", (temp_dir() / "exp-fail2").string()}};
    const ExperimentConfig cfg = parse_experiment_config(doc);
    CHECK_THROWS_AS(run_experiment(cfg), BadParams);
    const json report = json::parse(read_file(temp_dir() / "exp-fail2" / "report.json"));
    CHECK(report["ok"] == false);
  }
}

TEST_CASE("config files load through the same validation") {
  json doc = minimal_config();
  const fs::path path = write_file("config.json", doc.dump(2));
  const ExperimentConfig cfg = load_experiment_config(path.string());
  CHECK(config_hash(cfg.raw) == config_hash(doc));

  CHECK_THROWS_AS(load_experiment_config((temp_dir() / "absent-config.json").string()),
                  ParseError);
  const fs::path broken = write_file("broken.json", "{\"mesh\": ");
  CHECK_THROWS_AS(load_experiment_config(broken.string()), ParseError);
}
