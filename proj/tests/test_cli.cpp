// End-to-end tests of the command-line tool: exit codes, output formats,
// byte-level determinism.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lamg/fem.hpp"
#include "lamg/matrix_market.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    std::string cmd = std::string(LAMG_CLI_PATH) + " " + args + " > cli_stdout.log 2> cli_stderr.log";
    int rc = std::system(cmd.c_str());
#ifdef _WIN32
    return rc;
#else
    return WEXITSTATUS(rc);
#endif
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string value_of(const std::string& report, const std::string& key) {
    std::istringstream ss(report);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.rfind("#", 0) == 0) continue;
        auto eq = line.find('=');
        if (eq != std::string::npos && line.substr(0, eq) == key) return line.substr(eq + 1);
    }
    return "";
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::path("cli_out") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("solve on the default mesh exits 0 and reports convergence") {
    fs::path dir = fresh_dir("solve_default");
    int rc = run_cli("solve --out " + dir.string() + " --seed 1");
    CHECK(rc == 0);
    std::string report = slurp(dir / "report.txt");
    CHECK(value_of(report, "converged") == "true");
    CHECK(std::stoi(value_of(report, "iterations")) <= 15);
    CHECK(report.find("# lars.caliber=3") != std::string::npos);  // provenance header

    std::string residuals = slurp(dir / "residuals.csv");
    CHECK(residuals.find("iteration,residual") != std::string::npos);
}

TEST_CASE("solve outputs are byte-identical across runs") {
    fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
    REQUIRE(run_cli("solve --out " + a.string() + " --seed 7 --set problem.mesh_levels=3") == 0);
    REQUIRE(run_cli("solve --out " + b.string() + " --seed 7 --set problem.mesh_levels=3") == 0);
    CHECK(slurp(a / "report.txt") == slurp(b / "report.txt"));
    CHECK(slurp(a / "residuals.csv") == slurp(b / "residuals.csv"));
}

TEST_CASE("solve exits 2 when the iteration budget is too small") {
    fs::path dir = fresh_dir("solve_maxit");
    int rc = run_cli("solve --out " + dir.string() +
                     " --set problem.mesh_levels=3 --set solver.max_iterations=1");
    CHECK(rc == 2);
}

TEST_CASE("invalid configuration or usage exits 1") {
    fs::path dir = fresh_dir("badcfg");
    CHECK(run_cli("solve --out " + dir.string() + " --set no.such.key=1") == 1);
    CHECK(run_cli("solve --out " + dir.string() + " --set lars.caliber=frog") == 1);
    CHECK(run_cli("no-such-verb") == 1);
}

TEST_CASE("a single-value sweep matches the plain solve") {
    fs::path sdir = fresh_dir("sweep_single");
    REQUIRE(run_cli("solve --out " + sdir.string() + " --seed 3 --set problem.mesh_levels=3") == 0);
    int solve_iters = std::stoi(value_of(slurp(sdir / "report.txt"), "iterations"));

    fs::path wdir = fresh_dir("sweep_csv");
    REQUIRE(run_cli("sweep --parameter caliber --values 3 --out " + wdir.string() +
                    " --seed 3 --set problem.mesh_levels=3") == 0);
    std::string csv = slurp(wdir / "sweep.csv");
    std::istringstream ss(csv);
    std::string line, row;
    while (std::getline(ss, line)) {
        if (line.rfind("#", 0) == 0 || line.rfind("parameter", 0) == 0 || line.empty()) continue;
        row = line;
    }
    REQUIRE_FALSE(row.empty());
    std::vector<std::string> fields;
    std::istringstream rs(row);
    std::string f;
    while (std::getline(rs, f, ',')) fields.push_back(f);
    REQUIRE(fields.size() >= 4);
    CHECK(fields[0] == "caliber");
    CHECK(fields[1] == "3");
    CHECK(std::stoi(fields[2]) == solve_iters);
}

TEST_CASE("sweep records failures and continues") {
    fs::path dir = fresh_dir("sweep_fail");
    REQUIRE(run_cli("sweep --parameter kernel --values tri_cube,bogus --out " + dir.string()) == 0);
    std::string csv = slurp(dir / "sweep.csv");
    CHECK(csv.find("kernel,tri_cube,") != std::string::npos);
    CHECK(csv.find("kernel,bogus,FAILED") != std::string::npos);
}

TEST_CASE("lars-trace emits one row per step within the caliber cap") {
    fs::path dir = fresh_dir("trace");
    REQUIRE(run_cli("lars-trace --variable 10 --out " + dir.string() +
                    " --set problem.mesh_levels=3") == 0);
    std::string csv = slurp(dir / "lars_trace.csv");
    std::istringstream ss(csv);
    std::string line;
    int rows = 0;
    int last_active = -1;
    bool header_seen = false;
    while (std::getline(ss, line)) {
        if (line.rfind("#", 0) == 0 || line.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            CHECK(line.rfind("step,event", 0) == 0);
            continue;
        }
        ++rows;
        std::vector<std::string> fields;
        std::istringstream rs(line);
        std::string f;
        while (std::getline(rs, f, ',')) fields.push_back(f);
        REQUIRE(fields.size() >= 6);
        last_active = std::stoi(fields[4]);
        CHECK(last_active <= 6);  // 2 * default caliber
    }
    CHECK(rows >= 1);

    CHECK(run_cli("lars-trace --variable 100000 --out " + dir.string()) == 1);
}

TEST_CASE("coarsen-report emits the expected files and ratio band") {
    fs::path dir = fresh_dir("coarsen");
    REQUIRE(run_cli("coarsen-report --out " + dir.string() + " --set problem.mesh_levels=3") == 0);
    std::string summary = slurp(dir / "coarsen_summary.txt");
    double ratio = std::stod(value_of(summary, "coarsening_ratio"));
    CHECK(ratio >= 0.2);
    CHECK(ratio <= 0.45);

    std::string vertices = slurp(dir / "coarsen_vertices.csv");
    CHECK(vertices.find("variable,mesh_vertex,x,y,is_coarse,sigma,caliber") != std::string::npos);
    std::string edges = slurp(dir / "coarsen_edges.csv");
    CHECK(edges.find("i,j,p_penalized_abs,p_final") != std::string::npos);

    // every fine vertex interpolates from someone: count fine rows vs edges
    std::istringstream vs(vertices);
    std::string line;
    int fine = 0;
    while (std::getline(vs, line)) {
        if (line.rfind("#", 0) == 0 || line.rfind("variable", 0) == 0 || line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream rs(line);
        std::string f;
        while (std::getline(rs, f, ',')) fields.push_back(f);
        if (fields[4] == "0") {
            ++fine;
            CHECK(std::stoi(fields[6]) >= 1);
        }
    }
    CHECK(fine > 0);
}

TEST_CASE("mesh and assemble round trip through their formats") {
    fs::path dir = fresh_dir("meshout");
    REQUIRE(run_cli("mesh --out " + dir.string() + " --set problem.mesh_levels=1") == 0);
    std::ifstream min(dir / "mesh.txt");
    lamg::Mesh m = lamg::read_mesh(min);
    CHECK(m.nvertices() == 19);
    CHECK(m.ntriangles() == 24);

    REQUIRE(run_cli("assemble --out " + dir.string() + " --set problem.mesh_levels=2") == 0);
    lamg::SparseMatrix A = lamg::read_matrix_market_file((dir / "matrix.mtx").string());
    CHECK(A.nrows == 37);
    lamg::SparseMatrix At = lamg::transpose(A);
    CHECK(At.values == A.values);
}

TEST_CASE("config files load and are reflected in the provenance header") {
    fs::path dir = fresh_dir("cfgfile");
    {
        std::ofstream cfg(dir / "run.cfg");
        cfg << "# comment line\n";
        cfg << "problem.mesh_levels = 3\n";
        cfg << "lars.caliber=2\n";
    }
    REQUIRE(run_cli("solve --config " + (dir / "run.cfg").string() + " --out " + dir.string()) == 0);
    std::string report = slurp(dir / "report.txt");
    CHECK(report.find("# problem.mesh_levels=3") != std::string::npos);
    CHECK(report.find("# lars.caliber=2") != std::string::npos);
    CHECK(value_of(report, "n") == "169");

    CHECK(run_cli("solve --config " + (dir / "missing.cfg").string()) == 1);
}

TEST_CASE("solve accepts a Matrix Market problem source") {
    fs::path dir = fresh_dir("mm_solve");
    REQUIRE(run_cli("assemble --out " + dir.string() + " --set problem.mesh_levels=3") == 0);
    int rc = run_cli("solve --out " + dir.string() +
                     " --set problem.source=matrix_market --set problem.matrix_path=" +
                     (dir / "matrix.mtx").string());
    CHECK(rc == 0);
    std::string report = slurp(dir / "report.txt");
    CHECK(value_of(report, "converged") == "true");
    CHECK(value_of(report, "n") == "169");
}

TEST_CASE("scaling emits one row per level with quadrupling sizes") {
    fs::path dir = fresh_dir("scaling");
    REQUIRE(run_cli("scaling --levels 2,3 --out " + dir.string()) == 0);
    std::string csv = slurp(dir / "scaling.csv");
    std::istringstream ss(csv);
    std::string line;
    std::vector<std::vector<std::string>> rows;
    bool header_seen = false;
    while (std::getline(ss, line)) {
        if (line.rfind("#", 0) == 0 || line.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields;
        std::istringstream rs(line);
        std::string f;
        while (std::getline(rs, f, ',')) fields.push_back(f);
        rows.push_back(fields);
    }
    REQUIRE(rows.size() == 2);
    double n0 = std::stod(rows[0][1]), n1 = std::stod(rows[1][1]);
    CHECK(n1 / n0 >= 4.0 * 0.7);
    CHECK(n1 / n0 <= 4.0 * 1.3);
    // scaling defaults to K = 16
    CHECK(csv.find("# bootstrap.test_vectors=16") != std::string::npos);
}
