// Command-line front end: problem generation, bootstrap AMG setup and solve,
// parameter sweeps, least angle regression traces, coarsening reports and
// scaling studies. Exit codes: 0 success, 1 usage/config error,
// 2 non-convergence.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lamg/config.hpp"
#include "lamg/matrix_market.hpp"

using namespace lamg;

namespace {

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = ".";
    std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "key=value config file");
    cmd->add_option("--set", opts.overrides, "config override key=value (repeatable)");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "random seed override");
}

RunConfig build_config(const CommonOpts& opts) {
    RunConfig cfg;
    if (!opts.config_path.empty()) load_config_file(cfg, opts.config_path);
    for (const std::string& kv : opts.overrides) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
    cfg.out_dir = opts.out_dir;
    std::filesystem::create_directories(cfg.out_dir);
    return cfg;
}

std::ofstream open_out(const RunConfig& cfg, const std::string& name, const char* comment = "#") {
    std::ofstream out(std::filesystem::path(cfg.out_dir) / name);
    if (!out) throw std::runtime_error("cannot open output file " + name);
    for (const std::string& line : resolved_config_lines(cfg)) out << comment << " " << line << "\n";
    return out;
}

double mean_actual_caliber(const Hierarchy& h) {
    if (h.levels.empty() || !h.levels.front().interp_meta) return 0.0;
    const Interpolation& interp = *h.levels.front().interp_meta;
    long total = 0;
    int fine = 0;
    for (int i = 0; i < interp.n; ++i) {
        if (interp.is_coarse[i]) continue;
        total += static_cast<long>(interp.cols[i].size());
        ++fine;
    }
    return fine == 0 ? 0.0 : static_cast<double>(total) / fine;
}

// Two-grid factor of the finest level pair; skipped when the coarse level is
// too large for a dense direct solve.
std::optional<double> finest_two_grid_factor(const Hierarchy& h, std::uint64_t seed) {
    if (h.depth() < 2) return std::nullopt;
    if (h.levels[1].A.nrows > 2000) return std::nullopt;
    Hierarchy two = two_level_slice(h);
    return estimate_two_grid_factor(two, 50, seed);
}

struct SolveOutcome {
    SolveReport report;
    PipelineResult pipeline;
};

SolveOutcome solve_pipeline(const Problem& problem, const RunConfig& cfg) {
    SolveOutcome out;
    out.pipeline = run_setup(problem, cfg);
    auto [x, report] = pcg(problem.A, problem.b, &out.pipeline.setup.hierarchy,
                           cfg.bootstrap.pcg_tolerance, cfg.bootstrap.pcg_max_iterations);
    report.setup_cycles_used = out.pipeline.cycles_used;
    report.convergence_factor = finest_two_grid_factor(out.pipeline.setup.hierarchy, cfg.seed + 1000);
    out.report = std::move(report);
    return out;
}

void write_solve_outputs(const RunConfig& cfg, const Problem& problem, const SolveOutcome& outcome) {
    const SolveReport& rep = outcome.report;
    {
        auto out = open_out(cfg, "report.txt");
        out << "n=" << problem.A.nrows << "\n";
        out << "iterations=" << rep.iterations << "\n";
        out << "converged=" << (rep.converged ? "true" : "false") << "\n";
        out << "setup_cycles=" << rep.setup_cycles_used << "\n";
        out << "levels=" << rep.level_sizes.size() << "\n";
        std::string sizes, ratios;
        for (size_t i = 0; i < rep.level_sizes.size(); ++i)
            sizes += (i ? ";" : "") + std::to_string(rep.level_sizes[i]);
        for (size_t i = 0; i < rep.coarsening_ratios.size(); ++i)
            ratios += (i ? ";" : "") + fmt(rep.coarsening_ratios[i]);
        out << "level_sizes=" << sizes << "\n";
        out << "coarsening_ratios=" << ratios << "\n";
        out << "mean_actual_caliber=" << fmt(mean_actual_caliber(outcome.pipeline.setup.hierarchy))
            << "\n";
        out << "initial_residual=" << fmt(rep.residual_history.front()) << "\n";
        out << "final_residual=" << fmt(rep.residual_history.back()) << "\n";
        if (rep.convergence_factor) out << "two_grid_factor=" << fmt(*rep.convergence_factor) << "\n";
    }
    {
        auto out = open_out(cfg, "residuals.csv");
        out << "iteration,residual\n";
        for (size_t i = 0; i < rep.residual_history.size(); ++i)
            out << i << "," << fmt(rep.residual_history[i]) << "\n";
    }
}

int cmd_solve(const CommonOpts& opts) {
    RunConfig cfg = build_config(opts);
    Problem problem = make_problem(cfg);
    SolveOutcome outcome = solve_pipeline(problem, cfg);
    write_solve_outputs(cfg, problem, outcome);
    std::cout << "n=" << problem.A.nrows << " iterations=" << outcome.report.iterations
              << " converged=" << (outcome.report.converged ? "true" : "false") << "\n";
    return outcome.report.converged ? 0 : 2;
}

int cmd_sweep(const CommonOpts& opts, const std::string& parameter, const std::string& values_csv) {
    static const std::vector<std::string> allowed = {"caliber", "correlation_threshold",
                                                     "strength_threshold", "kernel", "K"};
    if (std::find(allowed.begin(), allowed.end(), parameter) == allowed.end())
        throw ConfigError("sweep: unsupported parameter '" + parameter + "'");

    RunConfig base = build_config(opts);
    auto out = open_out(base, "sweep.csv");
    out << "parameter,value,iterations,converged,mean_actual_caliber,two_grid_factor,"
           "coarsening_ratios\n";

    std::stringstream ss(values_csv);
    std::string value;
    while (std::getline(ss, value, ',')) {
        RunConfig cfg = base;
        try {
            if (parameter == "caliber")
                apply_config_entry(cfg, "lars.caliber", value);
            else if (parameter == "correlation_threshold")
                apply_config_entry(cfg, "lars.correlation_threshold", value);
            else if (parameter == "strength_threshold")
                apply_config_entry(cfg, "coarsening.strength_threshold", value);
            else if (parameter == "kernel")
                apply_config_entry(cfg, "kernel.function", value);
            else
                apply_config_entry(cfg, "bootstrap.test_vectors", value);

            Problem problem = make_problem(cfg);
            SolveOutcome outcome = solve_pipeline(problem, cfg);
            std::string ratios;
            for (size_t i = 0; i < outcome.report.coarsening_ratios.size(); ++i)
                ratios += (i ? ";" : "") + fmt(outcome.report.coarsening_ratios[i]);
            out << parameter << "," << value << "," << outcome.report.iterations << ","
                << (outcome.report.converged ? "true" : "false") << ","
                << fmt(mean_actual_caliber(outcome.pipeline.setup.hierarchy)) << ","
                << (outcome.report.convergence_factor ? fmt(*outcome.report.convergence_factor) : "")
                << "," << ratios << "\n";
        } catch (const std::exception& e) {
            out << parameter << "," << value << ",FAILED,,,," << "\n";
            std::cerr << "sweep value " << value << " failed: " << e.what() << "\n";
        }
    }
    return 0;
}

int cmd_lars_trace(const CommonOpts& opts, int variable) {
    RunConfig cfg = build_config(opts);
    Problem problem = make_problem(cfg);
    if (variable < 0 || variable >= problem.A.nrows) {
        std::cerr << "lars-trace: variable " << variable << " out of range [0," << problem.A.nrows
                  << ")\n";
        return 1;
    }
    SmootherSpec spec;
    if (cfg.smoother.kind == SmootherKind::block_gauss_seidel) {
        spec.kind = SmootherKind::block_gauss_seidel;
        spec.blocks = build_blocks(problem.A, std::min(cfg.smoother.nblocks, problem.A.nrows));
    }
    TestVectorSet vecs =
        generate_test_vectors(problem.A, cfg.bootstrap.K, cfg.bootstrap.nu, spec, cfg.seed);
    Neighborhood nbhd = graph_neighborhood(problem.A, variable, cfg.kernel.radius);
    RegressionProblem prob = build_local_problem(variable, vecs, nbhd, cfg.kernel);
    LarsPath path = cfg.lars.sign_constrained ? lars_path_signed(prob, cfg.lars)
                                              : lars_path(prob, cfg.lars);

    auto out = open_out(cfg, "lars_trace.csv");
    out << "step,event,event_variable,alpha,active_size,l1_norm,coefficients,unpenalized,"
           "correlations\n";
    for (size_t s = 0; s < path.steps.size(); ++s) {
        const LarsStep& st = path.steps[s];
        const char* ev = st.event == LarsEventKind::added     ? "added"
                         : st.event == LarsEventKind::dropped ? "dropped"
                         : st.event == LarsEventKind::moved   ? "moved"
                                                              : "finished";
        double l1 = 0.0;
        for (double v : st.x) l1 += std::abs(v);
        std::string coef, unp, corr;
        for (int c : st.active) {
            coef += (coef.empty() ? "" : ";") + std::to_string(prob.column_ids[c]) + ":" + fmt(st.x[c]);
            unp += (unp.empty() ? "" : ";") + std::to_string(prob.column_ids[c]) + ":" +
                   fmt(st.x_unpenalized[c]);
        }
        for (int c = 0; c < prob.cols(); ++c)
            corr += (corr.empty() ? "" : ";") + std::to_string(prob.column_ids[c]) + ":" + fmt(st.rho[c]);
        int evcol = st.event_column >= 0 ? prob.column_ids[st.event_column] : -1;
        out << s << "," << ev << "," << evcol << "," << fmt(st.alpha) << "," << st.active_size() << ","
            << fmt(l1) << "," << coef << "," << unp << "," << corr << "\n";
    }
    return 0;
}

int cmd_coarsen_report(const CommonOpts& opts) {
    RunConfig cfg = build_config(opts);
    Problem problem = make_problem(cfg);
    SmootherSpec spec;
    if (cfg.smoother.kind == SmootherKind::block_gauss_seidel) {
        spec.kind = SmootherKind::block_gauss_seidel;
        spec.blocks = build_blocks(problem.A, std::min(cfg.smoother.nblocks, problem.A.nrows));
    }
    TestVectorSet vecs =
        generate_test_vectors(problem.A, cfg.bootstrap.K, cfg.bootstrap.nu, spec, cfg.seed);
    CoarseningResult res = lar_coarsening(problem.A, vecs, cfg.coarsening_params());

    {
        auto out = open_out(cfg, "coarsen_vertices.csv");
        out << "variable,mesh_vertex,x,y,is_coarse,sigma,caliber\n";
        for (int i = 0; i < res.interp.n; ++i) {
            double x = 0.0, y = 0.0;
            int mv = -1;
            if (problem.has_mesh) {
                mv = problem.interior_map[i];
                x = problem.mesh.vertices[mv][0];
                y = problem.mesh.vertices[mv][1];
            }
            out << i << "," << mv << "," << fmt(x) << "," << fmt(y) << ","
                << (res.interp.is_coarse[i] ? 1 : 0) << "," << fmt(res.report.strength.sigma[i]) << ","
                << res.interp.cols[i].size() << "\n";
        }
    }
    {
        auto out = open_out(cfg, "coarsen_edges.csv");
        out << "i,j,p_penalized_abs,p_final\n";
        for (int i = 0; i < res.interp.n; ++i) {
            if (res.interp.is_coarse[i]) continue;
            for (size_t k = 0; k < res.interp.cols[i].size(); ++k) {
                int j = res.interp.cols[i][k];
                double pen = 0.0;
                for (auto [jj, w] : res.report.strength.edges[i])
                    if (jj == j) pen = w;
                out << i << "," << j << "," << fmt(pen) << "," << fmt(res.interp.weights[i][k]) << "\n";
            }
        }
    }
    {
        auto out = open_out(cfg, "coarsen_summary.txt");
        out << "n=" << res.interp.n << "\n";
        out << "n_coarse=" << res.interp.coarse_count() << "\n";
        out << "coarsening_ratio=" << fmt(static_cast<double>(res.interp.coarse_count()) / res.interp.n)
            << "\n";
        out << "outer_iterations=" << res.report.outer_iterations << "\n";
        out << "maxvol_swaps=" << res.report.total_swaps << "\n";
        out << "demotions=" << res.report.total_demotions << "\n";
        out << "forced_coarse=" << res.report.forced_coarse << "\n";
        out << "maxvol_clear=" << (res.report.maxvol_clear ? "true" : "false") << "\n";
    }
    return 0;
}

int cmd_scaling(const CommonOpts& opts, const std::string& levels_csv) {
    CommonOpts adjusted = opts;
    RunConfig probe = build_config(opts);
    // Scaling runs default to K = 16 unless the user pinned a value.
    if (!probe.explicit_keys.count("bootstrap.test_vectors"))
        adjusted.overrides.push_back("bootstrap.test_vectors=16");
    RunConfig base = build_config(adjusted);

    std::vector<int> levels;
    std::stringstream ss(levels_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) levels.push_back(std::stoi(tok));
    if (levels.size() < 2) throw ConfigError("scaling: need at least two mesh levels");

    auto out = open_out(base, "scaling.csv");
    out << "mesh_levels,n,hierarchy_depth,setup_cycles,pcg_iterations,cg_iterations\n";
    for (int lvl : levels) {
        RunConfig cfg = base;
        apply_config_entry(cfg, "problem.mesh_levels", std::to_string(lvl));
        Problem problem = make_problem(cfg);
        PipelineResult pipe = run_setup(problem, cfg);
        auto [x, rep] = pcg(problem.A, problem.b, &pipe.setup.hierarchy, cfg.bootstrap.pcg_tolerance,
                            cfg.bootstrap.pcg_max_iterations);
        auto [xc, plain] = pcg(problem.A, problem.b, nullptr, cfg.bootstrap.pcg_tolerance, 200000);
        out << lvl << "," << problem.A.nrows << "," << pipe.setup.hierarchy.depth() << ","
            << pipe.cycles_used << "," << rep.iterations << "," << plain.iterations << "\n";
        std::cout << "levels=" << lvl << " n=" << problem.A.nrows << " pcg=" << rep.iterations
                  << " cg=" << plain.iterations << "\n";
    }
    return 0;
}

int cmd_mesh(const CommonOpts& opts) {
    RunConfig cfg = build_config(opts);
    Mesh mesh = disc_mesh(cfg.mesh_levels, cfg.mesh_fan);
    auto out = open_out(cfg, "mesh.txt");
    write_mesh(out, mesh);
    return 0;
}

int cmd_assemble(const CommonOpts& opts) {
    RunConfig cfg = build_config(opts);
    Problem problem = make_problem(cfg);
    std::ofstream out(std::filesystem::path(cfg.out_dir) / "matrix.mtx");
    if (!out) throw std::runtime_error("cannot open matrix.mtx");
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    for (const std::string& line : resolved_config_lines(cfg)) out << "% " << line << "\n";
    long count = 0;
    for (int i = 0; i < problem.A.nrows; ++i)
        for (int k = problem.A.row_begin(i); k < problem.A.row_end(i); ++k)
            if (problem.A.col_indices[k] <= i) ++count;
    out << problem.A.nrows << " " << problem.A.ncols << " " << count << "\n";
    for (int i = 0; i < problem.A.nrows; ++i)
        for (int k = problem.A.row_begin(i); k < problem.A.row_end(i); ++k) {
            int j = problem.A.col_indices[k];
            if (j <= i) out << (i + 1) << " " << (j + 1) << " " << fmt(problem.A.values[k]) << "\n";
        }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bootstrap AMG with least angle regression coarsening"};
    app.require_subcommand(1);

    CommonOpts solve_opts, sweep_opts, trace_opts, coarsen_opts, scaling_opts, mesh_opts, asm_opts;
    std::string sweep_parameter, sweep_values, scaling_levels = "2,3,4";
    int trace_variable = 0;

    add_common(app.add_subcommand("solve", "assemble/load, setup and solve"), solve_opts);
    CLI::App* sweep = app.add_subcommand("sweep", "parameter study");
    add_common(sweep, sweep_opts);
    sweep->add_option("--parameter", sweep_parameter,
                      "caliber | correlation_threshold | strength_threshold | kernel | K")
        ->required();
    sweep->add_option("--values", sweep_values, "comma-separated list")->required();
    CLI::App* trace = app.add_subcommand("lars-trace", "full LARS path of one variable");
    add_common(trace, trace_opts);
    trace->add_option("--variable", trace_variable, "system variable index")->required();
    add_common(app.add_subcommand("coarsen-report", "run coarsening only, export plots data"),
               coarsen_opts);
    CLI::App* scaling = app.add_subcommand("scaling", "mesh refinement scaling study");
    add_common(scaling, scaling_opts);
    scaling->add_option("--levels", scaling_levels, "comma-separated mesh levels");
    add_common(app.add_subcommand("mesh", "emit the configured mesh"), mesh_opts);
    add_common(app.add_subcommand("assemble", "emit the assembled matrix (Matrix Market)"), asm_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (app.got_subcommand("solve")) return cmd_solve(solve_opts);
        if (app.got_subcommand("sweep")) return cmd_sweep(sweep_opts, sweep_parameter, sweep_values);
        if (app.got_subcommand("lars-trace")) return cmd_lars_trace(trace_opts, trace_variable);
        if (app.got_subcommand("coarsen-report")) return cmd_coarsen_report(coarsen_opts);
        if (app.got_subcommand("scaling")) return cmd_scaling(scaling_opts, scaling_levels);
        if (app.got_subcommand("mesh")) return cmd_mesh(mesh_opts);
        if (app.got_subcommand("assemble")) return cmd_assemble(asm_opts);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
