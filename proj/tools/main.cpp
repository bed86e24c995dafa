#include <idle_energy/bench.hpp>
#include <idle_energy/error.hpp>
#include <idle_energy/generator.hpp>
#include <idle_energy/json_io.hpp>
#include <idle_energy/lp_format.hpp>
#include <idle_energy/milp.hpp>
#include <idle_energy/solve.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace idle_energy;

namespace {

// solve exit codes
constexpr int kExitOptimal = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitFeasibleTimeout = 3;
constexpr int kExitUnknownTimeout = 4;

int exit_code(SolveStatus s) {
    switch (s) {
    case SolveStatus::Optimal:
        return kExitOptimal;
    case SolveStatus::Infeasible:
        return kExitInfeasible;
    case SolveStatus::FeasibleTimeout:
        return kExitFeasibleTimeout;
    case SolveStatus::UnknownTimeout:
        return kExitUnknownTimeout;
    case SolveStatus::Error:
        return kExitError;
    }
    return kExitError;
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << text;
}

EnergyFunction load_energy(const std::string& path) { return energy_function_from_json(read_json_file(path)); }

milp::ModelIR build_model(const Instance& inst, const std::string& model, bool symmetry, bool fill, bool tight) {
    if (model == "relative") {
        return milp::build_relative_order(inst, {symmetry, fill, tight});
    }
    if (model == "position") {
        return milp::build_position_based(inst, milp::PositionOptions{symmetry});
    }
    throw ValidationError("unknown model '" + model + "'");
}

Json result_json(const SolveResult& r) {
    Json j;
    j["status"] = to_string(r.status);
    auto opt = [](const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); };
    j["objective"] = opt(r.objective);
    j["bound"] = opt(r.bound);
    j["gap"] = opt(r.gap);
    j["runtime_s"] = r.runtime;
    if (r.solution) {
        j["solution"] = to_json(*r.solution);
    }
    if (!r.message.empty()) {
        j["message"] = r.message;
    }
    return j;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Idle-energy scheduling on parallel identical machines"};
    app.require_subcommand(1);
    int code = 0;

    // generate
    auto* gen = app.add_subcommand("generate", "Generate one random instance");
    GenParams gp;
    std::string gen_energy;
    std::optional<double> gen_c;
    std::string gen_out;
    gen->add_option("--n", gp.n, "Number of jobs")->required();
    gen->add_option("--m", gp.m, "Number of machines")->required();
    gen->add_option("--p-min", gp.p_min)->capture_default_str();
    gen->add_option("--p-max", gp.p_max)->capture_default_str();
    gen->add_option("--alpha", gp.alpha)->capture_default_str();
    gen->add_option("--beta", gp.beta)->capture_default_str();
    gen->add_option("--gamma", gp.gamma)->capture_default_str();
    gen->add_option("--seed", gp.seed)->capture_default_str();
    gen->add_option("--energy", gen_energy, "Energy function JSON")->required();
    gen->add_option("--c-onoff", gen_c, "Switch-on/off cost (default: final-piece intercept)");
    gen->add_option("--out", gen_out, "Output file (default stdout)");
    gen->callback([&] {
        emit(gen_out, dump(to_json(generate(gp, load_energy(gen_energy), gen_c))) + "\n");
    });

    // generate-suite
    auto* suite = app.add_subcommand("generate-suite", "Generate a seeded instance grid");
    SuiteGrid grid;
    std::string suite_energy;
    std::optional<double> suite_c;
    std::string suite_dir = "suite";
    suite->add_option("--n", grid.n)->required()->delimiter(',');
    suite->add_option("--m", grid.m)->required()->delimiter(',');
    grid.alpha = {1.0};
    grid.gamma = {1.0};
    suite->add_option("--alpha", grid.alpha)->delimiter(',')->capture_default_str();
    suite->add_option("--gamma", grid.gamma)->delimiter(',')->capture_default_str();
    suite->add_option("--beta", grid.beta)->capture_default_str();
    suite->add_option("--p-min", grid.p_min)->capture_default_str();
    suite->add_option("--p-max", grid.p_max)->capture_default_str();
    suite->add_option("--count", grid.count, "Instances per cell")->capture_default_str();
    suite->add_option("--seed", grid.base_seed)->capture_default_str();
    suite->add_option("--energy", suite_energy)->required();
    suite->add_option("--c-onoff", suite_c);
    suite->add_option("--out-dir", suite_dir)->capture_default_str();
    suite->callback([&] {
        std::filesystem::create_directories(suite_dir);
        for (const auto& item : generate_suite(grid, load_energy(suite_energy), suite_c)) {
            write_json_file(std::filesystem::path(suite_dir) / (item.id + ".json"), to_json(item.instance));
            std::cout << item.id << '\n';
        }
    });

    // solve
    auto* solve = app.add_subcommand("solve", "Solve one instance");
    std::string s_instance;
    std::string s_model = "relative";
    std::string s_backend = "external";
    std::string s_cmd;
    double s_limit = 300.0;
    bool s_sym = false;
    bool s_fill = false;
    bool s_tight = false;
    std::string s_work;
    std::string s_out;
    bool s_keep = false;
    OracleConfig s_oracle;
    const std::map<std::string, bool> on_off{{"on", true}, {"off", false}};
    solve->add_option("--instance", s_instance)->required();
    solve->add_option("--model", s_model)->check(CLI::IsMember({"relative", "position"}))->capture_default_str();
    solve->add_option("--backend", s_backend)->check(CLI::IsMember({"external", "oracle"}))->capture_default_str();
    solve->add_option("--solver-cmd", s_cmd, "Template with {model} {solution} {time_limit}; default CBC");
    solve->add_option("--time-limit", s_limit)->capture_default_str();
    solve->add_option("--symmetry", s_sym)->transform(CLI::CheckedTransformer(on_off))->default_str("off");
    solve->add_option("--horizon-fill", s_fill)->transform(CLI::CheckedTransformer(on_off))->default_str("off");
    solve->add_option("--tight-big-m", s_tight)->transform(CLI::CheckedTransformer(on_off))->default_str("off");
    solve->add_option("--work-dir", s_work, "Directory for temporary LP/solution files");
    solve->add_flag("--keep-files", s_keep);
    solve->add_option("--max-jobs", s_oracle.max_jobs)->capture_default_str();
    solve->add_option("--time-grid", s_oracle.time_grid)->capture_default_str();
    solve->add_option("--out", s_out, "Result JSON (default stdout)");
    solve->callback([&] {
        const Instance inst = instance_from_json(read_json_file(s_instance));
        SolveResult result;
        if (s_backend == "oracle") {
            s_oracle.symmetry_reduction = s_sym;
            result = brute_force(inst, s_oracle);
        } else {
            SolverCommand cmd;
            cmd.command = s_cmd;
            cmd.work_dir = s_work;
            cmd.keep_files = s_keep;
            if (cmd.command.empty()) {
                const auto cbc = find_cbc();
                if (!cbc) {
                    throw SolverError("no --solver-cmd given and no CBC binary found");
                }
                cmd.command = cbc_command(*cbc);
            }
            result = solve_external(inst, build_model(inst, s_model, s_sym, s_fill, s_tight), cmd, s_limit);
        }
        emit(s_out, dump(result_json(result)) + "\n");
        code = exit_code(result.status);
    });

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Check and price a schedule");
    std::string e_instance;
    std::string e_solution;
    eval->add_option("--instance", e_instance)->required();
    eval->add_option("--solution", e_solution, "Solution JSON, or a solve result holding one")->required();
    eval->callback([&] {
        const Instance inst = instance_from_json(read_json_file(e_instance));
        Json sj = read_json_file(e_solution);
        const Solution sol = solution_from_json(sj.contains("solution") ? sj.at("solution") : sj);
        Json out;
        out["violations"] = Json::array();
        for (const auto& v : check_feasibility(inst, sol)) {
            out["violations"].push_back(
                {{"severity", v.severity == Violation::Severity::Error ? "error" : "warning"},
                 {"job", v.job},
                 {"message", v.message}});
        }
        if (!has_errors(check_feasibility(inst, sol))) {
            const auto ev = evaluate(inst, sol);
            out["idle_energy"] = ev.idle_energy;
            out["onoff_energy"] = ev.onoff_energy;
            out["processing_energy"] = ev.processing_energy;
            out["total"] = ev.total;
        } else {
            code = kExitError;
        }
        std::cout << dump(out) << '\n';
    });

    // model
    auto* model = app.add_subcommand("model", "Build a MILP model");
    model->require_subcommand(1);
    auto* emit_lp = model->add_subcommand("emit-lp", "Write the model as an LP file");
    std::string m_instance;
    std::string m_model = "relative";
    bool m_sym = false;
    bool m_fill = false;
    bool m_tight = false;
    std::string m_out;
    std::string m_ir;
    emit_lp->add_option("--instance", m_instance)->required();
    emit_lp->add_option("--model", m_model)->check(CLI::IsMember({"relative", "position"}))->capture_default_str();
    emit_lp->add_option("--symmetry", m_sym)->transform(CLI::CheckedTransformer(on_off))->default_str("off");
    emit_lp->add_option("--horizon-fill", m_fill)->transform(CLI::CheckedTransformer(on_off))->default_str("off");
    emit_lp->add_option("--tight-big-m", m_tight)->transform(CLI::CheckedTransformer(on_off))->default_str("off");
    emit_lp->add_option("--out", m_out, "LP file (default stdout)");
    emit_lp->add_option("--dump-ir", m_ir, "Also write the model IR as JSON");
    emit_lp->callback([&] {
        const Instance inst = instance_from_json(read_json_file(m_instance));
        const auto ir = build_model(inst, m_model, m_sym, m_fill, m_tight);
        if (m_out.empty() || m_out == "-") {
            milp::write_lp(ir, std::cout);
        } else {
            milp::emit_lp(ir, m_out);
        }
        if (!m_ir.empty()) {
            write_json_file(m_ir, ir.to_json());
        }
    });

    // energy
    auto* energy = app.add_subcommand("energy", "Energy-function utilities");
    energy->require_subcommand(1);
    auto* ev = energy->add_subcommand("eval", "Evaluate f at idle lengths");
    std::string en_file;
    std::vector<double> deltas;
    ev->add_option("--energy", en_file)->required();
    ev->add_option("--delta", deltas)->required()->delimiter(',');
    ev->callback([&] {
        const auto f = load_energy(en_file);
        for (double d : deltas) {
            std::cout << d << ' ' << f.evaluate(d) << '\n';
        }
    });
    auto* be = energy->add_subcommand("break-even", "Break-even idle length of each mode");
    be->add_option("--energy", en_file)->required();
    be->callback([&] {
        for (const auto& b : break_even_times(load_energy(en_file))) {
            std::cout << b.mode << ' ' << b.delta << '\n';
        }
    });
    auto* from_graph = energy->add_subcommand("from-graph", "Energy function of a transition graph");
    std::string graph_file;
    std::string graph_out;
    from_graph->add_option("--graph", graph_file)->required();
    from_graph->add_option("--out", graph_out);
    from_graph->callback([&] {
        const auto modes = from_transition_graph(transition_graph_from_json(read_json_file(graph_file)));
        emit(graph_out, dump(to_json(EnergyFunction::from_modes(modes))) + "\n");
    });
    auto* approx = energy->add_subcommand("approx", "Min-max piecewise-linear fit of sampled energy");
    std::string samples_file;
    std::size_t segments = 3;
    bool jumps = false;
    std::string approx_out;
    approx->add_option("--samples", samples_file, "delta,energy CSV")->required();
    approx->add_option("--segments", segments)->capture_default_str();
    approx->add_flag("--allow-jumps", jumps);
    approx->add_option("--out", approx_out);
    approx->callback([&] {
        const auto samples = read_samples_csv(samples_file);
        const auto fit = approximate_pwl(samples, segments, jumps);
        Json j = to_json(fit.function);
        j["max_error"] = fit.max_error;
        emit(approx_out, dump(j) + "\n");
    });

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Experiment harness");
    bench_cmd->require_subcommand(1);
    auto* run = bench_cmd->add_subcommand("run", "Run an experiment spec");
    std::string spec_file;
    run->add_option("--spec", spec_file)->required();
    run->callback([&] {
        const auto spec = bench::experiment_spec_from_json(read_json_file(spec_file));
        const auto out = bench::run_experiment(spec);
        std::cout << bench::render_table(bench::aggregate(out.rows), bench::TableShape::Split);
        std::cout << "results: " << out.results_csv.string() << '\n';
    });
    auto* cmp = bench_cmd->add_subcommand("compare", "Compare two single-configuration result sets");
    std::string cmp_a;
    std::string cmp_b;
    std::string cmp_out;
    cmp->add_option("--a", cmp_a)->required();
    cmp->add_option("--b", cmp_b)->required();
    cmp->add_option("--out", cmp_out);
    cmp->callback([&] {
        const auto c = bench::compare_models(bench::read_results_csv(std::filesystem::path(cmp_a)),
                                             bench::read_results_csv(std::filesystem::path(cmp_b)));
        emit(cmp_out, c.table);
        for (const auto& d : c.disagreements) {
            std::cerr << "objective mismatch on " << d.instance_id << ": " << d.left << " vs " << d.right << '\n';
        }
        code = c.disagreements.empty() ? 0 : kExitError;
    });
    auto* plot = bench_cmd->add_subcommand("plot", "Plot-ready CSV");
    std::string kind;
    std::string plot_results;
    std::string plot_energy;
    double max_delta = 100.0;
    double step = 1.0;
    std::string plot_out;
    plot->add_option("--kind", kind)->required()->check(CLI::IsMember({"boxplot-runtimes", "energy-function-curve"}));
    plot->add_option("--results", plot_results, "Results CSV (boxplot-runtimes)");
    plot->add_option("--energy", plot_energy, "Energy function JSON (energy-function-curve)");
    plot->add_option("--max-delta", max_delta)->capture_default_str();
    plot->add_option("--step", step)->capture_default_str();
    plot->add_option("--out", plot_out);
    plot->callback([&] {
        std::ostringstream out;
        if (kind == "boxplot-runtimes") {
            if (plot_results.empty()) {
                throw ValidationError("--results is required for boxplot-runtimes");
            }
            bench::write_runtime_boxplot(out, bench::read_results_csv(std::filesystem::path(plot_results)));
        } else {
            if (plot_energy.empty()) {
                throw ValidationError("--energy is required for energy-function-curve");
            }
            bench::write_energy_curve(out, load_energy(plot_energy), max_delta, step);
        }
        emit(plot_out, out.str());
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return code;
}
