#include <idle_energy/bench.hpp>
#include <idle_energy/error.hpp>
#include <idle_energy/milp.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace idle_energy::bench {
namespace {

std::string format(const char* fmt, double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, x);
    return buf;
}

std::string optional_number(const std::optional<double>& x) {
    return x ? format("%.15g", *x) : std::string();
}

std::optional<double> parse_optional(const std::string& s) {
    if (s.empty()) {
        return std::nullopt;
    }
    try {
        return std::stod(s);
    } catch (const std::logic_error&) {
        throw ValidationError("bad number '" + s + "' in results");
    }
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

std::string config_label(const std::string& model, const std::string& toggles) {
    return model + "[" + toggles + "]";
}

const std::set<std::string> kModels = {"relative", "position", "oracle"};

// Runs one configuration on one instance and fills the result columns.
ResultRow run_one(const ExperimentSpec& spec, const SolverCommand& cmd, const SuiteInstance& item,
                  const RunConfig& run, std::optional<Solution>& solution) {
    ResultRow row;
    row.instance_id = item.id;
    row.n = item.params.n;
    row.m = item.params.m;
    row.alpha = item.params.alpha;
    row.gamma = item.params.gamma;
    row.model = run.model;
    row.toggles = run.toggles();
    const Instance& inst = item.instance;
    try {
        SolveResult result;
        if (run.model == "oracle") {
            OracleConfig cfg = spec.oracle;
            result = brute_force(inst, cfg);
        } else {
            const milp::ModelIR model =
                run.model == "relative"
                    ? milp::build_relative_order(inst, {run.symmetry, run.horizon_fill, run.tight_big_m})
                    : milp::build_position_based(inst, milp::PositionOptions{run.symmetry});
            result = solve_external(inst, model, cmd, spec.time_limit);
        }
        row.status = result.status;
        row.objective = result.objective;
        row.bound = result.bound;
        row.gap = result.gap;
        row.runtime_s = result.runtime;
        if (result.solution && result.objective) {
            const double energy = evaluate(inst, *result.solution).schedule_energy();
            if (std::abs(energy - *result.objective) > kObjectiveTolerance) {
                row.status = SolveStatus::Error;
            }
            solution = result.solution;
        }
    } catch (const std::exception&) {
        row.status = SolveStatus::Error;
        row.objective.reset();
        row.bound.reset();
        row.gap.reset();
    }
    return row;
}

std::string cell_group(const ResultRow& row) {
    return config_label(row.model, row.toggles) + "/n" + std::to_string(row.n) + "_m" + std::to_string(row.m);
}

std::string time_cell(const std::optional<double>& t) { return t ? format("%.2f", *t) : "-"; }
std::string gap_cell(const std::optional<double>& g) { return g ? format("%.2f", 100.0 * *g) : "-"; }

} // namespace

std::string RunConfig::toggles() const {
    std::vector<std::string> parts;
    if (symmetry) {
        parts.push_back("sym");
    }
    if (horizon_fill) {
        parts.push_back("fill");
    }
    if (tight_big_m) {
        parts.push_back("tightm");
    }
    if (parts.empty()) {
        return "none";
    }
    std::string out = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) {
        out += "+" + parts[i];
    }
    return out;
}

ExperimentSpec experiment_spec_from_json(const Json& j) {
    ExperimentSpec spec;
    const Json& suite = j.at("suite");
    spec.grid.n = suite.at("n").get<std::vector<int>>();
    spec.grid.m = suite.at("m").get<std::vector<int>>();
    spec.grid.alpha = suite.value("alpha", std::vector<double>{1.0});
    spec.grid.gamma = suite.value("gamma", std::vector<double>{1.0});
    spec.grid.beta = suite.value("beta", 1.0);
    spec.grid.p_min = suite.value("p_min", std::int64_t{1});
    spec.grid.p_max = suite.value("p_max", std::int64_t{300});
    spec.grid.count = suite.value("count", 1);
    spec.grid.base_seed = suite.value("base_seed", std::uint64_t{0});
    spec.energy = energy_function_from_json(j.at("energy_function"));
    if (j.contains("c_onoff") && !j.at("c_onoff").is_null()) {
        spec.c_onoff = j.at("c_onoff").get<double>();
    }
    for (const auto& r : j.at("runs")) {
        RunConfig run;
        run.model = r.at("model").get<std::string>();
        run.symmetry = r.value("symmetry", false);
        run.horizon_fill = r.value("horizon_fill", false);
        run.tight_big_m = r.value("tight_big_m", false);
        if (!kModels.contains(run.model)) {
            throw ValidationError("unknown model '" + run.model + "' (relative, position, oracle)");
        }
        spec.runs.push_back(run);
    }
    spec.time_limit = j.value("time_limit", 300.0);
    spec.workers = j.value("workers", 1);
    spec.solver_cmd = j.value("solver_cmd", std::string());
    spec.output_dir = j.value("output_dir", std::string("bench_out"));
    if (j.contains("oracle")) {
        const Json& o = j.at("oracle");
        spec.oracle.max_jobs = o.value("max_jobs", std::size_t{8});
        spec.oracle.time_grid = o.value("time_grid", 1);
        spec.oracle.symmetry_reduction = o.value("symmetry_reduction", true);
    }
    if (spec.runs.empty()) {
        throw ValidationError("experiment needs at least one run");
    }
    if (!(spec.time_limit > 0.0)) {
        throw ValidationError("time limit must be positive");
    }
    if (spec.workers < 1) {
        throw ValidationError("workers must be at least 1");
    }
    return spec;
}

Json to_json(const ExperimentSpec& spec) {
    Json j;
    j["suite"] = {{"n", spec.grid.n},         {"m", spec.grid.m},         {"alpha", spec.grid.alpha},
                  {"gamma", spec.grid.gamma}, {"beta", spec.grid.beta},   {"p_min", spec.grid.p_min},
                  {"p_max", spec.grid.p_max}, {"count", spec.grid.count}, {"base_seed", spec.grid.base_seed}};
    j["energy_function"] = idle_energy::to_json(spec.energy);
    j["c_onoff"] = spec.c_onoff ? Json(*spec.c_onoff) : Json(nullptr);
    j["runs"] = Json::array();
    for (const auto& r : spec.runs) {
        j["runs"].push_back({{"model", r.model},
                             {"symmetry", r.symmetry},
                             {"horizon_fill", r.horizon_fill},
                             {"tight_big_m", r.tight_big_m}});
    }
    j["time_limit"] = spec.time_limit;
    j["workers"] = spec.workers;
    j["solver_cmd"] = spec.solver_cmd;
    j["output_dir"] = spec.output_dir.string();
    j["oracle"] = {{"max_jobs", spec.oracle.max_jobs},
                   {"time_grid", spec.oracle.time_grid},
                   {"symmetry_reduction", spec.oracle.symmetry_reduction}};
    return j;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << kResultsHeader << '\n';
    for (const auto& r : rows) {
        out << r.instance_id << ',' << r.n << ',' << r.m << ',' << format("%.15g", r.alpha) << ','
            << format("%.15g", r.gamma) << ',' << r.model << ',' << r.toggles << ',' << to_string(r.status)
            << ',' << optional_number(r.objective) << ',' << optional_number(r.bound) << ','
            << optional_number(r.gap) << ',' << format("%.6f", r.runtime_s) << '\n';
    }
}

void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    write_results_csv(out, rows);
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        return {};
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kResultsHeader) {
        throw ValidationError("unexpected results header: " + line);
    }
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != 12) {
            throw ValidationError("results row has " + std::to_string(f.size()) + " fields: " + line);
        }
        ResultRow r;
        r.instance_id = f[0];
        r.n = std::stoi(f[1]);
        r.m = std::stoi(f[2]);
        r.alpha = std::stod(f[3]);
        r.gamma = std::stod(f[4]);
        r.model = f[5];
        r.toggles = f[6];
        r.status = solve_status_from_string(f[7]);
        r.objective = parse_optional(f[8]);
        r.bound = parse_optional(f[9]);
        r.gap = parse_optional(f[10]);
        r.runtime_s = std::stod(f[11]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    return read_results_csv(in);
}

void sort_rows(std::vector<ResultRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.instance_id, a.model, a.toggles) < std::tie(b.instance_id, b.model, b.toggles);
    });
}

ExperimentOutput run_experiment(const ExperimentSpec& spec) {
    if (spec.runs.empty()) {
        throw ValidationError("experiment needs at least one run");
    }
    const auto suite = generate_suite(spec.grid, spec.energy, spec.c_onoff);
    const auto dir = spec.output_dir;
    std::filesystem::create_directories(dir / "instances");
    std::filesystem::create_directories(dir / "solutions");
    write_json_file(dir / "spec.json", to_json(spec));
    for (const auto& item : suite) {
        write_json_file(dir / "instances" / (item.id + ".json"), idle_energy::to_json(item.instance));
    }

    SolverCommand cmd;
    cmd.work_dir = dir / "work";
    cmd.command = spec.solver_cmd;
    const bool needs_solver = std::any_of(spec.runs.begin(), spec.runs.end(),
                                          [](const RunConfig& r) { return r.model != "oracle"; });
    if (cmd.command.empty() && needs_solver) {
        if (const auto cbc = find_cbc()) {
            cmd.command = cbc_command(*cbc);
        }
    }

    const std::size_t total = suite.size() * spec.runs.size();
    std::vector<ResultRow> rows(total);
    std::atomic<std::size_t> next{0};
    std::mutex io;
    auto worker = [&] {
        for (std::size_t t = next++; t < total; t = next++) {
            const auto& item = suite[t / spec.runs.size()];
            const auto& run = spec.runs[t % spec.runs.size()];
            std::optional<Solution> solution;
            rows[t] = run_one(spec, cmd, item, run, solution);
            if (solution) {
                const auto path =
                    dir / "solutions" / (item.id + "__" + run.model + "_" + rows[t].toggles + ".json");
                const std::lock_guard lock(io);
                write_json_file(path, idle_energy::to_json(*solution));
            }
        }
    };
    const int threads = std::max(1, std::min<int>(spec.workers, static_cast<int>(std::max<std::size_t>(total, 1))));
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }
    std::error_code ec;
    std::filesystem::remove(cmd.work_dir, ec);

    sort_rows(rows);
    ExperimentOutput output;
    output.results_csv = dir / "results.csv";
    write_results_csv(output.results_csv, rows);
    // Aggregate what was saved, so re-aggregating the CSV reproduces the tables.
    rows = read_results_csv(output.results_csv);
    const auto agg = aggregate(rows);
    {
        std::ofstream out(dir / "aggregate.csv");
        write_aggregate_csv(out, agg);
    }
    {
        std::ofstream out(dir / "tables.md");
        out << "## Timeouts combined\n\n" << render_table(agg, TableShape::Combined) << '\n';
        out << "## Timeouts split\n\n" << render_table(agg, TableShape::Split);
    }
    output.rows = std::move(rows);
    return output;
}

std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows) {
    std::set<std::string> feasible;
    for (const auto& r : rows) {
        if (r.objective && r.status != SolveStatus::Error) {
            feasible.insert(r.instance_id);
        }
    }
    using Key = std::tuple<int, int, std::string, std::string>;
    struct Acc {
        std::set<std::string> ids;
        int infeasible = 0;
        int to_if = 0;
        int to_f = 0;
        double t_if = 0.0;
        int n_if = 0;
        double t_f = 0.0;
        int n_f = 0;
        double gap = 0.0;
        int n_gap = 0;
    };
    std::map<Key, Acc> cells;
    for (const auto& r : rows) {
        Acc& a = cells[{r.n, r.m, r.model, r.toggles}];
        a.ids.insert(r.instance_id);
        if (r.status == SolveStatus::Error) {
            continue;
        }
        const bool is_feasible = feasible.contains(r.instance_id);
        const bool timeout = r.status == SolveStatus::FeasibleTimeout || r.status == SolveStatus::UnknownTimeout;
        if (r.status == SolveStatus::Infeasible) {
            ++a.infeasible;
        }
        if (is_feasible) {
            a.to_f += timeout ? 1 : 0;
            a.t_f += r.runtime_s;
            ++a.n_f;
        } else {
            a.to_if += timeout ? 1 : 0;
            a.t_if += r.runtime_s;
            ++a.n_if;
        }
        if (r.objective && r.gap) {
            a.gap += *r.gap;
            ++a.n_gap;
        }
    }
    std::vector<AggregateRow> out;
    for (const auto& [key, a] : cells) {
        AggregateRow row;
        std::tie(row.n, row.m, row.model, row.toggles) = key;
        row.instances = static_cast<int>(a.ids.size());
        row.count_infeasible = a.infeasible;
        row.count_timeout_infeasible = a.to_if;
        row.count_timeout_feasible = a.to_f;
        if (a.n_if > 0) {
            row.mean_runtime_infeasible = a.t_if / a.n_if;
        }
        if (a.n_f > 0) {
            row.mean_runtime_feasible = a.t_f / a.n_f;
        }
        if (a.n_gap > 0) {
            row.mean_gap = a.gap / a.n_gap;
        }
        out.push_back(std::move(row));
    }
    return out;
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
    out << "model,toggles,n,m,instances,if,to_if,to_f,t_if,t_f,gap\n";
    for (const auto& r : rows) {
        out << r.model << ',' << r.toggles << ',' << r.n << ',' << r.m << ',' << r.instances << ','
            << r.count_infeasible << ',' << r.count_timeout_infeasible << ',' << r.count_timeout_feasible << ','
            << (r.mean_runtime_infeasible ? format("%.6f", *r.mean_runtime_infeasible) : "") << ','
            << (r.mean_runtime_feasible ? format("%.6f", *r.mean_runtime_feasible) : "") << ','
            << (r.mean_gap ? format("%.6f", *r.mean_gap) : "") << '\n';
    }
}

namespace {

struct Grid {
    std::vector<std::string> configs;
    std::map<std::pair<int, int>, std::map<std::string, const AggregateRow*>> cells;
};

Grid arrange(const std::vector<AggregateRow>& rows) {
    Grid g;
    for (const auto& r : rows) {
        const std::string label = config_label(r.model, r.toggles);
        if (std::find(g.configs.begin(), g.configs.end(), label) == g.configs.end()) {
            g.configs.push_back(label);
        }
        g.cells[{r.n, r.m}][label] = &r;
    }
    std::sort(g.configs.begin(), g.configs.end());
    return g;
}

std::string infeasible_cell(const std::map<std::string, const AggregateRow*>& cell,
                            const std::vector<std::string>& configs) {
    std::vector<int> counts;
    for (const auto& c : configs) {
        const auto it = cell.find(c);
        counts.push_back(it == cell.end() ? -1 : it->second->count_infeasible);
    }
    if (std::adjacent_find(counts.begin(), counts.end(), std::not_equal_to<>()) == counts.end()) {
        return std::to_string(counts.front());
    }
    std::string out;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        out += (i ? "/" : "") + (counts[i] < 0 ? std::string("-") : std::to_string(counts[i]));
    }
    return out;
}

} // namespace

std::string render_table(const std::vector<AggregateRow>& rows, TableShape shape) {
    const Grid g = arrange(rows);
    std::ostringstream out;
    out << "| n | m | #if |";
    std::string rule = "|---:|---:|---:|";
    for (const auto& c : g.configs) {
        if (shape == TableShape::Combined) {
            out << ' ' << c << " #to | t_if [s] | t_f [s] | gap [%] |";
            rule += "---:|---:|---:|---:|";
        } else {
            out << ' ' << c << " #to_if | #to_f | t_if [s] | t_f [s] | gap [%] |";
            rule += "---:|---:|---:|---:|---:|";
        }
    }
    out << '\n' << rule << '\n';
    for (const auto& [nm, cell] : g.cells) {
        out << "| " << nm.first << " | " << nm.second << " | " << infeasible_cell(cell, g.configs) << " |";
        for (const auto& c : g.configs) {
            const auto it = cell.find(c);
            if (it == cell.end()) {
                out << (shape == TableShape::Combined ? " - | - | - | - |" : " - | - | - | - | - |");
                continue;
            }
            const AggregateRow& r = *it->second;
            if (shape == TableShape::Combined) {
                out << ' ' << r.count_timeout_infeasible + r.count_timeout_feasible << " |";
            } else {
                out << ' ' << r.count_timeout_infeasible << " | " << r.count_timeout_feasible << " |";
            }
            out << ' ' << time_cell(r.mean_runtime_infeasible) << " | " << time_cell(r.mean_runtime_feasible)
                << " | " << gap_cell(r.mean_gap) << " |";
        }
        out << '\n';
    }
    return out.str();
}

Comparison compare_models(const std::vector<ResultRow>& left, const std::vector<ResultRow>& right) {
    auto single_config = [](const std::vector<ResultRow>& rows, const char* side) {
        std::set<std::string> labels;
        for (const auto& r : rows) {
            labels.insert(config_label(r.model, r.toggles));
        }
        if (labels.size() != 1) {
            throw ValidationError(std::string(side) + " results must hold exactly one configuration, found " +
                                  std::to_string(labels.size()));
        }
        return *labels.begin();
    };
    Comparison cmp;
    cmp.left = single_config(left, "left");
    cmp.right = single_config(right, "right");
    const bool same_label = cmp.left == cmp.right;
    if (same_label) {
        cmp.right = config_label(right.front().model, right.front().toggles + "'");
    }

    std::map<std::string, const ResultRow*> by_left;
    std::map<std::string, const ResultRow*> by_right;
    for (const auto& r : left) {
        by_left[r.instance_id] = &r;
    }
    for (const auto& r : right) {
        by_right[r.instance_id] = &r;
    }
    std::vector<std::string> only;
    for (const auto& [id, r] : by_left) {
        if (!by_right.contains(id)) {
            only.push_back(id);
        }
    }
    for (const auto& [id, r] : by_right) {
        if (!by_left.contains(id)) {
            only.push_back(id);
        }
    }
    if (!only.empty()) {
        throw ValidationError("instance sets differ (" + std::to_string(only.size()) + " unmatched, e.g. " +
                              only.front() + ")");
    }
    for (const auto& [id, l] : by_left) {
        const ResultRow* r = by_right.at(id);
        if (l->status == SolveStatus::Optimal && r->status == SolveStatus::Optimal && l->objective &&
            r->objective && std::abs(*l->objective - *r->objective) > kObjectiveTolerance) {
            cmp.disagreements.push_back({id, *l->objective, *r->objective});
        }
    }

    std::vector<ResultRow> both = left;
    both.insert(both.end(), right.begin(), right.end());
    if (same_label) {
        for (std::size_t i = left.size(); i < both.size(); ++i) {
            both[i].toggles += "'";
        }
    }
    for (const auto& row : aggregate(both)) {
        (config_label(row.model, row.toggles) == cmp.left ? cmp.left_rows : cmp.right_rows).push_back(row);
    }

    auto bold_pair = [](const std::optional<double>& a, const std::optional<double>& b) {
        std::string sa = time_cell(a);
        std::string sb = time_cell(b);
        if (a && b && *a != *b) {
            (*a < *b ? sa : sb) = "**" + (*a < *b ? sa : sb) + "**";
        }
        return std::pair(sa, sb);
    };
    std::ostringstream out;
    out << "| n | m | #if | " << cmp.left << " #to | t_if [s] | t_f [s] | gap [%] | " << cmp.right
        << " #to | t_if [s] | t_f [s] | gap [%] |\n";
    out << "|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n";
    for (std::size_t i = 0; i < cmp.left_rows.size() && i < cmp.right_rows.size(); ++i) {
        const auto& a = cmp.left_rows[i];
        const auto& b = cmp.right_rows[i];
        const auto [tif_a, tif_b] = bold_pair(a.mean_runtime_infeasible, b.mean_runtime_infeasible);
        const auto [tf_a, tf_b] = bold_pair(a.mean_runtime_feasible, b.mean_runtime_feasible);
        const std::string infeasible = a.count_infeasible == b.count_infeasible
                                           ? std::to_string(a.count_infeasible)
                                           : std::to_string(a.count_infeasible) + "/" +
                                                 std::to_string(b.count_infeasible);
        out << "| " << a.n << " | " << a.m << " | " << infeasible << " | "
            << a.count_timeout_infeasible + a.count_timeout_feasible << " | " << tif_a << " | " << tf_a << " | "
            << gap_cell(a.mean_gap) << " | " << b.count_timeout_infeasible + b.count_timeout_feasible << " | "
            << tif_b << " | " << tf_b << " | " << gap_cell(b.mean_gap) << " |\n";
    }
    cmp.table = out.str();
    return cmp;
}

void write_runtime_boxplot(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << "group,value\n";
    for (const auto& r : rows) {
        if (r.objective && r.status != SolveStatus::Error) {
            out << cell_group(r) << ',' << format("%.6f", r.runtime_s) << '\n';
        }
    }
}

void write_energy_curve(std::ostream& out, const EnergyFunction& f, double max_delta, double step) {
    if (!(step > 0.0) || !(max_delta >= 0.0)) {
        throw ValidationError("energy curve needs step > 0 and max_delta >= 0");
    }
    out << "delta,energy\n";
    const auto count = static_cast<long long>(std::floor(max_delta / step + 1e-9));
    for (long long i = 0; i <= count; ++i) {
        const double delta = static_cast<double>(i) * step;
        out << format("%.15g", delta) << ',' << format("%.15g", f.evaluate(delta)) << '\n';
    }
}

} // namespace idle_energy::bench
