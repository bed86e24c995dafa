#include <idle_energy/bench.hpp>
#include <idle_energy/error.hpp>
#include <idle_energy/json_io.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

using namespace idle_energy;
using namespace idle_energy::bench;

namespace {

EnergyFunction two_mode() {
    return EnergyFunction::from_modes(std::vector<EnergyMode>{{"on", 40, 0, 0}, {"off", 0, 10, 100}});
}

ResultRow row(const std::string& id, const std::string& model, SolveStatus status, std::optional<double> obj,
              double runtime, std::optional<double> bound = std::nullopt, std::optional<double> gap = std::nullopt) {
    ResultRow r;
    r.instance_id = id;
    r.n = 4;
    r.m = 1;
    r.alpha = 1.0;
    r.gamma = 1.0;
    r.model = model;
    r.toggles = "none";
    r.status = status;
    r.objective = obj;
    r.bound = bound;
    r.gap = gap;
    r.runtime_s = runtime;
    return r;
}

// i1 solved, i2 infeasible, i3 only an incumbent, i4 never solved, i5 solved
// by the oracle but timed out without incumbent in the MILP.
std::vector<ResultRow> sample_rows() {
    return {
        row("i1", "relative", SolveStatus::Optimal, 100, 1.0, 100, 0.0),
        row("i2", "relative", SolveStatus::Infeasible, std::nullopt, 2.0),
        row("i3", "relative", SolveStatus::FeasibleTimeout, 200, 10.0, 150, 0.25),
        row("i4", "relative", SolveStatus::UnknownTimeout, std::nullopt, 10.0),
        row("i5", "relative", SolveStatus::UnknownTimeout, std::nullopt, 10.0),
        row("i1", "oracle", SolveStatus::Optimal, 100, 0.5, 100, 0.0),
        row("i2", "oracle", SolveStatus::Infeasible, std::nullopt, 0.5),
        row("i3", "oracle", SolveStatus::Optimal, 180, 0.5, 180, 0.0),
        row("i4", "oracle", SolveStatus::Infeasible, std::nullopt, 1.5),
        row("i5", "oracle", SolveStatus::Optimal, 50, 0.5, 50, 0.0),
    };
}

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("idle_energy_test_bench_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const AggregateRow& find(const std::vector<AggregateRow>& rows, const std::string& model, int n = 4, int m = 1) {
    for (const auto& r : rows) {
        if (r.model == model && r.n == n && r.m == m) {
            return r;
        }
    }
    throw std::runtime_error("no aggregate row for " + model);
}

ExperimentSpec small_spec(const std::string& name) {
    ExperimentSpec spec;
    spec.grid.n = {4, 5};
    spec.grid.m = {1, 2};
    spec.grid.alpha = {1.0};
    spec.grid.gamma = {1.0};
    spec.grid.p_min = 1;
    spec.grid.p_max = 12;
    spec.grid.count = 10;
    spec.grid.base_seed = 17;
    spec.energy = two_mode();
    spec.time_limit = 60;
    spec.workers = 4;
    spec.output_dir = fresh_dir(name);
    return spec;
}

} // namespace

TEST(Aggregate, HandCountedCell) {
    const auto agg = aggregate(sample_rows());
    ASSERT_EQ(agg.size(), 2u);
    const auto& rel = find(agg, "relative");
    EXPECT_EQ(rel.instances, 5);
    EXPECT_EQ(rel.count_infeasible, 1);
    EXPECT_EQ(rel.count_timeout_infeasible, 1);  // i4
    EXPECT_EQ(rel.count_timeout_feasible, 2);    // i3, i5
    EXPECT_DOUBLE_EQ(*rel.mean_runtime_infeasible, 6.0);  // i2, i4
    EXPECT_DOUBLE_EQ(*rel.mean_runtime_feasible, 7.0);    // i1, i3, i5
    EXPECT_DOUBLE_EQ(*rel.mean_gap, 0.125);               // i1, i3
    const auto& ora = find(agg, "oracle");
    EXPECT_EQ(ora.count_infeasible, 2);
    EXPECT_EQ(ora.count_timeout_infeasible + ora.count_timeout_feasible, 0);
    EXPECT_DOUBLE_EQ(*ora.mean_runtime_infeasible, 1.0);
    EXPECT_DOUBLE_EQ(*ora.mean_runtime_feasible, 0.5);
    EXPECT_DOUBLE_EQ(*ora.mean_gap, 0.0);
}

TEST(Aggregate, ErrorRowsExcluded) {
    auto rows = sample_rows();
    rows.push_back(row("i6", "relative", SolveStatus::Error, 999, 3.0, std::nullopt, 0.5));
    const auto& rel = find(aggregate(rows), "relative");
    EXPECT_EQ(rel.instances, 6);
    EXPECT_DOUBLE_EQ(*rel.mean_runtime_infeasible, 6.0);
    EXPECT_DOUBLE_EQ(*rel.mean_gap, 0.125);
}

TEST(Tables, ColumnShapes) {
    const auto agg = aggregate(sample_rows());
    const auto combined = render_table(agg, TableShape::Combined);
    const auto split = render_table(agg, TableShape::Split);
    EXPECT_NE(combined.find("| n | m | #if | oracle[none] #to | t_if [s] | t_f [s] | gap [%] |"), std::string::npos);
    EXPECT_NE(split.find("relative[none] #to_if | #to_f | t_if [s] | t_f [s] | gap [%] |"), std::string::npos);
    // #if differs between configurations, so both counts are shown.
    EXPECT_NE(combined.find("| 4 | 1 | 2/1 | 0 | 1.00 | 0.50 | 0.00 | 3 | 6.00 | 7.00 | 12.50 |"),
              std::string::npos)
        << combined;
    EXPECT_NE(split.find("| 1 | 2 | 6.00 | 7.00 | 12.50 |"), std::string::npos) << split;
}

TEST(ResultsCsv, RoundTripAndReaggregation) {
    auto rows = sample_rows();
    sort_rows(rows);
    std::ostringstream first;
    write_results_csv(first, rows);
    EXPECT_EQ(first.str().substr(0, first.str().find('\n')), kResultsHeader);
    std::istringstream in(first.str());
    const auto back = read_results_csv(in);
    std::ostringstream second;
    write_results_csv(second, back);
    EXPECT_EQ(first.str(), second.str());

    std::ostringstream a1;
    std::ostringstream a2;
    write_aggregate_csv(a1, aggregate(rows));
    write_aggregate_csv(a2, aggregate(back));
    EXPECT_EQ(a1.str(), a2.str());
    EXPECT_EQ(render_table(aggregate(rows), TableShape::Split), render_table(aggregate(back), TableShape::Split));
}

TEST(ResultsCsv, RejectsBadInput) {
    std::istringstream wrong_header("id,n\n");
    EXPECT_THROW(read_results_csv(wrong_header), ValidationError);
    std::istringstream short_row(std::string(kResultsHeader) + "\na,1,2\n");
    EXPECT_THROW(read_results_csv(short_row), ValidationError);
    std::istringstream bad_status(std::string(kResultsHeader) + "\na,4,1,1,1,relative,none,done,,,,1.0\n");
    EXPECT_THROW(read_results_csv(bad_status), ValidationError);
}

TEST(Compare, ErrorsAndSingleCell) {
    std::vector<ResultRow> left;
    std::vector<ResultRow> right;
    for (const auto& r : sample_rows()) {
        (r.model == "relative" ? left : right).push_back(r);
    }
    const auto cmp = compare_models(left, right);
    EXPECT_EQ(cmp.left, "relative[none]");
    EXPECT_EQ(cmp.right, "oracle[none]");
    EXPECT_TRUE(cmp.disagreements.empty());
    // Header, rule and one cell line.
    EXPECT_EQ(std::count(cmp.table.begin(), cmp.table.end(), '\n'), 3);
    // The oracle is faster on both means.
    EXPECT_NE(cmp.table.find("**0.50**"), std::string::npos) << cmp.table;
    EXPECT_NE(cmp.table.find("**1.00**"), std::string::npos) << cmp.table;

    auto missing = right;
    missing.pop_back();
    EXPECT_THROW(compare_models(left, missing), ValidationError);
    auto mixed = left;
    mixed.back().toggles = "sym";
    EXPECT_THROW(compare_models(mixed, right), ValidationError);

    auto wrong = right;
    wrong[0].objective = 101;
    const auto d = compare_models(left, wrong);
    ASSERT_EQ(d.disagreements.size(), 1u);
    EXPECT_EQ(d.disagreements[0].instance_id, "i1");

    const auto self = compare_models(left, left);
    EXPECT_EQ(self.right, "relative[none']");
    EXPECT_EQ(self.left_rows.size(), 1u);
    EXPECT_EQ(self.right_rows.size(), 1u);
}

TEST(Plot, RuntimeGroups) {
    std::vector<ResultRow> rows;
    for (const std::string model : {"relative", "position"}) {
        for (int n : {4, 5, 6}) {
            auto r = row("x" + std::to_string(n), model, SolveStatus::Optimal, 10, 1.0);
            r.n = n;
            rows.push_back(r);
            r.instance_id += "b";
            rows.push_back(r);
        }
    }
    rows.push_back(row("none", "relative", SolveStatus::UnknownTimeout, std::nullopt, 5.0));
    std::ostringstream out;
    write_runtime_boxplot(out, rows);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "group,value");
    std::set<std::string> groups;
    int lines = 0;
    while (std::getline(in, line)) {
        groups.insert(line.substr(0, line.find(',')));
        ++lines;
    }
    EXPECT_EQ(groups.size(), 6u);
    EXPECT_EQ(lines, 12);
    EXPECT_TRUE(groups.contains("relative[none]/n5_m1"));

    std::ostringstream empty;
    write_runtime_boxplot(empty, {});
    EXPECT_EQ(empty.str(), "group,value\n");
}

TEST(Plot, EnergyCurve) {
    const auto f = two_mode();
    std::ostringstream out;
    write_energy_curve(out, f, 20.0);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "delta,energy");
    int delta = 0;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        EXPECT_EQ(std::stod(line.substr(0, comma)), delta);
        EXPECT_EQ(std::stod(line.substr(comma + 1)), f.evaluate(delta));
        ++delta;
    }
    EXPECT_EQ(delta, 21);
    EXPECT_THROW(write_energy_curve(out, f, 10, 0), ValidationError);
}

TEST(SpecJson, RoundTripAndValidation) {
    auto spec = small_spec("spec");
    spec.runs = {RunConfig{"relative", true, true, false}, RunConfig{"oracle"}};
    spec.c_onoff = 80;
    const auto j = to_json(spec);
    const auto back = experiment_spec_from_json(j);
    EXPECT_EQ(dump(to_json(back)), dump(j));
    EXPECT_EQ(back.runs[0].toggles(), "sym+fill");
    EXPECT_EQ(back.runs[1].toggles(), "none");

    auto no_runs = j;
    no_runs["runs"] = Json::array();
    EXPECT_THROW(experiment_spec_from_json(no_runs), ValidationError);
    auto zero_limit = j;
    zero_limit["time_limit"] = 0;
    EXPECT_THROW(experiment_spec_from_json(zero_limit), ValidationError);
    auto unknown = j;
    unknown["runs"][0]["model"] = "heuristic";
    EXPECT_THROW(experiment_spec_from_json(unknown), ValidationError);
}

TEST(RunExperiment, OracleNeverTimesOut) {
    auto spec = small_spec("oracle");
    spec.runs = {RunConfig{"oracle"}};
    const auto out = run_experiment(spec);
    EXPECT_EQ(out.rows.size(), 40u);
    const auto agg = aggregate(out.rows);
    ASSERT_EQ(agg.size(), 4u);
    for (const auto& a : agg) {
        EXPECT_EQ(a.instances, 10);
        EXPECT_EQ(a.count_timeout_infeasible + a.count_timeout_feasible, 0);
        if (a.mean_gap) {
            EXPECT_EQ(*a.mean_gap, 0.0);
        }
    }
    for (const char* f : {"results.csv", "aggregate.csv", "tables.md", "spec.json"}) {
        EXPECT_TRUE(std::filesystem::exists(spec.output_dir / f)) << f;
    }
    EXPECT_TRUE(std::filesystem::exists(spec.output_dir / "instances" / (out.rows[0].instance_id + ".json")));

    // Aggregation is a pure function of the saved CSV.
    std::ostringstream again;
    write_aggregate_csv(again, aggregate(read_results_csv(out.results_csv)));
    EXPECT_EQ(again.str(), slurp(spec.output_dir / "aggregate.csv"));

    // Stored solutions re-evaluate to the reported objective.
    for (const auto& r : out.rows) {
        if (r.status != SolveStatus::Optimal) {
            continue;
        }
        const auto inst = instance_from_json(read_json_file(spec.output_dir / "instances" / (r.instance_id + ".json")));
        const auto sol = solution_from_json(
            read_json_file(spec.output_dir / "solutions" / (r.instance_id + "__oracle_none.json")));
        EXPECT_NEAR(evaluate(inst, sol).schedule_energy(), *r.objective, 1e-6);
    }
}

TEST(RunExperiment, DeterministicApartFromRuntime) {
    auto a = small_spec("det_a");
    a.runs = {RunConfig{"oracle"}};
    a.grid.count = 3;
    auto b = a;
    b.output_dir = fresh_dir("det_b");
    b.workers = 1;
    const auto ra = run_experiment(a);
    const auto rb = run_experiment(b);
    ASSERT_EQ(ra.rows.size(), rb.rows.size());
    for (std::size_t i = 0; i < ra.rows.size(); ++i) {
        EXPECT_EQ(ra.rows[i].instance_id, rb.rows[i].instance_id);
        EXPECT_EQ(ra.rows[i].status, rb.rows[i].status);
        EXPECT_EQ(ra.rows[i].objective, rb.rows[i].objective);
    }
}

TEST(RunExperiment, SolverFailureIsPerRow) {
    auto spec = small_spec("broken");
    spec.grid.n = {4};
    spec.grid.m = {1};
    spec.grid.count = 2;
    spec.runs = {RunConfig{"relative"}, RunConfig{"oracle"}};
    spec.solver_cmd = "exit 1";
    const auto out = run_experiment(spec);
    ASSERT_EQ(out.rows.size(), 4u);
    for (const auto& r : out.rows) {
        EXPECT_EQ(r.status == SolveStatus::Error, r.model == "relative");
    }
}

TEST(RunExperiment, ToggleNeutralityAndTightWindows) {
    if (!find_cbc()) {
        GTEST_SKIP() << "cbc not available";
    }
    auto spec = small_spec("cbc");
    spec.grid.n = {4, 5};
    spec.grid.m = {1};
    spec.grid.count = 4;
    spec.grid.alpha = {0.2};
    spec.grid.gamma = {0.1};
    spec.grid.beta = 0.0;
    spec.runs = {RunConfig{"relative"}, RunConfig{"relative", true, true, true}, RunConfig{"position", true},
                 RunConfig{"oracle"}};
    const auto out = run_experiment(spec);
    std::map<std::string, std::map<std::string, const ResultRow*>> by_instance;
    for (const auto& r : out.rows) {
        ASSERT_NE(r.status, SolveStatus::Error) << r.instance_id << " " << r.model;
        by_instance[r.instance_id][r.model + "/" + r.toggles] = &r;
    }
    for (const auto& [id, cfgs] : by_instance) {
        const ResultRow* oracle = cfgs.at("oracle/none");
        for (const auto& [label, r] : cfgs) {
            EXPECT_EQ(r->status, oracle->status) << id << " " << label;
            if (oracle->objective && r->objective) {
                EXPECT_NEAR(*r->objective, *oracle->objective, 1e-6) << id << " " << label;
            }
        }
    }
    const auto agg = aggregate(out.rows);
    int infeasible = 0;
    for (const auto& a : agg) {
        EXPECT_EQ(a.count_infeasible, find(agg, "oracle", a.n, a.m).count_infeasible);
        infeasible += a.model == "oracle" ? a.count_infeasible : 0;
    }
    EXPECT_GT(infeasible, 0);
}
