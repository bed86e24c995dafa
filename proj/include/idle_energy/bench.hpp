#pragma once

#include <idle_energy/generator.hpp>
#include <idle_energy/json_io.hpp>
#include <idle_energy/solve.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace idle_energy::bench {

/// One solver configuration applied to every suite instance.
struct RunConfig {
    /// "relative", "position" or "oracle".
    std::string model = "relative";
    bool symmetry = false;
    bool horizon_fill = false;
    bool tight_big_m = false;

    /// Toggle label written to the results CSV, e.g. "sym+fill" or "none".
    std::string toggles() const;
};

struct ExperimentSpec {
    SuiteGrid grid;
    EnergyFunction energy = EnergyFunction::on_only(1.0);
    std::optional<double> c_onoff;
    std::vector<RunConfig> runs;
    double time_limit = 300.0;
    int workers = 1;
    /// Solver template; empty means CBC found by find_cbc().
    std::string solver_cmd;
    std::filesystem::path output_dir = "bench_out";
    OracleConfig oracle;
};

/// Reads and checks an experiment spec: at least one run, positive time limit, known models.
ExperimentSpec experiment_spec_from_json(const Json& j);
Json to_json(const ExperimentSpec& spec);

struct ResultRow {
    std::string instance_id;
    int n = 0;
    int m = 0;
    double alpha = 0.0;
    double gamma = 0.0;
    std::string model;
    std::string toggles;
    SolveStatus status = SolveStatus::Error;
    std::optional<double> objective;
    std::optional<double> bound;
    std::optional<double> gap;
    double runtime_s = 0.0;
};

inline constexpr const char* kResultsHeader =
    "instance_id,n,m,alpha,gamma,model,toggles,status,objective,bound,gap,runtime_s";

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(std::istream& in);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

/// Rows sorted by (instance_id, model, toggles).
void sort_rows(std::vector<ResultRow>& rows);

struct ExperimentOutput {
    std::vector<ResultRow> rows;
    std::filesystem::path results_csv;
};

/// Generates the suite, runs every configuration on every instance (up to
/// `workers` at once) and writes results.csv, aggregate.csv, tables.md, and
/// instances/ and solutions/ directories. Per-row failures become status
/// "error" rows. Each solution is re-evaluated against the reported objective.
ExperimentOutput run_experiment(const ExperimentSpec& spec);

/// One (configuration, n, m) cell. An instance counts as feasible when any
/// row found a schedule for it, and as infeasible otherwise.
struct AggregateRow {
    std::string model;
    std::string toggles;
    int n = 0;
    int m = 0;
    int instances = 0;
    int count_infeasible = 0;          ///< #if: proven infeasible by this configuration
    int count_timeout_infeasible = 0;  ///< #to_if: timeouts on instances nobody solved
    int count_timeout_feasible = 0;    ///< #to_f: timeouts on feasible instances
    std::optional<double> mean_runtime_infeasible;  ///< t_if
    std::optional<double> mean_runtime_feasible;    ///< t_f
    std::optional<double> mean_gap;                 ///< over rows with an incumbent, as a fraction
};

std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows);

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

enum class TableShape {
    /// n, m, #if, then per configuration #to, t_if, t_f, gap.
    Combined,
    /// n, m, #if, then per configuration #to_if, #to_f, t_if, t_f, gap.
    Split,
};

/// Markdown table with one line per (n, m) and a column group per configuration.
std::string render_table(const std::vector<AggregateRow>& rows, TableShape shape);

struct Disagreement {
    std::string instance_id;
    double left = 0.0;
    double right = 0.0;
};

struct Comparison {
    std::string left;   ///< configuration label
    std::string right;
    std::vector<AggregateRow> left_rows;
    std::vector<AggregateRow> right_rows;
    std::vector<Disagreement> disagreements;
    /// Markdown with the faster mean time of each pair in bold.
    std::string table;
};

/// Side-by-side cells of two single-configuration result sets. Throws
/// ValidationError when the instance sets differ or a side mixes configurations.
Comparison compare_models(const std::vector<ResultRow>& left, const std::vector<ResultRow>& right);

/// Long-format `group,value` rows of solve times for rows with an incumbent,
/// grouped by configuration and cell.
void write_runtime_boxplot(std::ostream& out, const std::vector<ResultRow>& rows);

/// `delta,energy` rows of f on {0, step, ..., max_delta}.
void write_energy_curve(std::ostream& out, const EnergyFunction& f, double max_delta, double step = 1.0);

} // namespace idle_energy::bench
