#pragma once

#include <idle_energy/core.hpp>
#include <idle_energy/model_ir.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace idle_energy {

enum class SolveStatus { Optimal, FeasibleTimeout, Infeasible, UnknownTimeout, Error };

/// "optimal", "feasible_timeout", "infeasible", "unknown_timeout", "error".
const char* to_string(SolveStatus status);
/// Inverse of to_string; throws ValidationError on anything else.
SolveStatus solve_status_from_string(const std::string& text);

/// Absolute tolerance on objective values.
inline constexpr double kObjectiveTolerance = 1e-6;

struct SolveResult {
    SolveStatus status = SolveStatus::Error;
    std::optional<double> objective;
    std::optional<double> bound;
    /// (objective - bound) / objective when both are known and objective > 0.
    std::optional<double> gap;
    double runtime = 0.0;
    std::optional<Solution> solution;
    /// Raw variable values in model order, when a solver returned them.
    std::vector<double> values;
    std::string message;

    bool has_incumbent() const { return objective.has_value(); }
};

/// Fills in `gap` from objective and bound if the solver did not report one;
/// an optimal result without a bound gets bound = objective.
void complete_gap(SolveResult& result);

/// External solver invocation. `command` is a shell template with the
/// placeholders {model}, {solution} and {time_limit}; the solver's stdout and
/// stderr are captured to a log next to the model file.
struct SolverCommand {
    std::string command;
    /// Where LP, solution and log files go; defaults to the system temp dir.
    std::filesystem::path work_dir;
    bool keep_files = false;
    /// Extra wall-clock allowance before the process group is killed.
    double grace_seconds = 10.0;
};

/// CBC binary from $IDLE_ENERGY_CBC, the build-time location, or PATH.
std::optional<std::filesystem::path> find_cbc();
/// Template driving CBC: read the LP file, honour the time limit, write a solution file.
std::string cbc_command(const std::filesystem::path& cbc);

/// Writes `model` as LP, runs the solver and parses its solution file
/// (either dialect). Values come back in model order. Throws SolverError
/// when the process cannot be launched or its output cannot be parsed.
SolveResult solve_external(const milp::ModelIR& model, const SolverCommand& cmd, double time_limit);

/// As above, then maps the values back to a Solution and re-checks it
/// against the instance. A decoded schedule that fails the check turns the
/// result into an error.
SolveResult solve_external(const Instance& inst, const milp::ModelIR& model, const SolverCommand& cmd,
                           double time_limit);

struct TimingResult {
    double idle_energy = 0.0;
    std::vector<double> start;  ///< per sequence position
};

/// Minimum idle energy of a fixed machine sequence over start times on the
/// grid {k / grid}. Gaps before the first and after the last job are free.
/// Ties go to the earliest start of the last job, then of its predecessors.
/// Returns nullopt when no timing respects the windows.
std::optional<TimingResult> dp_timing(const Instance& inst, const std::vector<int>& sequence,
                                      int grid = 1);

struct OracleConfig {
    std::size_t max_jobs = 8;
    /// Grid subdivisions per time unit: 1 is the integer grid, 2 the half grid.
    int time_grid = 1;
    /// Treat machines as interchangeable (partitions instead of labelled assignments).
    bool symmetry_reduction = true;
};

/// Exact optimum of idle energy plus C_onoff per used machine. Throws
/// SizeError beyond cfg.max_jobs.
SolveResult brute_force(const Instance& inst, const OracleConfig& cfg = {});

} // namespace idle_energy
