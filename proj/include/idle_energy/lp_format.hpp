#pragma once

#include <idle_energy/model_ir.hpp>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

namespace idle_energy::milp {

/// Writes CPLEX-LP text (Minimize / Subject To / Bounds / Binaries / End) in
/// declaration order. Names are sanitized; a collision after sanitizing
/// throws ModelError.
void write_lp(const ModelIR& model, std::ostream& out);
void emit_lp(const ModelIR& model, const std::filesystem::path& path);

/// LP-legal spelling of a name.
std::string sanitize_lp_name(const std::string& name);

enum class SolutionStatus { Optimal, Feasible, Infeasible, Unbounded, NoSolution, Unknown };

/// What a solver run left behind, independent of the solver dialect.
struct SolverOutput {
    SolutionStatus status = SolutionStatus::Unknown;
    /// The run stopped on its time limit.
    bool stopped = false;
    std::optional<double> objective;
    std::optional<double> bound;
    std::map<std::string, double> values;
};

/// Parses a solution file, auto-detecting the dialect:
///  - CBC "solu" files: a status line such as "Optimal - objective value 3"
///    followed by "index name value reduced-cost" rows;
///  - key/value files: "status: optimal|feasible|infeasible|unbounded|unknown",
///    optional "objective: x", "bound: y", "stopped: true", then "name value" rows.
SolverOutput parse_solution_file(const std::filesystem::path& path);
SolverOutput parse_solution_text(const std::string& text);

/// Picks up a best-bound line ("Lower bound: x") from a solver log, if any.
std::optional<double> parse_log_bound(const std::string& log);

} // namespace idle_energy::milp
