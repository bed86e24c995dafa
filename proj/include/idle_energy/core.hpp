#pragma once

#include <idle_energy/energy.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace idle_energy {

/// Slack used when checking real-valued start times against integer data.
inline constexpr double kFeasibilityTolerance = 1e-6;

struct Job {
    int id = 0;           ///< 1..n
    std::int64_t p = 0;   ///< processing time
    std::int64_t r = 0;   ///< release time
    std::int64_t d = 0;   ///< deadline
    std::optional<double> e_proc;

    bool operator==(const Job&) const = default;
};

struct Instance {
    std::vector<Job> jobs;
    int machines = 1;
    double c_onoff = 0.0;
    EnergyFunction energy = EnergyFunction::on_only(0.0);
    /// Free-form tag, e.g. the generator cell an instance belongs to.
    std::string label;
    /// Machine drawn for each job at generation time, kept only for debugging.
    std::vector<int> generation_assignment;

    std::size_t size() const { return jobs.size(); }
    /// max d_j, or 0 for an empty instance.
    std::int64_t horizon() const;
    /// Job with the given 1-based id.
    const Job& job(int id) const;
};

/// A(j) and S(j), both indexed by job id - 1. Machines are 0-based.
struct Solution {
    std::vector<int> assignment;
    std::vector<double> start;

    bool operator==(const Solution&) const = default;
};

struct Violation {
    enum class Severity { Warning, Error };
    Severity severity = Severity::Error;
    int job = 0;  ///< 0 when not tied to a job
    std::string message;
};

bool has_errors(const std::vector<Violation>& violations);

/// Instance diagnostics; jobs with p = 0 are reported as warnings.
std::vector<Violation> validate_instance(const Instance& inst);

/// Window containment and per-machine non-overlap. Throws StructuralError
/// when the solution vectors do not match the instance.
std::vector<Violation> check_feasibility(const Instance& inst, const Solution& sol);

struct EvaluatedSolution {
    Solution solution;
    double idle_energy = 0.0;
    double onoff_energy = 0.0;
    double processing_energy = 0.0;
    double total = 0.0;
    /// Job ids per machine in processing order.
    std::vector<std::vector<int>> sequences;
    /// Immediate predecessor per job id - 1; 0 marks the first job on a machine.
    std::vector<int> pred;

    /// Idle plus on/off energy, the quantity the optimizers minimize.
    double schedule_energy() const { return idle_energy + onoff_energy; }
};

/// Per-machine job order: by start, then completion, then id.
std::vector<std::vector<int>> machine_sequences(const Instance& inst, const Solution& sol);

/// Total energy of a feasible solution. Throws FeasibilityError otherwise.
EvaluatedSolution evaluate(const Instance& inst, const Solution& sol);

} // namespace idle_energy
