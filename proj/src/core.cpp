#include <idle_energy/core.hpp>
#include <idle_energy/error.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

namespace idle_energy {

std::int64_t Instance::horizon() const {
    std::int64_t h = 0;
    for (const auto& job : jobs) {
        h = std::max(h, job.d);
    }
    return h;
}

const Job& Instance::job(int id) const {
    // ids are contiguous, so the common case is a direct hit.
    if (id >= 1 && static_cast<std::size_t>(id) <= jobs.size() && jobs[id - 1].id == id) {
        return jobs[id - 1];
    }
    for (const auto& job : jobs) {
        if (job.id == id) {
            return job;
        }
    }
    throw StructuralError("no job with id " + std::to_string(id));
}

bool has_errors(const std::vector<Violation>& violations) {
    return std::any_of(violations.begin(), violations.end(),
                       [](const Violation& v) { return v.severity == Violation::Severity::Error; });
}

std::vector<Violation> validate_instance(const Instance& inst) {
    std::vector<Violation> out;
    auto error = [&](int job, std::string msg) {
        out.push_back({Violation::Severity::Error, job, std::move(msg)});
    };
    if (inst.machines < 1) {
        error(0, "machine count must be positive");
    }
    if (!(inst.c_onoff > 0.0) || !std::isfinite(inst.c_onoff)) {
        error(0, "c_onoff must be positive");
    }
    std::set<int> ids;
    for (const auto& job : inst.jobs) {
        if (!ids.insert(job.id).second) {
            error(job.id, "duplicate job id");
        }
        if (job.p < 0 || job.r < 0 || job.d < 0) {
            error(job.id, "negative time parameter");
        }
        if (job.r + job.p > job.d) {
            error(job.id, "window too small: r + p > d");
        }
        if (job.e_proc && (*job.e_proc < 0.0 || !std::isfinite(*job.e_proc))) {
            error(job.id, "negative processing energy");
        }
        if (job.p == 0) {
            out.push_back({Violation::Severity::Warning, job.id, "zero processing time"});
        }
    }
    if (!ids.empty() && (*ids.begin() != 1 || *ids.rbegin() != static_cast<int>(ids.size()) ||
                         ids.size() != inst.jobs.size())) {
        error(0, "job ids must be unique and contiguous from 1");
    }
    return out;
}

std::vector<std::vector<int>> machine_sequences(const Instance& inst, const Solution& sol) {
    std::vector<std::vector<int>> seq(static_cast<std::size_t>(std::max(inst.machines, 0)));
    for (const auto& job : inst.jobs) {
        seq[sol.assignment[job.id - 1]].push_back(job.id);
    }
    for (auto& s : seq) {
        std::sort(s.begin(), s.end(), [&](int a, int b) {
            const double sa = sol.start[a - 1];
            const double sb = sol.start[b - 1];
            return std::tuple(sa, sa + inst.job(a).p, a) < std::tuple(sb, sb + inst.job(b).p, b);
        });
    }
    return seq;
}

std::vector<Violation> check_feasibility(const Instance& inst, const Solution& sol) {
    const std::size_t n = inst.jobs.size();
    if (sol.assignment.size() != n || sol.start.size() != n) {
        throw StructuralError("solution vectors have length " +
                              std::to_string(sol.assignment.size()) + "/" +
                              std::to_string(sol.start.size()) + ", instance has " +
                              std::to_string(n) + " jobs");
    }
    std::vector<Violation> out;
    for (const auto& job : inst.jobs) {
        if (job.id < 1 || static_cast<std::size_t>(job.id) > n) {
            throw StructuralError("job ids must be contiguous from 1");
        }
        const int k = sol.assignment[job.id - 1];
        if (k < 0 || k >= inst.machines) {
            throw StructuralError("job " + std::to_string(job.id) + " assigned to machine " +
                                  std::to_string(k) + " out of range");
        }
        const double s = sol.start[job.id - 1];
        if (!std::isfinite(s)) {
            out.push_back({Violation::Severity::Error, job.id, "non-finite start time"});
            continue;
        }
        if (s < static_cast<double>(job.r) - kFeasibilityTolerance) {
            out.push_back({Violation::Severity::Error, job.id, "starts before its release time"});
        }
        if (s + static_cast<double>(job.p) > static_cast<double>(job.d) + kFeasibilityTolerance) {
            out.push_back({Violation::Severity::Error, job.id, "completes after its deadline"});
        }
    }
    for (const auto& seq : machine_sequences(inst, sol)) {
        for (std::size_t i = 1; i < seq.size(); ++i) {
            const int prev = seq[i - 1];
            const int cur = seq[i];
            const double prev_end = sol.start[prev - 1] + static_cast<double>(inst.job(prev).p);
            if (sol.start[cur - 1] < prev_end - kFeasibilityTolerance) {
                out.push_back({Violation::Severity::Error, cur,
                               "overlaps job " + std::to_string(prev) + " on machine " +
                                   std::to_string(sol.assignment[cur - 1])});
            }
        }
    }
    return out;
}

EvaluatedSolution evaluate(const Instance& inst, const Solution& sol) {
    const auto violations = check_feasibility(inst, sol);
    if (has_errors(violations)) {
        throw FeasibilityError("infeasible solution: job " + std::to_string(violations.front().job) +
                               " " + violations.front().message);
    }
    EvaluatedSolution out;
    out.solution = sol;
    out.sequences = machine_sequences(inst, sol);
    out.pred.assign(inst.jobs.size(), 0);
    for (const auto& seq : out.sequences) {
        if (seq.empty()) {
            continue;
        }
        out.onoff_energy += inst.c_onoff;
        for (std::size_t i = 1; i < seq.size(); ++i) {
            const int prev = seq[i - 1];
            const int cur = seq[i];
            out.pred[cur - 1] = prev;
            const double gap =
                sol.start[cur - 1] - sol.start[prev - 1] - static_cast<double>(inst.job(prev).p);
            out.idle_energy += inst.energy.evaluate(std::max(gap, 0.0));
        }
    }
    for (const auto& job : inst.jobs) {
        out.processing_energy += job.e_proc.value_or(0.0);
    }
    out.total = out.processing_energy + out.idle_energy + out.onoff_energy;
    return out;
}

} // namespace idle_energy
