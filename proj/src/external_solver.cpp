#include <idle_energy/error.hpp>
#include <idle_energy/lp_format.hpp>
#include <idle_energy/milp.hpp>
#include <idle_energy/solve.hpp>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

namespace idle_energy {
namespace {

using Clock = std::chrono::steady_clock;

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    return out + "'";
}

std::string replace_all(std::string text, const std::string& key, const std::string& value) {
    for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
        text.replace(pos, key.size(), value);
    }
    return text;
}

std::string unique_stem() {
    static std::atomic<unsigned> counter{0};
    static const unsigned salt = std::random_device{}();
    std::ostringstream out;
    out << "idle_energy_" << ::getpid() << '_' << std::hex << salt << '_' << counter++;
    return out.str();
}

struct ProcessOutcome {
    int exit_code = -1;
    bool killed = false;
};

// Runs `command` through /bin/sh in its own process group, killing the group
// once `limit_seconds` of wall clock have passed.
ProcessOutcome run_shell(const std::string& command, double limit_seconds) {
    const pid_t pid = ::fork();
    if (pid < 0) {
        throw SolverError(std::string("fork failed: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::setpgid(pid, pid);
    const auto deadline = Clock::now() + std::chrono::duration<double>(limit_seconds);
    ProcessOutcome outcome;
    int status = 0;
    while (true) {
        const pid_t done = ::waitpid(pid, &status, WNOHANG);
        if (done == pid) {
            break;
        }
        if (done < 0 && errno != EINTR) {
            throw SolverError(std::string("waitpid failed: ") + std::strerror(errno));
        }
        if (Clock::now() >= deadline) {
            ::kill(-pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            outcome.killed = true;
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    if (WIFEXITED(status)) {
        outcome.exit_code = WEXITSTATUS(status);
    }
    return outcome;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

const char* to_string(SolveStatus status) {
    switch (status) {
    case SolveStatus::Optimal:
        return "optimal";
    case SolveStatus::FeasibleTimeout:
        return "feasible_timeout";
    case SolveStatus::Infeasible:
        return "infeasible";
    case SolveStatus::UnknownTimeout:
        return "unknown_timeout";
    case SolveStatus::Error:
        return "error";
    }
    return "error";
}

SolveStatus solve_status_from_string(const std::string& text) {
    for (auto s : {SolveStatus::Optimal, SolveStatus::FeasibleTimeout, SolveStatus::Infeasible,
                   SolveStatus::UnknownTimeout, SolveStatus::Error}) {
        if (text == to_string(s)) {
            return s;
        }
    }
    throw ValidationError("unknown solve status '" + text + "'");
}

void complete_gap(SolveResult& result) {
    if (result.status == SolveStatus::Optimal && result.objective && !result.bound) {
        result.bound = result.objective;
    }
    if (!result.gap && result.objective && result.bound) {
        if (*result.objective > 0.0) {
            result.gap = std::max(0.0, (*result.objective - *result.bound) / *result.objective);
        } else if (std::abs(*result.objective - *result.bound) <= kObjectiveTolerance) {
            result.gap = 0.0;
        }
    }
}

std::optional<std::filesystem::path> find_cbc() {
    if (const char* env = std::getenv("IDLE_ENERGY_CBC"); env && *env) {
        if (::access(env, X_OK) == 0) {
            return std::filesystem::path(env);
        }
    }
#ifdef IDLE_ENERGY_CBC_PATH
    if (::access(IDLE_ENERGY_CBC_PATH, X_OK) == 0) {
        return std::filesystem::path(IDLE_ENERGY_CBC_PATH);
    }
#endif
    if (const char* path = std::getenv("PATH")) {
        std::stringstream dirs(path);
        std::string dir;
        while (std::getline(dirs, dir, ':')) {
            const auto candidate = std::filesystem::path(dir.empty() ? "." : dir) / "cbc";
            if (::access(candidate.c_str(), X_OK) == 0) {
                return candidate;
            }
        }
    }
    return std::nullopt;
}

std::string cbc_command(const std::filesystem::path& cbc) {
    return shell_quote(cbc.string()) + " {model} sec {time_limit} threads 1 solve solu {solution}";
}

SolveResult solve_external(const milp::ModelIR& model, const SolverCommand& cmd, double time_limit) {
    if (cmd.command.empty()) {
        throw SolverError("empty solver command");
    }
    if (!(time_limit > 0.0)) {
        throw ValidationError("time limit must be positive");
    }
    const auto dir = cmd.work_dir.empty() ? std::filesystem::temp_directory_path() : cmd.work_dir;
    std::filesystem::create_directories(dir);
    const std::string stem = unique_stem();
    const auto lp_path = dir / (stem + ".lp");
    const auto sol_path = dir / (stem + ".sol");
    const auto log_path = dir / (stem + ".log");

    milp::emit_lp(model, lp_path);
    std::ostringstream limit;
    limit << time_limit;
    std::string shell = replace_all(cmd.command, "{model}", shell_quote(lp_path.string()));
    shell = replace_all(shell, "{solution}", shell_quote(sol_path.string()));
    shell = replace_all(shell, "{time_limit}", limit.str());
    shell = "(" + shell + ") > " + shell_quote(log_path.string()) + " 2>&1";

    SolveResult result;
    const auto t0 = Clock::now();
    const ProcessOutcome run = run_shell(shell, time_limit + cmd.grace_seconds);
    result.runtime = std::chrono::duration<double>(Clock::now() - t0).count();

    const bool have_solution = std::filesystem::exists(sol_path);
    const std::string log = std::filesystem::exists(log_path) ? read_text(log_path) : std::string();
    auto cleanup = [&] {
        if (!cmd.keep_files) {
            std::error_code ec;
            std::filesystem::remove(lp_path, ec);
            std::filesystem::remove(sol_path, ec);
            std::filesystem::remove(log_path, ec);
        }
    };

    if (!have_solution) {
        cleanup();
        if (run.killed) {
            result.status = SolveStatus::UnknownTimeout;
            result.message = "solver killed after the wall-clock limit";
            return result;
        }
        throw SolverError("solver exited with code " + std::to_string(run.exit_code) +
                          " without a solution file; log:\n" + log.substr(0, 2000));
    }

    milp::SolverOutput out;
    try {
        out = milp::parse_solution_file(sol_path);
    } catch (...) {
        cleanup();
        throw;
    }
    cleanup();

    switch (out.status) {
    case milp::SolutionStatus::Optimal:
        result.status = SolveStatus::Optimal;
        break;
    case milp::SolutionStatus::Feasible:
        // An incumbent without an optimality proof.
        result.status = SolveStatus::FeasibleTimeout;
        break;
    case milp::SolutionStatus::Infeasible:
        result.status = SolveStatus::Infeasible;
        break;
    case milp::SolutionStatus::NoSolution:
        result.status = SolveStatus::UnknownTimeout;
        break;
    case milp::SolutionStatus::Unbounded:
        result.status = SolveStatus::Error;
        result.message = "solver reports the model unbounded";
        break;
    case milp::SolutionStatus::Unknown:
        if (run.killed || out.stopped) {
            result.status = SolveStatus::UnknownTimeout;
        } else {
            throw SolverError("unrecognized solver status in " + sol_path.string());
        }
        break;
    }

    if (result.status == SolveStatus::Optimal || result.status == SolveStatus::FeasibleTimeout) {
        std::map<std::string, double> by_name;
        for (const auto& v : model.variables()) {
            const auto it = out.values.find(milp::sanitize_lp_name(v.name));
            if (it != out.values.end()) {
                by_name[v.name] = it->second;
            }
        }
        result.values = model.values_from(by_name);
        // Recomputed from the values so both dialects agree.
        result.objective = model.objective_value(result.values);
        result.bound = out.bound ? out.bound : milp::parse_log_bound(log);
        if (result.status == SolveStatus::FeasibleTimeout && result.bound &&
            *result.bound > *result.objective) {
            result.bound = result.objective;
        }
    }
    complete_gap(result);
    return result;
}

SolveResult solve_external(const Instance& inst, const milp::ModelIR& model, const SolverCommand& cmd,
                           double time_limit) {
    SolveResult result = solve_external(model, cmd, time_limit);
    if (result.values.empty()) {
        return result;
    }
    Solution sol = milp::decode_solution(model, inst, result.values);
    const auto violations = check_feasibility(inst, sol);
    if (has_errors(violations)) {
        result.status = SolveStatus::Error;
        result.message = "decoded schedule is infeasible: " + violations.front().message;
        return result;
    }
    result.solution = std::move(sol);
    return result;
}

} // namespace idle_energy
