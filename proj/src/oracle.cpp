#include <idle_energy/error.hpp>
#include <idle_energy/solve.hpp>

#include <chrono>
#include <cmath>
#include <limits>

// Exact timing and assignment by enumeration on a time grid.
//
// Why the integer grid is exact for integer data with integer breakpoints:
// fix the assignment and the machine sequences. The remaining problem is to
// choose starts s_1 < ... in the order given, within integer windows, with
// each consecutive gap g_i = s_{i+1} - s_i - p_i >= 0 charged f(g_i). On the
// closure of each piece f is affine with integer breakpoints, so fixing which
// piece every gap falls in leaves a linear program whose constraint matrix
// (difference constraints) is totally unimodular and whose bounds are
// integer. Each such LP has an integer optimal vertex, and the overall
// minimum is the minimum over piece choices. Left-closed pieces matter only
// at a breakpoint, which is itself integer. Hence restricting starts to
// integers loses nothing; the test suite cross-checks this against the half
// grid.

namespace idle_energy {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieTolerance = 1e-9;

// Start-time window of one job in grid units.
struct Window {
    std::int64_t lo = 0;
    std::int64_t hi = -1;
    std::int64_t p = 0;
    bool empty() const { return hi < lo; }
    std::size_t size() const { return empty() ? 0 : static_cast<std::size_t>(hi - lo + 1); }
};

class Timing {
public:
    Timing(const Instance& inst, int grid) : grid_(grid) {
        if (grid < 1) {
            throw ValidationError("time grid must be at least 1");
        }
        for (const auto& job : inst.jobs) {
            windows_.push_back({job.r * grid, (job.d - job.p) * grid, job.p * grid});
        }
        const std::int64_t span = std::max<std::int64_t>(inst.horizon(), 0) * grid;
        gap_cost_.resize(static_cast<std::size_t>(span) + 1);
        for (std::int64_t t = 0; t <= span; ++t) {
            gap_cost_[t] = inst.energy.evaluate(static_cast<double>(t) / grid);
        }
    }

    const Window& window(int id) const { return windows_[id - 1]; }
    double to_time(std::int64_t units) const { return static_cast<double>(units) / grid_; }

    // Cost vector of a job started first on its machine.
    std::vector<double> first(int id) const { return std::vector<double>(window(id).size(), 0.0); }

    // Appends job `next` after job `prev` whose cost-by-start is `cost`.
    std::vector<double> relax(const std::vector<double>& cost, int prev, int next) const {
        const Window& a = window(prev);
        const Window& b = window(next);
        std::vector<double> out(b.size(), kInf);
        for (std::size_t i = 0; i < cost.size(); ++i) {
            if (cost[i] == kInf) {
                continue;
            }
            const std::int64_t end = a.lo + static_cast<std::int64_t>(i) + a.p;
            for (std::int64_t s = std::max(end, b.lo); s <= b.hi; ++s) {
                const double c = cost[i] + gap_cost_[static_cast<std::size_t>(s - end)];
                auto& slot = out[static_cast<std::size_t>(s - b.lo)];
                if (c < slot) {
                    slot = c;
                }
            }
        }
        return out;
    }

    // Earliest start of `prev` whose chain reaches `target` at the next job's start `s`.
    std::optional<std::int64_t> predecessor(const std::vector<double>& cost, int prev, std::int64_t s,
                                            double target) const {
        const Window& a = window(prev);
        for (std::size_t i = 0; i < cost.size(); ++i) {
            const std::int64_t end = a.lo + static_cast<std::int64_t>(i) + a.p;
            if (cost[i] == kInf || end > s) {
                continue;
            }
            if (std::abs(cost[i] + gap_cost_[static_cast<std::size_t>(s - end)] - target) <= kTieTolerance) {
                return a.lo + static_cast<std::int64_t>(i);
            }
        }
        return std::nullopt;
    }

private:
    int grid_;
    std::vector<Window> windows_;
    std::vector<double> gap_cost_;
};

// Smallest value and the earliest index within tolerance of it.
std::optional<std::pair<double, std::size_t>> earliest_min(const std::vector<double>& v) {
    double best = kInf;
    for (double x : v) {
        best = std::min(best, x);
    }
    if (best == kInf) {
        return std::nullopt;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] <= best + kTieTolerance) {
            return std::pair(best, i);
        }
    }
    return std::nullopt;
}

using Mask = std::uint32_t;

// Per-machine optimum for every job subset: cost[mask][j] is the cheapest
// idle energy of processing `mask` on one machine with job j last, as a
// function of j's start.
class SubsetTable {
public:
    SubsetTable(const Timing& timing, int n) : timing_(timing), n_(n), cost_((std::size_t{1} << n) * n) {
        best_.assign(std::size_t{1} << n, kInf);
        best_.front() = 0.0;
        for (Mask mask = 1; mask < (Mask{1} << n); ++mask) {
            for (int j = 0; j < n; ++j) {
                if (!(mask & (Mask{1} << j)) || timing.window(j + 1).empty()) {
                    continue;
                }
                const Mask rest = mask & ~(Mask{1} << j);
                std::vector<double> v;
                if (rest == 0) {
                    v = timing.first(j + 1);
                } else {
                    v.assign(timing.window(j + 1).size(), kInf);
                    for (int i = 0; i < n; ++i) {
                        const auto& prev = at(rest, i);
                        if (prev.empty()) {
                            continue;
                        }
                        const auto cand = timing.relax(prev, i + 1, j + 1);
                        for (std::size_t s = 0; s < v.size(); ++s) {
                            v[s] = std::min(v[s], cand[s]);
                        }
                    }
                }
                if (const auto m = earliest_min(v)) {
                    best_[mask] = std::min(best_[mask], m->first);
                    slot(mask, j) = std::move(v);
                }
            }
        }
    }

    double best(Mask mask) const { return best_[mask]; }

    // Job ids in order and their starts (time units) for an optimal schedule of `mask`.
    void schedule(Mask mask, Solution& sol, int machine) const {
        if (mask == 0) {
            return;
        }
        int last = -1;
        std::size_t index = 0;
        double value = kInf;
        for (int j = 0; j < n_; ++j) {
            const auto& v = at(mask, j);
            if (v.empty()) {
                continue;
            }
            const auto m = earliest_min(v);
            if (m && m->first < value - kTieTolerance) {
                value = m->first;
                last = j;
                index = m->second;
            }
        }
        std::int64_t s = timing_.window(last + 1).lo + static_cast<std::int64_t>(index);
        while (true) {
            sol.assignment[last] = machine;
            sol.start[last] = timing_.to_time(s);
            const Mask rest = mask & ~(Mask{1} << last);
            if (rest == 0) {
                break;
            }
            bool found = false;
            for (int i = 0; i < n_ && !found; ++i) {
                const auto& prev = at(rest, i);
                if (prev.empty()) {
                    continue;
                }
                if (const auto s_prev = timing_.predecessor(prev, i + 1, s, value)) {
                    const Window& w = timing_.window(i + 1);
                    value = prev[static_cast<std::size_t>(*s_prev - w.lo)];
                    s = *s_prev;
                    last = i;
                    mask = rest;
                    found = true;
                }
            }
            if (!found) {
                throw Error("oracle reconstruction lost track of the optimum");
            }
        }
    }

private:
    const std::vector<double>& at(Mask mask, int j) const { return cost_[mask * n_ + j]; }
    std::vector<double>& slot(Mask mask, int j) { return cost_[mask * n_ + j]; }

    const Timing& timing_;
    int n_;
    std::vector<std::vector<double>> cost_;
    std::vector<double> best_;
};

} // namespace

std::optional<TimingResult> dp_timing(const Instance& inst, const std::vector<int>& sequence, int grid) {
    for (int id : sequence) {
        if (id < 1 || static_cast<std::size_t>(id) > inst.size()) {
            throw ValidationError("sequence refers to unknown job " + std::to_string(id));
        }
    }
    if (sequence.empty()) {
        return TimingResult{};
    }
    const Timing timing(inst, grid);
    std::vector<std::vector<double>> layers;
    layers.push_back(timing.first(sequence.front()));
    for (std::size_t i = 1; i < sequence.size(); ++i) {
        layers.push_back(timing.relax(layers.back(), sequence[i - 1], sequence[i]));
    }
    const auto m = earliest_min(layers.back());
    if (!m) {
        return std::nullopt;
    }
    TimingResult out;
    out.idle_energy = m->first;
    out.start.resize(sequence.size());
    std::int64_t s = timing.window(sequence.back()).lo + static_cast<std::int64_t>(m->second);
    double value = m->first;
    for (std::size_t i = sequence.size(); i-- > 0;) {
        out.start[i] = timing.to_time(s);
        if (i == 0) {
            break;
        }
        const auto prev = timing.predecessor(layers[i - 1], sequence[i - 1], s, value);
        if (!prev) {
            throw Error("timing reconstruction lost track of the optimum");
        }
        value = layers[i - 1][static_cast<std::size_t>(*prev - timing.window(sequence[i - 1]).lo)];
        s = *prev;
    }
    return out;
}

SolveResult brute_force(const Instance& inst, const OracleConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = static_cast<int>(inst.size());
    if (inst.size() > cfg.max_jobs || n > 24) {
        throw SizeError("oracle limited to " + std::to_string(cfg.max_jobs) + " jobs, instance has " +
                        std::to_string(n));
    }
    const auto violations = validate_instance(inst);
    if (has_errors(violations)) {
        throw ValidationError("instance does not validate: " + violations.front().message);
    }
    const Timing timing(inst, cfg.time_grid);
    const SubsetTable table(timing, n);
    const Mask full = (Mask{1} << n) - 1;
    const int m = inst.machines;
    const double c = inst.c_onoff;

    SolveResult result;
    Solution sol;
    sol.assignment.assign(n, 0);
    sol.start.assign(n, 0.0);
    std::vector<Mask> blocks;  // block per machine, in machine order

    if (n == 0) {
        result.objective = 0.0;
    } else if (cfg.symmetry_reduction) {
        // cover[k][S]: cheapest split of S into k non-empty machine blocks,
        // each block holding the lowest job of what is left.
        const int kmax = std::min(m, n);
        std::vector<std::vector<double>> cover(kmax + 1, std::vector<double>(full + 1, kInf));
        cover[0][0] = 0.0;
        for (int k = 1; k <= kmax; ++k) {
            for (Mask s = 1; s <= full; ++s) {
                const Mask low = s & (~s + 1);
                const Mask others = s ^ low;
                for (Mask sub = others;; sub = (sub - 1) & others) {
                    const Mask block = sub | low;
                    const double cost = table.best(block) + c + cover[k - 1][s ^ block];
                    if (cost < cover[k][s]) {
                        cover[k][s] = cost;
                    }
                    if (sub == 0) {
                        break;
                    }
                }
            }
        }
        int best_k = 0;
        for (int k = 1; k <= kmax; ++k) {
            if (cover[k][full] < kInf && (best_k == 0 || cover[k][full] < cover[best_k][full] - kTieTolerance)) {
                best_k = k;
            }
        }
        if (best_k > 0) {
            result.objective = cover[best_k][full];
            Mask s = full;
            for (int k = best_k; k >= 1; --k) {
                const Mask low = s & (~s + 1);
                const Mask others = s ^ low;
                // Largest block first in submask order; keep the first that attains the optimum.
                for (Mask sub = others;; sub = (sub - 1) & others) {
                    const Mask block = sub | low;
                    const double cost = table.best(block) + c + cover[k - 1][s ^ block];
                    if (std::abs(cost - cover[k][s]) <= kTieTolerance) {
                        blocks.push_back(block);
                        s ^= block;
                        break;
                    }
                    if (sub == 0) {
                        throw Error("oracle partition reconstruction failed");
                    }
                }
            }
        }
    } else {
        // All labelled assignments, job 1 as the most significant digit.
        std::vector<int> label(n, 0);
        double best = kInf;
        std::vector<int> best_label;
        while (true) {
            std::vector<Mask> per(m, 0);
            for (int j = 0; j < n; ++j) {
                per[label[j]] |= Mask{1} << j;
            }
            double cost = 0.0;
            for (Mask b : per) {
                if (b != 0) {
                    cost += table.best(b) + c;
                }
            }
            if (cost < best - kTieTolerance) {
                best = cost;
                best_label = label;
            }
            int pos = n - 1;
            while (pos >= 0 && ++label[pos] == m) {
                label[pos--] = 0;
            }
            if (pos < 0) {
                break;
            }
        }
        if (best < kInf) {
            result.objective = best;
            blocks.assign(m, 0);
            for (int j = 0; j < n; ++j) {
                blocks[best_label[j]] |= Mask{1} << j;
            }
        }
    }

    if (result.objective) {
        for (std::size_t k = 0; k < blocks.size(); ++k) {
            table.schedule(blocks[k], sol, static_cast<int>(k));
        }
        result.status = SolveStatus::Optimal;
        result.bound = result.objective;
        result.gap = 0.0;
        result.solution = std::move(sol);
    } else {
        result.status = SolveStatus::Infeasible;
    }
    result.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

} // namespace idle_energy
