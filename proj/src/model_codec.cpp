#include "naming.hpp"

#include <idle_energy/error.hpp>
#include <idle_energy/milp.hpp>

#include <cmath>

namespace idle_energy::milp {
namespace {

using detail::var_name;

class ValueSetter {
public:
    explicit ValueSetter(const ModelIR& model) : model_(model), values_(model.variables().size(), 0.0) {}

    void set(const std::string& name, double value) {
        const VarId v = model_.find(name);
        if (!v.valid()) {
            throw ModelError("model has no variable " + name);
        }
        values_[v.index] = value;
    }
    bool has(const std::string& name) const { return model_.find(name).valid(); }
    std::vector<double> take() { return std::move(values_); }

private:
    const ModelIR& model_;
    std::vector<double> values_;
};

void encode_relative(ValueSetter& out, const Instance& inst, const EvaluatedSolution& ev) {
    const int n = static_cast<int>(inst.size());
    const double horizon = big_m(inst);
    const auto& sol = ev.solution;
    for (int j = 1; j <= n; ++j) {
        out.set(var_name("a", j, sol.assignment[j - 1] + 1), 1.0);
        out.set(var_name("s", j), sol.start[j - 1]);
    }
    for (int k = 1; k <= inst.machines; ++k) {
        const auto& seq = ev.sequences[k - 1];
        const bool fill = out.has(var_name("start", k));
        if (seq.empty()) {
            out.set(var_name("x", 0, n + 1, k), 1.0);
            continue;
        }
        out.set(var_name("o", k), 1.0);
        out.set(var_name("x", 0, seq.front(), k), 1.0);
        out.set(var_name("x", seq.back(), n + 1, k), 1.0);
        if (fill) {
            out.set(var_name("start", k), sol.start[seq.front() - 1]);
            out.set(var_name("end", k),
                    horizon - sol.start[seq.back() - 1] - static_cast<double>(inst.job(seq.back()).p));
        }
        for (std::size_t i = 1; i < seq.size(); ++i) {
            const int j = seq[i - 1];
            const int j2 = seq[i];
            const double gap = std::max(
                0.0, sol.start[j2 - 1] - sol.start[j - 1] - static_cast<double>(inst.job(j).p));
            out.set(var_name("x", j, j2, k), 1.0);
            out.set(var_name("z", j, j2), gap);
            const std::size_t piece = inst.energy.piece_index(gap);
            const std::string sel = var_name("zsel", j, j2, piece + 1);
            if (out.has(sel)) {
                out.set(sel, 1.0);
                out.set(var_name("zseg", j, j2, piece + 1),
                        std::max(0.0, gap - inst.energy.pieces()[piece].lo));
            }
        }
    }
    // Unlinked pairs carry a zero gap in the first piece.
    for (int j = 1; j <= n; ++j) {
        for (int j2 = 1; j2 <= n; ++j2) {
            if (j == j2 || ev.pred[j2 - 1] == j) {
                continue;
            }
            const std::string sel = var_name("zsel", j, j2, 1);
            if (out.has(sel)) {
                out.set(sel, 1.0);
            }
        }
    }
}

void encode_position(ValueSetter& out, const Instance& inst, const EvaluatedSolution& ev) {
    const int n = static_cast<int>(inst.size());
    const TwoModeParams params = two_mode_params(inst.energy);
    for (int k = 1; k <= inst.machines; ++k) {
        const auto& seq = ev.sequences[k - 1];
        if (!seq.empty()) {
            out.set(var_name("o", k), 1.0);
        }
        double last_completion = 0.0;
        for (int l = 1; l <= n; ++l) {
            if (static_cast<std::size_t>(l) <= seq.size()) {
                const int i = seq[l - 1];
                out.set(var_name("x", i, l, k), 1.0);
                last_completion = ev.solution.start[i - 1] + static_cast<double>(inst.job(i).p);
            }
            out.set(var_name("c", l, k), last_completion);
        }
        for (std::size_t l = 1; l < seq.size(); ++l) {
            const int i = seq[l - 1];
            const int next = seq[l];
            const double gap = std::max(0.0, ev.solution.start[next - 1] - ev.solution.start[i - 1] -
                                                 static_cast<double>(inst.job(i).p));
            const double stay = params.p_on * gap;
            const double save = params.switch_energy + params.p_standby * (gap - params.switch_time);
            const bool sw = gap >= params.switch_time && save < stay;
            out.set(var_name("y", l, k), sw ? 1.0 : 0.0);
            out.set(var_name("E", l, k), sw ? save : stay);
        }
    }
}

double snap(double x) {
    const double r = std::round(x);
    return std::abs(x - r) <= 1e-6 ? r : x;
}

} // namespace

std::vector<double> encode_solution(const ModelIR& model, const Instance& inst, const Solution& sol) {
    const EvaluatedSolution ev = evaluate(inst, sol);
    ValueSetter out(model);
    if (model.formulation() == kRelativeOrder) {
        encode_relative(out, inst, ev);
    } else if (model.formulation() == kPositionBased) {
        encode_position(out, inst, ev);
    } else {
        throw UnsupportedError("unknown formulation '" + model.formulation() + "'");
    }
    return out.take();
}

Solution decode_solution(const ModelIR& model, const Instance& inst, std::span<const double> values) {
    const std::size_t n = inst.size();
    Solution sol;
    sol.assignment.assign(n, -1);
    sol.start.assign(n, 0.0);
    std::vector<double> completion;  // position model: c indexed by (l, k)
    std::vector<std::pair<int, int>> slot(n, {0, 0});
    const int m = inst.machines;
    if (model.formulation() == kPositionBased) {
        completion.assign((n + 1) * static_cast<std::size_t>(m + 1), 0.0);
    }
    for (std::size_t v = 0; v < model.variables().size(); ++v) {
        const Annotation& ann = model.annotation(VarId{static_cast<int>(v)});
        const double value = values[v];
        if (ann.role == "a" && value > 0.5) {
            sol.assignment[ann.indices[0] - 1] = ann.indices[1] - 1;
        } else if (ann.role == "s") {
            sol.start[ann.indices[0] - 1] = snap(value);
        } else if (ann.role == "xpos" && value > 0.5) {
            sol.assignment[ann.indices[0] - 1] = ann.indices[2] - 1;
            slot[ann.indices[0] - 1] = {ann.indices[1], ann.indices[2]};
        } else if (ann.role == "c") {
            completion[ann.indices[0] * (m + 1) + ann.indices[1]] = value;
        }
    }
    if (model.formulation() == kPositionBased) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto [l, k] = slot[i];
            if (l == 0) {
                continue;
            }
            sol.start[i] = snap(completion[l * (m + 1) + k] - static_cast<double>(inst.job(static_cast<int>(i) + 1).p));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (sol.assignment[i] < 0) {
            throw SolverError("solver values leave job " + std::to_string(i + 1) + " unassigned");
        }
    }
    return sol;
}

} // namespace idle_energy::milp
