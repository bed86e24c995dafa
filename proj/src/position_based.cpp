#include "naming.hpp"

#include <idle_energy/error.hpp>
#include <idle_energy/milp.hpp>

#include <algorithm>
#include <vector>

namespace idle_energy::milp {

using detail::var_name;

TwoModeParams two_mode_params(const EnergyFunction& f) {
    const auto& pieces = f.pieces();
    const double p_on = pieces.front().slope;
    if (pieces.size() == 1) {
        return {0.0, 0.0, p_on, p_on};
    }
    if (pieces.size() == 2) {
        const auto& save = pieces[1];
        return {save.lo, save.value_at(save.lo), p_on, save.slope};
    }
    throw UnsupportedError("position-based model needs an energy function with at most two "
                           "pieces, got " +
                           std::to_string(pieces.size()));
}

ModelIR build_position_based(const Instance& inst, const PositionOptions& opts) {
    return build_position_based(inst, two_mode_params(inst.energy), opts);
}

// Positions l = 1..n per machine. Gap l lies between positions l and l + 1:
//   gap_l = c_{l+1} - p_{l+1} - c_l,
// y_l marks a switch in gap l, E_l its energy. The switching-duration term
// therefore attaches to the gap before position l (y_{l-1}), and the
// sequencing row is a lower bound:
//   c_l >= c_{l-1} + p_l + y_{l-1} T_sw.
// The printed form reads "c_l <= c_{l-1} + p_l + y_l T_sw", which would
// forbid idle time without a switch and cap switched gaps at T_sw.
ModelIR build_position_based(const Instance& inst, const TwoModeParams& params,
                             const PositionOptions& opts) {
    if (has_errors(validate_instance(inst))) {
        throw ModelError("instance does not validate");
    }
    const int n = static_cast<int>(inst.size());
    const int m = inst.machines;
    const double horizon = big_m(inst);
    const double energy_m = params.p_on * horizon;

    ModelIR model(kPositionBased);
    // x[i][l][k], 1-based
    std::vector<std::vector<std::vector<VarId>>> x(
        n + 1, std::vector<std::vector<VarId>>(n + 1, std::vector<VarId>(m + 1)));
    std::vector<std::vector<VarId>> y(n + 1, std::vector<VarId>(m + 1));
    std::vector<std::vector<VarId>> c(n + 1, std::vector<VarId>(m + 1));
    std::vector<std::vector<VarId>> e(n + 1, std::vector<VarId>(m + 1));
    std::vector<VarId> o(m + 1);

    for (int i = 1; i <= n; ++i) {
        for (int l = 1; l <= n; ++l) {
            for (int k = 1; k <= m; ++k) {
                x[i][l][k] = model.add_binary(var_name("x", i, l, k), {"xpos", {i, l, k}});
            }
        }
    }
    for (int l = 1; l <= n; ++l) {
        for (int k = 1; k <= m; ++k) {
            y[l][k] = model.add_binary(var_name("y", l, k), {"y", {l, k}});
        }
    }
    for (int l = 1; l <= n; ++l) {
        for (int k = 1; k <= m; ++k) {
            c[l][k] = model.add_variable(var_name("c", l, k), VarKind::Continuous, 0.0, horizon,
                                         {"c", {l, k}});
        }
    }
    for (int l = 1; l < n; ++l) {
        for (int k = 1; k <= m; ++k) {
            e[l][k] = model.add_variable(var_name("E", l, k), VarKind::Continuous, 0.0, kInfinity,
                                         {"E", {l, k}});
        }
    }
    for (int k = 1; k <= m; ++k) {
        o[k] = model.add_binary(var_name("o", k), {"o", {k}});
    }

    // Occupancy, processing, release and deadline of position (l, k).
    auto occupied = [&](int l, int k, double scale = 1.0) {
        LinearExpr out;
        for (int i = 1; i <= n; ++i) {
            out.add(x[i][l][k], scale);
        }
        return out;
    };
    auto weighted = [&](int l, int k, auto field, double scale) {
        LinearExpr out;
        for (int i = 1; i <= n; ++i) {
            out.add(x[i][l][k], scale * static_cast<double>(field(inst.job(i))));
        }
        return out;
    };
    auto proc = [](const Job& j) { return j.p; };
    auto release = [](const Job& j) { return j.r; };
    auto deadline = [](const Job& j) { return j.d; };

    LinearExpr objective;
    for (int l = 1; l < n; ++l) {
        for (int k = 1; k <= m; ++k) {
            objective.add(e[l][k]);
        }
    }
    for (int k = 1; k <= m; ++k) {
        objective.add(o[k], inst.c_onoff);
    }
    model.set_objective(std::move(objective));

    for (int i = 1; i <= n; ++i) {
        LinearExpr row;
        for (int l = 1; l <= n; ++l) {
            for (int k = 1; k <= m; ++k) {
                row.add(x[i][l][k]);
            }
        }
        model.add_constraint(var_name("assign", i), std::move(row), Relation::Equal, 1.0);
    }
    for (int l = 1; l <= n; ++l) {
        for (int k = 1; k <= m; ++k) {
            model.add_constraint(var_name("slot", l, k), occupied(l, k), Relation::LessEqual, 1.0);

            LinearExpr rel(c[l][k]);
            rel.add(weighted(l, k, proc, -1.0)).add(weighted(l, k, release, -1.0));
            model.add_constraint(var_name("rel", l, k), std::move(rel), Relation::GreaterEqual, 0.0);

            LinearExpr due(c[l][k]);
            due.add(weighted(l, k, deadline, -1.0)).add(occupied(l, k, horizon));
            model.add_constraint(var_name("due", l, k), std::move(due), Relation::LessEqual, horizon);

            if (l >= 2) {
                LinearExpr seq(c[l][k]);
                seq.add(c[l - 1][k], -1.0)
                    .add(weighted(l, k, proc, -1.0))
                    .add(y[l - 1][k], -params.switch_time);
                model.add_constraint(var_name("seq", l, k), std::move(seq), Relation::GreaterEqual,
                                     0.0);
            }

            model.add_constraint(var_name("used", l, k), LinearExpr(o[k]).add(occupied(l, k, -1.0)),
                                 Relation::GreaterEqual, 0.0);

            // A switch only happens between two occupied positions.
            model.add_constraint(var_name("swl", l, k), LinearExpr(y[l][k]).add(occupied(l, k, -1.0)),
                                 Relation::LessEqual, 0.0);
            if (l < n) {
                model.add_constraint(var_name("swr", l, k),
                                     LinearExpr(y[l][k]).add(occupied(l + 1, k, -1.0)),
                                     Relation::LessEqual, 0.0);

                // gap = c_{l+1} - p_{l+1} - c_l
                LinearExpr gap(c[l + 1][k]);
                gap.add(weighted(l + 1, k, proc, -1.0)).add(c[l][k], -1.0);

                // E >= P_on * gap - M y
                LinearExpr stay(e[l][k]);
                stay.add(gap, -params.p_on).add(y[l][k], energy_m);
                model.add_constraint(var_name("eon", l, k), std::move(stay), Relation::GreaterEqual,
                                     0.0);

                // E >= C_sw y + (gap - T_sw) P_sb
                LinearExpr save(e[l][k]);
                save.add(gap, -params.p_standby).add(y[l][k], -params.switch_energy);
                model.add_constraint(var_name("esb", l, k), std::move(save), Relation::GreaterEqual,
                                     -params.p_standby * params.switch_time);
            }
        }
    }

    if (opts.symmetry) {
        for (int k = 1; k < m; ++k) {
            model.add_constraint(var_name("symm", k), occupied(1, k).add(occupied(1, k + 1, -1.0)),
                                 Relation::GreaterEqual, 0.0);
        }
        for (int i = 1; i <= std::min(m, n); ++i) {
            LinearExpr row;
            for (int l = 1; l <= n; ++l) {
                for (int k = 1; k <= i; ++k) {
                    row.add(x[i][l][k]);
                }
            }
            model.add_constraint(var_name("symj", i), std::move(row), Relation::Equal, 1.0);
        }
        // Positions fill from the left: sum_i x_{i,l,k} >= sum_i x_{i,l+1,k}.
        for (int l = 1; l < n; ++l) {
            for (int k = 1; k <= m; ++k) {
                model.add_constraint(var_name("left", l, k),
                                     occupied(l, k).add(occupied(l + 1, k, -1.0)),
                                     Relation::GreaterEqual, 0.0);
            }
        }
    }

    model.validate();
    return model;
}

} // namespace idle_energy::milp
