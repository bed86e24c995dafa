#include "naming.hpp"

#include <idle_energy/error.hpp>
#include <idle_energy/milp.hpp>

#include <algorithm>
#include <cmath>
#include <map>

namespace idle_energy::milp {

using detail::var_name;

double big_m(const Instance& inst) { return static_cast<double>(inst.horizon()); }

double big_m(const Instance& inst, int j, int j2) {
    const double h = big_m(inst);
    const double span = static_cast<double>(inst.job(j2).d - inst.job(j).r);
    return std::clamp(span, 0.0, h);
}

PwlEncoding linearize_pwl(ModelIR& model, const EnergyFunction& f, VarId gap, double bound,
                          const std::string& tag, const std::vector<int>& indices) {
    PwlEncoding enc;
    const auto& pieces = f.pieces();
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (pieces[i].lo <= bound) {
            active.push_back(i);
        }
    }
    if (active.size() == 1) {
        // f(0) = 0 makes the first piece linear through the origin.
        enc.term.add(gap, pieces.front().slope);
        return enc;
    }

    LinearExpr split(gap, 1.0);
    LinearExpr choose;
    for (std::size_t i : active) {
        const auto& piece = pieces[i];
        auto idx = indices;
        idx.push_back(static_cast<int>(i + 1));
        const std::string suffix = tag + "_" + std::to_string(i + 1);
        const double width = std::min(piece.hi, bound) - piece.lo;
        const VarId sel = model.add_binary("zsel" + suffix, {"pwl_select", idx});
        const VarId seg = model.add_variable("zseg" + suffix, VarKind::Continuous, 0.0, width,
                                             {"pwl_segment", idx});
        model.add_constraint("pwlw" + suffix, LinearExpr(seg).add(sel, -width), Relation::LessEqual,
                             0.0);
        split.add(sel, -piece.lo).add(seg, -1.0);
        choose.add(sel);
        enc.term.add(sel, piece.value_at(piece.lo)).add(seg, piece.slope);
        enc.selectors.push_back(sel);
        enc.segments.push_back(seg);
        enc.pieces.push_back(i);
    }
    model.add_constraint("pwls" + tag, std::move(split), Relation::Equal, 0.0);
    model.add_constraint("pwl1" + tag, std::move(choose), Relation::Equal, 1.0);
    return enc;
}

ModelIR build_relative_order(const Instance& inst, const RelativeOrderOptions& opts) {
    if (has_errors(validate_instance(inst))) {
        throw ModelError("instance does not validate");
    }
    if (inst.energy.pieces().back().hi != kInfinity) {
        throw ModelError("energy function lacks an unbounded final piece");
    }
    const int n = static_cast<int>(inst.size());
    const int m = inst.machines;
    const double horizon = big_m(inst);
    const int dummy_end = n + 1;

    auto m_pair = [&](int j, int j2) { return opts.tight_big_m ? big_m(inst, j, j2) : horizon; };

    ModelIR model(kRelativeOrder);
    std::map<std::tuple<int, int, int>, VarId> x;
    std::map<std::pair<int, int>, VarId> a;
    std::map<std::pair<int, int>, VarId> z;
    std::vector<VarId> s(n + 1);
    std::vector<VarId> o(m + 1);

    for (int j = 1; j <= n; ++j) {
        for (int k = 1; k <= m; ++k) {
            a[{j, k}] = model.add_binary(var_name("a", j, k), {"a", {j, k}});
        }
    }
    for (int k = 1; k <= m; ++k) {
        for (int j = 0; j <= n; ++j) {
            for (int j2 = 1; j2 <= dummy_end; ++j2) {
                if (j == j2) {
                    continue;
                }
                x[{j, j2, k}] = model.add_binary(var_name("x", j, j2, k), {"x", {j, j2, k}});
            }
        }
    }
    for (int j = 1; j <= n; ++j) {
        const Job& job = inst.job(j);
        s[j] = model.add_variable(var_name("s", j), VarKind::Continuous, static_cast<double>(job.r),
                                  static_cast<double>(job.d - job.p), {"s", {j}});
    }
    for (int k = 1; k <= m; ++k) {
        o[k] = model.add_binary(var_name("o", k), {"o", {k}});
    }
    for (int j = 1; j <= n; ++j) {
        for (int j2 = 1; j2 <= n; ++j2) {
            if (j != j2) {
                z[{j, j2}] = model.add_variable(var_name("z", j, j2), VarKind::Continuous, 0.0,
                                                m_pair(j, j2), {"z", {j, j2}});
            }
        }
    }

    LinearExpr objective;
    for (const auto& [key, var] : z) {
        const auto [j, j2] = key;
        objective.add(linearize_pwl(model, inst.energy, var, m_pair(j, j2), var_name("", j, j2),
                                    {j, j2})
                          .term);
    }
    for (int k = 1; k <= m; ++k) {
        objective.add(o[k], inst.c_onoff);
    }
    model.set_objective(std::move(objective));

    for (int j = 1; j <= n; ++j) {
        LinearExpr row;
        for (int k = 1; k <= m; ++k) {
            row.add(a[{j, k}]);
        }
        model.add_constraint(var_name("assign", j), std::move(row), Relation::Equal, 1.0);
    }
    for (int j = 1; j <= n; ++j) {
        for (int k = 1; k <= m; ++k) {
            LinearExpr succ(a[{j, k}], -1.0);
            LinearExpr pred(a[{j, k}], -1.0);
            for (int j2 = 1; j2 <= dummy_end; ++j2) {
                if (j2 != j) {
                    succ.add(x.at({j, j2, k}));
                }
            }
            for (int j2 = 0; j2 <= n; ++j2) {
                if (j2 != j) {
                    pred.add(x.at({j2, j, k}));
                }
            }
            model.add_constraint(var_name("succ", j, k), std::move(succ), Relation::Equal, 0.0);
            model.add_constraint(var_name("pred", j, k), std::move(pred), Relation::Equal, 0.0);
        }
    }
    for (int k = 1; k <= m; ++k) {
        LinearExpr first;
        LinearExpr last;
        for (int j = 1; j <= dummy_end; ++j) {
            first.add(x.at({0, j, k}));
        }
        for (int j = 0; j <= n; ++j) {
            last.add(x.at({j, dummy_end, k}));
        }
        model.add_constraint(var_name("dstart", k), std::move(first), Relation::Equal, 1.0);
        model.add_constraint(var_name("dend", k), std::move(last), Relation::Equal, 1.0);
    }

    for (int j = 1; j <= n; ++j) {
        const double pj = static_cast<double>(inst.job(j).p);
        for (int j2 = 1; j2 <= n; ++j2) {
            if (j == j2) {
                continue;
            }
            const VarId gap = z.at({j, j2});
            // s_j + p_j + z <= s_j2 + M (1 - x)
            const double m_overlap = m_pair(j2, j);
            for (int k = 1; k <= m; ++k) {
                LinearExpr row(s[j]);
                row.add(gap).add(s[j2], -1.0).add(x.at({j, j2, k}), m_overlap);
                model.add_constraint(var_name("overlap", j, j2, k), std::move(row),
                                     Relation::LessEqual, m_overlap - pj);
            }
            // s_j2 - s_j - p_j <= z + M (1 - sum_k x)
            const double m_up = m_pair(j, j2);
            LinearExpr up(s[j2]);
            up.add(s[j], -1.0).add(gap, -1.0);
            // s_j2 - s_j - p_j >= z - M (1 - sum_k x)
            const double m_low = m_pair(j2, j);
            LinearExpr low(s[j2]);
            low.add(s[j], -1.0).add(gap, -1.0);
            // z <= M sum_k x
            LinearExpr zero(gap);
            for (int k = 1; k <= m; ++k) {
                up.add(x.at({j, j2, k}), m_up);
                low.add(x.at({j, j2, k}), -m_low);
                zero.add(x.at({j, j2, k}), -m_up);
            }
            model.add_constraint(var_name("gapub", j, j2), std::move(up), Relation::LessEqual,
                                 m_up + pj);
            model.add_constraint(var_name("gaplb", j, j2), std::move(low), Relation::GreaterEqual,
                                 pj - m_low);
            model.add_constraint(var_name("gapzero", j, j2), std::move(zero), Relation::LessEqual,
                                 0.0);
        }
    }
    for (int k = 1; k <= m; ++k) {
        model.add_constraint(var_name("on", k), LinearExpr(o[k]).add(x.at({0, dummy_end, k})),
                             Relation::GreaterEqual, 1.0);
    }

    if (opts.symmetry) {
        for (int k = 1; k < m; ++k) {
            model.add_constraint(var_name("symm", k), LinearExpr(o[k]).add(o[k + 1], -1.0),
                                 Relation::GreaterEqual, 0.0);
        }
        for (int j = 1; j <= std::min(m, n); ++j) {
            LinearExpr row;
            for (int k = 1; k <= j; ++k) {
                row.add(a.at({j, k}));
            }
            model.add_constraint(var_name("symj", j), std::move(row), Relation::Equal, 1.0);
        }
    }

    if (opts.horizon_fill) {
        LinearExpr fill;
        double processing = 0.0;
        for (const auto& job : inst.jobs) {
            processing += static_cast<double>(job.p);
        }
        for (const auto& [key, var] : z) {
            fill.add(var);
        }
        for (int k = 1; k <= m; ++k) {
            const VarId first = model.add_variable(var_name("start", k), VarKind::Continuous, 0.0,
                                                   horizon, {"start", {k}});
            const VarId last = model.add_variable(var_name("end", k), VarKind::Continuous, 0.0,
                                                  horizon, {"end", {k}});
            // if x_0_j_k then start_k = s_j; if x_j_(n+1)_k then end_k = H - s_j - p_j
            for (int j = 1; j <= n; ++j) {
                const VarId xs = x.at({0, j, k});
                const VarId xe = x.at({j, dummy_end, k});
                const double pj = static_cast<double>(inst.job(j).p);
                model.add_constraint(var_name("fs1", j, k),
                                     LinearExpr(first).add(s[j], -1.0).add(xs, horizon),
                                     Relation::LessEqual, horizon);
                model.add_constraint(var_name("fs2", j, k),
                                     LinearExpr(s[j]).add(first, -1.0).add(xs, horizon),
                                     Relation::LessEqual, horizon);
                model.add_constraint(var_name("fe1", j, k),
                                     LinearExpr(last).add(s[j]).add(xe, horizon),
                                     Relation::LessEqual, 2.0 * horizon - pj);
                model.add_constraint(var_name("fe2", j, k),
                                     LinearExpr(last, -1.0).add(s[j], -1.0).add(xe, horizon),
                                     Relation::LessEqual, pj);
            }
            fill.add(first).add(last).add(o[k], -horizon);
        }
        model.add_constraint("fill", std::move(fill), Relation::Equal, -processing);
    }

    model.validate();
    return model;
}

} // namespace idle_energy::milp
