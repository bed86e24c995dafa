#pragma once

#include <idle_energy/core.hpp>
#include <idle_energy/model_ir.hpp>

#include <span>
#include <string>
#include <vector>

namespace idle_energy::milp {

inline constexpr const char* kRelativeOrder = "relative-order";
inline constexpr const char* kPositionBased = "position-based";

struct RelativeOrderOptions {
    /// o_k >= o_{k+1} and job j restricted to machines 1..j.
    bool symmetry = false;
    /// start_k / end_k variables and the horizon-fill equation.
    bool horizon_fill = false;
    /// Per-pair big-M values instead of H everywhere.
    bool tight_big_m = false;
};

struct PositionOptions {
    /// Leftmost-position, machine-order and job-order symmetry breaking.
    bool symmetry = false;
};

/// On plus one power-saving mode, as used by the position-based model.
struct TwoModeParams {
    double switch_time = 0.0;
    double switch_energy = 0.0;
    double p_on = 0.0;
    double p_standby = 0.0;
};

/// Reads the two-mode parameters off a function with at most two pieces.
/// Throws UnsupportedError for anything else.
TwoModeParams two_mode_params(const EnergyFunction& f);

/// The horizon H.
double big_m(const Instance& inst);
/// min(H, d_{j2} - r_j), clamped at 0: bounds how far j2 can end after j starts.
double big_m(const Instance& inst, int j, int j2);

struct PwlEncoding {
    std::vector<VarId> selectors;  ///< one binary per active piece (none for a single piece)
    std::vector<VarId> segments;   ///< offset of the gap inside its piece
    std::vector<std::size_t> pieces;  ///< energy-function piece behind each selector
    LinearExpr term;               ///< equals f(gap) at every feasible point
};

/// Disjunctive encoding of f(gap) for gap in [0, bound]: one binary per piece
/// reachable within the bound, sum of binaries = 1, the gap split into the
/// selected piece's lower end plus an in-piece offset. Downward jumps are
/// exact since the minimizer always prefers the cheaper right piece.
PwlEncoding linearize_pwl(ModelIR& model, const EnergyFunction& f, VarId gap, double bound,
                          const std::string& tag, const std::vector<int>& indices);

/// Relative-order model: predecessor/successor binaries x_j_j2_k over jobs plus
/// dummy-start 0 and dummy-end n+1, gap variables z_j_j2, starts s_j, machine
/// usage o_k, assignment a_j_k; objective sum f(z) + C_onoff * sum o_k.
ModelIR build_relative_order(const Instance& inst, const RelativeOrderOptions& opts = {});

/// Position-based reference model (x_i_l_k, y_l_k, c_l_k, E_l_k) with an
/// added machine-usage term so its objective matches the relative-order one.
ModelIR build_position_based(const Instance& inst, const TwoModeParams& params,
                             const PositionOptions& opts = {});
ModelIR build_position_based(const Instance& inst, const PositionOptions& opts = {});

/// Variable values induced by a feasible schedule, for either formulation.
std::vector<double> encode_solution(const ModelIR& model, const Instance& inst, const Solution& sol);

/// Schedule read back through the variable annotations. Start times within
/// 1e-6 of an integer are snapped to it.
Solution decode_solution(const ModelIR& model, const Instance& inst, std::span<const double> values);

} // namespace idle_energy::milp
