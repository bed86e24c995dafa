#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace idle_energy {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Label reserved for the processing mode.
inline constexpr const char* kOnMode = "on";

/// One machine mode: constant power while resident, plus the time and energy
/// of the round trip processing mode -> this mode -> processing mode.
struct EnergyMode {
    std::string name;
    double power = 0.0;
    double switch_time = 0.0;
    double switch_energy = 0.0;

    bool is_processing_mode() const { return switch_time == 0.0 && switch_energy == 0.0; }
    bool operator==(const EnergyMode&) const = default;
};

/// Affine piece `intercept + slope * delta` on [lo, hi).
struct EnergyPiece {
    double lo = 0.0;
    double hi = kInfinity;
    double slope = 0.0;
    double intercept = 0.0;
    /// Minimizing mode when the function was built from modes.
    std::optional<std::string> mode;

    double value_at(double delta) const { return intercept + slope * delta; }
    bool operator==(const EnergyPiece&) const = default;
};

/// Best attainable idle energy as a function of the idle length.
///
/// Pieces cover [0, inf) left-closed/right-open, so at a discontinuity the
/// right (cheaper) piece owns the boundary point. Construction validates:
/// f(0) = 0, non-negative slopes, no upward jumps, and f(d) <= P_on * d where
/// P_on is the slope of the first piece.
class EnergyFunction {
public:
    /// Single-piece function `power * delta` (processing mode only).
    static EnergyFunction on_only(double power);

    /// Lower envelope over the given modes. Integer parameters are handled in
    /// exact rational arithmetic, anything else in double with 1e-9 slack.
    static EnergyFunction from_modes(std::span<const EnergyMode> modes);

    static EnergyFunction from_pieces(std::vector<EnergyPiece> pieces);

    double evaluate(double delta) const;
    std::size_t piece_index(double delta) const;

    const std::vector<EnergyPiece>& pieces() const { return pieces_; }
    /// Modes the function was built from; empty for raw pieces.
    const std::vector<EnergyMode>& modes() const { return modes_; }
    bool has_mode_annotations() const { return !modes_.empty(); }

    double on_power() const { return pieces_.front().slope; }
    double final_intercept() const { return pieces_.back().intercept; }

    /// Interior piece boundaries (the lo of every piece but the first).
    std::vector<double> breakpoints() const;

    bool operator==(const EnergyFunction&) const = default;

private:
    EnergyFunction() = default;
    void validate() const;

    std::vector<EnergyPiece> pieces_;
    std::vector<EnergyMode> modes_;
};

struct BreakEven {
    std::string mode;
    double delta = 0.0;
};

/// Smallest idle length at which each non-processing mode attains the minimum.
/// Modes that never appear in the envelope are omitted. Requires annotations.
std::vector<BreakEven> break_even_times(const EnergyFunction& f);

struct GraphNode {
    std::string name;
    double power = 0.0;
};

struct GraphEdge {
    std::string from;
    std::string to;
    double energy = 0.0;
    double time = 0.0;
};

struct TransitionGraph {
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;
};

/// Derives one mode per node: T and C are the fastest round trip
/// on -> node -> on (ties on time broken by lower energy), P is the node power.
std::vector<EnergyMode> from_transition_graph(const TransitionGraph& graph);

struct EnergySample {
    double delta = 0.0;
    double energy = 0.0;
};

struct PwlApproximation {
    EnergyFunction function;
    double max_error = 0.0;
    /// Sample indices where a piece starts (first is always 0).
    std::vector<std::size_t> piece_starts;
};

/// Min-max piecewise-linear fit with at most `num_segments` pieces whose
/// breakpoints are sample deltas. Vertices lie on samples. The default fit is
/// continuous; `allow_jumps` lets consecutive pieces start at a new sample
/// (downward jumps only).
PwlApproximation approximate_pwl(std::span<const EnergySample> samples, std::size_t num_segments,
                                 bool allow_jumps = false);

} // namespace idle_energy
