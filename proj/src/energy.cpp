#include <idle_energy/energy.hpp>
#include <idle_energy/error.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace idle_energy {
namespace {

using Rational = boost::multiprecision::cpp_rational;

constexpr double kTolerance = 1e-9;

double slack(double a, double b = 0.0) {
    return kTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

// Comparison policy for the envelope sweep. Rationals compare exactly,
// doubles with a relative 1e-9 slack.
template <typename Scalar>
struct ScalarOps;

template <>
struct ScalarOps<Rational> {
    static Rational from(double x) { return Rational(static_cast<long long>(x)); }
    static double to_double(const Rational& x) { return x.convert_to<double>(); }
    static bool less(const Rational& a, const Rational& b) { return a < b; }
    static bool equal(const Rational& a, const Rational& b) { return a == b; }
};

template <>
struct ScalarOps<double> {
    static double from(double x) { return x; }
    static double to_double(double x) { return x; }
    static bool less(double a, double b) { return a < b - slack(a, b); }
    static bool equal(double a, double b) { return std::abs(a - b) <= slack(a, b); }
};

template <typename Scalar>
struct ModeLine {
    Scalar activation;
    Scalar slope;
    Scalar intercept;
    std::size_t mode;
};

// Lower envelope of the lines C_m + P_m (d - T_m), each available from T_m on.
// Between consecutive candidate points (activations and pairwise crossings)
// the active set and the minimizing line are fixed, so one comparison at the
// left end of every interval decides the piece.
template <typename Scalar>
std::vector<EnergyPiece> lower_envelope(std::span<const EnergyMode> modes) {
    using Ops = ScalarOps<Scalar>;

    std::vector<ModeLine<Scalar>> lines;
    lines.reserve(modes.size());
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const Scalar t = Ops::from(modes[i].switch_time);
        const Scalar p = Ops::from(modes[i].power);
        const Scalar c = Ops::from(modes[i].switch_energy);
        lines.push_back({t, p, Scalar(c - p * t), i});
    }

    std::vector<Scalar> candidates{Scalar(0)};
    for (const auto& line : lines) {
        candidates.push_back(line.activation);
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
            if (Ops::equal(lines[i].slope, lines[j].slope)) {
                continue;
            }
            const Scalar x = Scalar((lines[j].intercept - lines[i].intercept) /
                                    (lines[i].slope - lines[j].slope));
            if (Ops::less(Scalar(0), x)) {
                candidates.push_back(x);
            }
        }
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Scalar& a, const Scalar& b) { return a < b; });
    std::vector<Scalar> points;
    for (const auto& c : candidates) {
        if (points.empty() || !Ops::equal(points.back(), c)) {
            points.push_back(c);
        }
    }

    // Strict ordering of (value, slope, switch_time, name); slope decides
    // crossings in favour of the line that is lower to the right.
    auto better = [&](const ModeLine<Scalar>& a, const ModeLine<Scalar>& b, const Scalar& at) {
        const Scalar va = a.intercept + a.slope * at;
        const Scalar vb = b.intercept + b.slope * at;
        if (!Ops::equal(va, vb)) {
            return Ops::less(va, vb);
        }
        if (!Ops::equal(a.slope, b.slope)) {
            return Ops::less(a.slope, b.slope);
        }
        if (!Ops::equal(a.activation, b.activation)) {
            return Ops::less(a.activation, b.activation);
        }
        return modes[a.mode].name < modes[b.mode].name;
    };

    std::vector<EnergyPiece> pieces;
    std::vector<std::size_t> owners;
    for (std::size_t k = 0; k < points.size(); ++k) {
        const Scalar& at = points[k];
        const ModeLine<Scalar>* best = nullptr;
        for (const auto& line : lines) {
            if (Ops::less(at, line.activation)) {
                continue;
            }
            if (best == nullptr || better(line, *best, at)) {
                best = &line;
            }
        }
        if (!owners.empty() && owners.back() == best->mode) {
            continue;
        }
        if (!pieces.empty()) {
            pieces.back().hi = Ops::to_double(at);
        }
        pieces.push_back({Ops::to_double(at), kInfinity, Ops::to_double(best->slope),
                          Ops::to_double(best->intercept), modes[best->mode].name});
        owners.push_back(best->mode);
    }
    return pieces;
}

bool is_integral(double x) {
    return std::isfinite(x) && std::abs(x) < 9.0e15 && std::floor(x) == x;
}

void validate_modes(std::span<const EnergyMode> modes) {
    if (modes.empty()) {
        throw ValidationError("mode set is empty");
    }
    std::set<std::string> names;
    std::size_t processing = 0;
    for (const auto& mode : modes) {
        for (double v : {mode.power, mode.switch_time, mode.switch_energy}) {
            if (!std::isfinite(v) || v < 0.0) {
                throw ValidationError("mode '" + mode.name +
                                      "' has a negative or non-finite parameter");
            }
        }
        if (mode.name.empty() || !names.insert(mode.name).second) {
            throw ValidationError("mode names must be non-empty and unique");
        }
        if (mode.is_processing_mode()) {
            ++processing;
        }
    }
    if (processing != 1) {
        throw ValidationError("mode set needs exactly one processing mode with zero switch "
                              "time and energy, found " +
                              std::to_string(processing));
    }
}

} // namespace

EnergyFunction EnergyFunction::on_only(double power) {
    const EnergyMode on{kOnMode, power, 0.0, 0.0};
    return from_modes(std::span(&on, 1));
}

EnergyFunction EnergyFunction::from_modes(std::span<const EnergyMode> modes) {
    validate_modes(modes);
    const bool exact = std::all_of(modes.begin(), modes.end(), [](const EnergyMode& m) {
        return is_integral(m.power) && is_integral(m.switch_time) &&
               is_integral(m.switch_energy);
    });
    EnergyFunction f;
    f.pieces_ = exact ? lower_envelope<Rational>(modes) : lower_envelope<double>(modes);
    f.modes_.assign(modes.begin(), modes.end());
    f.validate();
    return f;
}

EnergyFunction EnergyFunction::from_pieces(std::vector<EnergyPiece> pieces) {
    EnergyFunction f;
    f.pieces_ = std::move(pieces);
    f.validate();
    return f;
}

void EnergyFunction::validate() const {
    if (pieces_.empty()) {
        throw ValidationError("energy function has no pieces");
    }
    if (pieces_.front().lo != 0.0) {
        throw ValidationError("first piece must start at 0");
    }
    if (pieces_.back().hi != kInfinity) {
        throw ValidationError("last piece must extend to infinity");
    }
    if (std::abs(pieces_.front().intercept) > kTolerance) {
        throw ValidationError("energy function must satisfy f(0) = 0");
    }
    const double p_on = pieces_.front().slope;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const auto& piece = pieces_[i];
        if (!std::isfinite(piece.slope) || !std::isfinite(piece.intercept) ||
            !std::isfinite(piece.lo)) {
            throw ValidationError("energy piece has non-finite coefficients");
        }
        if (!(piece.lo < piece.hi)) {
            throw ValidationError("energy pieces must have lo < hi");
        }
        if (piece.slope < 0.0) {
            throw ValidationError("energy pieces must have non-negative slope");
        }
        if (i + 1 < pieces_.size()) {
            const auto& next = pieces_[i + 1];
            if (piece.hi != next.lo) {
                throw ValidationError("energy pieces must be contiguous and sorted");
            }
            const double left = piece.value_at(piece.hi);
            const double right = next.value_at(next.lo);
            if (right > left + slack(left)) {
                throw ValidationError("energy function may only jump downward");
            }
        }
        if (piece.value_at(piece.lo) > p_on * piece.lo + slack(p_on * piece.lo)) {
            throw ValidationError("energy function exceeds the processing-mode line");
        }
        if (piece.hi == kInfinity) {
            if (piece.slope > p_on + slack(p_on)) {
                throw ValidationError("energy function exceeds the processing-mode line");
            }
        } else if (piece.value_at(piece.hi) > p_on * piece.hi + slack(p_on * piece.hi)) {
            throw ValidationError("energy function exceeds the processing-mode line");
        }
    }
}

std::size_t EnergyFunction::piece_index(double delta) const {
    if (!(delta >= 0.0)) {
        throw DomainError("idle length must be non-negative");
    }
    // Last piece whose lo is not beyond delta; a delta within slack below a
    // boundary is treated as lying on it.
    auto it = std::upper_bound(pieces_.begin() + 1, pieces_.end(), delta,
                               [](double d, const EnergyPiece& p) { return d + slack(p.lo) < p.lo; });
    return static_cast<std::size_t>(it - pieces_.begin()) - 1;
}

double EnergyFunction::evaluate(double delta) const {
    return pieces_[piece_index(delta)].value_at(delta);
}

std::vector<double> EnergyFunction::breakpoints() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < pieces_.size(); ++i) {
        out.push_back(pieces_[i].lo);
    }
    return out;
}

std::vector<BreakEven> break_even_times(const EnergyFunction& f) {
    if (!f.has_mode_annotations()) {
        throw UnsupportedError("break-even times need a function built from modes");
    }
    std::vector<BreakEven> out;
    for (const auto& mode : f.modes()) {
        if (mode.is_processing_mode()) {
            continue;
        }
        for (const auto& piece : f.pieces()) {
            if (piece.mode == mode.name) {
                out.push_back({mode.name, piece.lo});
                break;
            }
        }
    }
    return out;
}

} // namespace idle_energy
