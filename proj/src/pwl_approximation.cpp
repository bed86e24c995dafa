#include <idle_energy/energy.hpp>
#include <idle_energy/error.hpp>

#include <algorithm>
#include <cmath>

namespace idle_energy {
namespace {

constexpr double kUnset = kInfinity;

struct Chord {
    double slope = 0.0;
    double intercept = 0.0;
    double value_at(double x) const { return intercept + slope * x; }
};

// Line through samples a and b; a single sample gives a flat line.
Chord chord(std::span<const EnergySample> s, std::size_t a, std::size_t b) {
    if (a == b) {
        return {0.0, s[a].energy};
    }
    const double slope = (s[b].energy - s[a].energy) / (s[b].delta - s[a].delta);
    return {slope, s[a].energy - slope * s[a].delta};
}

void validate_samples(std::span<const EnergySample> samples, std::size_t num_segments) {
    if (num_segments < 1) {
        throw ValidationError("need at least one segment");
    }
    if (samples.size() < num_segments + 1) {
        throw ValidationError("need at least num_segments + 1 samples");
    }
    if (samples.front().delta != 0.0 || samples.front().energy != 0.0) {
        throw ValidationError("first sample must be (0, 0)");
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i].delta) || !std::isfinite(samples[i].energy)) {
            throw ValidationError("samples must be finite");
        }
        if (i > 0 && !(samples[i - 1].delta < samples[i].delta)) {
            throw ValidationError("samples must be sorted by strictly increasing delta");
        }
    }
}

} // namespace

PwlApproximation approximate_pwl(std::span<const EnergySample> samples, std::size_t num_segments,
                                 bool allow_jumps) {
    validate_samples(samples, num_segments);
    const std::size_t n = samples.size();
    const std::size_t k_max = num_segments;

    // err[a][b]: max deviation of samples a..b from their chord; infinite when
    // the chord slope is negative.
    std::vector<std::vector<double>> err(n, std::vector<double>(n, kUnset));
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a; b < n; ++b) {
            const Chord c = chord(samples, a, b);
            if (c.slope < 0.0) {
                continue;
            }
            double worst = 0.0;
            for (std::size_t t = a; t <= b; ++t) {
                worst = std::max(worst, std::abs(samples[t].energy - c.value_at(samples[t].delta)));
            }
            err[a][b] = worst;
        }
    }

    // Segments (a, b) chained either continuously (next starts at b) or with
    // a jump (next starts at b + 1). cost[s][a][b] is the best max-error of s
    // segments covering samples 0..b whose last segment is (a, b).
    using Grid = std::vector<std::vector<double>>;
    std::vector<Grid> cost(k_max + 1, Grid(n, std::vector<double>(n, kUnset)));
    std::vector<std::vector<std::vector<std::size_t>>> parent(
        k_max + 1, std::vector<std::vector<std::size_t>>(n, std::vector<std::size_t>(n, n)));

    const std::size_t min_len = allow_jumps ? 0 : 1;
    for (std::size_t b = min_len; b < n; ++b) {
        cost[1][0][b] = err[0][b];
    }
    for (std::size_t s = 2; s <= k_max; ++s) {
        for (std::size_t pa = 0; pa < n; ++pa) {
            for (std::size_t pb = pa + min_len; pb < n; ++pb) {
                const double prev = cost[s - 1][pa][pb];
                if (prev == kUnset) {
                    continue;
                }
                const std::size_t a = allow_jumps ? pb + 1 : pb;
                if (a >= n) {
                    continue;
                }
                if (allow_jumps) {
                    const double left = chord(samples, pa, pb).value_at(samples[a].delta);
                    if (samples[a].energy > left + 1e-9 * std::max(1.0, std::abs(left))) {
                        continue;
                    }
                }
                for (std::size_t b = a + min_len; b < n; ++b) {
                    const double value = std::max(prev, err[a][b]);
                    if (value < cost[s][a][b]) {
                        cost[s][a][b] = value;
                        parent[s][a][b] = pa;
                    }
                }
            }
        }
    }

    double best = kUnset;
    std::size_t best_s = 0;
    std::size_t best_a = 0;
    for (std::size_t s = 1; s <= k_max; ++s) {
        for (std::size_t a = 0; a < n; ++a) {
            if (cost[s][a][n - 1] < best) {
                best = cost[s][a][n - 1];
                best_s = s;
                best_a = a;
            }
        }
    }
    if (best == kUnset) {
        throw ValidationError("samples admit no non-decreasing piecewise-linear fit");
    }

    std::vector<std::pair<std::size_t, std::size_t>> segments;
    for (std::size_t s = best_s, a = best_a, b = n - 1; s >= 1; --s) {
        segments.emplace_back(a, b);
        const std::size_t pa = parent[s][a][b];
        if (s > 1) {
            b = allow_jumps ? a - 1 : a;
            a = pa;
        }
    }
    std::reverse(segments.begin(), segments.end());

    std::vector<EnergyPiece> pieces;
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto [a, b] = segments[i];
        const Chord c = chord(samples, a, b);
        const double hi = i + 1 < segments.size() ? samples[segments[i + 1].first].delta : kInfinity;
        pieces.push_back({samples[a].delta, hi, c.slope, c.intercept, std::nullopt});
        starts.push_back(a);
    }

    PwlApproximation out{EnergyFunction::from_pieces(std::move(pieces)), 0.0, std::move(starts)};
    for (const auto& sample : samples) {
        out.max_error = std::max(out.max_error, std::abs(out.function.evaluate(sample.delta) - sample.energy));
    }
    return out;
}

} // namespace idle_energy
