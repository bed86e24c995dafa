#pragma once

#include <idle_energy/core.hpp>

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace idle_energy {

/// Identifies the random stream layout; bump whenever draws change.
inline constexpr const char* kGeneratorVersion = "mt19937_64-splitmix64/v1";

/// Portable random stream: std::mt19937_64 (bit-exact by the standard) with
/// hand-rolled distributions, because std distributions are
/// implementation-defined.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform integer in [lo, hi], unbiased by rejection.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01();
    /// Exponential with the given scale (mean).
    double exponential(double scale);

private:
    std::mt19937_64 engine_;
};

/// splitmix64 finalizer, used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> coordinates);

struct GenParams {
    int n = 10;
    int m = 1;
    std::int64_t p_min = 1;
    std::int64_t p_max = 300;
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
    std::uint64_t seed = 0;

    double expected_p() const { return 0.5 * static_cast<double>(p_min + p_max); }
};

void validate(const GenParams& params);

/// Random instance: p ~ U(p_min, p_max), release times stacked per randomly
/// drawn machine plus Exp(alpha * E[p]), deadlines r + p + beta * E[p] +
/// Exp(gamma * E[p]); each quantity rounded up once. When `c_onoff` is
/// absent it defaults to the final-piece intercept of `f`.
Instance generate(const GenParams& params, const EnergyFunction& f,
                  std::optional<double> c_onoff = std::nullopt);

struct SuiteGrid {
    std::vector<int> n;
    std::vector<int> m;
    std::vector<double> alpha;
    std::vector<double> gamma;
    double beta = 1.0;
    std::int64_t p_min = 1;
    std::int64_t p_max = 300;
    int count = 1;
    std::uint64_t base_seed = 0;
};

struct SuiteInstance {
    std::string id;
    GenParams params;
    Instance instance;
};

/// Every (n, m, alpha, gamma) cell times `count` replicates, in grid order.
/// Seeds derive from the base seed, the cell coordinates and the replicate.
std::vector<SuiteInstance> generate_suite(const SuiteGrid& grid, const EnergyFunction& f,
                                          std::optional<double> c_onoff = std::nullopt);

} // namespace idle_energy
