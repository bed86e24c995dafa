#include <idle_energy/error.hpp>
#include <idle_energy/generator.hpp>

#include <cmath>
#include <cstdio>
#include <limits>

namespace idle_energy {

std::int64_t RandomStream::uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) {
        return static_cast<std::int64_t>(engine_());
    }
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x = engine_();
    while (x >= limit) {
        x = engine_();
    }
    return lo + static_cast<std::int64_t>(x % range);
}

double RandomStream::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::exponential(double scale) {
    return -scale * std::log1p(-uniform01());
}

std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> coordinates) {
    std::uint64_t h = mix_seed(base);
    for (std::uint64_t c : coordinates) {
        h = mix_seed(h ^ mix_seed(c));
    }
    return h;
}

void validate(const GenParams& params) {
    if (params.n < 1 || params.m < 1) {
        throw ValidationError("n and m must be at least 1");
    }
    if (params.p_min < 1 || params.p_min > params.p_max) {
        throw ValidationError("need 1 <= p_min <= p_max");
    }
    if (!(params.alpha > 0.0) || !(params.gamma > 0.0) || !std::isfinite(params.alpha) ||
        !std::isfinite(params.gamma)) {
        throw ValidationError("alpha and gamma must be positive");
    }
    if (!(params.beta >= 0.0) || !std::isfinite(params.beta)) {
        throw ValidationError("beta must be non-negative");
    }
}

Instance generate(const GenParams& params, const EnergyFunction& f, std::optional<double> c_onoff) {
    validate(params);
    const double c = c_onoff.value_or(f.final_intercept());
    if (!(c > 0.0)) {
        throw ValidationError("c_onoff must be positive (the default, the energy function's "
                              "final intercept, is not)");
    }

    RandomStream rng(mix_seed(params.seed));
    const double ep = params.expected_p();

    Instance inst;
    inst.machines = params.m;
    inst.c_onoff = c;
    inst.energy = f;
    inst.generation_assignment.resize(params.n);
    for (int j = 0; j < params.n; ++j) {
        inst.generation_assignment[j] = static_cast<int>(rng.uniform_int(0, params.m - 1));
    }

    std::vector<int> earlier_on_machine(params.m, 0);
    for (int j = 0; j < params.n; ++j) {
        const int a = inst.generation_assignment[j];
        const std::int64_t p = rng.uniform_int(params.p_min, params.p_max);
        const double release = earlier_on_machine[a] * ep + rng.exponential(params.alpha * ep);
        const double deadline = release + static_cast<double>(p) + params.beta * ep +
                                rng.exponential(params.gamma * ep);
        ++earlier_on_machine[a];

        Job job;
        job.id = j + 1;
        job.p = p;
        job.r = static_cast<std::int64_t>(std::ceil(release));
        job.d = static_cast<std::int64_t>(std::ceil(deadline));
        inst.jobs.push_back(job);
    }
    return inst;
}

std::vector<SuiteInstance> generate_suite(const SuiteGrid& grid, const EnergyFunction& f,
                                          std::optional<double> c_onoff) {
    if (grid.n.empty() || grid.m.empty() || grid.alpha.empty() || grid.gamma.empty()) {
        throw ValidationError("suite grid has an empty axis");
    }
    if (grid.count < 0) {
        throw ValidationError("replicate count must be non-negative");
    }
    std::vector<SuiteInstance> out;
    for (std::size_t in = 0; in < grid.n.size(); ++in) {
        for (std::size_t im = 0; im < grid.m.size(); ++im) {
            for (std::size_t ia = 0; ia < grid.alpha.size(); ++ia) {
                for (std::size_t ig = 0; ig < grid.gamma.size(); ++ig) {
                    for (int rep = 0; rep < grid.count; ++rep) {
                        GenParams params;
                        params.n = grid.n[in];
                        params.m = grid.m[im];
                        params.alpha = grid.alpha[ia];
                        params.gamma = grid.gamma[ig];
                        params.beta = grid.beta;
                        params.p_min = grid.p_min;
                        params.p_max = grid.p_max;
                        params.seed = derive_seed(grid.base_seed,
                                                  {in, im, ia, ig, static_cast<std::uint64_t>(rep)});
                        char id[96];
                        std::snprintf(id, sizeof(id), "n%d_m%d_a%g_g%g_r%03d", params.n, params.m,
                                      params.alpha, params.gamma, rep);
                        SuiteInstance item{id, params, generate(params, f, c_onoff)};
                        item.instance.label = id;
                        out.push_back(std::move(item));
                    }
                }
            }
        }
    }
    return out;
}

} // namespace idle_energy
