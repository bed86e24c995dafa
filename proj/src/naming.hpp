#pragma once

#include <string>

namespace idle_energy::milp::detail {

inline void append_indices(std::string&) {}

template <typename... Rest>
void append_indices(std::string& out, long long first, Rest... rest) {
    out += '_';
    out += std::to_string(first);
    append_indices(out, rest...);
}

/// "x_1_2_1" style names; stable across runs for golden files.
template <typename... Indices>
std::string var_name(const char* stem, Indices... indices) {
    std::string out(stem);
    append_indices(out, static_cast<long long>(indices)...);
    return out;
}

} // namespace idle_energy::milp::detail
