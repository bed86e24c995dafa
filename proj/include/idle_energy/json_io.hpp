#pragma once

#include <idle_energy/core.hpp>
#include <idle_energy/energy.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace idle_energy {

using Json = nlohmann::ordered_json;

// Energy function: {"modes":[{"name","power","switch_time","switch_energy"}]}
// or {"pieces":[{"lo","hi","slope","intercept"}]} with "hi": null for infinity.
// Functions built from modes are written back in the modes form.
Json to_json(const EnergyFunction& f);
EnergyFunction energy_function_from_json(const Json& j);

Json to_json(const TransitionGraph& g);
TransitionGraph transition_graph_from_json(const Json& j);

Json to_json(const Instance& inst);
Instance instance_from_json(const Json& j);

Json to_json(const Solution& sol);
Solution solution_from_json(const Json& j);

/// `delta,energy` CSV with a header line.
std::vector<EnergySample> read_samples_csv(const std::filesystem::path& path);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);
std::string dump(const Json& j);

} // namespace idle_energy
