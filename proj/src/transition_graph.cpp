#include <idle_energy/energy.hpp>
#include <idle_energy/error.hpp>

#include <cmath>
#include <map>
#include <queue>

namespace idle_energy {
namespace {

// (time, energy) ordered lexicographically; addition is monotone in that
// order, so per-leg minima add up to the round-trip minimum.
using Cost = std::pair<double, double>;

constexpr Cost kUnreached{kInfinity, kInfinity};

struct Arc {
    std::size_t to;
    Cost cost;
};

std::vector<Cost> shortest_from(const std::vector<std::vector<Arc>>& adjacency, std::size_t source) {
    std::vector<Cost> dist(adjacency.size(), kUnreached);
    using Item = std::pair<Cost, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[source] = {0.0, 0.0};
    queue.push({dist[source], source});
    while (!queue.empty()) {
        const auto [d, u] = queue.top();
        queue.pop();
        if (d > dist[u]) {
            continue;
        }
        for (const auto& arc : adjacency[u]) {
            const Cost candidate{d.first + arc.cost.first, d.second + arc.cost.second};
            if (candidate < dist[arc.to]) {
                dist[arc.to] = candidate;
                queue.push({candidate, arc.to});
            }
        }
    }
    return dist;
}

} // namespace

std::vector<EnergyMode> from_transition_graph(const TransitionGraph& graph) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const auto& node = graph.nodes[i];
        if (!std::isfinite(node.power) || node.power < 0.0) {
            throw ValidationError("node '" + node.name + "' has negative power");
        }
        if (!index.emplace(node.name, i).second) {
            throw ValidationError("duplicate node '" + node.name + "'");
        }
    }
    const auto on = index.find(kOnMode);
    if (on == index.end()) {
        throw GraphError("transition graph has no 'on' node");
    }

    std::vector<std::vector<Arc>> forward(graph.nodes.size());
    std::vector<std::vector<Arc>> backward(graph.nodes.size());
    for (const auto& edge : graph.edges) {
        if (!std::isfinite(edge.energy) || !std::isfinite(edge.time) || edge.energy < 0.0 ||
            edge.time < 0.0) {
            throw ValidationError("edge " + edge.from + "->" + edge.to + " has a negative label");
        }
        const auto from = index.find(edge.from);
        const auto to = index.find(edge.to);
        if (from == index.end() || to == index.end()) {
            throw GraphError("edge " + edge.from + "->" + edge.to + " references an unknown node");
        }
        forward[from->second].push_back({to->second, {edge.time, edge.energy}});
        backward[to->second].push_back({from->second, {edge.time, edge.energy}});
    }

    const auto out = shortest_from(forward, on->second);
    const auto back = shortest_from(backward, on->second);

    std::vector<EnergyMode> modes;
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const auto& node = graph.nodes[i];
        if (i == on->second) {
            modes.push_back({node.name, node.power, 0.0, 0.0});
            continue;
        }
        if (out[i] == kUnreached || back[i] == kUnreached) {
            throw GraphError("node '" + node.name + "' is not on a round trip from 'on'");
        }
        modes.push_back({node.name, node.power, out[i].first + back[i].first,
                         out[i].second + back[i].second});
    }
    return modes;
}

} // namespace idle_energy
