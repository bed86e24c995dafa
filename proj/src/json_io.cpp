#include <idle_energy/error.hpp>
#include <idle_energy/json_io.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace idle_energy {
namespace {

double number(const Json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw ValidationError(std::string("missing numeric field '") + key + "'");
    }
    return j.at(key).get<double>();
}

std::int64_t integer(const Json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number_integer()) {
        throw ValidationError(std::string("missing integer field '") + key + "'");
    }
    return j.at(key).get<std::int64_t>();
}

// Integral values are stored as JSON integers so that files stay readable and
// re-serialize to the same bytes.
Json number_json(double x) {
    if (std::isfinite(x) && std::floor(x) == x && std::abs(x) < 9.0e15) {
        return static_cast<std::int64_t>(x);
    }
    return x;
}

} // namespace

Json to_json(const EnergyFunction& f) {
    Json out = Json::object();
    if (f.has_mode_annotations()) {
        out["modes"] = Json::array();
        for (const auto& m : f.modes()) {
            out["modes"].push_back({{"name", m.name},
                                    {"power", number_json(m.power)},
                                    {"switch_time", number_json(m.switch_time)},
                                    {"switch_energy", number_json(m.switch_energy)}});
        }
        return out;
    }
    out["pieces"] = Json::array();
    for (const auto& p : f.pieces()) {
        out["pieces"].push_back({{"lo", number_json(p.lo)},
                                 {"hi", p.hi == kInfinity ? Json(nullptr) : number_json(p.hi)},
                                 {"slope", number_json(p.slope)},
                                 {"intercept", number_json(p.intercept)}});
    }
    return out;
}

EnergyFunction energy_function_from_json(const Json& j) {
    if (j.contains("modes")) {
        std::vector<EnergyMode> modes;
        for (const auto& m : j.at("modes")) {
            modes.push_back({m.at("name").get<std::string>(), number(m, "power"),
                             m.contains("switch_time") ? number(m, "switch_time") : 0.0,
                             m.contains("switch_energy") ? number(m, "switch_energy") : 0.0});
        }
        return EnergyFunction::from_modes(modes);
    }
    if (j.contains("pieces")) {
        std::vector<EnergyPiece> pieces;
        for (const auto& p : j.at("pieces")) {
            double hi = kInfinity;
            if (p.contains("hi") && p.at("hi").is_number()) {
                hi = p.at("hi").get<double>();
            } else if (p.contains("hi") && p.at("hi").is_string() && p.at("hi") != "inf") {
                throw ValidationError("piece 'hi' must be a number, null or \"inf\"");
            }
            pieces.push_back({number(p, "lo"), hi, number(p, "slope"), number(p, "intercept"),
                              std::nullopt});
        }
        return EnergyFunction::from_pieces(std::move(pieces));
    }
    throw ValidationError("energy function needs 'modes' or 'pieces'");
}

Json to_json(const TransitionGraph& g) {
    Json out = {{"nodes", Json::array()}, {"edges", Json::array()}};
    for (const auto& n : g.nodes) {
        out["nodes"].push_back({{"name", n.name}, {"power", number_json(n.power)}});
    }
    for (const auto& e : g.edges) {
        out["edges"].push_back({{"from", e.from},
                                {"to", e.to},
                                {"energy", number_json(e.energy)},
                                {"time", number_json(e.time)}});
    }
    return out;
}

TransitionGraph transition_graph_from_json(const Json& j) {
    TransitionGraph g;
    for (const auto& n : j.at("nodes")) {
        g.nodes.push_back({n.at("name").get<std::string>(), number(n, "power")});
    }
    if (j.contains("edges")) {
        for (const auto& e : j.at("edges")) {
            g.edges.push_back({e.at("from").get<std::string>(), e.at("to").get<std::string>(),
                               number(e, "energy"), number(e, "time")});
        }
    }
    return g;
}

Json to_json(const Instance& inst) {
    Json out = Json::object();
    if (!inst.label.empty()) {
        out["label"] = inst.label;
    }
    out["machines"] = inst.machines;
    out["c_onoff"] = number_json(inst.c_onoff);
    out["horizon"] = inst.horizon();
    out["energy_function"] = to_json(inst.energy);
    out["jobs"] = Json::array();
    for (const auto& job : inst.jobs) {
        Json jj = {{"id", job.id}, {"p", job.p}, {"r", job.r}, {"d", job.d}};
        if (job.e_proc) {
            jj["e_proc"] = number_json(*job.e_proc);
        }
        out["jobs"].push_back(std::move(jj));
    }
    if (!inst.generation_assignment.empty()) {
        out["generation_assignment"] = inst.generation_assignment;
    }
    return out;
}

Instance instance_from_json(const Json& j) {
    Instance inst;
    inst.label = j.value("label", std::string{});
    inst.machines = static_cast<int>(integer(j, "machines"));
    inst.c_onoff = number(j, "c_onoff");
    inst.energy = energy_function_from_json(j.at("energy_function"));
    for (const auto& jj : j.at("jobs")) {
        Job job;
        job.id = static_cast<int>(integer(jj, "id"));
        job.p = integer(jj, "p");
        job.r = integer(jj, "r");
        job.d = integer(jj, "d");
        if (jj.contains("e_proc") && !jj.at("e_proc").is_null()) {
            job.e_proc = number(jj, "e_proc");
        }
        inst.jobs.push_back(job);
    }
    if (j.contains("generation_assignment")) {
        inst.generation_assignment = j.at("generation_assignment").get<std::vector<int>>();
    }
    if (j.contains("horizon") && integer(j, "horizon") != inst.horizon()) {
        throw ValidationError("horizon must equal the largest deadline");
    }
    return inst;
}

Json to_json(const Solution& sol) {
    Json start = Json::array();
    for (double s : sol.start) {
        start.push_back(number_json(s));
    }
    return {{"assignment", sol.assignment}, {"start", std::move(start)}};
}

Solution solution_from_json(const Json& j) {
    Solution sol;
    sol.assignment = j.at("assignment").get<std::vector<int>>();
    sol.start = j.at("start").get<std::vector<double>>();
    return sol;
}

std::vector<EnergySample> read_samples_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<EnergySample> out;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (header) {
            header = false;
            if (line.find_first_of("0123456789") != 0) {
                continue;
            }
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ValidationError("malformed sample line: " + line);
        }
        try {
            out.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
        } catch (const std::logic_error&) {
            throw ValidationError("malformed sample line: " + line);
        }
    }
    return out;
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << dump(j) << '\n';
}

std::string dump(const Json& j) { return j.dump(2); }

} // namespace idle_energy
