#include <idle_energy/error.hpp>
#include <idle_energy/lp_format.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace idle_energy::milp {
namespace {

constexpr std::size_t kMaxLine = 200;

std::string number(double x) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, end);
}

// Emits " + 3 x_1" style terms, wrapping long rows.
class RowWriter {
public:
    RowWriter(std::ostream& out, std::string head) : out_(out), line_(std::move(head)) {}

    void term(double coef, const std::string& name) {
        std::string t = coef < 0 ? " - " : " + ";
        const double mag = std::abs(coef);
        if (mag != 1.0) {
            t += number(mag) + " ";
        }
        t += name;
        push(t);
    }
    void push(const std::string& piece) {
        if (line_.size() + piece.size() > kMaxLine) {
            out_ << line_ << '\n';
            line_ = "   ";
        }
        line_ += piece;
    }
    void finish() { out_ << line_ << '\n'; }

private:
    std::ostream& out_;
    std::string line_;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    for (auto& c : s) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return s;
}

std::optional<double> to_double(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        return used == s.size() ? std::optional(v) : std::nullopt;
    } catch (const std::logic_error&) {
        return std::nullopt;
    }
}

std::optional<double> trailing_number(const std::string& line) {
    const auto pos = line.find_last_of(" \t");
    return to_double(trim(pos == std::string::npos ? line : line.substr(pos + 1)));
}

SolverOutput parse_cbc(std::istringstream& in, const std::string& status_line) {
    SolverOutput out;
    const std::string s = lower(status_line);
    if (s.rfind("optimal", 0) == 0) {
        out.status = SolutionStatus::Optimal;
    } else if (s.find("infeasible") != std::string::npos) {
        out.status = SolutionStatus::Infeasible;
    } else if (s.find("unbounded") != std::string::npos) {
        out.status = SolutionStatus::Unbounded;
    } else if (s.rfind("stopped", 0) == 0) {
        out.stopped = true;
        // "Stopped on time (no integer solution - continuous used)" has no incumbent.
        out.status = s.find("no integer solution") != std::string::npos ? SolutionStatus::NoSolution
                                                                        : SolutionStatus::Feasible;
    }
    if (out.status == SolutionStatus::Optimal || out.status == SolutionStatus::Feasible) {
        const auto pos = s.find("objective value");
        if (pos != std::string::npos) {
            out.objective = to_double(trim(status_line.substr(pos + 15)));
        }
    }
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string first;
        std::string name;
        std::string value;
        row >> first;
        if (first == "**") {
            row >> first;
        }
        if (!(row >> name >> value)) {
            continue;
        }
        if (const auto v = to_double(value)) {
            out.values[name] = *v;
        }
    }
    return out;
}

SolverOutput parse_key_value(std::istringstream& in, const std::string& first_line) {
    SolverOutput out;
    std::string line = first_line;
    do {
        line = trim(line);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto colon = line.find(':');
        if (colon != std::string::npos) {
            const std::string key = lower(trim(line.substr(0, colon)));
            const std::string value = trim(line.substr(colon + 1));
            if (key == "status") {
                const std::string v = lower(value);
                if (v == "optimal") {
                    out.status = SolutionStatus::Optimal;
                } else if (v == "feasible") {
                    out.status = SolutionStatus::Feasible;
                } else if (v == "infeasible") {
                    out.status = SolutionStatus::Infeasible;
                } else if (v == "unbounded") {
                    out.status = SolutionStatus::Unbounded;
                } else if (v == "nosolution" || v == "no_solution") {
                    out.status = SolutionStatus::NoSolution;
                }
            } else if (key == "objective") {
                out.objective = to_double(value);
            } else if (key == "bound") {
                out.bound = to_double(value);
            } else if (key == "stopped") {
                out.stopped = lower(value) == "true" || value == "1";
            }
            continue;
        }
        std::istringstream row(line);
        std::string name;
        std::string value;
        if (row >> name >> value) {
            if (const auto v = to_double(value)) {
                out.values[name] = *v;
            }
        }
    } while (std::getline(in, line));
    return out;
}

} // namespace

std::string sanitize_lp_name(const std::string& name) {
    static const std::string allowed = "!\"#$%&()/,.;?@_`'{}|~";
    std::string out;
    for (char c : name) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || allowed.find(c) != std::string::npos;
        out += ok ? c : '_';
    }
    if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0])) || out[0] == '.' ||
        ((out[0] == 'e' || out[0] == 'E') && out.size() > 1 &&
         (std::isdigit(static_cast<unsigned char>(out[1])) || out[1] == 'e' || out[1] == 'E'))) {
        out.insert(out.begin(), '_');
    }
    return out;
}

void write_lp(const ModelIR& model, std::ostream& out) {
    model.validate();
    const auto& vars = model.variables();
    std::vector<std::string> names;
    std::set<std::string> seen;
    for (const auto& v : vars) {
        names.push_back(sanitize_lp_name(v.name));
        if (!seen.insert(names.back()).second) {
            throw ModelError("variable name collision after sanitizing: " + names.back());
        }
    }
    std::set<std::string> row_names;
    for (const auto& row : model.constraints()) {
        if (!row_names.insert(sanitize_lp_name(row.name)).second) {
            throw ModelError("constraint name collision after sanitizing: " + row.name);
        }
    }

    out << "\\ " << (model.formulation().empty() ? "model" : model.formulation()) << '\n';
    out << "Minimize\n";
    {
        RowWriter obj(out, " obj:");
        const auto& terms = model.objective().terms();
        for (const auto& [v, c] : terms) {
            obj.term(c, names[v.index]);
        }
        if (model.objective().constant() != 0.0) {
            obj.push((model.objective().constant() < 0 ? " - " : " + ") +
                     number(std::abs(model.objective().constant())));
        }
        if (terms.empty() && !names.empty()) {
            obj.push(" 0 " + names.front());
        }
        obj.finish();
    }
    out << "Subject To\n";
    for (const auto& row : model.constraints()) {
        RowWriter w(out, " " + sanitize_lp_name(row.name) + ":");
        for (const auto& [v, c] : row.lhs.terms()) {
            w.term(c, names[v.index]);
        }
        if (row.lhs.terms().empty()) {
            w.push(" 0 " + names.front());
        }
        w.push(std::string(" ") + to_string(row.relation) + " " + number(row.rhs));
        w.finish();
    }
    out << "Bounds\n";
    for (std::size_t i = 0; i < vars.size(); ++i) {
        const auto& v = vars[i];
        if (v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0) {
            continue;
        }
        const bool lo_inf = v.lower == -kInfinity;
        const bool hi_inf = v.upper == kInfinity;
        if (lo_inf && hi_inf) {
            out << " " << names[i] << " free\n";
        } else if (v.lower == v.upper) {
            out << " " << names[i] << " = " << number(v.lower) << '\n';
        } else if (hi_inf) {
            if (v.lower != 0.0) {
                out << " " << names[i] << " >= " << number(v.lower) << '\n';
            }
        } else {
            out << " " << (lo_inf ? std::string("-inf") : number(v.lower)) << " <= " << names[i]
                << " <= " << number(v.upper) << '\n';
        }
    }
    if (model.count_kind(VarKind::Binary) > 0) {
        out << "Binaries\n";
        RowWriter w(out, "");
        for (std::size_t i = 0; i < vars.size(); ++i) {
            if (vars[i].kind == VarKind::Binary) {
                w.push(" " + names[i]);
            }
        }
        w.finish();
    }
    out << "End\n";
}

void emit_lp(const ModelIR& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    write_lp(model, out);
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

SolverOutput parse_solution_text(const std::string& text) {
    std::istringstream in(text);
    std::string first;
    while (std::getline(in, first) && trim(first).empty()) {
    }
    const std::string head = lower(trim(first));
    if (head.rfind("status", 0) == 0 || head.rfind("#", 0) == 0 || head.rfind("objective:", 0) == 0) {
        return parse_key_value(in, first);
    }
    if (head.empty()) {
        throw SolverError("empty solution file");
    }
    return parse_cbc(in, trim(first));
}

SolverOutput parse_solution_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw SolverError("solution file " + path.string() + " was not written");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_solution_text(buf.str());
}

std::optional<double> parse_log_bound(const std::string& log) {
    std::istringstream in(log);
    std::string line;
    std::optional<double> bound;
    while (std::getline(in, line)) {
        const std::string l = lower(trim(line));
        if (l.rfind("lower bound:", 0) == 0 || l.rfind("best possible:", 0) == 0) {
            if (const auto v = trailing_number(trim(line))) {
                bound = v;
            }
        }
    }
    return bound;
}

} // namespace idle_energy::milp
