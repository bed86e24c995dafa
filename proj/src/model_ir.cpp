#include <idle_energy/error.hpp>
#include <idle_energy/model_ir.hpp>

#include <algorithm>
#include <cmath>

namespace idle_energy::milp {

LinearExpr& LinearExpr::add(VarId v, double coef) {
    if (!v.valid()) {
        throw ModelError("linear expression references an undeclared variable");
    }
    if (coef != 0.0) {
        terms_.emplace_back(v, coef);
    }
    return *this;
}

LinearExpr& LinearExpr::add(const LinearExpr& other, double scale) {
    for (const auto& [v, c] : other.terms_) {
        add(v, c * scale);
    }
    constant_ += other.constant_ * scale;
    return *this;
}

double LinearExpr::value(std::span<const double> values) const {
    double sum = constant_;
    for (const auto& [v, c] : terms_) {
        sum += c * values[v.index];
    }
    return sum;
}

VarId ModelIR::add_variable(std::string name, VarKind kind, double lower, double upper,
                            Annotation annotation) {
    if (by_name_.contains(name)) {
        throw ModelError("duplicate variable name '" + name + "'");
    }
    const VarId id{static_cast<int>(variables_.size())};
    by_name_.emplace(name, id);
    variables_.push_back({std::move(name), kind, lower, upper});
    annotations_.push_back(std::move(annotation));
    return id;
}

void ModelIR::add_constraint(std::string name, LinearExpr lhs, Relation relation, double rhs) {
    // Merge duplicate variables so writers see one coefficient per column.
    std::map<VarId, double> merged;
    for (const auto& [v, c] : lhs.terms()) {
        merged[v] += c;
    }
    LinearExpr clean;
    for (const auto& [v, c] : merged) {
        clean.add(v, c);
    }
    constraints_.push_back({std::move(name), std::move(clean), relation, rhs - lhs.constant()});
}

VarId ModelIR::find(const std::string& name) const {
    const auto it = by_name_.find(name);
    return it == by_name_.end() ? VarId{} : it->second;
}

std::size_t ModelIR::count_role(const std::string& role) const {
    return static_cast<std::size_t>(std::count_if(annotations_.begin(), annotations_.end(),
                                                  [&](const Annotation& a) { return a.role == role; }));
}

std::size_t ModelIR::count_kind(VarKind kind) const {
    return static_cast<std::size_t>(std::count_if(variables_.begin(), variables_.end(),
                                                  [&](const Variable& v) { return v.kind == kind; }));
}

void ModelIR::validate() const {
    const int n = static_cast<int>(variables_.size());
    auto check_expr = [&](const LinearExpr& e, const std::string& where) {
        for (const auto& [v, c] : e.terms()) {
            if (v.index < 0 || v.index >= n) {
                throw ModelError(where + " references an undeclared variable");
            }
            if (!std::isfinite(c)) {
                throw ModelError(where + " has a non-finite coefficient");
            }
        }
    };
    for (const auto& row : constraints_) {
        check_expr(row.lhs, "constraint " + row.name);
    }
    check_expr(objective_, "objective");
    for (const auto& v : variables_) {
        if (v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0)) {
            throw ModelError("binary " + v.name + " has bounds outside [0, 1]");
        }
        if (v.lower > v.upper) {
            throw ModelError("variable " + v.name + " has empty bounds");
        }
    }
    if (by_name_.size() != variables_.size()) {
        throw ModelError("variable names are not unique");
    }
}

std::vector<ConstraintViolation> ModelIR::check(std::span<const double> values, double tol) const {
    if (values.size() != variables_.size()) {
        throw ModelError("value vector does not match the variable count");
    }
    std::vector<ConstraintViolation> out;
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        const auto& v = variables_[i];
        const double x = values[i];
        if (x < v.lower - tol || x > v.upper + tol) {
            out.push_back({"bounds of " + v.name, std::max(v.lower - x, x - v.upper)});
        }
        if (v.kind == VarKind::Binary && std::abs(x - std::round(x)) > tol) {
            out.push_back({"integrality of " + v.name, std::abs(x - std::round(x))});
        }
    }
    for (const auto& row : constraints_) {
        const double lhs = row.lhs.value(values);
        const double scale = tol * std::max(1.0, std::abs(row.rhs));
        double excess = 0.0;
        switch (row.relation) {
        case Relation::LessEqual: excess = lhs - row.rhs; break;
        case Relation::GreaterEqual: excess = row.rhs - lhs; break;
        case Relation::Equal: excess = std::abs(lhs - row.rhs); break;
        }
        if (excess > scale) {
            out.push_back({row.name, excess});
        }
    }
    return out;
}

std::vector<double> ModelIR::values_from(const std::map<std::string, double>& by_name) const {
    std::vector<double> out(variables_.size(), 0.0);
    for (const auto& [name, value] : by_name) {
        const VarId v = find(name);
        if (v.valid()) {
            out[v.index] = value;
        }
    }
    return out;
}

const char* to_string(Relation r) {
    switch (r) {
    case Relation::LessEqual: return "<=";
    case Relation::Equal: return "=";
    case Relation::GreaterEqual: return ">=";
    }
    return "?";
}

Json ModelIR::to_json() const {
    auto bound = [](double x) { return std::isfinite(x) ? Json(x) : Json(x > 0 ? "inf" : "-inf"); };
    auto expr = [&](const LinearExpr& e) {
        Json terms = Json::array();
        for (const auto& [v, c] : e.terms()) {
            terms.push_back({variables_[v.index].name, c});
        }
        return terms;
    };
    Json out = {{"formulation", formulation_}, {"variables", Json::array()},
                {"constraints", Json::array()}};
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        const auto& v = variables_[i];
        out["variables"].push_back({{"name", v.name},
                                    {"kind", v.kind == VarKind::Binary ? "binary" : "continuous"},
                                    {"lower", bound(v.lower)},
                                    {"upper", bound(v.upper)},
                                    {"role", annotations_[i].role},
                                    {"indices", annotations_[i].indices}});
    }
    for (const auto& row : constraints_) {
        out["constraints"].push_back({{"name", row.name},
                                      {"terms", expr(row.lhs)},
                                      {"relation", to_string(row.relation)},
                                      {"rhs", row.rhs}});
    }
    out["objective"] = {{"terms", expr(objective_)}, {"constant", objective_.constant()}};
    return out;
}

} // namespace idle_energy::milp
