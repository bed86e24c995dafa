#pragma once

#include <idle_energy/json_io.hpp>

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace idle_energy::milp {

enum class VarKind { Binary, Continuous };
enum class Relation { LessEqual, Equal, GreaterEqual };

struct VarId {
    int index = -1;
    bool valid() const { return index >= 0; }
    auto operator<=>(const VarId&) const = default;
};

struct Variable {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lower = 0.0;
    double upper = kInfinity;
};

/// Role of a variable in its formulation plus its (1-based) indices, e.g.
/// {"x", {j, j2, k}}. Decoding solver output relies on these.
struct Annotation {
    std::string role;
    std::vector<int> indices;
};

class LinearExpr {
public:
    LinearExpr() = default;
    LinearExpr(VarId v, double coef = 1.0) { add(v, coef); }

    LinearExpr& add(VarId v, double coef = 1.0);
    LinearExpr& add(const LinearExpr& other, double scale = 1.0);
    LinearExpr& add_constant(double c) {
        constant_ += c;
        return *this;
    }

    const std::vector<std::pair<VarId, double>>& terms() const { return terms_; }
    double constant() const { return constant_; }
    double value(std::span<const double> values) const;

private:
    std::vector<std::pair<VarId, double>> terms_;
    double constant_ = 0.0;
};

struct Constraint {
    std::string name;
    LinearExpr lhs;  ///< constant already moved to rhs
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
};

struct ConstraintViolation {
    std::string constraint;
    double amount = 0.0;
};

/// Solver-agnostic MILP: minimize objective subject to linear rows and bounds.
class ModelIR {
public:
    explicit ModelIR(std::string formulation = {}) : formulation_(std::move(formulation)) {}

    VarId add_variable(std::string name, VarKind kind, double lower, double upper,
                       Annotation annotation = {});
    VarId add_binary(std::string name, Annotation annotation = {}) {
        return add_variable(std::move(name), VarKind::Binary, 0.0, 1.0, std::move(annotation));
    }
    /// `lhs relation rhs`; constants in lhs are folded into rhs.
    void add_constraint(std::string name, LinearExpr lhs, Relation relation, double rhs);

    void set_objective(LinearExpr objective) { objective_ = std::move(objective); }
    void add_to_objective(const LinearExpr& term) { objective_.add(term); }

    const std::string& formulation() const { return formulation_; }
    const std::vector<Variable>& variables() const { return variables_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    const LinearExpr& objective() const { return objective_; }
    const Variable& variable(VarId v) const { return variables_.at(v.index); }
    const Annotation& annotation(VarId v) const { return annotations_.at(v.index); }

    VarId find(const std::string& name) const;
    std::size_t count_role(const std::string& role) const;
    std::size_t count_kind(VarKind kind) const;

    /// Structural invariants: declared references, unique names, binary bounds.
    void validate() const;

    /// Bound and row violations beyond `tol` for a full value vector.
    std::vector<ConstraintViolation> check(std::span<const double> values, double tol = 1e-6) const;
    double objective_value(std::span<const double> values) const { return objective_.value(values); }

    /// Values by variable name; unnamed variables default to 0.
    std::vector<double> values_from(const std::map<std::string, double>& by_name) const;

    Json to_json() const;

private:
    std::string formulation_;
    std::vector<Variable> variables_;
    std::vector<Annotation> annotations_;
    std::vector<Constraint> constraints_;
    LinearExpr objective_;
    std::map<std::string, VarId> by_name_;
};

const char* to_string(Relation r);

} // namespace idle_energy::milp
