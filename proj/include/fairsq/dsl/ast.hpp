#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fairsq/relation.hpp"

namespace fairsq::dsl {

// 1-based line and column; columns count code points, not bytes.
struct SourcePos {
    int line = 1;
    int column = 1;

    friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

// Linear form over named variables. Terms never carry a zero coefficient.
class LinearExpression {
public:
    LinearExpression() = default;
    explicit LinearExpression(double constant) : constant_(constant) { check_finite(constant); }

    static LinearExpression variable(std::string name, double coefficient = 1.0)
    {
        LinearExpression e;
        e.add_term(std::move(name), coefficient);
        return e;
    }

    void add_term(const std::string& name, double coefficient)
    {
        if (name.empty())
            throw std::invalid_argument("linear expression: empty variable name");
        check_finite(coefficient);
        double& slot = terms_[name];
        slot += coefficient;
        check_finite(slot);
        if (slot == 0.0)
            terms_.erase(name);
    }

    void add_constant(double c)
    {
        check_finite(c);
        constant_ += c;
        check_finite(constant_);
    }

    LinearExpression& operator+=(const LinearExpression& other)
    {
        for (const auto& [name, coef] : other.terms_)
            add_term(name, coef);
        add_constant(other.constant_);
        return *this;
    }

    LinearExpression& operator-=(const LinearExpression& other)
    {
        for (const auto& [name, coef] : other.terms_)
            add_term(name, -coef);
        add_constant(-other.constant_);
        return *this;
    }

    friend LinearExpression operator-(LinearExpression a, const LinearExpression& b) { return a -= b; }
    friend LinearExpression operator+(LinearExpression a, const LinearExpression& b) { return a += b; }

    const std::map<std::string, double>& terms() const noexcept { return terms_; }
    double constant() const noexcept { return constant_; }

    // `x` with coefficient one and no constant.
    std::optional<std::string> as_variable() const
    {
        if (terms_.size() == 1 && constant_ == 0.0 && terms_.begin()->second == 1.0)
            return terms_.begin()->first;
        return std::nullopt;
    }

    friend bool operator==(const LinearExpression&, const LinearExpression&) = default;

private:
    static void check_finite(double v)
    {
        if (!std::isfinite(v))
            throw std::domain_error("linear expression: non-finite value");
    }

    std::map<std::string, double> terms_;
    double constant_ = 0.0;
};

// Normalized `lhs REL 0`.
struct AtomicCondition {
    LinearExpression lhs;
    Relation relation = Relation::Le;
    SourcePos pos;
};

// Boolean combination of atoms, boolean variables and literals.
struct Condition {
    enum class Kind { Atom, Variable, Literal, And, Or };

    Kind kind = Kind::Literal;
    AtomicCondition atom;     // Kind::Atom
    std::string variable;     // Kind::Variable
    bool value = false;       // Kind::Literal
    std::vector<Condition> children; // Kind::And / Kind::Or
    SourcePos pos;

    static Condition literal(bool v, SourcePos p = {})
    {
        Condition c;
        c.kind = Kind::Literal;
        c.value = v;
        c.pos = p;
        return c;
    }
    static Condition of_atom(AtomicCondition a)
    {
        Condition c;
        c.kind = Kind::Atom;
        c.pos = a.pos;
        c.atom = std::move(a);
        return c;
    }
    static Condition of_variable(std::string name, SourcePos p)
    {
        Condition c;
        c.kind = Kind::Variable;
        c.variable = std::move(name);
        c.pos = p;
        return c;
    }
    static Condition combine(Kind k, std::vector<Condition> parts)
    {
        if (parts.size() == 1)
            return std::move(parts.front());
        Condition c;
        c.kind = k;
        c.pos = parts.empty() ? SourcePos{} : parts.front().pos;
        c.children = std::move(parts);
        return c;
    }
};

struct Gauss {
    double mean = 0.0;
    double stddev = 1.0;
};

struct Bernoulli {
    double probability = 0.5;
};

struct Statement;
using Block = std::vector<Statement>;

struct Assign {
    std::string target;
    LinearExpression value;
};

struct AssignCondition {
    std::string target;
    Condition value;
};

struct Draw {
    std::string target;
    std::variant<Gauss, Bernoulli> distribution;
};

struct Branch {
    Condition guard;
    Block body;
};

struct IfChain {
    std::vector<Branch> branches;
    std::optional<Block> else_body;
};

struct Statement {
    std::variant<Assign, AssignCondition, Draw, IfChain> node;
    SourcePos pos;
};

struct PopulationModel {
    std::string name;
    Block body;
    std::vector<std::string> returns;
    SourcePos pos;
    SourcePos return_pos;
};

struct DecisionProgram {
    std::string name;
    std::vector<std::string> params;
    Block body;
    Condition result; // variable, literal, or comparison
    SourcePos pos;
    SourcePos return_pos;
};

struct FairnessSpec {
    Condition sensitive;
    std::string qualified;
    double epsilon = 0.1;
    SourcePos pos;
    SourcePos qualified_pos;
    SourcePos epsilon_pos;
};

struct VerificationTask {
    PopulationModel model;
    DecisionProgram program;
    FairnessSpec spec;
};

} // namespace fairsq::dsl
