#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

#include "fairsq/dsl/ast.hpp"

namespace fairsq::dsl {

// Shortest decimal that round-trips to the same double.
inline std::string format_number(double v)
{
    if (v == 0.0)
        return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return res.ec == std::errc() ? std::string(buf, res.ptr) : std::to_string(v);
}

inline std::string format_linear(const LinearExpression& e)
{
    std::string out;
    bool first = true;
    auto emit = [&](double coef, const std::string* name) {
        const bool negative = coef < 0;
        const double mag = std::fabs(coef);
        if (first)
            out += negative ? "-" : "";
        else
            out += negative ? " - " : " + ";
        if (name) {
            if (mag != 1.0)
                out += format_number(mag) + " * ";
            out += *name;
        } else {
            out += format_number(mag);
        }
        first = false;
    };
    for (const auto& [name, coef] : e.terms())
        emit(coef, &name);
    if (e.constant() != 0.0 || first)
        emit(e.constant(), nullptr);
    return out;
}

inline std::string format_condition(const Condition& c)
{
    switch (c.kind) {
    case Condition::Kind::Literal:
        return c.value ? "true" : "false";
    case Condition::Kind::Variable:
        return c.variable;
    case Condition::Kind::Atom:
        return format_linear(c.atom.lhs) + " " + std::string(to_string(c.atom.relation)) + " 0";
    case Condition::Kind::And:
    case Condition::Kind::Or: {
        const bool is_and = c.kind == Condition::Kind::And;
        std::string out;
        for (std::size_t i = 0; i < c.children.size(); ++i) {
            if (i)
                out += is_and ? " and " : " or ";
            const auto& child = c.children[i];
            const bool wrap = child.kind == Condition::Kind::Or || (!is_and && child.kind == Condition::Kind::And);
            out += wrap ? "(" + format_condition(child) + ")" : format_condition(child);
        }
        return out;
    }
    }
    return {};
}

namespace detail {

inline void print_block(std::string& out, const Block& block, int indent);

inline void print_statement(std::string& out, const Statement& s, int indent)
{
    const std::string pad(static_cast<std::size_t>(indent), ' ');
    if (const auto* a = std::get_if<Assign>(&s.node)) {
        out += pad + a->target + " <- " + format_linear(a->value) + "\n";
    } else if (const auto* b = std::get_if<AssignCondition>(&s.node)) {
        const bool wrap = b->value.kind == Condition::Kind::Or || b->value.kind == Condition::Kind::And;
        const std::string cond = format_condition(b->value);
        out += pad + b->target + " <- " + (wrap ? "(" + cond + ")" : cond) + "\n";
    } else if (const auto* d = std::get_if<Draw>(&s.node)) {
        out += pad + d->target + " ~ ";
        if (const auto* g = std::get_if<Gauss>(&d->distribution))
            out += "gauss(" + format_number(g->mean) + ", " + format_number(g->stddev) + ")\n";
        else
            out += "bernoulli(" + format_number(std::get<Bernoulli>(d->distribution).probability) + ")\n";
    } else {
        const auto& chain = std::get<IfChain>(s.node);
        for (std::size_t i = 0; i < chain.branches.size(); ++i) {
            out += pad + (i == 0 ? "if (" : "elif (") + format_condition(chain.branches[i].guard) + ")\n";
            print_block(out, chain.branches[i].body, indent + 2);
        }
        if (chain.else_body) {
            out += pad + "else\n";
            print_block(out, *chain.else_body, indent + 2);
        }
    }
}

inline void print_block(std::string& out, const Block& block, int indent)
{
    for (const auto& s : block)
        print_statement(out, s, indent);
}

} // namespace detail

// Canonical layout: two-space indentation, atoms as `lhs REL 0`, ASCII arrows.
inline std::string pretty_print(const VerificationTask& task)
{
    std::string out;
    out += "define " + task.model.name + "()\n";
    detail::print_block(out, task.model.body, 2);
    out += "  return ";
    for (std::size_t i = 0; i < task.model.returns.size(); ++i)
        out += (i ? ", " : "") + task.model.returns[i];
    out += "\n\ndefine " + task.program.name + "(";
    for (std::size_t i = 0; i < task.program.params.size(); ++i)
        out += (i ? ", " : "") + task.program.params[i];
    out += ")\n";
    detail::print_block(out, task.program.body, 2);
    out += "  return " + format_condition(task.program.result) + "\n\n";
    out += "spec {\n";
    out += "  sensitive: " + format_condition(task.spec.sensitive) + ";\n";
    out += "  qualified: " + task.spec.qualified + ";\n";
    out += "  epsilon: " + format_number(task.spec.epsilon) + ";\n";
    out += "}\n";
    return out;
}

} // namespace fairsq::dsl
