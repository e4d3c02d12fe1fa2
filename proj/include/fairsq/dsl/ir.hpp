#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "fairsq/relation.hpp"

// Slot-indexed lowering of validated programs. Model and decision program
// share one slot space; every name is resolved.
namespace fairsq::ir {

struct Linear {
    std::vector<std::pair<std::size_t, double>> terms; // (slot, coefficient)
    double constant = 0.0;
};

struct Cond {
    enum class Op { Atom, Var, Const, And, Or };

    Op op = Op::Const;
    Linear lhs;                 // Op::Atom
    Relation relation = Relation::Le;
    std::size_t slot = 0;       // Op::Var
    bool value = false;         // Op::Const
    std::vector<Cond> kids;     // Op::And / Op::Or
};

struct Stmt {
    enum class Op { AssignReal, AssignBool, DrawGauss, DrawBernoulli, If };

    Op op = Op::AssignReal;
    std::size_t slot = 0;
    Linear value;               // AssignReal
    Cond cond;                  // AssignBool
    std::size_t site = 0;       // Draw*: index into the base vector
    std::vector<std::pair<Cond, std::vector<Stmt>>> branches; // If
    std::vector<Stmt> else_body;
};

using Body = std::vector<Stmt>;

} // namespace fairsq::ir
