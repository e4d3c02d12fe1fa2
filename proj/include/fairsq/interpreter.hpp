#pragma once

#include <vector>

#include "fairsq/dsl/validate.hpp"

namespace fairsq {

struct ConcreteOutcome {
    bool qualified = false;
    bool sensitive = false;
};

namespace detail {

template <class Source>
class Interpreter {
public:
    Interpreter(const dsl::ValidatedTask& task, Source& source, std::vector<double>& slots)
        : task_(task), source_(source), slots_(slots)
    {
    }

    ConcreteOutcome run()
    {
        slots_.assign(task_.slot_count(), 0.0);
        exec(task_.model);
        ConcreteOutcome out;
        out.sensitive = eval(task_.sensitive);
        for (std::size_t i = 0; i < task_.program_params.size(); ++i)
            slots_[task_.program_params[i]] = slots_[task_.model_returns[i]];
        exec(task_.program);
        out.qualified = eval(task_.result);
        return out;
    }

private:
    double eval(const ir::Linear& e) const
    {
        double v = e.constant;
        for (const auto& [slot, coef] : e.terms)
            v += coef * slots_[slot];
        return v;
    }

    bool eval(const ir::Cond& c) const
    {
        switch (c.op) {
        case ir::Cond::Op::Const: return c.value;
        case ir::Cond::Op::Atom: return holds(eval(c.lhs), c.relation);
        case ir::Cond::Op::Var: return slots_[c.slot] != 0.0;
        case ir::Cond::Op::And:
            for (const auto& k : c.kids)
                if (!eval(k))
                    return false;
            return true;
        case ir::Cond::Op::Or:
            for (const auto& k : c.kids)
                if (eval(k))
                    return true;
            return false;
        }
        return false;
    }

    void exec(const ir::Body& body)
    {
        for (const auto& s : body) {
            switch (s.op) {
            case ir::Stmt::Op::AssignReal: slots_[s.slot] = eval(s.value); break;
            case ir::Stmt::Op::AssignBool: slots_[s.slot] = eval(s.cond) ? 1.0 : 0.0; break;
            case ir::Stmt::Op::DrawGauss: slots_[s.slot] = source_.gaussian(task_.base[s.site]); break;
            case ir::Stmt::Op::DrawBernoulli: slots_[s.slot] = source_.bernoulli(task_.base[s.site]) ? 1.0 : 0.0; break;
            case ir::Stmt::Op::If: {
                bool taken = false;
                for (const auto& [cond, branch] : s.branches) {
                    if (eval(cond)) {
                        exec(branch);
                        taken = true;
                        break;
                    }
                }
                if (!taken)
                    exec(s.else_body);
                break;
            }
            }
        }
    }

    const dsl::ValidatedTask& task_;
    Source& source_;
    std::vector<double>& slots_;
};

} // namespace detail

// Direct execution of popModel then the decision program. `source` provides
// `double gaussian(const DrawSite&)` and `bool bernoulli(const DrawSite&)`.
template <class Source>
ConcreteOutcome interpret(const dsl::ValidatedTask& task, Source& source, std::vector<double>& scratch)
{
    return detail::Interpreter<Source>(task, source, scratch).run();
}

// Replays fixed draw values: one per Gaussian dimension and one per Bernoulli draw.
struct FixedDraws {
    std::vector<double> gaussian_values;
    std::vector<bool> bernoulli_values;

    double gaussian(const dsl::DrawSite& site) const { return gaussian_values.at(site.index); }
    bool bernoulli(const dsl::DrawSite& site) const { return bernoulli_values.at(site.index); }
};

} // namespace fairsq
