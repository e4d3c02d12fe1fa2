#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fairsq/dsl/ast.hpp"
#include "fairsq/dsl/ir.hpp"

namespace fairsq::dsl {

enum class Severity { Warning, Error };

struct Diagnostic {
    Severity severity = Severity::Error;
    SourcePos pos;
    std::string code;
    std::string message;

    std::string to_string() const
    {
        return std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": "
            + (severity == Severity::Error ? "error" : "warning") + " [" + code + "] " + message;
    }
};

enum class VarKind { Real, Bool, Bernoulli };

// One `~` statement of the population model; the ordered list of sites is the
// base random vector.
struct DrawSite {
    enum class Kind { Gaussian, Bernoulli };

    std::string variable;
    std::string label; // unique display name
    Kind kind = Kind::Gaussian;
    double mean = 0.0;
    double stddev = 1.0;
    double probability = 0.5;
    SourcePos pos;
    std::size_t index = 0; // Gaussian dimension or Bernoulli index
};

struct ValidatedTask {
    VerificationTask task;
    std::vector<DrawSite> base;
    std::vector<std::size_t> gaussian_sites;  // site ids, in dimension order
    std::vector<std::size_t> bernoulli_sites; // site ids, in Bernoulli index order
    ir::Body model;
    ir::Body program;
    std::vector<std::size_t> model_returns;
    std::vector<std::size_t> program_params;
    ir::Cond sensitive; // over model slots at model exit
    ir::Cond result;    // over program slots at program exit
    std::vector<VarKind> slot_kinds;
    std::vector<std::string> slot_names;
    std::vector<Diagnostic> warnings;

    std::size_t dimension() const noexcept { return base.size(); }
    std::size_t gaussian_dimension() const noexcept { return gaussian_sites.size(); }
    std::size_t bernoulli_count() const noexcept { return bernoulli_sites.size(); }
    std::size_t slot_count() const noexcept { return slot_kinds.size(); }
};

struct ValidationResult {
    std::optional<ValidatedTask> task;
    std::vector<Diagnostic> diagnostics; // errors and warnings, in discovery order

    bool ok() const noexcept { return task.has_value(); }
};

namespace detail {

class Validator {
public:
    ValidationResult run(const VerificationTask& task)
    {
        ValidatedTask out;

        Scope model_scope;
        Defined model_defined;
        in_model_ = true;
        out.model = lower_block(task.model.body, model_scope, model_defined);
        for (const auto& name : task.model.returns) {
            auto slot = lookup(model_scope, model_defined, name, task.model.return_pos);
            out.model_returns.push_back(slot.value_or(0));
        }
        out.sensitive = lower_cond(task.spec.sensitive, model_scope, model_defined);

        in_model_ = false;
        Scope program_scope;
        Defined program_defined;
        const auto& params = task.program.params;
        const bool arity_ok = params.size() == task.model.returns.size();
        if (!arity_ok) {
            error(task.program.pos, "arity-mismatch",
                "population model returns " + std::to_string(task.model.returns.size()) + " value(s) but '"
                    + task.program.name + "' takes " + std::to_string(params.size()));
        }
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (program_scope.count(params[i])) {
                error(task.program.pos, "duplicate-parameter", "parameter '" + params[i] + "' declared twice");
                continue;
            }
            if (arity_ok && params[i] != task.model.returns[i]) {
                error(task.program.pos, "name-mismatch",
                    "parameter " + std::to_string(i + 1) + " is '" + params[i] + "' but the population model returns '"
                        + task.model.returns[i] + "' in that position");
            }
            VarKind kind = VarKind::Real;
            if (arity_ok && i < out.model_returns.size() && out.model_returns[i] < kinds_.size())
                kind = kinds_[out.model_returns[i]];
            const std::size_t slot = allocate(program_scope, params[i], kind);
            program_defined.insert(slot);
            out.program_params.push_back(slot);
        }
        out.program = lower_block(task.program.body, program_scope, program_defined);
        out.result = lower_cond(task.program.result, program_scope, program_defined);

        const auto& spec = task.spec;
        if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0))
            error(spec.epsilon_pos, "invalid-epsilon", "epsilon must lie strictly between 0 and 1");
        const bool names_result = task.program.result.kind == Condition::Kind::Variable
            && task.program.result.variable == spec.qualified;
        if (!names_result && spec.qualified != task.program.name) {
            error(spec.qualified_pos, "unknown-qualified",
                "qualified must name the decision program or the variable it returns, got '" + spec.qualified + "'");
        }

        ValidationResult result;
        result.diagnostics = diagnostics_;
        if (errors_ == 0) {
            out.task = task;
            out.base = sites_;
            for (std::size_t i = 0; i < sites_.size(); ++i)
                (sites_[i].kind == DrawSite::Kind::Gaussian ? out.gaussian_sites : out.bernoulli_sites).push_back(i);
            out.slot_kinds = kinds_;
            out.slot_names = names_;
            for (const auto& d : diagnostics_)
                if (d.severity == Severity::Warning)
                    out.warnings.push_back(d);
            result.task = std::move(out);
        }
        return result;
    }

private:
    using Scope = std::map<std::string, std::size_t>;
    using Defined = std::set<std::size_t>;

    void error(SourcePos pos, std::string code, std::string message)
    {
        diagnostics_.push_back({Severity::Error, pos, std::move(code), std::move(message)});
        ++errors_;
    }

    void warning(SourcePos pos, std::string code, std::string message)
    {
        diagnostics_.push_back({Severity::Warning, pos, std::move(code), std::move(message)});
    }

    std::size_t allocate(Scope& scope, const std::string& name, VarKind kind)
    {
        const std::size_t slot = kinds_.size();
        kinds_.push_back(kind);
        names_.push_back(name);
        scope.emplace(name, slot);
        return slot;
    }

    std::optional<std::size_t> lookup(const Scope& scope, const Defined& defined, const std::string& name, SourcePos pos)
    {
        const auto it = scope.find(name);
        if (it == scope.end() || !defined.count(it->second)) {
            error(pos, "undefined-variable", "'" + name + "' is used before it is assigned or drawn");
            return std::nullopt;
        }
        return it->second;
    }

    static std::string_view kind_name(VarKind k)
    {
        switch (k) {
        case VarKind::Real: return "real";
        case VarKind::Bool: return "boolean";
        case VarKind::Bernoulli: return "bernoulli";
        }
        return "?";
    }

    std::size_t define(Scope& scope, Defined& defined, const std::string& name, VarKind kind, SourcePos pos)
    {
        const auto it = scope.find(name);
        if (it == scope.end()) {
            const std::size_t slot = allocate(scope, name, kind);
            defined.insert(slot);
            return slot;
        }
        if (kinds_[it->second] != kind) {
            error(pos, "type-mismatch",
                "'" + name + "' is " + std::string(kind_name(kinds_[it->second])) + " but is assigned a "
                    + std::string(kind_name(kind)) + " value");
        }
        defined.insert(it->second);
        return it->second;
    }

    ir::Linear lower_linear(const LinearExpression& e, SourcePos pos, const Scope& scope, const Defined& defined)
    {
        ir::Linear out;
        out.constant = e.constant();
        for (const auto& [name, coef] : e.terms()) {
            const auto slot = lookup(scope, defined, name, pos);
            if (!slot)
                continue;
            if (kinds_[*slot] == VarKind::Bernoulli) {
                error(pos, "bernoulli-arithmetic",
                    "bernoulli variable '" + name + "' may only be compared with 0 or 1 using '=='");
                continue;
            }
            if (kinds_[*slot] == VarKind::Bool) {
                error(pos, "type-mismatch", "boolean variable '" + name + "' used in arithmetic");
                continue;
            }
            out.terms.emplace_back(*slot, coef);
        }
        return out;
    }

    ir::Cond lower_atom(const AtomicCondition& atom, const Scope& scope, const Defined& defined)
    {
        ir::Cond c;
        c.op = ir::Cond::Op::Atom;
        c.relation = atom.relation;
        const auto& terms = atom.lhs.terms();
        if (terms.size() == 1) {
            const auto it = scope.find(terms.begin()->first);
            if (it != scope.end() && defined.count(it->second) && kinds_[it->second] == VarKind::Bernoulli) {
                const double coef = terms.begin()->second;
                const double value = -atom.lhs.constant() / coef;
                if (atom.relation != Relation::Eq || !(value == 0.0 || value == 1.0)) {
                    error(atom.pos, "bernoulli-arithmetic",
                        "bernoulli variable '" + it->first + "' may only appear as '== 0' or '== 1'");
                }
                c.lhs.terms.emplace_back(it->second, coef);
                c.lhs.constant = atom.lhs.constant();
                return c;
            }
        }
        c.lhs = lower_linear(atom.lhs, atom.pos, scope, defined);
        if (atom.relation == Relation::Eq && !c.lhs.terms.empty()) {
            warning(atom.pos, "continuous-equality",
                "equality over continuous variables holds with probability zero");
        }
        return c;
    }

    ir::Cond lower_cond(const Condition& cond, const Scope& scope, const Defined& defined)
    {
        ir::Cond c;
        switch (cond.kind) {
        case Condition::Kind::Literal:
            c.op = ir::Cond::Op::Const;
            c.value = cond.value;
            return c;
        case Condition::Kind::Atom:
            return lower_atom(cond.atom, scope, defined);
        case Condition::Kind::Variable: {
            c.op = ir::Cond::Op::Var;
            const auto slot = lookup(scope, defined, cond.variable, cond.pos);
            if (slot) {
                c.slot = *slot;
                if (kinds_[*slot] != VarKind::Bool) {
                    error(cond.pos, kinds_[*slot] == VarKind::Bernoulli ? "bernoulli-arithmetic" : "type-mismatch",
                        "'" + cond.variable + "' is not boolean; compare it explicitly");
                }
            }
            return c;
        }
        case Condition::Kind::And:
        case Condition::Kind::Or:
            c.op = cond.kind == Condition::Kind::And ? ir::Cond::Op::And : ir::Cond::Op::Or;
            for (const auto& kid : cond.children)
                c.kids.push_back(lower_cond(kid, scope, defined));
            return c;
        }
        return c;
    }

    ir::Body lower_block(const Block& block, Scope& scope, Defined& defined)
    {
        ir::Body out;
        for (const auto& s : block)
            out.push_back(lower_statement(s, scope, defined));
        return out;
    }

    ir::Stmt lower_statement(const Statement& s, Scope& scope, Defined& defined)
    {
        ir::Stmt out;
        if (const auto* a = std::get_if<Assign>(&s.node)) {
            if (const auto v = a->value.as_variable()) {
                const auto it = scope.find(*v);
                if (it != scope.end() && defined.count(it->second) && kinds_[it->second] == VarKind::Bool) {
                    out.op = ir::Stmt::Op::AssignBool;
                    out.cond.op = ir::Cond::Op::Var;
                    out.cond.slot = it->second;
                    out.slot = define(scope, defined, a->target, VarKind::Bool, s.pos);
                    return out;
                }
            }
            out.op = ir::Stmt::Op::AssignReal;
            out.value = lower_linear(a->value, s.pos, scope, defined);
            out.slot = define(scope, defined, a->target, VarKind::Real, s.pos);
            return out;
        }
        if (const auto* b = std::get_if<AssignCondition>(&s.node)) {
            out.op = ir::Stmt::Op::AssignBool;
            out.cond = lower_cond(b->value, scope, defined);
            out.slot = define(scope, defined, b->target, VarKind::Bool, s.pos);
            return out;
        }
        if (const auto* d = std::get_if<Draw>(&s.node)) {
            if (!in_model_)
                error(s.pos, "draw-in-program", "the decision program must be deterministic; '~' is only allowed in the population model");
            DrawSite site;
            site.variable = d->target;
            site.pos = s.pos;
            const int seen = ++draw_counts_[d->target];
            site.label = seen == 1 ? d->target : d->target + "#" + std::to_string(seen);
            VarKind kind = VarKind::Real;
            if (const auto* g = std::get_if<Gauss>(&d->distribution)) {
                if (!(g->stddev > 0.0) || !std::isfinite(g->stddev))
                    error(s.pos, "degenerate-distribution", "gauss standard deviation must be positive");
                site.kind = DrawSite::Kind::Gaussian;
                site.mean = g->mean;
                site.stddev = g->stddev;
                site.index = gaussian_count_++;
                out.op = ir::Stmt::Op::DrawGauss;
            } else {
                const double p = std::get<Bernoulli>(d->distribution).probability;
                if (!(p >= 0.0 && p <= 1.0))
                    error(s.pos, "invalid-probability", "bernoulli probability must lie in [0, 1]");
                site.kind = DrawSite::Kind::Bernoulli;
                site.probability = p;
                site.index = bernoulli_count_++;
                kind = VarKind::Bernoulli;
                out.op = ir::Stmt::Op::DrawBernoulli;
            }
            out.site = sites_.size();
            sites_.push_back(site);
            out.slot = define(scope, defined, d->target, kind, s.pos);
            return out;
        }
        const auto& chain = std::get<IfChain>(s.node);
        out.op = ir::Stmt::Op::If;
        std::optional<Defined> merged;
        auto merge = [&](const Defined& branch) {
            if (!merged) {
                merged = branch;
                return;
            }
            Defined both;
            for (auto slot : *merged)
                if (branch.count(slot))
                    both.insert(slot);
            merged = std::move(both);
        };
        for (const auto& br : chain.branches) {
            ir::Cond guard = lower_cond(br.guard, scope, defined);
            Defined inner = defined;
            ir::Body body = lower_block(br.body, scope, inner);
            merge(inner);
            out.branches.emplace_back(std::move(guard), std::move(body));
        }
        if (chain.else_body) {
            Defined inner = defined;
            out.else_body = lower_block(*chain.else_body, scope, inner);
            merge(inner);
        } else {
            merge(defined);
        }
        defined = std::move(*merged);
        return out;
    }

    bool in_model_ = true;
    std::vector<VarKind> kinds_;
    std::vector<std::string> names_;
    std::vector<DrawSite> sites_;
    std::map<std::string, int> draw_counts_;
    std::size_t gaussian_count_ = 0;
    std::size_t bernoulli_count_ = 0;
    std::vector<Diagnostic> diagnostics_;
    std::size_t errors_ = 0;
};

} // namespace detail

// Checks the task's static invariants and lowers it to slot-indexed IR. The
// returned task carries the base random vector (one entry per draw site).
inline ValidationResult validate(const VerificationTask& task)
{
    return detail::Validator{}.run(task);
}

} // namespace fairsq::dsl
