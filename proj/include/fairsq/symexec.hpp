#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "fairsq/dsl/printer.hpp"
#include "fairsq/dsl/validate.hpp"
#include "fairsq/formula.hpp"
#include "fairsq/regions.hpp"

namespace fairsq {

class PathExplosion : public std::length_error {
public:
    using std::length_error::length_error;
};

class CoefficientOverflow : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct SymexecOptions {
    std::size_t max_paths = std::size_t{1} << 20;
    std::size_t max_dnf = 10000;
};

struct BernoulliChoice {
    std::size_t index = 0; // Bernoulli index, not draw-site id
    bool value = false;

    friend bool operator==(const BernoulliChoice&, const BernoulliChoice&) = default;
};

// One execution of popModel followed by the decision program. Constraints
// range over Gaussian dimensions only.
struct PathCondition {
    Conjunction constraints;
    std::vector<BernoulliChoice> bernoulli_choices;
    bool return_value = false;
    std::size_t model_path = 0;
    double weight = 1.0; // product of the probabilities of the choices taken
};

// One execution of popModel alone, with the sensitive condition substituted
// into that execution's environment.
struct ModelPath {
    Conjunction constraints;
    std::vector<BernoulliChoice> bernoulli_choices;
    double weight = 1.0;
    Formula sensitive;
    std::vector<Conjunction> sensitive_dnf;
    std::vector<Conjunction> not_sensitive_dnf;
};

struct PathSet {
    std::vector<ModelPath> model_paths;
    std::vector<PathCondition> paths;
    std::vector<std::string> dimension_labels; // per Gaussian dimension
    std::vector<double> means;
    std::vector<double> stddevs;
    std::vector<double> bernoulli_probabilities;

    std::size_t gaussian_dimension() const noexcept { return dimension_labels.size(); }
};

enum class Event { QualifiedSensitive, QualifiedNotSensitive, Sensitive, NotSensitive };

inline constexpr std::array<Event, 4> all_events{
    Event::QualifiedSensitive, Event::QualifiedNotSensitive, Event::Sensitive, Event::NotSensitive};

inline constexpr std::string_view event_name(Event e) noexcept
{
    switch (e) {
    case Event::QualifiedSensitive: return "qualified_and_sensitive";
    case Event::QualifiedNotSensitive: return "qualified_and_not_sensitive";
    case Event::Sensitive: return "sensitive";
    case Event::NotSensitive: return "not_sensitive";
    }
    return "?";
}

struct RegionComponent {
    std::vector<bool> choices; // value of every Bernoulli draw
    double weight = 1.0;
    Region region;
};

// Per Bernoulli assignment of positive probability, the region of Gaussian
// outcomes where the event happens.
struct EventRegion {
    Event event = Event::Sensitive;
    std::size_t dimension = 0;
    std::vector<RegionComponent> components;
};

// Every assignment of the Bernoulli draws with positive probability, in
// binary counting order (draw 0 is the least significant bit).
inline std::vector<std::pair<std::vector<bool>, double>> bernoulli_components(const std::vector<double>& probabilities,
    std::size_t max_components = std::size_t{1} << 20)
{
    const std::size_t m = probabilities.size();
    if (m >= 63 || (std::size_t{1} << m) > max_components)
        throw PathExplosion("too many Bernoulli draws: " + std::to_string(m));
    std::vector<std::pair<std::vector<bool>, double>> out;
    for (std::size_t k = 0; k < (std::size_t{1} << m); ++k) {
        std::vector<bool> bits(m);
        double w = 1.0;
        for (std::size_t j = 0; j < m; ++j) {
            bits[j] = (k >> j) & 1U;
            w *= bits[j] ? probabilities[j] : 1.0 - probabilities[j];
        }
        if (w > 0.0)
            out.emplace_back(std::move(bits), w);
    }
    return out;
}

namespace detail {

using SymValue = std::variant<std::monostate, LinearForm, Formula>;

struct SymState {
    std::vector<SymValue> slots;
    Conjunction constraints;
    std::vector<BernoulliChoice> choices;
    double weight = 1.0;
};

class SymbolicExecutor {
public:
    SymbolicExecutor(const dsl::ValidatedTask& task, const SymexecOptions& options) : task_(task), options_(options) {}

    PathSet run()
    {
        PathSet out;
        for (std::size_t site : task_.gaussian_sites) {
            out.dimension_labels.push_back(task_.base[site].label);
            out.means.push_back(task_.base[site].mean);
            out.stddevs.push_back(task_.base[site].stddev);
        }
        for (std::size_t site : task_.bernoulli_sites)
            out.bernoulli_probabilities.push_back(task_.base[site].probability);

        SymState init;
        init.slots.resize(task_.slot_count());
        std::vector<SymState> model_states = exec(task_.model, {std::move(init)});

        for (auto& st : model_states) {
            ModelPath mp;
            mp.constraints = st.constraints;
            mp.bernoulli_choices = st.choices;
            mp.weight = st.weight;
            mp.sensitive = substitute(task_.sensitive, st);
            mp.sensitive_dnf = disjoint_dnf(mp.sensitive, options_.max_dnf);
            mp.not_sensitive_dnf = disjoint_dnf(negate(mp.sensitive), options_.max_dnf);
            const std::size_t model_index = out.model_paths.size();
            out.model_paths.push_back(std::move(mp));

            for (std::size_t i = 0; i < task_.program_params.size(); ++i)
                st.slots[task_.program_params[i]] = st.slots[task_.model_returns[i]];
            for (auto& fin : exec(task_.program, {std::move(st)})) {
                const Formula result = substitute(task_.result, fin);
                for (bool value : {true, false}) {
                    for (const auto& conj : disjoint_dnf(value ? result : negate(result), options_.max_dnf)) {
                        PathCondition p;
                        p.constraints = fin.constraints;
                        if (!conjoin(p.constraints, conj))
                            continue;
                        p.bernoulli_choices = fin.choices;
                        p.return_value = value;
                        p.model_path = model_index;
                        p.weight = fin.weight;
                        out.paths.push_back(std::move(p));
                        check_count(out.paths.size());
                    }
                }
            }
        }
        return out;
    }

private:
    void check_count(std::size_t n) const
    {
        if (n > options_.max_paths)
            throw PathExplosion("path count exceeds " + std::to_string(options_.max_paths));
    }

    LinearForm substitute(const ir::Linear& e, const SymState& st) const
    {
        LinearForm f(e.constant);
        for (const auto& [slot, coef] : e.terms)
            f.add_scaled(std::get<LinearForm>(st.slots[slot]), coef);
        bool finite = std::isfinite(f.constant());
        for (const auto& [d, c] : f.terms())
            finite = finite && std::isfinite(c);
        if (!finite)
            throw CoefficientOverflow("linear expression overflows double precision after substitution");
        return f;
    }

    Formula substitute(const ir::Cond& c, const SymState& st) const
    {
        switch (c.op) {
        case ir::Cond::Op::Const: return Formula::constant(c.value);
        case ir::Cond::Op::Atom: return Formula::of_atom({substitute(c.lhs, st), c.relation});
        case ir::Cond::Op::Var: return std::get<Formula>(st.slots[c.slot]);
        case ir::Cond::Op::And:
        case ir::Cond::Op::Or: {
            std::vector<Formula> kids;
            for (const auto& k : c.kids)
                kids.push_back(substitute(k, st));
            return c.op == ir::Cond::Op::And ? Formula::conjunction(std::move(kids)) : Formula::disjunction(std::move(kids));
        }
        }
        return Formula::constant(false);
    }

    std::vector<SymState> exec(const ir::Body& body, std::vector<SymState> states)
    {
        for (const auto& stmt : body) {
            std::vector<SymState> next;
            for (auto& st : states)
                step(stmt, std::move(st), next);
            states = std::move(next);
            check_count(states.size());
        }
        return states;
    }

    void step(const ir::Stmt& s, SymState st, std::vector<SymState>& out)
    {
        switch (s.op) {
        case ir::Stmt::Op::AssignReal:
            st.slots[s.slot] = substitute(s.value, st);
            out.push_back(std::move(st));
            return;
        case ir::Stmt::Op::AssignBool:
            st.slots[s.slot] = substitute(s.cond, st);
            out.push_back(std::move(st));
            return;
        case ir::Stmt::Op::DrawGauss:
            st.slots[s.slot] = LinearForm::dimension(task_.base[s.site].index);
            out.push_back(std::move(st));
            return;
        case ir::Stmt::Op::DrawBernoulli: {
            const auto& site = task_.base[s.site];
            for (bool value : {true, false}) {
                const double p = value ? site.probability : 1.0 - site.probability;
                if (!(p > 0.0))
                    continue;
                SymState fork = st;
                fork.slots[s.slot] = LinearForm(value ? 1.0 : 0.0);
                fork.choices.push_back({site.index, value});
                fork.weight *= p;
                out.push_back(std::move(fork));
            }
            return;
        }
        case ir::Stmt::Op::If: {
            std::vector<Formula> guards;
            for (const auto& [cond, body] : s.branches)
                guards.push_back(substitute(cond, st));
            std::vector<Formula> earlier_failed;
            auto take_branch = [&](const Formula& cond, const ir::Body& body) {
                std::vector<SymState> entering;
                for (const auto& conj : disjoint_dnf(cond, options_.max_dnf)) {
                    SymState fork = st;
                    if (!conjoin(fork.constraints, conj))
                        continue;
                    entering.push_back(std::move(fork));
                }
                if (entering.empty())
                    return;
                for (auto& done : exec(body, std::move(entering)))
                    out.push_back(std::move(done));
                check_count(out.size());
            };
            for (std::size_t i = 0; i < guards.size(); ++i) {
                std::vector<Formula> parts = earlier_failed;
                parts.push_back(guards[i]);
                take_branch(Formula::conjunction(std::move(parts)), s.branches[i].second);
                earlier_failed.push_back(negate(guards[i]));
            }
            take_branch(Formula::conjunction(std::move(earlier_failed)), s.else_body);
            return;
        }
        }
    }

    const dsl::ValidatedTask& task_;
    SymexecOptions options_;
};

inline bool consistent(const std::vector<BernoulliChoice>& taken, const std::vector<bool>& assignment)
{
    for (const auto& c : taken)
        if (assignment[c.index] != c.value)
            return false;
    return true;
}

} // namespace detail

// Enumerates every execution of the composed model and program. Within one
// Bernoulli assignment the returned paths cover R^n and overlap only on
// measure-zero guard boundaries.
inline PathSet enumerate_paths(const dsl::ValidatedTask& task, const SymexecOptions& options = {})
{
    return detail::SymbolicExecutor(task, options).run();
}

inline EventRegion build_event_region(const PathSet& paths, Event event)
{
    EventRegion out;
    out.event = event;
    out.dimension = paths.gaussian_dimension();
    const bool sensitive = event == Event::QualifiedSensitive || event == Event::Sensitive;
    const bool needs_qualified = event == Event::QualifiedSensitive || event == Event::QualifiedNotSensitive;

    for (auto& [choices, weight] : bernoulli_components(paths.bernoulli_probabilities)) {
        RegionComponent comp;
        comp.weight = weight;
        auto add = [&](const Conjunction& base, const ModelPath& mp) {
            for (const auto& sc : sensitive ? mp.sensitive_dnf : mp.not_sensitive_dnf) {
                Conjunction c = base;
                if (conjoin(c, sc))
                    comp.region.conjunctions.push_back(std::move(c));
            }
        };
        if (needs_qualified) {
            for (const auto& p : paths.paths)
                if (p.return_value && detail::consistent(p.bernoulli_choices, choices))
                    add(p.constraints, paths.model_paths[p.model_path]);
        } else {
            for (const auto& mp : paths.model_paths)
                if (detail::consistent(mp.bernoulli_choices, choices))
                    add(mp.constraints, mp);
        }
        comp.choices = std::move(choices);
        out.components.push_back(std::move(comp));
    }
    return out;
}

// `x - 10 > 0` style rendering with dimension labels.
inline std::string format_form(const LinearForm& f, const std::vector<std::string>& labels)
{
    dsl::LinearExpression e(f.constant());
    for (const auto& [d, c] : f.terms())
        e.add_term(d < labels.size() ? labels[d] : "x" + std::to_string(d), c);
    return dsl::format_linear(e);
}

inline std::string format_atom(const Atom& a, const std::vector<std::string>& labels)
{
    return format_form(a.form, labels) + " " + std::string(to_string(a.relation)) + " 0";
}

// One line of the --dump-paths listing:
// `[component w=0.5] (atom) ∧ (atom) ⇒ return true`
inline std::string format_path(const PathCondition& p, const PathSet& set)
{
    std::string out = "[component";
    for (const auto& c : p.bernoulli_choices)
        out += " b" + std::to_string(c.index) + "=" + (c.value ? "1" : "0");
    out += " w=" + dsl::format_number(p.weight) + "] ";
    if (p.constraints.empty())
        out += "(true)";
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
        if (i)
            out += " \xE2\x88\xA7 "; // ∧
        out += "(" + format_atom(p.constraints[i], set.dimension_labels) + ")";
    }
    out += " \xE2\x87\x92 return "; // ⇒
    out += p.return_value ? "true" : "false";
    return out;
}

} // namespace fairsq
