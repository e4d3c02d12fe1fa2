#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "fairsq/interpreter.hpp"
#include "fairsq/symexec.hpp"
#include "oracle.hpp"

namespace fairsq::test {

struct SymbolicOutcome {
    std::size_t matches = 0; // program paths whose condition holds
    bool qualified = false;
    bool sensitive = false;
    bool boundary = false;   // some atom evaluates within tolerance of zero
};

inline void mark_boundary(const Formula& f, const std::vector<double>& point, double tol, bool& hit)
{
    if (f.kind == Formula::Kind::Atom && std::fabs(f.atom.form.evaluate(point)) < tol)
        hit = true;
    for (const auto& k : f.kids)
        mark_boundary(k, point, tol, hit);
}

// Path selection: which enumerated path a concrete draw vector follows.
inline SymbolicOutcome select_path(const PathSet& paths, const std::vector<double>& point,
    const std::vector<bool>& bernoulli, double tol = 1e-9)
{
    SymbolicOutcome out;
    for (const auto& p : paths.paths) {
        if (!detail::consistent(p.bernoulli_choices, bernoulli))
            continue;
        bool all = true;
        for (const auto& a : p.constraints) {
            if (std::fabs(a.form.evaluate(point)) < tol)
                out.boundary = true;
            if (!a.holds_at(point))
                all = false;
        }
        if (!all)
            continue;
        ++out.matches;
        out.qualified = p.return_value;
        const Formula& s = paths.model_paths[p.model_path].sensitive;
        mark_boundary(s, point, tol, out.boundary);
        out.sensitive = formula_holds(s, point);
    }
    return out;
}

struct DifferentialResult {
    std::size_t compared = 0;
    std::size_t boundary = 0;
    std::size_t disagreements = 0;
};

// Samples draw vectors, runs the concrete interpreter and path selection on
// each, and counts disagreements (boundary hits are skipped).
inline DifferentialResult differential(const dsl::ValidatedTask& task, const PathSet& paths, std::size_t n,
    std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif;
    DifferentialResult r;
    FixedDraws draws;
    std::vector<double> scratch;
    for (std::size_t i = 0; i < n; ++i) {
        draws.gaussian_values.resize(paths.gaussian_dimension());
        for (std::size_t d = 0; d < paths.gaussian_dimension(); ++d)
            draws.gaussian_values[d] = paths.means[d] + paths.stddevs[d] * normal(rng);
        draws.bernoulli_values.resize(paths.bernoulli_probabilities.size());
        for (std::size_t j = 0; j < paths.bernoulli_probabilities.size(); ++j)
            draws.bernoulli_values[j] = unif(rng) < paths.bernoulli_probabilities[j];

        const SymbolicOutcome sym = select_path(paths, draws.gaussian_values, draws.bernoulli_values);
        if (sym.boundary) {
            ++r.boundary;
            continue;
        }
        const ConcreteOutcome con = interpret(task, draws, scratch);
        ++r.compared;
        if (sym.matches != 1 || sym.qualified != con.qualified || sym.sensitive != con.sensitive)
            ++r.disagreements;
    }
    return r;
}

} // namespace fairsq::test
