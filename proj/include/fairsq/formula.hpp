#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairsq/regions.hpp"

namespace fairsq {

class DnfExplosion : public std::length_error {
public:
    using std::length_error::length_error;
};

// Boolean combination of atoms over Gaussian dimensions. Negation is always
// pushed into the atoms, so there is no Not node.
struct Formula {
    enum class Kind { True, False, Atom, And, Or };

    Kind kind = Kind::True;
    fairsq::Atom atom;
    std::vector<Formula> kids;

    static Formula constant(bool v)
    {
        Formula f;
        f.kind = v ? Kind::True : Kind::False;
        return f;
    }

    // Atoms without variables are decided on the spot.
    static Formula of_atom(fairsq::Atom a)
    {
        if (a.form.is_constant())
            return constant(holds(a.form.constant(), a.relation));
        Formula f;
        f.kind = Kind::Atom;
        f.atom = std::move(a);
        return f;
    }

    static Formula conjunction(std::vector<Formula> parts) { return combine(Kind::And, std::move(parts)); }
    static Formula disjunction(std::vector<Formula> parts) { return combine(Kind::Or, std::move(parts)); }

    bool is_true() const noexcept { return kind == Kind::True; }
    bool is_false() const noexcept { return kind == Kind::False; }

private:
    static Formula combine(Kind k, std::vector<Formula> parts)
    {
        const Kind absorbing = k == Kind::And ? Kind::False : Kind::True;
        const Kind neutral = k == Kind::And ? Kind::True : Kind::False;
        Formula out;
        out.kind = k;
        for (auto& p : parts) {
            if (p.kind == absorbing)
                return constant(absorbing == Kind::True);
            if (p.kind == neutral)
                continue;
            if (p.kind == k) {
                for (auto& kid : p.kids)
                    out.kids.push_back(std::move(kid));
            } else {
                out.kids.push_back(std::move(p));
            }
        }
        if (out.kids.empty())
            return constant(neutral == Kind::True);
        if (out.kids.size() == 1)
            return std::move(out.kids.front());
        return out;
    }
};

inline Formula negate(const Formula& f)
{
    switch (f.kind) {
    case Formula::Kind::True: return Formula::constant(false);
    case Formula::Kind::False: return Formula::constant(true);
    case Formula::Kind::Atom:
        if (f.atom.relation == Relation::Eq) {
            return Formula::disjunction({Formula::of_atom({f.atom.form, Relation::Lt}),
                Formula::of_atom({f.atom.form, Relation::Gt})});
        }
        return Formula::of_atom({f.atom.form, complement(f.atom.relation)});
    case Formula::Kind::And:
    case Formula::Kind::Or: {
        std::vector<Formula> kids;
        kids.reserve(f.kids.size());
        for (const auto& k : f.kids)
            kids.push_back(negate(k));
        return f.kind == Formula::Kind::And ? Formula::disjunction(std::move(kids)) : Formula::conjunction(std::move(kids));
    }
    }
    return f;
}

inline bool contradicts(const Atom& a, const Atom& b)
{
    if (!(a.form == b.form))
        return false;
    auto pair = [&](Relation x, Relation y) {
        return (a.relation == x && b.relation == y) || (a.relation == y && b.relation == x);
    };
    return pair(Relation::Le, Relation::Gt) || pair(Relation::Lt, Relation::Ge) || pair(Relation::Lt, Relation::Gt)
        || pair(Relation::Eq, Relation::Lt) || pair(Relation::Eq, Relation::Gt);
}

// Appends an atom, skipping exact duplicates. Returns false when the atom is
// the syntactic complement of one already present (the conjunction is empty).
inline bool conjoin(Conjunction& c, const Atom& a)
{
    for (const auto& existing : c) {
        if (existing == a)
            return true;
        if (contradicts(existing, a))
            return false;
    }
    c.push_back(a);
    return true;
}

inline bool conjoin(Conjunction& c, const Conjunction& more)
{
    for (const auto& a : more)
        if (!conjoin(c, a))
            return false;
    return true;
}

namespace detail {

inline std::vector<Conjunction> dnf_product(const std::vector<Conjunction>& a, const std::vector<Conjunction>& b, std::size_t cap)
{
    std::vector<Conjunction> out;
    for (const auto& x : a) {
        for (const auto& y : b) {
            Conjunction c = x;
            if (!conjoin(c, y))
                continue;
            out.push_back(std::move(c));
            if (out.size() > cap)
                throw DnfExplosion("disjunctive normal form exceeds " + std::to_string(cap) + " conjunctions");
        }
    }
    return out;
}

} // namespace detail

// DNF whose conjunctions are pairwise disjoint (up to measure-zero faces):
// A or B expands to A | (not A and B). Conjunctions that are syntactically
// contradictory are dropped.
inline std::vector<Conjunction> disjoint_dnf(const Formula& f, std::size_t cap = 10000)
{
    switch (f.kind) {
    case Formula::Kind::True: return {Conjunction{}};
    case Formula::Kind::False: return {};
    case Formula::Kind::Atom: return {Conjunction{f.atom}};
    case Formula::Kind::And: {
        std::vector<Conjunction> acc{Conjunction{}};
        for (const auto& k : f.kids) {
            acc = detail::dnf_product(acc, disjoint_dnf(k, cap), cap);
            if (acc.empty())
                break;
        }
        return acc;
    }
    case Formula::Kind::Or: {
        std::vector<Conjunction> out;
        std::vector<Conjunction> none_before{Conjunction{}};
        for (const auto& k : f.kids) {
            for (auto& c : detail::dnf_product(none_before, disjoint_dnf(k, cap), cap))
                out.push_back(std::move(c));
            if (out.size() > cap)
                throw DnfExplosion("disjunctive normal form exceeds " + std::to_string(cap) + " conjunctions");
            none_before = detail::dnf_product(none_before, disjoint_dnf(negate(k), cap), cap);
            if (none_before.empty())
                break;
        }
        return out;
    }
    }
    return {};
}

} // namespace fairsq
