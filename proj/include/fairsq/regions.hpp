#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fairsq/relation.hpp"

namespace fairsq {

// Linear form over Gaussian dimensions of the base random vector. Terms are
// sorted by dimension and never carry a zero coefficient.
class LinearForm {
public:
    LinearForm() = default;
    explicit LinearForm(double constant) : constant_(constant) {}

    static LinearForm dimension(std::size_t d, double coefficient = 1.0)
    {
        LinearForm f;
        f.add_term(d, coefficient);
        return f;
    }

    void add_term(std::size_t d, double coefficient)
    {
        auto it = std::lower_bound(terms_.begin(), terms_.end(), d,
            [](const auto& t, std::size_t key) { return t.first < key; });
        if (it != terms_.end() && it->first == d) {
            it->second += coefficient;
            if (it->second == 0.0)
                terms_.erase(it);
        } else if (coefficient != 0.0) {
            terms_.insert(it, {d, coefficient});
        }
    }

    void add_constant(double c) { constant_ += c; }

    // this += scale * other
    void add_scaled(const LinearForm& other, double scale)
    {
        for (const auto& [d, c] : other.terms_)
            add_term(d, scale * c);
        constant_ += scale * other.constant_;
    }

    const std::vector<std::pair<std::size_t, double>>& terms() const noexcept { return terms_; }
    double constant() const noexcept { return constant_; }
    bool is_constant() const noexcept { return terms_.empty(); }

    double evaluate(const std::vector<double>& point) const
    {
        double v = constant_;
        for (const auto& [d, c] : terms_)
            v += c * point.at(d);
        return v;
    }

    friend bool operator==(const LinearForm&, const LinearForm&) = default;

private:
    std::vector<std::pair<std::size_t, double>> terms_;
    double constant_ = 0.0;
};

// `form REL 0`
struct Atom {
    LinearForm form;
    Relation relation = Relation::Le;

    bool holds_at(const std::vector<double>& point) const { return holds(form.evaluate(point), relation); }

    friend bool operator==(const Atom&, const Atom&) = default;
};

using Conjunction = std::vector<Atom>;

// Finite union of convex polytopes, each a conjunction of linear atoms. The
// empty region has no conjunctions; a conjunction with no atoms is all of R^n.
struct Region {
    std::vector<Conjunction> conjunctions;

    bool empty() const noexcept { return conjunctions.empty(); }

    bool contains(const std::vector<double>& point) const
    {
        return std::any_of(conjunctions.begin(), conjunctions.end(), [&](const Conjunction& c) {
            return std::all_of(c.begin(), c.end(), [&](const Atom& a) { return a.holds_at(point); });
        });
    }

    std::size_t max_dimension() const
    {
        std::size_t n = 0;
        for (const auto& c : conjunctions)
            for (const auto& a : c)
                for (const auto& [d, coef] : a.form.terms())
                    n = std::max(n, d + 1);
        return n;
    }
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const noexcept { return hi - lo; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

// Axis-aligned box with finite bounds, lo <= hi in every dimension.
class Box {
public:
    Box() = default;
    explicit Box(std::vector<Interval> dims) : dims_(std::move(dims))
    {
        for (const auto& iv : dims_) {
            if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi)
                throw std::invalid_argument("box: bounds must be finite with lo <= hi");
        }
    }

    std::size_t dimension() const noexcept { return dims_.size(); }
    const Interval& operator[](std::size_t d) const { return dims_[d]; }
    const std::vector<Interval>& intervals() const noexcept { return dims_; }

    bool contains(const std::vector<double>& point) const
    {
        for (std::size_t d = 0; d < dims_.size(); ++d)
            if (point[d] < dims_[d].lo || point[d] > dims_[d].hi)
                return false;
        return true;
    }

    // Interiors intersect (shared faces do not count).
    bool overlaps(const Box& other) const
    {
        for (std::size_t d = 0; d < dims_.size(); ++d) {
            if (std::max(dims_[d].lo, other.dims_[d].lo) >= std::min(dims_[d].hi, other.dims_[d].hi))
                return false;
        }
        return true;
    }

    friend bool operator==(const Box&, const Box&) = default;

private:
    friend std::pair<Box, Box> split_at(const Box&, std::size_t, double);
    std::vector<Interval> dims_;
};

class MissingDimension : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

class DegenerateDimension : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct RangeOptions {
    double relative_slack = 0x1p-40;
    double absolute_floor = 1e-300;
};

namespace detail {

// Error-free transformations: a + b = s + e and a * b = p + e exactly.
inline void two_sum(double a, double b, double& s, double& e)
{
    s = a + b;
    const double bb = s - a;
    e = (a - (s - bb)) + (b - bb);
}

inline void two_prod(double a, double b, double& p, double& e)
{
    p = a * b;
    e = std::fma(a, b, -p);
}

// Sum of products with a record of whether any rounding happened.
struct ExactSum {
    double value = 0.0;
    double magnitude = 0.0;
    bool exact = true;

    void add_product(double a, double b)
    {
        double p, pe;
        two_prod(a, b, p, pe);
        add(p);
        if (pe != 0.0)
            exact = false;
    }

    void add(double x)
    {
        double s, se;
        two_sum(value, x, s, se);
        value = s;
        magnitude += std::fabs(x);
        if (se != 0.0)
            exact = false;
    }
};

} // namespace detail

// Guaranteed enclosure of {e(x) : x in b}. Extrema sit at box corners; when
// every product and partial sum is exact the true extrema are returned,
// otherwise both ends move outward by max(relative_slack * magnitude,
// absolute_floor), which dominates the accumulated rounding.
inline Interval linexpr_range(const LinearForm& e, const Box& b, const RangeOptions& options = {})
{
    detail::ExactSum lo, hi;
    lo.add(e.constant());
    hi.add(e.constant());
    for (const auto& [d, coef] : e.terms()) {
        if (d >= b.dimension())
            throw MissingDimension("linexpr_range: dimension " + std::to_string(d) + " is not covered by the box");
        const Interval& iv = b[d];
        lo.add_product(coef, coef > 0 ? iv.lo : iv.hi);
        hi.add_product(coef, coef > 0 ? iv.hi : iv.lo);
    }
    Interval out{lo.value, hi.value};
    if (!lo.exact || !std::isfinite(lo.value))
        out.lo -= std::max(options.relative_slack * lo.magnitude, options.absolute_floor);
    if (!hi.exact || !std::isfinite(hi.value))
        out.hi += std::max(options.relative_slack * hi.magnitude, options.absolute_floor);
    return out;
}

enum class Classification { Full, Empty, Mixed };

inline std::string_view to_string(Classification c) noexcept
{
    switch (c) {
    case Classification::Full: return "full";
    case Classification::Empty: return "empty";
    case Classification::Mixed: return "mixed";
    }
    return "?";
}

enum class AtomStatus { Holds, Violated, Undecided };

// Status of one atom over a whole box, up to measure-zero boundaries: strict
// and non-strict relations classify identically. Equality atoms over at least
// one variable fail almost everywhere.
inline AtomStatus atom_status(const Atom& a, const Box& b, const RangeOptions& options = {})
{
    if (a.form.is_constant())
        return holds(a.form.constant(), a.relation) ? AtomStatus::Holds : AtomStatus::Violated;
    if (a.relation == Relation::Eq)
        return AtomStatus::Violated;
    const Interval r = linexpr_range(a.form, b, options);
    switch (a.relation) {
    case Relation::Le:
    case Relation::Lt:
        if (r.hi <= 0)
            return AtomStatus::Holds;
        if (r.lo >= 0)
            return AtomStatus::Violated;
        break;
    case Relation::Ge:
    case Relation::Gt:
        if (r.lo >= 0)
            return AtomStatus::Holds;
        if (r.hi <= 0)
            return AtomStatus::Violated;
        break;
    case Relation::Eq:
        break;
    }
    return AtomStatus::Undecided;
}

struct ClassifyDetail {
    Classification classification = Classification::Empty;
    // Atoms still straddling the box, taken from conjunctions not yet refuted.
    std::vector<const Atom*> undecided;
};

inline ClassifyDetail classify_detail(const Box& b, const Region& r, const RangeOptions& options = {})
{
    ClassifyDetail out;
    bool any_open = false;
    for (const auto& conj : r.conjunctions) {
        bool refuted = false;
        std::size_t first_undecided = out.undecided.size();
        for (const auto& atom : conj) {
            const AtomStatus s = atom_status(atom, b, options);
            if (s == AtomStatus::Violated) {
                refuted = true;
                break;
            }
            if (s == AtomStatus::Undecided)
                out.undecided.push_back(&atom);
        }
        if (refuted) {
            out.undecided.resize(first_undecided);
            continue;
        }
        if (out.undecided.size() == first_undecided) {
            out.classification = Classification::Full;
            out.undecided.clear();
            return out;
        }
        any_open = true;
    }
    out.classification = any_open ? Classification::Mixed : Classification::Empty;
    return out;
}

// Full: some conjunction holds on the whole box. Empty: every conjunction has
// an atom violated on the whole box. Mixed carries no claim.
inline Classification classify(const Box& b, const Region& r, const RangeOptions& options = {})
{
    return classify_detail(b, r, options).classification;
}

inline std::pair<Box, Box> split_at(const Box& b, std::size_t d, double at)
{
    if (d >= b.dimension())
        throw MissingDimension("split: dimension " + std::to_string(d) + " out of range");
    const Interval iv = b[d];
    if (!(at > iv.lo && at < iv.hi))
        throw DegenerateDimension("split: cut point must lie strictly inside dimension " + std::to_string(d));
    Box left = b;
    Box right = b;
    left.dims_[d].hi = at;
    right.dims_[d].lo = at;
    return {std::move(left), std::move(right)};
}

// Halves the box at the midpoint of dimension d.
inline std::pair<Box, Box> bisect(const Box& b, std::size_t d)
{
    if (d >= b.dimension())
        throw MissingDimension("bisect: dimension " + std::to_string(d) + " out of range");
    const Interval iv = b[d];
    if (!(iv.hi > iv.lo))
        throw DegenerateDimension("bisect: dimension " + std::to_string(d) + " has zero width");
    const double mid = iv.lo + 0.5 * (iv.hi - iv.lo);
    if (!(mid > iv.lo && mid < iv.hi))
        throw DegenerateDimension("bisect: dimension " + std::to_string(d) + " is too narrow to split");
    return split_at(b, d, mid);
}

} // namespace fairsq
