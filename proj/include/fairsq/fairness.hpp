#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "fairsq/dsl/validate.hpp"
#include "fairsq/symexec.hpp"
#include "fairsq/volume.hpp"

namespace fairsq {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

class InvalidBounds : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Bracket on Pr[q | s] / Pr[q | not s]; upper may be +infinity.
struct RatioBounds {
    double lower = 0.0;
    double upper = infinity;

    bool contains(double r) const noexcept { return lower <= r && r <= upper; }
};

namespace detail {

inline void check_bounds(const ProbabilityBounds& b, std::string_view name)
{
    if (!(0.0 <= b.lower && b.lower <= b.upper && b.upper <= 1.0))
        throw InvalidBounds(std::string("ratio_bounds: invalid interval for ") + std::string(name));
}

// x / y for a lower bound: 0/0 is 0, x/0 is +inf.
inline double lower_quotient(double x, double y)
{
    if (y == 0.0)
        return x == 0.0 ? 0.0 : infinity;
    return x / y;
}

inline double upper_quotient(double x, double y) { return y == 0.0 ? infinity : x / y; }

} // namespace detail

inline RatioBounds ratio_bounds(const ProbabilityBounds& qs, const ProbabilityBounds& qn, const ProbabilityBounds& s,
    const ProbabilityBounds& n)
{
    detail::check_bounds(qs, "qualified_and_sensitive");
    detail::check_bounds(qn, "qualified_and_not_sensitive");
    detail::check_bounds(s, "sensitive");
    detail::check_bounds(n, "not_sensitive");

    RatioBounds r;
    const double l1 = detail::lower_quotient(qs.lower, s.upper);
    const double l2 = detail::lower_quotient(n.lower, qn.upper);
    r.lower = (l1 == 0.0 || l2 == 0.0) ? 0.0 : l1 * l2;

    const double u1 = detail::upper_quotient(qs.upper, s.lower);
    const double u2 = detail::upper_quotient(n.upper, qn.lower);
    r.upper = (std::isinf(u1) || std::isinf(u2)) ? infinity : u1 * u2;
    if (r.upper < r.lower)
        r.upper = r.lower;
    return r;
}

enum class Outcome { Fair, Unfair, Unknown };

inline constexpr std::string_view to_string(Outcome o) noexcept
{
    switch (o) {
    case Outcome::Fair: return "fair";
    case Outcome::Unfair: return "unfair";
    case Outcome::Unknown: return "unknown";
    }
    return "unknown";
}

// Fair iff the ratio provably exceeds 1 - eps, Unfair iff it provably does not.
inline Outcome decide(const RatioBounds& r, double epsilon)
{
    const double threshold = 1.0 - epsilon;
    if (r.lower > threshold)
        return Outcome::Fair;
    if (r.upper <= threshold)
        return Outcome::Unfair;
    return Outcome::Unknown;
}

struct FairnessOptions {
    RefinementBudget budget;             // per event region
    VolumeOptions volume;
    std::size_t splits_per_round = 1000;
    std::optional<double> epsilon;       // overrides the spec block
    SymexecOptions symexec;
};

struct Verdict {
    Outcome outcome = Outcome::Unknown;
    RatioBounds ratio;
    std::array<ProbabilityBounds, 4> probabilities; // indexed like all_events
    double epsilon = 0.1;
    double truncation_sigmas = 10.0;
    MixtureMeasure measure;
    std::size_t rounds = 0;
    bool budget_exhausted = false;

    const ProbabilityBounds& at(Event e) const { return probabilities[static_cast<std::size_t>(e)]; }
};

struct RegionProgress {
    std::size_t splits_used = 0;
    double gap = 1.0;
    bool resolved = false;
};

// Split quota per region for the next round; all zeros means every region is
// finished. Round-robin: each unfinished region gets the same share.
inline std::vector<std::size_t> allocate_round(const std::vector<RegionProgress>& progress,
    const RefinementBudget& budget, std::size_t per_round)
{
    std::vector<std::size_t> quota(progress.size(), 0);
    for (std::size_t i = 0; i < progress.size(); ++i) {
        const auto& p = progress[i];
        if (p.resolved || p.gap <= budget.gap_target || p.splits_used >= budget.max_splits)
            continue;
        quota[i] = std::min(per_round, budget.max_splits - p.splits_used);
    }
    return quota;
}

inline Verdict check_fairness(const PathSet& paths, double epsilon, const FairnessOptions& options = {})
{
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("check_fairness: epsilon must lie in [0, 1]");
    const MixtureMeasure measure = mixture_measure(paths);

    std::vector<VolumeBounder> bounders;
    bounders.reserve(all_events.size());
    for (Event e : all_events)
        bounders.emplace_back(build_event_region(paths, e), measure, options.volume);

    Verdict v;
    v.epsilon = epsilon;
    v.truncation_sigmas = options.volume.truncation_sigmas;
    v.measure = measure;

    auto assess = [&] {
        for (std::size_t i = 0; i < bounders.size(); ++i) {
            auto& p = v.probabilities[i];
            p.lower = bounders[i].lower();
            p.upper = bounders[i].upper();
        }
        v.ratio = ratio_bounds(v.probabilities[0], v.probabilities[1], v.probabilities[2], v.probabilities[3]);
        v.outcome = decide(v.ratio, epsilon);
    };

    assess();
    while (v.outcome == Outcome::Unknown) {
        std::vector<RegionProgress> progress;
        for (const auto& b : bounders)
            progress.push_back({b.splits_used(), b.gap(), b.resolved()});
        const auto quota = allocate_round(progress, options.budget, options.splits_per_round);
        bool any = false;
        for (std::size_t i = 0; i < bounders.size(); ++i) {
            if (quota[i] == 0)
                continue;
            any = true;
            bounders[i].refine(quota[i], options.budget.gap_target);
        }
        if (!any) {
            v.budget_exhausted = true;
            break;
        }
        ++v.rounds;
        assess();
    }
    for (std::size_t i = 0; i < bounders.size(); ++i)
        v.probabilities[i] = bounders[i].bounds();
    return v;
}

inline Verdict check_fairness(const dsl::ValidatedTask& task, const FairnessOptions& options = {})
{
    return check_fairness(enumerate_paths(task, options.symexec), options.epsilon.value_or(task.task.spec.epsilon), options);
}

} // namespace fairsq
