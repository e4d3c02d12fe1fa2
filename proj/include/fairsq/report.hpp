#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fairsq/fairness.hpp"
#include "fairsq/mc_oracle.hpp"

#ifndef FAIRSQ_VERSION
#define FAIRSQ_VERSION "0.0.0"
#endif

namespace fairsq {

inline constexpr int report_schema_version = 1;

struct ReportConfig {
    double epsilon = 0.1;
    double truncation_sigmas = 10.0;
    std::size_t budget = 200000;
    double gap = 1e-4;
    std::uint64_t seed = 42;
    unsigned workers = 1;
};

struct PhaseTimes {
    double parse = 0.0;
    double symexec = 0.0;
    double volume = 0.0;
    double mc = 0.0;
};

// Every bracket bound of every event contains the MC estimate up to 3 SE.
inline bool mc_consistent(const Verdict& v, const McEstimate& mc)
{
    for (Event e : all_events) {
        const auto& b = v.at(e);
        const auto& m = mc.at(e);
        const double tol = m.tolerance(3.0);
        if (m.estimate < b.lower - tol || m.estimate > b.upper + tol)
            return false;
    }
    return true;
}

namespace detail {

inline nlohmann::json extended(double v)
{
    if (std::isinf(v))
        return "inf";
    return v;
}

template <class T>
nlohmann::json optional_json(const std::optional<T>& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

} // namespace detail

inline nlohmann::json mc_json(const Verdict& v, const McEstimate& mc)
{
    nlohmann::json events = nlohmann::json::object();
    for (Event e : all_events) {
        const auto& m = mc.at(e);
        events[std::string(event_name(e))] = {
            {"estimate", m.estimate},
            {"standard_error", detail::optional_json(m.standard_error)},
            {"count", m.count},
        };
    }
    return {
        {"samples", mc.samples},
        {"seed", mc.seed},
        {"shards", mc.shards},
        {"generator", mc.generator},
        {"events", std::move(events)},
        {"ratio", detail::optional_json(mc.ratio)},
        {"consistent", mc_consistent(v, mc)},
    };
}

// Report document; keys are always present (absent sections are null).
inline nlohmann::json make_report(const std::string& input, const Verdict& v, const PathSet& paths,
    const ReportConfig& config, const PhaseTimes& times, const std::optional<McEstimate>& mc,
    const std::vector<std::string>& warnings)
{
    nlohmann::json events = nlohmann::json::object();
    std::size_t splits = 0;
    for (Event e : all_events) {
        const auto& b = v.at(e);
        splits += b.splits_used;
        events[std::string(event_name(e))] = {
            {"lower", b.lower},
            {"upper", b.upper},
            {"mixed_mass", b.mixed_mass},
            {"tail_mass", b.tail_mass},
            {"splits_used", b.splits_used},
            {"open_boxes", b.open_boxes},
        };
    }
    return {
        {"tool", "fairsq"},
        {"version", FAIRSQ_VERSION},
        {"schema_version", report_schema_version},
        {"input", input},
        {"verdict", std::string(to_string(v.outcome))},
        {"ratio", {{"lower", detail::extended(v.ratio.lower)}, {"upper", detail::extended(v.ratio.upper)}}},
        {"threshold", 1.0 - v.epsilon},
        {"events", std::move(events)},
        {"refinement",
            {{"rounds", v.rounds}, {"splits_used", splits}, {"budget_exhausted", v.budget_exhausted}}},
        {"paths",
            {{"model_paths", paths.model_paths.size()},
                {"program_paths", paths.paths.size()},
                {"gaussian_dimension", paths.gaussian_dimension()},
                {"bernoulli_draws", paths.bernoulli_probabilities.size()},
                {"components", v.measure.components.size()}}},
        {"config",
            {{"epsilon", config.epsilon},
                {"truncation_sigmas", config.truncation_sigmas},
                {"budget", config.budget},
                {"gap", config.gap},
                {"seed", config.seed},
                {"workers", config.workers}}},
        {"timing_ms",
            {{"parse", times.parse}, {"symexec", times.symexec}, {"volume", times.volume}, {"mc", times.mc}}},
        {"mc", mc ? mc_json(v, *mc) : nlohmann::json(nullptr)},
        {"warnings", warnings},
    };
}

} // namespace fairsq
