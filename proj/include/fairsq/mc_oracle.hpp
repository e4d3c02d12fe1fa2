#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fairsq/dsl/validate.hpp"
#include "fairsq/interpreter.hpp"
#include "fairsq/symexec.hpp"

namespace fairsq {

inline constexpr std::string_view mc_generator_name = "mt19937_64/box-muller";

struct McEventEstimate {
    std::uint64_t count = 0;
    std::uint64_t samples = 0;
    double estimate = 0.0;
    std::optional<double> standard_error; // undefined when the estimate is 0 or 1

    // Half-width used when checking a bracket at `sigmas` standard errors. A
    // degenerate tally has no standard error; it falls back to 3/N.
    double tolerance(double sigmas = 3.0) const
    {
        if (standard_error)
            return sigmas * *standard_error;
        return 3.0 / static_cast<double>(samples);
    }
};

struct McEstimate {
    std::array<McEventEstimate, 4> events; // indexed like all_events
    std::optional<double> ratio;           // undefined when a group or its qualified tally is empty
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    unsigned shards = 1;
    std::string generator{mc_generator_name};

    const McEventEstimate& at(Event e) const { return events[static_cast<std::size_t>(e)]; }
};

// Forward sampler: mt19937_64 uniforms, Box-Muller normals (the spare variate
// of each pair is kept for the next draw).
class ForwardSampler {
public:
    explicit ForwardSampler(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1p-53; }

    double standard_normal()
    {
        if (spare_) {
            const double z = *spare_;
            spare_.reset();
            return z;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        return r * std::cos(theta);
    }

    double gaussian(const dsl::DrawSite& site) { return site.mean + site.stddev * standard_normal(); }
    bool bernoulli(const dsl::DrawSite& site) { return uniform() < site.probability; }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

namespace detail {

struct McTally {
    std::array<std::uint64_t, 4> counts{};
};

inline McTally mc_shard(const dsl::ValidatedTask& task, std::uint64_t n, std::uint64_t seed)
{
    ForwardSampler sampler(seed);
    std::vector<double> scratch;
    McTally t;
    for (std::uint64_t i = 0; i < n; ++i) {
        const ConcreteOutcome o = interpret(task, sampler, scratch);
        if (o.sensitive) {
            ++t.counts[static_cast<std::size_t>(Event::Sensitive)];
            if (o.qualified)
                ++t.counts[static_cast<std::size_t>(Event::QualifiedSensitive)];
        } else {
            ++t.counts[static_cast<std::size_t>(Event::NotSensitive)];
            if (o.qualified)
                ++t.counts[static_cast<std::size_t>(Event::QualifiedNotSensitive)];
        }
    }
    return t;
}

} // namespace detail

// Direct Monte Carlo estimate of the four event probabilities. Shard i draws
// from seed ^ i; results are deterministic for a fixed (n, seed, shards).
inline McEstimate mc_estimate(const dsl::ValidatedTask& task, std::uint64_t n, std::uint64_t seed, unsigned shards = 1)
{
    if (n < 1)
        throw std::invalid_argument("mc_estimate: sample count must be at least 1");
    if (shards < 1)
        shards = 1;
    std::vector<detail::McTally> tallies(shards);
    auto share = [&](unsigned i) { return n / shards + (i < n % shards ? 1 : 0); };
    if (shards == 1) {
        tallies[0] = detail::mc_shard(task, n, seed);
    } else {
        std::vector<std::thread> threads;
        for (unsigned i = 0; i < shards; ++i)
            threads.emplace_back([&, i] { tallies[i] = detail::mc_shard(task, share(i), seed ^ i); });
        for (auto& t : threads)
            t.join();
    }

    McEstimate out;
    out.samples = n;
    out.seed = seed;
    out.shards = shards;
    for (std::size_t e = 0; e < 4; ++e) {
        auto& ev = out.events[e];
        for (const auto& t : tallies)
            ev.count += t.counts[e];
        ev.samples = n;
        ev.estimate = static_cast<double>(ev.count) / static_cast<double>(n);
        if (ev.count != 0 && ev.count != n)
            ev.standard_error = std::sqrt(ev.estimate * (1.0 - ev.estimate) / static_cast<double>(n));
    }
    const auto count = [&](Event e) { return static_cast<double>(out.at(e).count); };
    if (count(Event::Sensitive) > 0 && count(Event::NotSensitive) > 0 && count(Event::QualifiedNotSensitive) > 0) {
        out.ratio = (count(Event::QualifiedSensitive) / count(Event::Sensitive))
            / (count(Event::QualifiedNotSensitive) / count(Event::NotSensitive));
    }
    return out;
}

} // namespace fairsq
