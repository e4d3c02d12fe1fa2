// Acceptance suite: one PASS/FAIL line per criterion; exit status is nonzero
// if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fairsq/fairsq.hpp"

#include "../support/differential.hpp"
#include "../support/fixtures.hpp"
#include "../support/oracle.hpp"
#include "../support/random_task.hpp"

using namespace fairsq;
using namespace fairsq::test;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Check {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// 1. x <= 0 under gauss(0,1).
Check half_space()
{
    const auto task = load_text("define popModel()\n  x ~ gauss(0,1)\n  return x\n\n"
                                "define dec(x)\n  return x <= 0\n\n"
                                "spec {\n  sensitive: x > 1;\n  qualified: dec;\n  epsilon: 0.1;\n}\n");
    const auto paths = enumerate_paths(task);
    const auto t0 = Clock::now();
    const auto b = bound_volume(qualified_region(paths), mixture_measure(paths), {200000, 1e-4});
    const double secs = seconds_since(t0);
    const bool ok = b.gap() <= 1e-4 && std::fabs(b.lower - 0.5) <= 1e-4 && std::fabs(b.upper - 0.5) <= 1e-4 && secs < 1.0;
    return {ok, fmt("bounds [%.12g, %.12g], gap %.3g, %d splits, %.3fs", b.lower, b.upper, b.gap(),
                    static_cast<int>(b.splits_used), secs)};
}

// 2. 0 <= x <= 1 and 0 <= y <= 1 under a standard normal pair.
Check closed_form_box()
{
    Conjunction c{
        {LinearForm::dimension(0), Relation::Ge},
        {[] { auto f = LinearForm::dimension(0); f.add_constant(-1); return f; }(), Relation::Le},
        {LinearForm::dimension(1), Relation::Ge},
        {[] { auto f = LinearForm::dimension(1); f.add_constant(-1); return f; }(), Relation::Le},
    };
    Region r;
    r.conjunctions.push_back(c);
    MixtureMeasure m;
    m.components.push_back({1.0, GaussianProduct{{0, 0}, {1, 1}}});
    const big diff = normal_cdf_series(big(1)) - normal_cdf_series(big(0));
    const double ref = static_cast<double>(diff * diff);
    const auto b = bound_volume(single_component(r, 2), m, {200000, 1e-6});
    const bool ok = std::fabs(b.lower - ref) <= 1e-6 && std::fabs(b.upper - ref) <= 1e-6 && b.lower <= ref + 1e-15
        && ref <= b.upper + 1e-15;
    return {ok, fmt("bounds [%.15g, %.15g] vs oracle %.15g, %d splits", b.lower, b.upper, ref,
                    static_cast<int>(b.splits_used))};
}

// 3. Case study: Unfair within the default budget; the Monte Carlo ratio lies
// inside the certified ratio bounds.
Check case_study()
{
    const auto task = load_fixture("casestudy.fg");
    const auto t0 = Clock::now();
    const Verdict v = check_fairness(task);
    const double secs = seconds_since(t0);
    const auto mc = mc_estimate(task, 10'000'000, 42);
    const double r = mc.ratio.value_or(NAN);
    // delta-method standard error of the ratio of two conditional rates
    const auto rate_se = [&](Event q, Event g) {
        const double p = static_cast<double>(mc.at(q).count) / static_cast<double>(mc.at(g).count);
        return std::pair{p, std::sqrt(p * (1 - p) / static_cast<double>(mc.at(g).count))};
    };
    const auto [ps, se_s] = rate_se(Event::QualifiedSensitive, Event::Sensitive);
    const auto [pn, se_n] = rate_se(Event::QualifiedNotSensitive, Event::NotSensitive);
    const double r_se = r * std::sqrt((se_s / ps) * (se_s / ps) + (se_n / pn) * (se_n / pn));
    const bool ok = v.outcome == Outcome::Unfair && v.ratio.upper < 0.9 && secs < 60.0 && v.ratio.contains(r);
    return {ok, fmt("verdict %s, ratio [%.6f, %.6f], %.2fs; MC ratio %.5f +/- %.5f (1e7 samples)",
                    std::string(to_string(v.outcome)).c_str(), v.ratio.lower, v.ratio.upper, secs, r, r_se)};
}

// 4. Reported bounds never loosen, step by step, on every fixture region.
Check monotonicity()
{
    std::size_t steps = 0;
    std::size_t violations = 0;
    for (const auto& name : valid_fixtures()) {
        const auto paths = enumerate_paths(load_fixture(name));
        const auto measure = mixture_measure(paths);
        for (Event e : all_events) {
            VolumeBounder b(build_event_region(paths, e), measure, {10.0, {}, 1, false});
            double lo = b.lower();
            double hi = b.upper();
            for (int i = 0; i < 20000 && !b.resolved(); ++i) {
                b.refine(1);
                ++steps;
                if (b.lower() < lo || b.upper() > hi || b.lower() > b.upper())
                    ++violations;
                lo = b.lower();
                hi = b.upper();
            }
        }
    }
    return {violations == 0 && steps >= 100000, fmt("%zu refinement steps, %zu violations", steps, violations)};
}

// 5. Random tasks: every event's MC estimate within 3 SE of the bracket.
Check statistical_bracketing()
{
    TaskGenerator gen(20240601);
    std::size_t checks = 0;
    std::size_t violations = 0;
    std::string worst;
    for (int t = 0; t < 50; ++t) {
        const auto task = load_text(gen.next());
        const auto paths = enumerate_paths(task);
        const Verdict v = check_fairness(paths, 0.1);
        const auto mc = mc_estimate(task, 1'000'000, 42);
        for (Event e : all_events) {
            const auto& b = v.at(e);
            const auto& m = mc.at(e);
            const double tol = m.tolerance(3.0);
            ++checks;
            if (m.estimate < b.lower - tol || m.estimate > b.upper + tol) {
                ++violations;
                worst += fmt(" task %d %s: %.6f not in [%.6f, %.6f]+/-%.2g;", t, std::string(event_name(e)).c_str(),
                    m.estimate, b.lower, b.upper, tol);
            }
        }
    }
    return {violations <= 1, fmt("%zu checks, %zu outside 3 SE", checks, violations) + worst};
}

// 6. gaussian_cdf against the 100-digit series on [-12, 12].
Check cdf_accuracy()
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> unif(-12.0, 12.0);
    double max_err = 0.0;
    double max_sym = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double z = i == 0 ? 0.0 : unif(rng);
        max_err = std::max(max_err, std::fabs(gaussian_cdf(z) - normal_cdf_reference(z)));
        max_sym = std::max(max_sym, std::fabs(gaussian_cdf(z) + gaussian_cdf(-z) - 1.0));
    }
    return {max_err <= 1e-10 && max_sym <= 1e-10,
        fmt("max |error| %.3g, max |Phi(z)+Phi(-z)-1| %.3g over 10^4 points", max_err, max_sym)};
}

// 7. Certificates round-trip through JSON and are accepted; tampering is caught.
Check certificates()
{
    std::size_t decided = 0;
    std::string failures;
    for (const auto& name : valid_fixtures()) {
        const std::string src = read_fixture(name);
        const Verdict v = check_fairness(load_text(src));
        if (v.outcome == Outcome::Unknown)
            continue;
        ++decided;
        const auto cert = certificate_from_json(nlohmann::json::parse(to_json(emit_certificate(v, src)).dump()));
        const auto res = verify_certificate(cert, src);
        if (!res.accepted())
            failures += " " + name + " rejected (" + std::string(to_string(res.reason)) + ": " + res.detail + ");";
    }

    const std::string src = read_fixture("casestudy.fg");
    const auto task = load_text(src);
    const Verdict v = check_fairness(task);
    const Certificate cert = emit_certificate(v, src);

    // box translated across a region hyperplane
    Certificate moved = cert;
    bool translated = false;
    const auto paths = enumerate_paths(task);
    for (auto& [event, ce] : moved.events) {
        if (ce.side != Side::Inside || translated)
            continue;
        const EventRegion region = build_event_region(paths, event);
        for (std::size_t k = 0; k < ce.components.size() && !translated; ++k) {
            auto& boxes = ce.components[k].boxes;
            for (std::size_t i = 0; i < boxes.size() && !translated; ++i) {
                for (std::size_t d = 0; d < boxes[i].dimension() && !translated; ++d) {
                    for (double shift : {20.0, -20.0}) {
                        std::vector<Interval> dims = boxes[i].intervals();
                        dims[d].lo += shift * paths.stddevs[d];
                        dims[d].hi += shift * paths.stddevs[d];
                        Box b(dims);
                        if (classify(b, region.components[k].region) != Classification::Full) {
                            boxes[i] = b;
                            translated = true;
                            break;
                        }
                    }
                }
            }
        }
    }
    const auto r_move = verify_certificate(moved, src);

    Certificate inflated = cert;
    inflated.events.at(Event::QualifiedNotSensitive).claimed += 1e-3;
    const auto r_inflate = verify_certificate(inflated, src);

    std::string edited = src;
    edited.replace(edited.find("yExp - colRank"), 14, "yExp - colRank + 1");
    const auto r_edit = verify_certificate(cert, edited);

    const bool ok = failures.empty() && decided > 0 && translated && r_move.reason == Rejection::NonFullBox
        && r_inflate.reason == Rejection::MassMismatch && r_edit.reason == Rejection::DigestMismatch;
    return {ok, fmt("%zu decided fixtures accepted%s; translated box -> %s, inflated bound -> %s, edited source -> %s",
                    decided, failures.c_str(), std::string(to_string(r_move.reason)).c_str(),
                    std::string(to_string(r_inflate.reason)).c_str(), std::string(to_string(r_edit.reason)).c_str())};
}

// 8. Bounds of a region and of its complement are mutually consistent.
Check complement_consistency()
{
    std::mt19937_64 rng(8);
    std::size_t violations = 0;
    std::string detail;
    for (int i = 0; i < 20; ++i) {
        const RandomRegion rr = random_region(rng);
        const std::size_t dim = rr.measure.components.front().gaussian.dimension();
        const auto pos = bound_volume(single_component(rr.region, dim), rr.measure);
        const auto neg = bound_volume(single_component(region_of(negate(rr.formula)), dim), rr.measure);
        const double tail = std::max(pos.tail_mass, neg.tail_mass);
        if (!(pos.lower + neg.lower <= 1.0) || !(pos.upper + neg.upper >= 1.0 - 2.0 * tail)) {
            ++violations;
            detail += fmt(" region %d: lower sum %.17g, upper sum %.17g;", i, pos.lower + neg.lower, pos.upper + neg.upper);
        }
    }
    return {violations == 0, fmt("20 random regions, %zu violations", violations) + detail};
}

// 9. Symbolic path selection agrees with the concrete interpreter.
Check differential_interpreter()
{
    std::size_t compared = 0;
    std::size_t boundary = 0;
    std::size_t disagreements = 0;
    for (const auto& name : valid_fixtures()) {
        const auto task = load_fixture(name);
        const auto paths = enumerate_paths(task);
        const auto r = differential(task, paths, 10000, 9);
        compared += r.compared;
        boundary += r.boundary;
        disagreements += r.disagreements;
    }
    return {disagreements == 0 && compared > 0,
        fmt("%zu inputs compared across %zu fixtures, %zu boundary hits skipped, %zu disagreements", compared,
            valid_fixtures().size(), boundary, disagreements)};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
        {"half-space sanity", half_space},
        {"closed-form box", closed_form_box},
        {"case study verdict", case_study},
        {"bound monotonicity", monotonicity},
        {"statistical bracketing", statistical_bracketing},
        {"gaussian_cdf accuracy", cdf_accuracy},
        {"certificate round-trip", certificates},
        {"complement consistency", complement_consistency},
        {"differential interpreter", differential_interpreter},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass)
            ++failed;
    }
    return failed == 0 ? 0 : 1;
}
