#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fairsq/digest.hpp"
#include "fairsq/dsl/parser.hpp"
#include "fairsq/dsl/printer.hpp"
#include "fairsq/dsl/validate.hpp"
#include "fairsq/fairness.hpp"

namespace fairsq {

class NothingToCertify : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class MalformedCertificate : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::string_view certificate_format = "fairsq-certificate";
inline constexpr int certificate_version = 1;

// Boxes on the "inside" side are Full for the event region and certify a
// lower bound; boxes on the "outside" side are Empty for it and certify the
// upper bound 1 - (their mass), per component.
enum class Side { Inside, Outside };

inline constexpr std::string_view to_string(Side s) noexcept { return s == Side::Inside ? "inside" : "outside"; }

struct CertificateComponent {
    double weight = 1.0;
    std::vector<Box> boxes;
};

struct CertificateEvent {
    Side side = Side::Inside;
    double claimed = 0.0; // claimed_lower when inside, claimed_upper when outside
    std::vector<CertificateComponent> components;
};

struct Certificate {
    std::string digest;
    std::string digest_alg{digest_algorithm};
    double truncation_sigmas = 10.0;
    double epsilon = 0.1;
    Outcome verdict = Outcome::Unknown;
    RatioBounds ratio;
    std::map<Event, CertificateEvent> events;
};

// Side each event must be certified on for the verdict's deciding inequality.
inline Side required_side(Outcome verdict, Event e)
{
    const bool numerator_side = e == Event::QualifiedSensitive || e == Event::NotSensitive;
    if (verdict == Outcome::Unfair)
        return numerator_side ? Side::Outside : Side::Inside;
    return numerator_side ? Side::Inside : Side::Outside;
}

namespace detail {

inline double component_mass(const std::vector<Box>& boxes, const GaussianProduct& g)
{
    CompensatedSum sum;
    for (const auto& b : boxes)
        sum.add(box_mass(b, g));
    return sum.value();
}

// Certified value of one event given per-component box lists. Components whose
// region is empty contribute zero on either side.
inline double certified_value(Side side, const std::vector<std::vector<Box>>& boxes, const MixtureMeasure& m,
    const std::vector<bool>& region_empty)
{
    CompensatedSum total;
    for (std::size_t k = 0; k < boxes.size(); ++k) {
        if (region_empty[k])
            continue;
        const double mass = component_mass(boxes[k], m.components[k].gaussian);
        const double v = side == Side::Inside ? mass : 1.0 - mass;
        total.add(m.components[k].weight * std::clamp(v, 0.0, 1.0));
    }
    const double v = std::clamp(total.value(), 0.0, 1.0);
    return side == Side::Inside ? round_down(v) : round_up(v);
}

inline nlohmann::json ratio_value(double v)
{
    if (std::isinf(v))
        return "inf";
    return v;
}

inline double ratio_value(const nlohmann::json& j)
{
    if (j.is_string() && j.get<std::string>() == "inf")
        return infinity;
    if (!j.is_number())
        throw MalformedCertificate("ratio bound must be a number or \"inf\"");
    return j.get<double>();
}

} // namespace detail

inline Certificate emit_certificate(const Verdict& verdict, std::string_view source)
{
    if (verdict.outcome == Outcome::Unknown)
        throw NothingToCertify("emit_certificate: verdict is unknown");
    Certificate c;
    c.digest = sha256_hex(source);
    c.truncation_sigmas = verdict.truncation_sigmas;
    c.epsilon = verdict.epsilon;
    c.verdict = verdict.outcome;
    c.ratio = verdict.ratio;
    for (Event e : all_events) {
        const auto& pb = verdict.at(e);
        CertificateEvent ce;
        ce.side = required_side(verdict.outcome, e);
        const auto& lists = ce.side == Side::Inside ? pb.full_boxes : pb.empty_boxes;
        for (std::size_t k = 0; k < lists.size(); ++k)
            ce.components.push_back({verdict.measure.components[k].weight, lists[k]});
        ce.claimed = detail::certified_value(ce.side, lists, verdict.measure, pb.empty_region);
        c.events.emplace(e, std::move(ce));
    }
    return c;
}

inline nlohmann::json to_json(const Certificate& c)
{
    nlohmann::json events = nlohmann::json::object();
    for (const auto& [e, ce] : c.events) {
        nlohmann::json comps = nlohmann::json::array();
        for (const auto& comp : ce.components) {
            nlohmann::json boxes = nlohmann::json::array();
            for (const auto& b : comp.boxes) {
                nlohmann::json dims = nlohmann::json::array();
                for (const auto& iv : b.intervals())
                    dims.push_back({iv.lo, iv.hi});
                boxes.push_back(std::move(dims));
            }
            comps.push_back({{"weight", comp.weight}, {"boxes", std::move(boxes)}});
        }
        nlohmann::json je{{"side", std::string(to_string(ce.side))}, {"components", std::move(comps)}};
        je[ce.side == Side::Inside ? "claimed_lower" : "claimed_upper"] = ce.claimed;
        events[std::string(event_name(e))] = std::move(je);
    }
    return {
        {"format", std::string(certificate_format)},
        {"version", certificate_version},
        {"digest", c.digest},
        {"digest_alg", c.digest_alg},
        {"K", c.truncation_sigmas},
        {"epsilon", c.epsilon},
        {"verdict", std::string(to_string(c.verdict))},
        {"ratio", {{"lower", detail::ratio_value(c.ratio.lower)}, {"upper", detail::ratio_value(c.ratio.upper)}}},
        {"events", std::move(events)},
    };
}

// Structural decoding; throws MalformedCertificate on anything unexpected.
inline Certificate certificate_from_json(const nlohmann::json& j)
{
    try {
        if (!j.is_object())
            throw MalformedCertificate("certificate must be a JSON object");
        if (j.at("format").get<std::string>() != certificate_format || j.at("version").get<int>() != certificate_version)
            throw MalformedCertificate("unsupported certificate format or version");
        Certificate c;
        c.digest = j.at("digest").get<std::string>();
        c.digest_alg = j.at("digest_alg").get<std::string>();
        c.truncation_sigmas = j.at("K").get<double>();
        c.epsilon = j.at("epsilon").get<double>();
        const auto verdict = j.at("verdict").get<std::string>();
        if (verdict == "fair")
            c.verdict = Outcome::Fair;
        else if (verdict == "unfair")
            c.verdict = Outcome::Unfair;
        else
            throw MalformedCertificate("verdict must be \"fair\" or \"unfair\"");
        c.ratio.lower = detail::ratio_value(j.at("ratio").at("lower"));
        c.ratio.upper = detail::ratio_value(j.at("ratio").at("upper"));

        const auto& events = j.at("events");
        if (!events.is_object())
            throw MalformedCertificate("events must be an object");
        for (auto it = events.begin(); it != events.end(); ++it) {
            auto found = std::find_if(all_events.begin(), all_events.end(), [&](Event e) { return event_name(e) == it.key(); });
            if (found == all_events.end())
                throw MalformedCertificate("unknown event \"" + it.key() + "\"");
            const auto& je = it.value();
            CertificateEvent ce;
            const auto side = je.at("side").get<std::string>();
            if (side == "inside")
                ce.side = Side::Inside;
            else if (side == "outside")
                ce.side = Side::Outside;
            else
                throw MalformedCertificate("side must be \"inside\" or \"outside\"");
            ce.claimed = je.at(ce.side == Side::Inside ? "claimed_lower" : "claimed_upper").get<double>();
            for (const auto& jc : je.at("components")) {
                CertificateComponent comp;
                comp.weight = jc.at("weight").get<double>();
                for (const auto& jb : jc.at("boxes")) {
                    std::vector<Interval> dims;
                    for (const auto& jd : jb) {
                        if (!jd.is_array() || jd.size() != 2)
                            throw MalformedCertificate("interval must be a [lo, hi] pair");
                        dims.push_back({jd[0].get<double>(), jd[1].get<double>()});
                    }
                    comp.boxes.emplace_back(std::move(dims));
                }
                ce.components.push_back(std::move(comp));
            }
            c.events.emplace(*found, std::move(ce));
        }
        return c;
    } catch (const MalformedCertificate&) {
        throw;
    } catch (const std::exception& e) {
        throw MalformedCertificate(e.what());
    }
}

enum class Rejection {
    None,
    Malformed,
    DigestMismatch,
    SourceInvalid,
    RegionMismatch,
    NonFullBox,
    Overlap,
    MassMismatch,
    VerdictFails,
};

inline constexpr std::string_view to_string(Rejection r) noexcept
{
    switch (r) {
    case Rejection::None: return "accepted";
    case Rejection::Malformed: return "malformed";
    case Rejection::DigestMismatch: return "digest-mismatch";
    case Rejection::SourceInvalid: return "source-invalid";
    case Rejection::RegionMismatch: return "region-mismatch";
    case Rejection::NonFullBox: return "non-full-box";
    case Rejection::Overlap: return "overlap";
    case Rejection::MassMismatch: return "mass-mismatch";
    case Rejection::VerdictFails: return "verdict-fails";
    }
    return "malformed";
}

struct CheckResult {
    Rejection reason = Rejection::None;
    std::string detail;

    bool accepted() const noexcept { return reason == Rejection::None; }
};

inline constexpr double mass_tolerance = 1e-9;

namespace detail {

// First pair of boxes with intersecting interiors, if any.
inline std::optional<std::pair<std::size_t, std::size_t>> find_overlap(const std::vector<Box>& boxes)
{
    std::vector<std::size_t> order(boxes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const bool has_dims = !boxes.empty() && boxes.front().dimension() > 0;
    if (has_dims)
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return boxes[a][0].lo < boxes[b][0].lo; });
    for (std::size_t i = 0; i < order.size(); ++i) {
        const Box& a = boxes[order[i]];
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            const Box& b = boxes[order[j]];
            if (has_dims && b[0].lo >= a[0].hi)
                break;
            if (a.overlaps(b))
                return std::make_pair(order[i], order[j]);
        }
    }
    return std::nullopt;
}

} // namespace detail

// Re-derives everything from the certificate and the original source text:
// digest, regions, per-box classification, disjointness, masses, and finally
// the verdict inequality on the recomputed bounds.
inline CheckResult verify_certificate(const Certificate& c, std::string_view source)
{
    auto reject = [](Rejection r, std::string detail) { return CheckResult{r, std::move(detail)}; };

    if (c.digest_alg != digest_algorithm)
        return reject(Rejection::Malformed, "unsupported digest algorithm \"" + c.digest_alg + "\"");
    if (c.digest != sha256_hex(source))
        return reject(Rejection::DigestMismatch, "source digest does not match the certificate");
    if (c.verdict == Outcome::Unknown)
        return reject(Rejection::Malformed, "certificate claims no verdict");
    if (!(c.epsilon >= 0.0 && c.epsilon <= 1.0))
        return reject(Rejection::Malformed, "epsilon must lie in [0, 1]");

    std::optional<PathSet> paths;
    try {
        auto validated = dsl::validate(dsl::parse_source(source));
        if (!validated.ok())
            return reject(Rejection::SourceInvalid, "source does not validate");
        paths = enumerate_paths(*validated.task);
    } catch (const std::exception& e) {
        return reject(Rejection::SourceInvalid, e.what());
    }
    const MixtureMeasure measure = mixture_measure(*paths);
    const std::size_t dim = paths->gaussian_dimension();

    std::array<ProbabilityBounds, 4> recomputed;
    for (Event e : all_events) {
        const std::string name(event_name(e));
        auto it = c.events.find(e);
        if (it == c.events.end())
            return reject(Rejection::RegionMismatch, "event " + name + " is missing");
        const CertificateEvent& ce = it->second;
        if (ce.side != required_side(c.verdict, e))
            return reject(Rejection::RegionMismatch, "event " + name + " is certified on the wrong side");

        const EventRegion region = build_event_region(*paths, e);
        if (ce.components.size() != region.components.size())
            return reject(Rejection::RegionMismatch, "event " + name + ": component count differs from the source");

        std::vector<std::vector<Box>> lists;
        std::vector<bool> region_empty;
        for (std::size_t k = 0; k < region.components.size(); ++k) {
            const auto& comp = ce.components[k];
            const Region& r = region.components[k].region;
            if (std::fabs(comp.weight - measure.components[k].weight) > 1e-12)
                return reject(Rejection::RegionMismatch, "event " + name + ": component weight differs from the source");
            const Classification want = ce.side == Side::Inside ? Classification::Full : Classification::Empty;
            for (std::size_t b = 0; b < comp.boxes.size(); ++b) {
                const Box& box = comp.boxes[b];
                if (box.dimension() != dim)
                    return reject(Rejection::RegionMismatch, "event " + name + ": box dimension differs from the source");
                if (classify(box, r) != want) {
                    return reject(Rejection::NonFullBox, "event " + name + ", component " + std::to_string(k) + ", box "
                            + std::to_string(b) + " is not " + (want == Classification::Full ? "inside" : "outside")
                            + " the region");
                }
            }
            if (auto o = detail::find_overlap(comp.boxes)) {
                return reject(Rejection::Overlap, "event " + name + ", component " + std::to_string(k) + ": boxes "
                        + std::to_string(o->first) + " and " + std::to_string(o->second) + " overlap");
            }
            lists.push_back(comp.boxes);
            region_empty.push_back(r.empty());
        }

        const double value = detail::certified_value(ce.side, lists, measure, region_empty);
        if (!(std::fabs(value - ce.claimed) <= mass_tolerance)) {
            return reject(Rejection::MassMismatch, "event " + name + ": boxes certify " + dsl::format_number(value)
                    + " but the certificate claims " + dsl::format_number(ce.claimed));
        }
        auto& pb = recomputed[static_cast<std::size_t>(e)];
        pb.lower = ce.side == Side::Inside ? value : 0.0;
        pb.upper = ce.side == Side::Inside ? 1.0 : value;
    }

    const RatioBounds r = ratio_bounds(recomputed[0], recomputed[1], recomputed[2], recomputed[3]);
    const double threshold = 1.0 - c.epsilon;
    if (c.verdict == Outcome::Fair && !(r.lower > threshold))
        return reject(Rejection::VerdictFails, "certified ratio lower bound " + dsl::format_number(r.lower)
                + " does not exceed " + dsl::format_number(threshold));
    if (c.verdict == Outcome::Unfair && !(r.upper <= threshold))
        return reject(Rejection::VerdictFails, "certified ratio upper bound " + dsl::format_number(r.upper)
                + " exceeds " + dsl::format_number(threshold));
    return {};
}

} // namespace fairsq
