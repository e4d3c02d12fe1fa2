#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <limits>
#include <mutex>
#include <optional>
#include <queue>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "fairsq/gaussian.hpp"
#include "fairsq/regions.hpp"
#include "fairsq/symexec.hpp"

namespace fairsq {

struct RefinementBudget {
    std::size_t max_splits = 200000;
    double gap_target = 1e-4;
};

struct VolumeOptions {
    double truncation_sigmas = 10.0;
    RangeOptions range;
    unsigned workers = 1;     // >1 refines disjoint boxes concurrently
    bool record_boxes = true; // keep Full/Empty boxes for certificates
};

// Certified bracket on the probability of an event region.
struct ProbabilityBounds {
    double lower = 0.0;
    double upper = 1.0;
    std::vector<std::vector<Box>> full_boxes;  // per component, inside the region
    std::vector<std::vector<Box>> empty_boxes; // per component, outside the region
    std::vector<bool> empty_region;            // per component, region has no conjunctions
    double mixed_mass = 0.0;
    double tail_mass = 0.0;
    std::size_t splits_used = 0;
    std::size_t open_boxes = 0;

    double gap() const noexcept { return upper - lower; }
};

// The mixture measure matching build_event_region's component order.
inline MixtureMeasure mixture_measure(const PathSet& paths)
{
    MixtureMeasure m;
    GaussianProduct g{paths.means, paths.stddevs};
    for (auto& [choices, weight] : bernoulli_components(paths.bernoulli_probabilities))
        m.components.push_back({weight, g});
    return m;
}

namespace detail {

// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x)
    {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace detail

// Branch-and-bound weighted volume computation. Each mixture component starts
// from its truncation box; Mixed boxes are refined largest-mass first, Full
// boxes accumulate into the lower bound, and the upper bound is the lower
// bound plus the unresolved Mixed mass plus the truncation tail.
//
// A Mixed box is cut along an undecided single-variable atom's hyperplane when
// one crosses its interior; otherwise it is bisected on the widest dimension
// (in standard deviations) among the variables of its undecided atoms.
class VolumeBounder {
public:
    VolumeBounder(EventRegion region, MixtureMeasure measure, VolumeOptions options = {})
        : region_(std::move(region)), measure_(std::move(measure)), options_(options)
    {
        measure_.check();
        if (region_.components.size() != measure_.components.size())
            throw std::invalid_argument("bound_volume: region and measure components differ in number");
        ledgers_.resize(region_.components.size());
        for (std::size_t k = 0; k < ledgers_.size(); ++k) {
            const auto& g = measure_.components[k].gaussian;
            if (region_.components[k].region.max_dimension() > g.dimension())
                throw std::invalid_argument("bound_volume: region mentions a dimension the measure lacks");
            auto& led = ledgers_[k];
            led.weight = measure_.components[k].weight;
            led.empty_region = region_.components[k].region.empty();
            if (led.empty_region)
                continue; // probability exactly zero, no tail either
            led.tail = truncation_tail(g.dimension(), options_.truncation_sigmas);
            Entry root;
            root.component = k;
            root.box = truncation_box(g, options_.truncation_sigmas);
            root.mass = box_mass(root.box, g);
            switch (classify(root.box, region_.components[k].region, options_.range)) {
            case Classification::Full: record(led.full, led.full_boxes, root.box, root.mass); break;
            case Classification::Empty: record(led.empty, led.empty_boxes, root.box, root.mass); break;
            case Classification::Mixed:
                led.mixed.add(root.mass);
                push(std::move(root));
                break;
            }
        }
        update_bounds();
    }

    // Performs up to `max_splits` refinement steps, stopping early once
    // upper - lower <= gap_target or nothing is left to refine.
    std::size_t refine(std::size_t max_splits, double gap_target = 0.0)
    {
        if (options_.workers > 1)
            return refine_parallel(max_splits, gap_target);
        std::size_t done = 0;
        while (done < max_splits && !heap_.empty() && !(gap() <= gap_target)) {
            Entry e = pop();
            apply(process(std::move(e)));
            ++done;
        }
        return done;
    }

    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }
    double gap() const noexcept { return upper_ - lower_; }
    // Latest unrounded recomputation, before the running max/min.
    double raw_lower() const noexcept { return raw_lower_; }
    double raw_upper() const noexcept { return raw_upper_; }
    std::size_t splits_used() const noexcept { return splits_; }
    bool resolved() const noexcept { return heap_.empty(); }
    const EventRegion& region() const noexcept { return region_; }
    const MixtureMeasure& measure() const noexcept { return measure_; }
    const VolumeOptions& options() const noexcept { return options_; }

    ProbabilityBounds bounds() const
    {
        ProbabilityBounds b;
        b.lower = lower_;
        b.upper = upper_;
        b.splits_used = splits_;
        b.open_boxes = heap_.size() + stuck_;
        double mixed = 0.0;
        double tail = 0.0;
        for (const auto& led : ledgers_) {
            b.full_boxes.push_back(led.full_boxes);
            b.empty_boxes.push_back(led.empty_boxes);
            b.empty_region.push_back(led.empty_region);
            mixed += led.weight * std::max(0.0, led.mixed.value());
            tail += led.weight * led.tail;
        }
        b.mixed_mass = mixed;
        b.tail_mass = tail;
        return b;
    }

private:
    struct Entry {
        double priority = 0.0;
        std::uint64_t seq = 0;
        std::size_t component = 0;
        Box box;
        double mass = 0.0;
    };

    struct Order {
        bool operator()(const Entry& a, const Entry& b) const
        {
            if (a.priority != b.priority)
                return a.priority < b.priority;
            return a.seq > b.seq;
        }
    };

    struct Ledger {
        double weight = 1.0;
        double tail = 0.0;
        bool empty_region = false;
        detail::CompensatedSum full;
        detail::CompensatedSum mixed;
        detail::CompensatedSum empty;
        std::vector<Box> full_boxes;
        std::vector<Box> empty_boxes;
    };

    struct Processed {
        std::size_t component = 0;
        double parent_mass = 0.0;
        bool stuck = false;
        std::array<Entry, 2> children;
        std::array<Classification, 2> classes{};
    };

    void record(detail::CompensatedSum& sum, std::vector<Box>& boxes, const Box& b, double mass)
    {
        sum.add(mass);
        if (options_.record_boxes)
            boxes.push_back(b);
    }

    void push(Entry e)
    {
        e.priority = ledgers_[e.component].weight * e.mass;
        e.seq = next_seq_++;
        heap_.push(std::move(e));
    }

    Entry pop()
    {
        Entry e = heap_.top();
        heap_.pop();
        return e;
    }

    std::optional<std::pair<std::size_t, double>> choose_cut(const Box& box, const Region& region) const
    {
        const auto detail = classify_detail(box, region, options_.range);
        const auto& sigma = measure_.components.front().gaussian.stddev;
        auto sigma_width = [&](std::size_t d) { return box[d].width() / sigma[d]; };

        std::optional<std::pair<std::size_t, double>> aligned;
        double aligned_width = -1.0;
        std::vector<bool> involved(box.dimension(), false);
        for (const Atom* a : detail.undecided) {
            for (const auto& [d, c] : a->form.terms())
                involved[d] = true;
            if (a->form.terms().size() != 1)
                continue;
            const auto [d, coef] = a->form.terms().front();
            const double t = -a->form.constant() / coef;
            if (!(t > box[d].lo && t < box[d].hi))
                continue;
            const double w = sigma_width(d);
            if (w > aligned_width) {
                aligned_width = w;
                aligned = std::make_pair(d, t);
            }
        }
        if (aligned)
            return aligned;

        std::optional<std::size_t> widest;
        for (std::size_t d = 0; d < box.dimension(); ++d) {
            if (!involved[d] || !(box[d].width() > 0))
                continue;
            if (!widest || sigma_width(d) > sigma_width(*widest))
                widest = d;
        }
        if (!widest) {
            for (std::size_t d = 0; d < box.dimension(); ++d)
                if (box[d].width() > 0 && (!widest || sigma_width(d) > sigma_width(*widest)))
                    widest = d;
        }
        if (!widest)
            return std::nullopt;
        const Interval iv = box[*widest];
        const double mid = iv.lo + 0.5 * (iv.hi - iv.lo);
        if (!(mid > iv.lo && mid < iv.hi))
            return std::nullopt;
        return std::make_pair(*widest, mid);
    }

    Processed process(Entry e) const
    {
        Processed out;
        out.component = e.component;
        out.parent_mass = e.mass;
        const Region& region = region_.components[e.component].region;
        const auto& g = measure_.components[e.component].gaussian;
        const auto cut = choose_cut(e.box, region);
        if (!cut) {
            out.stuck = true;
            out.children[0] = std::move(e);
            return out;
        }
        auto [left, right] = split_at(e.box, cut->first, cut->second);
        out.children[0].box = std::move(left);
        out.children[1].box = std::move(right);
        for (std::size_t i = 0; i < 2; ++i) {
            auto& child = out.children[i];
            child.component = e.component;
            child.mass = box_mass(child.box, g);
            out.classes[i] = classify(child.box, region, options_.range);
        }
        return out;
    }

    void apply(Processed p)
    {
        auto& led = ledgers_[p.component];
        if (p.stuck) {
            ++stuck_;
            return;
        }
        ++splits_;
        led.mixed.add(-p.parent_mass);
        for (std::size_t i = 0; i < 2; ++i) {
            auto& child = p.children[i];
            switch (p.classes[i]) {
            case Classification::Full: record(led.full, led.full_boxes, child.box, child.mass); break;
            case Classification::Empty: record(led.empty, led.empty_boxes, child.box, child.mass); break;
            case Classification::Mixed:
                led.mixed.add(child.mass);
                push(std::move(child));
                break;
            }
        }
        update_bounds();
    }

    // Reported bounds only ever tighten: each recomputation is itself a valid
    // bracket, so the running max/min of them is too.
    void update_bounds()
    {
        double lo = 0.0;
        double hi = 0.0;
        for (const auto& led : ledgers_) {
            const double full = led.full.value();
            lo += led.weight * full;
            hi += led.weight * (full + std::max(0.0, led.mixed.value()) + led.tail);
        }
        raw_lower_ = lo;
        raw_upper_ = hi;
        lower_ = std::max(lower_, round_down(std::clamp(lo, 0.0, 1.0)));
        upper_ = std::min(upper_, round_up(std::clamp(hi, 0.0, 1.0)));
        if (upper_ < lower_)
            upper_ = lower_;
    }

    std::size_t refine_parallel(std::size_t max_splits, double gap_target)
    {
        std::mutex mutex;
        std::condition_variable cv;
        std::size_t started = 0;
        std::size_t in_flight = 0;
        auto worker = [&] {
            std::unique_lock lock(mutex);
            for (;;) {
                if (started >= max_splits || gap() <= gap_target)
                    break;
                if (heap_.empty()) {
                    if (in_flight == 0)
                        break;
                    cv.wait(lock);
                    continue;
                }
                Entry e = pop();
                ++started;
                ++in_flight;
                lock.unlock();
                Processed p = process(std::move(e));
                lock.lock();
                apply(std::move(p));
                --in_flight;
                cv.notify_all();
            }
            cv.notify_all();
        };
        std::vector<std::thread> threads;
        for (unsigned i = 0; i < options_.workers; ++i)
            threads.emplace_back(worker);
        for (auto& t : threads)
            t.join();
        return started;
    }

    EventRegion region_;
    MixtureMeasure measure_;
    VolumeOptions options_;
    std::vector<Ledger> ledgers_;
    std::priority_queue<Entry, std::vector<Entry>, Order> heap_;
    std::uint64_t next_seq_ = 0;
    std::size_t splits_ = 0;
    std::size_t stuck_ = 0;
    double lower_ = 0.0;
    double upper_ = 1.0;
    double raw_lower_ = 0.0;
    double raw_upper_ = 1.0;
};

// Certified lower/upper bounds on Pr[region] under `measure`; stops when the
// split budget is spent or upper - lower <= gap_target.
inline ProbabilityBounds bound_volume(const EventRegion& region, const MixtureMeasure& measure,
    const RefinementBudget& budget = {}, const VolumeOptions& options = {})
{
    VolumeBounder bounder(region, measure, options);
    bounder.refine(budget.max_splits, budget.gap_target);
    return bounder.bounds();
}

} // namespace fairsq
