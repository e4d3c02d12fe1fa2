#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fairsq/regions.hpp"

namespace fairsq {

inline constexpr double inv_sqrt2 = 0.70710678118654752440;

// Standard normal CDF through the complementary error function; erfc keeps
// full relative accuracy in the lower tail.
inline double gaussian_cdf(double z) { return 0.5 * std::erfc(-z * inv_sqrt2); }

// 1 - Phi(z) without cancellation.
inline double gaussian_ccdf(double z) { return 0.5 * std::erfc(z * inv_sqrt2); }

// Probability that a standard normal lands in [a, b].
inline double standard_interval_mass(double a, double b)
{
    if (!(b > a))
        return 0.0;
    double m;
    if (a >= 0.0)
        m = gaussian_ccdf(a) - gaussian_ccdf(b);
    else if (b <= 0.0)
        m = gaussian_cdf(b) - gaussian_cdf(a);
    else
        m = 1.0 - gaussian_cdf(a) - gaussian_ccdf(b);
    return std::clamp(m, 0.0, 1.0);
}

// Outward allowance applied to computed probability bounds, covering the
// few-ulp error of CDF differences and compensated summation.
inline constexpr double rounding_allowance = 0x1p-50;

inline double round_down(double p) { return p > 0.0 ? std::max(0.0, p - rounding_allowance) : 0.0; }
inline double round_up(double p) { return p > 0.0 ? std::min(1.0, p + rounding_allowance) : 0.0; }

// Independent Gaussians, one per dimension.
struct GaussianProduct {
    std::vector<double> mean;
    std::vector<double> stddev;

    std::size_t dimension() const noexcept { return mean.size(); }

    void check() const
    {
        if (mean.size() != stddev.size())
            throw std::invalid_argument("gaussian product: mean/stddev size mismatch");
        for (double s : stddev)
            if (!(s > 0.0) || !std::isfinite(s))
                throw std::invalid_argument("gaussian product: stddev must be positive");
    }
};

struct MixtureComponent {
    double weight = 1.0;
    GaussianProduct gaussian;
};

// Weighted mixture of Gaussian products; weights are positive and sum to one.
struct MixtureMeasure {
    std::vector<MixtureComponent> components;

    void check() const
    {
        double total = 0.0;
        for (const auto& c : components) {
            if (!(c.weight > 0.0))
                throw std::invalid_argument("mixture measure: weights must be positive");
            c.gaussian.check();
            total += c.weight;
        }
        if (components.empty() || std::fabs(total - 1.0) > 1e-12)
            throw std::invalid_argument("mixture measure: weights must sum to one");
    }
};

inline double box_mass(const Box& b, const GaussianProduct& g)
{
    if (b.dimension() != g.dimension())
        throw std::invalid_argument("box_mass: dimension mismatch");
    double m = 1.0;
    for (std::size_t d = 0; d < b.dimension(); ++d) {
        const double s = g.stddev[d];
        m *= standard_interval_mass((b[d].lo - g.mean[d]) / s, (b[d].hi - g.mean[d]) / s);
        if (m == 0.0)
            break;
    }
    return m;
}

// [mu - K sigma, mu + K sigma] in every dimension.
inline Box truncation_box(const GaussianProduct& g, double k_sigmas)
{
    std::vector<Interval> dims;
    for (std::size_t d = 0; d < g.dimension(); ++d)
        dims.push_back({g.mean[d] - k_sigmas * g.stddev[d], g.mean[d] + k_sigmas * g.stddev[d]});
    return Box(std::move(dims));
}

// Mass outside the truncation box, 1 - (1 - 2 Q(K))^n, without cancellation.
inline double truncation_tail(std::size_t dimension, double k_sigmas)
{
    const double per_dim = 2.0 * gaussian_ccdf(k_sigmas);
    return -std::expm1(static_cast<double>(dimension) * std::log1p(-per_dim));
}

} // namespace fairsq
