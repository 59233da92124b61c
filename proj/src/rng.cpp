#include "masklab/rng.hpp"

#include <cmath>

#include "masklab/error.hpp"

namespace masklab {

namespace {
constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;
} // namespace

std::uint64_t mix64(std::uint64_t x) {
    x += kGamma;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t RngStream::next_u64() {
    std::uint64_t h = mix64(seed_);
    h = mix64(h ^ stream_id_);
    h = mix64(h ^ counter_);
    ++counter_;
    return mix64(h);
}

RngStream RngStream::split() {
    const std::uint64_t child_id = mix64(stream_id_ ^ next_u64());
    return RngStream(seed_, child_id, 0);
}

RngStream RngStream::keyed(std::uint64_t seed, std::uint64_t key) {
    return RngStream(seed, mix64(key ^ 0x5bf03635d4b0e7a1ull), 0);
}

double RngStream::next_uniform() {
    // 53 mantissa bits, offset by half an ulp so the result is strictly
    // inside (0, 1) and safe to feed into the normal quantile.
    const std::uint64_t bits = next_u64() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double RngStream::next_normal(double mean, double stddev) {
    if (stddev < 0.0)
        throw DomainError("next_normal: negative stddev " + std::to_string(stddev));
    if (stddev == 0.0) {
        ++counter_; // keep counter advancement uniform per element
        return mean;
    }
    return mean + stddev * inverse_normal_cdf(next_uniform());
}

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("inverse_normal_cdf: p must be in (0,1)");

    // Acklam's rational approximation, then one Halley step.
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // Halley refinement against the exact CDF.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

} // namespace masklab
