#include "masklab/stats.hpp"

#include <cmath>
#include <string>

#include "masklab/error.hpp"

namespace masklab {

namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;

// Series for P(a, x), valid (and fast) for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < kMaxIter; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEps)
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw DomainError("gamma_p: series did not converge for a=" + std::to_string(a));
}

// Modified Lentz continued fraction for Q(a, x), valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps)
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw DomainError("gamma_q: continued fraction did not converge for a=" +
                      std::to_string(a));
}

void check_args(double a, double x) {
    if (!(a > 0.0)) throw DomainError("incomplete gamma: a must be positive");
    if (!(x >= 0.0)) throw DomainError("incomplete gamma: x must be non-negative");
}

} // namespace

double gamma_p(double a, double x) {
    check_args(a, x);
    if (x == 0.0) return 0.0;
    return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
    check_args(a, x);
    if (x == 0.0) return 1.0;
    return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_cf(a, x);
}

double chi_square_upper_tail(double x, std::size_t dof) {
    if (dof == 0) throw DomainError("chi_square_upper_tail: dof must be positive");
    if (!(x >= 0.0)) throw DomainError("chi_square_upper_tail: statistic must be non-negative");
    return gamma_q(static_cast<double>(dof) / 2.0, x / 2.0);
}

} // namespace masklab
