#include "masklab/penalty.hpp"

#include <cmath>

#include "masklab/error.hpp"

namespace masklab {

namespace {

void check_symmetric(const Tensor& m, const char* what) {
    if (m.rank() != 2 || m.dim(0) != m.dim(1))
        throw ShapeError(std::string(what) + " must be square, got " + m.shape_str());
    double scale = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) scale = std::max(scale, std::fabs(m[i]));
    const double tol = 1e-9 * std::max(scale, 1.0);
    for (std::size_t i = 0; i < m.dim(0); ++i)
        for (std::size_t j = i + 1; j < m.dim(1); ++j)
            if (std::fabs(m(i, j) - m(j, i)) > tol)
                throw DomainError(std::string(what) + " is not symmetric");
}

} // namespace

PenaltyEstimate mc_expected_loss_gap(const std::function<double(const Tensor&)>& loss_fn,
                                     const Tensor& w, const MaskSpec& spec,
                                     std::size_t n_samples, RngStream& stream) {
    spec.validate();
    if (n_samples < 1000)
        throw ContractError("mc_expected_loss_gap: need at least 1000 samples, got " +
                            std::to_string(n_samples));
    Tensor ref = mul(w, expected_mask_value(spec));
    const double base = loss_fn(ref);
    if (!std::isfinite(base))
        throw DomainError("mc_expected_loss_gap: loss at the reference point is non-finite");

    PenaltyEstimate est;
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        Tensor m = sample_mask(spec, w.shape(), stream);
        const double gap = loss_fn(mul(w, m)) - base;
        if (!std::isfinite(gap)) {
            ++est.excluded;
            continue;
        }
        sum += gap;
        sum_sq += gap * gap;
        ++est.n_samples;
    }
    if (est.n_samples == 0)
        throw DomainError("mc_expected_loss_gap: every mask draw gave a non-finite loss");
    const double n = static_cast<double>(est.n_samples);
    est.mc_gap = sum / n;
    if (est.n_samples > 1) {
        const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
        est.std_err = std::sqrt(var / n);
    }
    return est;
}

double closed_form_penalty(const Tensor& w, const Tensor& hessian_diag,
                           const MaskSpec& spec) {
    spec.validate();
    if (!w.same_shape(hessian_diag))
        throw ShapeError("closed_form_penalty: weights " + w.shape_str() +
                         " vs hessian diagonal " + hessian_diag.shape_str());
    const double var = mask_variance(spec);
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        acc += var * w[i] * w[i] * hessian_diag[i];
    return 0.5 * acc;
}

double general_trace_penalty(const Tensor& w, const Tensor& hessian,
                             const Tensor& mask_cov) {
    if (w.rank() != 1)
        throw ShapeError("general_trace_penalty: weights must be rank 1, got " + w.shape_str());
    check_symmetric(hessian, "general_trace_penalty: hessian");
    check_symmetric(mask_cov, "general_trace_penalty: mask covariance");
    const std::size_t n = w.dim(0);
    if (hessian.dim(0) != n || mask_cov.dim(0) != n)
        throw ShapeError("general_trace_penalty: dimension mismatch between " + w.shape_str() +
                         ", " + hessian.shape_str() + " and " + mask_cov.shape_str());
    for (std::size_t i = 0; i < n; ++i)
        if (mask_cov(i, i) < 0.0)
            throw DomainError("general_trace_penalty: mask covariance has a negative diagonal");
    // tr(H diag(w) Cov diag(w)) = sum_ij H_ij Cov_ji w_i w_j, and Cov is symmetric.
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            acc += hessian(i, j) * mask_cov(i, j) * w[i] * w[j];
    return 0.5 * acc;
}

} // namespace masklab
