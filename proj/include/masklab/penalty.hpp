#pragma once

#include <functional>

#include "masklab/masks.hpp"

namespace masklab {

// Monte Carlo estimate of the expected-loss gap induced by a stochastic mask.
// The reference point is the eval-time weights W * E[m] (identical to L(W)
// for the mean-one Gaussian stirs), which is the point the second-order
// expansion is taken around; closed_form is left for the caller to fill from
// closed_form_penalty.
struct PenaltyEstimate {
    double mc_gap = 0.0;
    double closed_form = 0.0;
    std::size_t n_samples = 0;      // finite draws actually averaged
    double std_err = 0.0;
    std::size_t excluded = 0;       // non-finite loss draws
};

PenaltyEstimate mc_expected_loss_gap(const std::function<double(const Tensor&)>& loss_fn,
                                     const Tensor& w, const MaskSpec& spec,
                                     std::size_t n_samples, RngStream& stream);

// (1/2) sum Var(m) w_i^2 H_ii with the stir's mask variance: p(1-p) for
// Bernoulli, sigma^2 for Gaussian, threshold * sigma^2 for PartialGaussian.
double closed_form_penalty(const Tensor& w, const Tensor& hessian_diag,
                           const MaskSpec& spec);

// (1/2) tr(H diag(w) Cov diag(w)) for a full Hessian and mask covariance.
// Both matrices must be symmetric; with diagonal Cov this reduces exactly to
// closed_form_penalty.
double general_trace_penalty(const Tensor& w, const Tensor& hessian,
                             const Tensor& mask_cov);

} // namespace masklab
