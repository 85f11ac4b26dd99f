#pragma once

#include "elmsync/common.hpp"

#include <span>

namespace elmsync {

/// M(d) for d = 0..Nd-1. Entries are finite and non-negative.
struct TimingMetricVector {
    RealVec values;
};

/// Unit-L2-norm copy of a TimingMetricVector, or all zeros if the metric vanished.
struct NormalizedTM {
    RealVec values;
};

/// P(d) = sum_{m<N/2} conj(r(d+m)) r(d+m+N/2). Samples past the end of r read as zero.
Complex autocorrelation_p(std::span<const Complex> r, std::size_t d, std::size_t n_subcarriers);

/// R(d) = sum_{m<N/2} |r(d+m+N/2)|^2. Samples past the end of r read as zero.
double energy_r(std::span<const Complex> r, std::size_t d, std::size_t n_subcarriers);

/**
 * Schmidl coarse timing metric M(d) = |P(d)|^2 / R(d)^2 over the window.
 * M(d) is set to 0 wherever R(d) <= 1e-12 * (N/2) * mean|r|^2.
 */
TimingMetricVector timing_metric(std::span<const Complex> r, const SystemParams& params);

inline constexpr double kNormFloor = 1e-15;

NormalizedTM normalize_tm(const TimingMetricVector& metric);

/// Index of the largest element; the smallest index wins ties. Empty input -> 0.
std::size_t argmax_first(std::span<const double> values);

/// The SC_corr baseline: argmax_d M(d).
std::size_t sc_corr_estimate(std::span<const Complex> r, const SystemParams& params);

}  // namespace elmsync
