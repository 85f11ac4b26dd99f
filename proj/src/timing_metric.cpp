#include "elmsync/timing_metric.hpp"

#include <cmath>

namespace elmsync {

namespace {

Complex sample_or_zero(std::span<const Complex> r, std::size_t i) {
    return i < r.size() ? r[i] : Complex{0.0, 0.0};
}

}  // namespace

Complex autocorrelation_p(std::span<const Complex> r, std::size_t d, std::size_t n_subcarriers) {
    const std::size_t half = n_subcarriers / 2;
    Complex acc{0.0, 0.0};
    for (std::size_t m = 0; m < half; ++m)
        acc += std::conj(sample_or_zero(r, d + m)) * sample_or_zero(r, d + m + half);
    return acc;
}

double energy_r(std::span<const Complex> r, std::size_t d, std::size_t n_subcarriers) {
    const std::size_t half = n_subcarriers / 2;
    double acc = 0.0;
    for (std::size_t m = 0; m < half; ++m) acc += std::norm(sample_or_zero(r, d + m + half));
    return acc;
}

TimingMetricVector timing_metric(std::span<const Complex> r, const SystemParams& params) {
    const std::size_t n = params.n_subcarriers;
    double mean_power = 0.0;
    for (const auto& x : r) mean_power += std::norm(x);
    if (!r.empty()) mean_power /= static_cast<double>(r.size());
    const double floor = 1e-12 * static_cast<double>(n / 2) * mean_power;

    TimingMetricVector out;
    out.values.assign(params.window_len, 0.0);
    for (std::size_t d = 0; d < params.window_len; ++d) {
        const double energy = energy_r(r, d, n);
        if (energy <= floor) continue;
        out.values[d] = std::norm(autocorrelation_p(r, d, n)) / (energy * energy);
    }
    return out;
}

NormalizedTM normalize_tm(const TimingMetricVector& metric) {
    double sq = 0.0;
    for (double v : metric.values) sq += v * v;
    const double norm = std::sqrt(sq);
    NormalizedTM out;
    out.values.assign(metric.values.size(), 0.0);
    if (norm < kNormFloor) return out;
    for (std::size_t i = 0; i < metric.values.size(); ++i) out.values[i] = metric.values[i] / norm;
    return out;
}

std::size_t argmax_first(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

std::size_t sc_corr_estimate(std::span<const Complex> r, const SystemParams& params) {
    return argmax_first(timing_metric(r, params).values);
}

}  // namespace elmsync
