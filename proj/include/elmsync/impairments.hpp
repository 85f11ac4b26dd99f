#pragma once

#include "elmsync/common.hpp"

#include <cstdint>
#include <span>

namespace elmsync {

/// Memoryless Saleh HPA model: A(x) = a_a x / (1 + b_a x^2), Phi(x) = a_p x^2 / (1 + b_p x^2).
struct SalehParams {
    double alpha_a = 1.96;
    double beta_a = 0.99;
    double alpha_phi = 2.53;
    double beta_phi = 2.82;

    /// Throws ConfigError unless all four coefficients are strictly positive.
    void validate() const;

    double am_am(double x) const { return alpha_a * x / (1.0 + beta_a * x * x); }
    double am_pm(double x) const { return alpha_phi * x * x / (1.0 + beta_phi * x * x); }

    /// max_x A(x) = alpha_a / (2 sqrt(beta_a)), reached at x = 1/sqrt(beta_a).
    double peak_amplitude() const;
};

/**
 * Applies the back-off scale `eta` and the Saleh nonlinearity sample by
 * sample: r e^{j psi} -> A(eta r) e^{j (psi + Phi(eta r))}.
 *
 * The output is computed as s * G(|s|) with a complex gain that depends
 * on the magnitude only, so any rotation of the input commutes with it.
 */
ComplexVec saleh_distort(std::span<const Complex> signal, const SalehParams& saleh, double eta);

/// 100 * sqrt(sum |x - ref|^2 / sum |ref|^2).
double compute_evm(std::span<const Complex> distorted, std::span<const Complex> reference);

/// Mean per-frame EVM of the HPA output against alpha_a * eta * s.
double measure_backoff_evm(double eta, const SalehParams& saleh, const SystemParams& params,
                           std::uint64_t seed, std::size_t trials);

/// Mean |s~(n)|^2 of HPA output over `trials` random frames.
double measure_transmit_power(double eta, const SalehParams& saleh, const SystemParams& params,
                              std::uint64_t seed, std::size_t trials);

struct BackoffCalibration {
    double eta = 0.0;
    double evm = 0.0;  // percent, at eta
    int iterations = 0;
};

inline constexpr double kBackoffLow = 1e-4;
inline constexpr double kBackoffHigh = 10.0;
inline constexpr double kCalibrationTolerance = 0.5;  // EVM percentage points

/**
 * Bisects eta on [1e-4, 10] (geometrically) until the mean EVM is within
 * 0.5 points of the target. The frames are fixed by `seed`, so EVM(eta)
 * is a deterministic function; a probe that falls outside its bracket's
 * EVM range is reported as non-monotone.
 */
BackoffCalibration calibrate_backoff(double target_evm, const SalehParams& saleh,
                                     const SystemParams& params, std::uint64_t seed,
                                     std::size_t trials);

struct ChannelRealization {
    ComplexVec taps;
    std::size_t length() const { return taps.size(); }
};

/// Exponential power-delay profile, normalized to unit total power.
RealVec power_delay_profile(std::size_t length, double decay_db_per_tap);

/// Independent Rayleigh taps following power_delay_profile().
ChannelRealization draw_channel(std::size_t length, double decay_db_per_tap, std::uint64_t seed);

/// sigma^2 = sigma_P^2 * 10^(-snr_db / 10). +inf dB gives zero noise.
double snr_to_noise_variance(double snr_db, double signal_power);

struct ImpairmentConfig {
    double snr_db = 0.0;
    double cfo = 0.0;    // nu, subcarrier spacings
    double phase = 0.0;  // phi, radians
    std::size_t sto = 0; // theta, samples
    double eta = 1.0;
    std::size_t channel_length = 1;
    double snr_reference_power = 1.0;  // sigma_P^2 in the SNR definition
};

/**
 * Received window r(n), n = 0..out_len-1:
 *   r(n) = sum_l h(l) s~(n - theta - l) e^{j(2 pi n nu / N + phi)} + w(n)
 * with silence before the frame start and after its end. `out_len`
 * defaults to Nd; harness code asks for params.metric_span().
 */
ComplexVec apply_channel(std::span<const Complex> distorted, const ChannelRealization& channel,
                         const ImpairmentConfig& cfg, const SystemParams& params, std::uint64_t seed,
                         std::size_t out_len = 0);

}  // namespace elmsync
