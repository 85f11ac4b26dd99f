#include "elmsync/impairments.hpp"

#include "elmsync/frame.hpp"
#include "elmsync/rng.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace elmsync {

void SalehParams::validate() const {
    for (double v : {alpha_a, beta_a, alpha_phi, beta_phi}) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError("Saleh coefficients must be strictly positive and finite");
    }
}

double SalehParams::peak_amplitude() const { return alpha_a / (2.0 * std::sqrt(beta_a)); }

ComplexVec saleh_distort(std::span<const Complex> signal, const SalehParams& saleh, double eta) {
    if (!(eta > 0.0)) throw DomainError("back-off scale eta must be positive");
    ComplexVec out(signal.size());
    for (std::size_t i = 0; i < signal.size(); ++i) {
        const double x = eta * std::abs(signal[i]);
        // A(x)/|s| written without the division so |s| = 0 needs no branch.
        const double gain = saleh.alpha_a * eta / (1.0 + saleh.beta_a * x * x);
        out[i] = signal[i] * std::polar(gain, saleh.am_pm(x));
    }
    return out;
}

double compute_evm(std::span<const Complex> distorted, std::span<const Complex> reference) {
    if (distorted.size() != reference.size())
        throw DomainError("EVM operands differ in length");
    double err = 0.0;
    double ref = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        err += std::norm(distorted[i] - reference[i]);
        ref += std::norm(reference[i]);
    }
    if (!(ref > 0.0)) throw DomainError("EVM reference is all zero");
    return 100.0 * std::sqrt(err / ref);
}

double measure_backoff_evm(double eta, const SalehParams& saleh, const SystemParams& params,
                           std::uint64_t seed, std::size_t trials) {
    if (trials == 0) throw DomainError("EVM measurement needs at least one frame");
    double sum = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto frame = generate_frame(derive_seed(seed, {t}), params);
        const auto distorted = saleh_distort(frame.samples, saleh, eta);
        ComplexVec reference(frame.samples.size());
        for (std::size_t i = 0; i < reference.size(); ++i)
            reference[i] = saleh.alpha_a * eta * frame.samples[i];
        sum += compute_evm(distorted, reference);
    }
    return sum / static_cast<double>(trials);
}

double measure_transmit_power(double eta, const SalehParams& saleh, const SystemParams& params,
                              std::uint64_t seed, std::size_t trials) {
    if (trials == 0) throw DomainError("power measurement needs at least one frame");
    double energy = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto frame = generate_frame(derive_seed(seed, {t}), params);
        for (const auto& s : saleh_distort(frame.samples, saleh, eta)) energy += std::norm(s);
        count += frame.samples.size();
    }
    return energy / static_cast<double>(count);
}

BackoffCalibration calibrate_backoff(double target_evm, const SalehParams& saleh,
                                     const SystemParams& params, std::uint64_t seed,
                                     std::size_t trials) {
    if (!(target_evm > 0.0) || !std::isfinite(target_evm))
        throw DomainError("target EVM must be a positive percentage");
    auto evm_at = [&](double eta) { return measure_backoff_evm(eta, saleh, params, seed, trials); };

    double lo = kBackoffLow;
    double hi = kBackoffHigh;
    double evm_lo = evm_at(lo);
    double evm_hi = evm_at(hi);
    if (evm_hi < evm_lo) throw CalibrationError("EVM is not increasing over the back-off bracket");
    if (target_evm < evm_lo || target_evm > evm_hi) {
        std::ostringstream msg;
        msg << "target EVM " << target_evm << "% unreachable: achievable range over eta in [" << lo
            << ", " << hi << "] is [" << evm_lo << "%, " << evm_hi << "%]";
        throw CalibrationError(msg.str());
    }
    if (std::abs(evm_lo - target_evm) < kCalibrationTolerance) return {lo, evm_lo, 0};
    if (std::abs(evm_hi - target_evm) < kCalibrationTolerance) return {hi, evm_hi, 0};

    for (int it = 1; it <= 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        const double evm_mid = evm_at(mid);
        if (evm_mid < evm_lo || evm_mid > evm_hi)
            throw CalibrationError("EVM(eta) is not monotone inside the search bracket");
        if (std::abs(evm_mid - target_evm) < kCalibrationTolerance) return {mid, evm_mid, it};
        if (evm_mid < target_evm) {
            lo = mid;
            evm_lo = evm_mid;
        } else {
            hi = mid;
            evm_hi = evm_mid;
        }
    }
    throw CalibrationError("back-off bisection did not converge");
}

RealVec power_delay_profile(std::size_t length, double decay_db_per_tap) {
    if (length < 1) throw DomainError("channel needs at least one tap");
    RealVec profile(length);
    double total = 0.0;
    for (std::size_t l = 0; l < length; ++l) {
        profile[l] = std::pow(10.0, -static_cast<double>(l) * decay_db_per_tap / 10.0);
        total += profile[l];
    }
    for (auto& p : profile) p /= total;
    return profile;
}

ChannelRealization draw_channel(std::size_t length, double decay_db_per_tap, std::uint64_t seed) {
    const auto profile = power_delay_profile(length, decay_db_per_tap);
    Rng rng = make_rng(seed);
    ChannelRealization ch;
    ch.taps.reserve(length);
    for (double p : profile) ch.taps.push_back(complex_gaussian(rng, p));
    return ch;
}

double snr_to_noise_variance(double snr_db, double signal_power) {
    if (std::isinf(snr_db) && snr_db > 0) return 0.0;
    return signal_power * std::pow(10.0, -snr_db / 10.0);
}

ComplexVec apply_channel(std::span<const Complex> distorted, const ChannelRealization& channel,
                         const ImpairmentConfig& cfg, const SystemParams& params, std::uint64_t seed,
                         std::size_t out_len) {
    if (cfg.sto > params.max_sto())
        throw DomainError("STO " + std::to_string(cfg.sto) + " outside [0, " +
                          std::to_string(params.max_sto()) + "]");
    if (channel.taps.empty()) throw DomainError("channel has no taps");
    if (out_len == 0) out_len = params.window_len;

    const auto frame_len = static_cast<std::ptrdiff_t>(distorted.size());
    const auto taps = static_cast<std::ptrdiff_t>(channel.taps.size());
    const auto sto = static_cast<std::ptrdiff_t>(cfg.sto);
    ComplexVec r(out_len, Complex{0.0, 0.0});
    for (std::size_t n = 0; n < out_len; ++n) {
        Complex acc{0.0, 0.0};
        for (std::ptrdiff_t l = 0; l < taps; ++l) {
            const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(n) - sto - l;
            if (m >= 0 && m < frame_len) acc += channel.taps[static_cast<std::size_t>(l)] * distorted[static_cast<std::size_t>(m)];
        }
        r[n] = acc;
    }

    if (cfg.cfo != 0.0 || cfg.phase != 0.0) {
        const double n_sc = static_cast<double>(params.n_subcarriers);
        for (std::size_t n = 0; n < out_len; ++n)
            r[n] *= std::polar(1.0, 2.0 * kPi * static_cast<double>(n) * cfg.cfo / n_sc + cfg.phase);
    }

    const double noise_var = snr_to_noise_variance(cfg.snr_db, cfg.snr_reference_power);
    if (noise_var > 0.0) {
        Rng rng = make_rng(seed);
        for (auto& x : r) x += complex_gaussian(rng, noise_var);
    }
    return r;
}

}  // namespace elmsync
