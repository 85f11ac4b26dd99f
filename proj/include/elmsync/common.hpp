#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace elmsync {

using Complex = std::complex<double>;
using ComplexVec = std::vector<Complex>;
using RealVec = std::vector<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Error taxonomy. Every failure the library reports derives from Error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration (bad keys, impossible geometry).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of an operation (index out of window, etc.).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Operation invoked on an object in the wrong state (e.g. untrained model).
class StateError : public Error {
public:
    using Error::Error;
};

/// Corrupt, truncated or version-mismatched model file.
class FormatError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

/**
 * OFDM geometry shared by every stage of the pipeline.
 *
 * The observation window holds `window_len` trial offsets. Evaluating the
 * timing metric at the last offset needs `n_subcarriers - 1` further
 * samples, so receivers produce metric_span() samples.
 */
struct SystemParams {
    std::size_t n_subcarriers = 64;  // N
    std::size_t cp_len = 16;         // Ng
    std::size_t window_len = 160;    // Nd
    double sigma_d2 = 1.0;           // per-subcarrier symbol power
    std::size_t payload_symbols = 1;

    std::size_t symbol_len() const { return n_subcarriers + cp_len; }
    std::size_t half_len() const { return n_subcarriers / 2; }
    std::size_t frame_len() const { return symbol_len() * (1 + payload_symbols); }
    std::size_t metric_span() const { return window_len + n_subcarriers - 1; }

    /// Largest STO for which the whole ISI-free region stays in the window.
    std::size_t max_sto() const { return window_len - (cp_len + 2); }

    /// Throws ConfigError on an unusable geometry.
    void validate() const;

    /// Nd = 2(N + Ng).
    static SystemParams with_default_window(std::size_t n_subcarriers, std::size_t cp_len);
};

}  // namespace elmsync
