#pragma once

#include "elmsync/common.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace elmsync {

enum class Modulation { qpsk };

/// Throws ConfigError for an unknown scheme id.
Modulation parse_modulation(std::string_view id);

/// N i.i.d. constellation points with |d(k)|^2 = sigma_d2.
ComplexVec modulate_subcarriers(std::uint64_t seed, const SystemParams& params,
                                Modulation scheme = Modulation::qpsk);

/// s(n) = sum_k d(k) exp(j 2 pi n k / N), n = 0..N-1. No 1/N factor.
ComplexVec ofdm_modulate(std::span<const Complex> symbols);

/// [symbol[N-Ng..N-1], symbol[0..N-1]]
ComplexVec add_cyclic_prefix(std::span<const Complex> symbol, std::size_t cp_len);

/**
 * Schmidl-type training symbol with CP. Only even subcarriers carry
 * (sqrt(2)-scaled) QPSK, so the body repeats with period N/2 and the
 * average power matches a data symbol.
 */
ComplexVec build_schmidl_preamble(std::uint64_t seed, const SystemParams& params);

struct Segment {
    std::string name;
    std::size_t offset = 0;
    std::size_t length = 0;
    std::size_t cp_len = 0;
};

struct ComplexFrame {
    ComplexVec samples;
    std::vector<Segment> layout;
};

/// Preamble followed by `payload_symbols` CP-prefixed QPSK data symbols.
ComplexFrame assemble_frame(std::span<const Complex> preamble, std::size_t payload_symbols,
                            std::uint64_t seed, const SystemParams& params);

/// Preamble + params.payload_symbols data symbols, everything drawn from `seed`.
ComplexFrame generate_frame(std::uint64_t seed, const SystemParams& params);

/// Debug dump: interleaved I/Q, float64, little-endian.
void write_iq_f64le(const std::filesystem::path& path, std::span<const Complex> samples);

}  // namespace elmsync
