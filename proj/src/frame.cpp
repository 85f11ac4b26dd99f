#include "elmsync/frame.hpp"

#include "elmsync/rng.hpp"

#include <bit>
#include <cmath>
#include <fstream>

namespace elmsync {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

Complex qpsk_point(Rng& rng, double amplitude) {
    // Two independent sign bits; amplitude is the point magnitude.
    const std::uint64_t bits = rng();
    const double a = amplitude / std::sqrt(2.0);
    return {(bits & 1U) ? a : -a, (bits & 2U) ? a : -a};
}

}  // namespace

void SystemParams::validate() const {
    if (n_subcarriers < 2 || !is_power_of_two(n_subcarriers))
        throw ConfigError("N must be an even power of two, got " + std::to_string(n_subcarriers));
    if (cp_len >= n_subcarriers)
        throw ConfigError("cyclic prefix must be shorter than N");
    if (window_len < cp_len + 2)
        throw ConfigError("observation window must hold at least Ng + 2 samples");
    if (!(sigma_d2 > 0.0) || !std::isfinite(sigma_d2))
        throw ConfigError("sigma_d2 must be positive");
    if (payload_symbols < 1)
        throw ConfigError("frame needs at least one payload symbol");
}

SystemParams SystemParams::with_default_window(std::size_t n_subcarriers, std::size_t cp_len) {
    SystemParams p;
    p.n_subcarriers = n_subcarriers;
    p.cp_len = cp_len;
    p.window_len = 2 * (n_subcarriers + cp_len);
    return p;
}

Modulation parse_modulation(std::string_view id) {
    if (id == "qpsk") return Modulation::qpsk;
    throw ConfigError("unknown modulation scheme '" + std::string(id) + "'");
}

ComplexVec modulate_subcarriers(std::uint64_t seed, const SystemParams& params, Modulation scheme) {
    if (scheme != Modulation::qpsk) throw ConfigError("unsupported modulation");
    Rng rng = make_rng(seed);
    const double amplitude = std::sqrt(params.sigma_d2);
    ComplexVec d(params.n_subcarriers);
    for (auto& x : d) x = qpsk_point(rng, amplitude);
    return d;
}

ComplexVec ofdm_modulate(std::span<const Complex> symbols) {
    const std::size_t n = symbols.size();
    ComplexVec out(n);
    if (n == 0) return out;
    // Reduce n*k mod N before evaluating the exponential so large products
    // do not lose phase accuracy.
    ComplexVec twiddle(n);
    for (std::size_t m = 0; m < n; ++m)
        twiddle[m] = std::polar(1.0, 2.0 * kPi * static_cast<double>(m) / static_cast<double>(n));
    for (std::size_t t = 0; t < n; ++t) {
        Complex acc{0.0, 0.0};
        for (std::size_t k = 0; k < n; ++k) acc += symbols[k] * twiddle[(t * k) % n];
        out[t] = acc;
    }
    return out;
}

ComplexVec add_cyclic_prefix(std::span<const Complex> symbol, std::size_t cp_len) {
    const std::size_t n = symbol.size();
    if (cp_len >= n && !(cp_len == 0 && n == 0))
        throw ConfigError("cyclic prefix length must be smaller than the symbol length");
    ComplexVec out;
    out.reserve(n + cp_len);
    out.insert(out.end(), symbol.end() - static_cast<std::ptrdiff_t>(cp_len), symbol.end());
    out.insert(out.end(), symbol.begin(), symbol.end());
    return out;
}

ComplexVec build_schmidl_preamble(std::uint64_t seed, const SystemParams& params) {
    const std::size_t n = params.n_subcarriers;
    if (n % 2 != 0) throw ConfigError("Schmidl preamble needs an even subcarrier count");
    Rng rng = make_rng(seed);
    const double amplitude = std::sqrt(2.0 * params.sigma_d2);
    ComplexVec d(n, Complex{0.0, 0.0});
    for (std::size_t k = 0; k < n; k += 2) d[k] = qpsk_point(rng, amplitude);
    return add_cyclic_prefix(ofdm_modulate(d), params.cp_len);
}

ComplexFrame assemble_frame(std::span<const Complex> preamble, std::size_t payload_symbols,
                            std::uint64_t seed, const SystemParams& params) {
    if (payload_symbols < 1) throw DomainError("frame needs at least one payload symbol");
    ComplexFrame frame;
    frame.samples.assign(preamble.begin(), preamble.end());
    frame.layout.push_back({"preamble", 0, preamble.size(), params.cp_len});
    for (std::size_t i = 0; i < payload_symbols; ++i) {
        const auto d = modulate_subcarriers(derive_seed(seed, {i}), params);
        const auto sym = add_cyclic_prefix(ofdm_modulate(d), params.cp_len);
        frame.layout.push_back({"payload_" + std::to_string(i), frame.samples.size(), sym.size(), params.cp_len});
        frame.samples.insert(frame.samples.end(), sym.begin(), sym.end());
    }
    return frame;
}

ComplexFrame generate_frame(std::uint64_t seed, const SystemParams& params) {
    const auto preamble = build_schmidl_preamble(derive_seed(seed, {0x50524541ULL}), params);
    return assemble_frame(preamble, params.payload_symbols, derive_seed(seed, {0x5041594CULL}), params);
}

void write_iq_f64le(const std::filesystem::path& path, std::span<const Complex> samples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    auto put = [&](double v) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
        unsigned char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
        out.write(reinterpret_cast<const char*>(buf), 8);
    };
    for (const auto& s : samples) {
        put(s.real());
        put(s.imag());
    }
    if (!out) throw Error("write failed: " + path.string());
}

}  // namespace elmsync
