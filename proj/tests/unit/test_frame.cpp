#include "elmsync/frame.hpp"
#include "elmsync/rng.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace elmsync;

namespace {

// Forward DFT with 1/N, written independently of the library twiddle table.
ComplexVec dft(const ComplexVec& s) {
    const auto n = static_cast<double>(s.size());
    ComplexVec d(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        for (std::size_t t = 0; t < s.size(); ++t)
            d[k] += s[t] * std::exp(Complex{0.0, -2.0 * kPi * static_cast<double>(t) * static_cast<double>(k) / n});
        d[k] /= n;
    }
    return d;
}

}  // namespace

TEST_SUITE("frame") {

TEST_CASE("QPSK symbols have unit magnitude and are seed-deterministic") {
    const auto p = SystemParams::with_default_window(4, 1);
    const auto a = modulate_subcarriers(42, p);
    REQUIRE(a.size() == 4);
    for (const auto& x : a) CHECK(std::abs(x) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(a == modulate_subcarriers(42, p));
    CHECK(a != modulate_subcarriers(43, p));
}

TEST_CASE("QPSK second moment over many draws") {
    const SystemParams p;
    double acc = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed = 0; seed < 160; ++seed) {
        for (const auto& x : modulate_subcarriers(seed, p)) {
            acc += std::norm(x);
            ++count;
        }
    }
    CHECK(count >= 10000);
    CHECK(acc / static_cast<double>(count) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("sigma_d2 scales the constellation") {
    SystemParams p;
    p.sigma_d2 = 4.0;
    for (const auto& x : modulate_subcarriers(1, p)) CHECK(std::abs(x) == doctest::Approx(2.0));
}

TEST_CASE("unsupported modulation id is a config error") {
    CHECK(parse_modulation("qpsk") == Modulation::qpsk);
    CHECK_THROWS_AS(parse_modulation("qam64"), ConfigError);
}

TEST_CASE("ofdm_modulate: zero input and DC tone") {
    const ComplexVec zeros(8);
    for (const auto& x : ofdm_modulate(zeros)) CHECK(x == Complex{0.0, 0.0});
    ComplexVec dc(8);
    dc[0] = Complex{0.3, -1.2};
    for (const auto& x : ofdm_modulate(dc)) CHECK(std::abs(x - dc[0]) < 1e-15);
}

TEST_CASE("ofdm_modulate is the unnormalized inverse of the 1/N forward DFT") {
    Rng rng = make_rng(9);
    ComplexVec d(8);
    for (auto& x : d) x = complex_gaussian(rng, 1.0);
    const auto s = ofdm_modulate(d);
    double es = 0.0, ed = 0.0;
    for (const auto& x : s) es += std::norm(x);
    for (const auto& x : d) ed += std::norm(x);
    CHECK(es == doctest::Approx(8.0 * ed).epsilon(1e-12));
    const auto back = dft(s);
    for (std::size_t k = 0; k < d.size(); ++k) CHECK(std::abs(back[k] - d[k]) < 1e-12);
}

TEST_CASE("add_cyclic_prefix") {
    const ComplexVec sym{1.0, 2.0, 3.0, 4.0};
    CHECK(add_cyclic_prefix(sym, 2) == ComplexVec{3.0, 4.0, 1.0, 2.0, 3.0, 4.0});
    CHECK(add_cyclic_prefix(sym, 0) == sym);
    CHECK_THROWS_AS(add_cyclic_prefix(sym, 4), ConfigError);

    const SystemParams p;
    const auto s = ofdm_modulate(modulate_subcarriers(3, p));
    const auto with_cp = add_cyclic_prefix(s, 16);
    REQUIRE(with_cp.size() == 80);
    for (std::size_t i = 0; i < 16; ++i) CHECK(with_cp[i] == with_cp[64 + i]);
}

TEST_CASE("preamble: half-period body, empty odd subcarriers, power") {
    const auto p8 = SystemParams::with_default_window(8, 2);
    const auto pre = build_schmidl_preamble(5, p8);
    REQUIRE(pre.size() == 10);
    for (std::size_t i = 0; i < 4; ++i) CHECK(pre[2 + i] == pre[6 + i]);

    const SystemParams p;
    double body_power = 0.0;
    std::size_t seeds = 10000;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        const auto x = build_schmidl_preamble(seed, p);
        double e = 0.0;
        for (std::size_t i = p.cp_len; i < x.size(); ++i) e += std::norm(x[i]);
        // Unnormalized transform: time-domain power is N times the per-subcarrier power.
        body_power += e / 64.0 / 64.0;
        if (seed < 20) {
            const auto spec = dft(ComplexVec(x.begin() + 16, x.end()));
            double odd = 0.0;
            for (std::size_t k = 1; k < 64; k += 2) odd += std::norm(spec[k]);
            CHECK(odd < 1e-20);
        }
    }
    CHECK(body_power / static_cast<double>(seeds) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("preamble rejects odd N") {
    SystemParams p;
    p.n_subcarriers = 63;
    CHECK_THROWS_AS(build_schmidl_preamble(1, p), ConfigError);
}

TEST_CASE("assemble_frame layout") {
    SystemParams p;
    const auto pre = build_schmidl_preamble(1, p);
    const auto f1 = assemble_frame(pre, 1, 1, p);
    CHECK(f1.samples.size() == 160);
    const auto f3 = assemble_frame(pre, 3, 1, p);
    CHECK(f3.samples.size() == 320);
    REQUIRE(f3.layout.size() == 4);
    CHECK(f3.layout[0].name == "preamble");
    std::size_t expect = 0;
    for (const auto& seg : f3.layout) {
        CHECK(seg.offset == expect);
        expect += seg.length;
    }
    CHECK(expect == f3.samples.size());
    CHECK_THROWS_AS(assemble_frame(pre, 0, 1, p), DomainError);
}

TEST_CASE("generate_frame is deterministic") {
    const SystemParams p;
    CHECK(generate_frame(11, p).samples == generate_frame(11, p).samples);
    CHECK(generate_frame(11, p).samples != generate_frame(12, p).samples);
}

TEST_CASE("IQ dump is interleaved little-endian float64") {
    const auto path = std::filesystem::temp_directory_path() / "elmsync_iq_test.bin";
    const ComplexVec x{{1.0, -2.0}, {0.5, 0.25}};
    write_iq_f64le(path, x);
    std::ifstream in(path, std::ios::binary);
    double vals[4];
    in.read(reinterpret_cast<char*>(vals), sizeof vals);
    CHECK(in.gcount() == sizeof vals);
    CHECK(vals[0] == 1.0);
    CHECK(vals[1] == -2.0);
    CHECK(vals[2] == 0.5);
    CHECK(vals[3] == 0.25);
    std::filesystem::remove(path);
}

}  // TEST_SUITE
