#include "elmsync/harness.hpp"
#include "elmsync/rng.hpp"

#include <doctest.h>

#include <bit>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

using namespace elmsync;

namespace {

ExperimentConfig tiny() {
    ExperimentConfig cfg;
    cfg.n_train = 64;
    cfg.n_test_trials = 40;
    cfg.snr_grid_db = {12.0};
    cfg.target_evm.reset();
    cfg.eta_train = cfg.eta_test = 0.05;
    cfg.n_hidden = 32;
    cfg.master_seed = 5;
    return cfg;
}

Estimator probe(std::function<std::size_t(const TrialWindow&)> fn) {
    Estimator e;
    e.name = "probe";
    e.probe = std::move(fn);
    return e;
}

std::vector<std::string> lines_of(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config validation") {
    ExperimentConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.L_train = 16;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ExperimentConfig{};
    cfg.snr_grid_db.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ExperimentConfig{};
    cfg.n_train = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("enum ids round-trip") {
    for (auto k : {EstimatorKind::sc_corr, EstimatorKind::elm, EstimatorKind::ts_learn})
        CHECK(parse_estimator(to_string(k)) == k);
    for (auto s : {Scenario::fig2, Scenario::gen_l, Scenario::gen_eta}) CHECK(parse_scenario(to_string(s)) == s);
    CHECK(to_string(Scenario::gen_l) == "genL");
    CHECK_THROWS_AS(parse_scenario("fig9"), ConfigError);
    CHECK_THROWS_AS(parse_estimator("cnn"), ConfigError);
}

TEST_CASE("hidden width follows 8(N+Ng)") {
    ExperimentConfig cfg;
    CHECK(hidden_width(cfg, EstimatorKind::elm) == 640);
    CHECK(feature_dim(EstimatorKind::elm, cfg.system) == 160);
    CHECK(feature_dim(EstimatorKind::ts_learn, cfg.system) == 320);
}

TEST_CASE("generate_training_set") {
    auto cfg = tiny();
    cfg.n_train = 4;
    const auto a = generate_training_set(cfg);
    CHECK(a.size() == 4);
    for (Eigen::Index i = 0; i < 4; ++i) {
        CHECK(a.inputs.col(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(a.targets.col(i).sum() == doctest::Approx(static_cast<double>(cfg.system.cp_len - cfg.L_train + 2)));
    }
    const auto b = generate_training_set(cfg);
    CHECK(a.inputs == b.inputs);
    CHECK(a.targets == b.targets);
    cfg.master_seed = 6;
    CHECK(generate_training_set(cfg).inputs != a.inputs);
}

TEST_CASE("streaming training matches the materialized set") {
    auto cfg = tiny();
    cfg.n_train = 300;
    const auto set = generate_training_set(cfg);
    const auto streamed = train_model(cfg, EstimatorKind::elm);
    ElmModel direct = init_elm(streamed.hidden_dim(), streamed.input_dim(), streamed.init_seed);
    train(direct, set, TrainOptions{.ridge_scale = cfg.ridge_scale});
    CHECK((direct.output_weights - streamed.output_weights).norm() <
          1e-9 * std::max(1.0, direct.output_weights.norm()));
}

TEST_CASE("draw_window is deterministic and within range") {
    const auto cfg = tiny();
    const auto link = make_link(cfg, cfg.L_test, cfg.eta_test);
    const auto a = draw_window(cfg, link, 12.0, 99);
    const auto b = draw_window(cfg, link, 12.0, 99);
    CHECK(a.sto == b.sto);
    CHECK(a.received == b.received);
    CHECK(a.received.size() == cfg.system.metric_span());
    for (std::uint64_t s = 0; s < 300; ++s) CHECK(draw_window(cfg, link, 12.0, s).sto <= cfg.system.max_sto());
}

TEST_CASE("make_link requires a resolved back-off") {
    ExperimentConfig cfg;
    CHECK_THROWS_AS(make_link(cfg, 8, 0.05), StateError);
    const auto cal = resolve_backoff(cfg);
    REQUIRE(cal.has_value());
    CHECK(cfg.eta_train == cal->eta);
    CHECK(cfg.eta_test == cal->eta);
    CHECK_NOTHROW(make_link(cfg, 8, cfg.eta_test));
}

TEST_CASE("error region bounds in run_trial") {
    const auto cfg = tiny();
    const std::size_t L = cfg.L_test, ng = cfg.system.cp_len;
    CHECK_FALSE(is_timing_error(20, 20 + L, L, ng));
    CHECK(is_timing_error(20, 20 + L - 1, L, ng));
    CHECK_FALSE(is_timing_error(20, 20 + ng + 1, L, ng));
    CHECK(is_timing_error(20, 20 + ng + 2, L, ng));
    for (std::uint64_t s = 0; s < 20; ++s) {
        CHECK_FALSE(run_trial(cfg, probe([&](const TrialWindow& w) { return w.sto + L; }), 12.0, s).error);
        CHECK(run_trial(cfg, probe([&](const TrialWindow& w) { return w.sto + L - 1; }), 12.0, s).error);
        CHECK_FALSE(run_trial(cfg, probe([&](const TrialWindow& w) { return w.sto + ng + 1; }), 12.0, s).error);
        CHECK(run_trial(cfg, probe([&](const TrialWindow& w) { return w.sto + ng + 2; }), 12.0, s).error);
    }
}

TEST_CASE("evaluate_curve with fixed-answer estimators") {
    auto cfg = tiny();
    cfg.snr_grid_db = {0.0, 20.0};
    const std::size_t ng = cfg.system.cp_len;
    const auto inside = evaluate_curve(cfg, probe([&](const TrialWindow& w) { return w.sto + ng; }));
    for (const auto& r : inside.rows) CHECK(r.n_errors == 0);
    const auto zero = evaluate_curve(cfg, probe([](const TrialWindow&) { return std::size_t{0}; }));
    for (const auto& r : zero.rows) CHECK(r.p_error == 1.0);
}

TEST_CASE("observed error rate concentrates around the true rate") {
    // Errors with probability 1/100 keyed on the window content.
    auto p01 = probe([](const TrialWindow& w) {
        const auto h = mix64(std::bit_cast<std::uint64_t>(w.received[3].real()));
        return h % 100 == 0 ? std::size_t{0} : w.sto + 10;
    });
    int inside = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto cfg = tiny();
        cfg.n_test_trials = 10000;
        cfg.master_seed = 1000 + seed;
        const double p = evaluate_curve(cfg, p01).rows[0].p_error;
        if (p >= 0.008 && p <= 0.012) ++inside;
    }
    CHECK(inside >= 18);
}

TEST_CASE("Wilson interval against reference values") {
    const auto a = wilson_interval(10, 100);
    CHECK(a.low == doctest::Approx(0.05522913706067509).epsilon(1e-9));
    CHECK(a.high == doctest::Approx(0.17436566150491348).epsilon(1e-9));
    const auto b = wilson_interval(0, 50);
    CHECK(b.low == 0.0);
    CHECK(b.high == doctest::Approx(0.07134759913335874).epsilon(1e-9));
    const auto c = wilson_interval(150, 20000);
    CHECK(c.low == doctest::Approx(0.006395239046146146).epsilon(1e-9));
    CHECK(c.high == doctest::Approx(0.008793916469116909).epsilon(1e-9));
}

TEST_CASE("common random numbers: estimators see the same windows") {
    const auto cfg = tiny();
    std::vector<std::size_t> seen_a, seen_b;
    std::mutex mu;
    const Estimator ests[] = {
        probe([&](const TrialWindow& w) { std::lock_guard l(mu); seen_a.push_back(w.sto); return w.sto; }),
        probe([&](const TrialWindow& w) { std::lock_guard l(mu); seen_b.push_back(w.sto); return w.sto; }),
    };
    evaluate_curves(cfg, ests);
    CHECK(seen_a == seen_b);
    CHECK(seen_a.size() == cfg.n_test_trials);
}

TEST_CASE("sentinel: zero window maps to offset 0") {
    auto cfg = tiny();
    cfg.n_train = 50;
    const auto model = train_model(cfg, EstimatorKind::ts_learn);
    const ComplexVec zeros(cfg.system.metric_span());
    CHECK(ts_learn_estimate(zeros, model, cfg.system) == 0);
    const auto link = make_link(cfg, 8, 0.05);
    const auto w = draw_window(cfg, link, 12.0, 3);
    CHECK(ts_learn_estimate(w.received, model, cfg.system) == ts_learn_estimate(w.received, model, cfg.system));
    ElmModel wrong = init_elm(10, 160, 1, 160);
    CHECK_THROWS_AS(ts_learn_estimate(w.received, wrong, cfg.system), DomainError);
}

TEST_CASE("scenario suites write CSVs and a plot script") {
    auto cfg = tiny();
    cfg.n_train = 100;
    cfg.n_test_trials = 20;
    cfg.target_evm = 40.0;
    cfg.calibration_trials = 20;
    const auto dir = std::filesystem::temp_directory_path() / "elmsync_suite_test";
    std::filesystem::remove_all(dir);

    const auto fig2 = run_experiment_suite(cfg, Scenario::fig2, dir);
    CHECK(fig2.curves.size() == 5);
    CHECK(fig2.csv_files.size() == 5);
    CHECK(std::filesystem::exists(fig2.plot_script));
    const auto lines = lines_of(fig2.csv_files.front());
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "scenario,estimator,label_scheme,snr_db,L_train,L_test,eta_train,eta_test,n_trials,n_errors,"
                      "p_error,ci_low,ci_high,master_seed");
    std::vector<std::string> names;
    for (const auto& c : fig2.curves) names.push_back(c.name);
    for (const char* n : {"SC_corr", "TS_Learn", "Ref_onehot", "Prop_T_mid", "Prop_T_ISI-free"})
        CHECK(std::find(names.begin(), names.end(), n) != names.end());

    const auto gen_l = run_scenario(cfg, Scenario::gen_l);
    std::size_t mid = 0, isi = 0;
    for (const auto& c : gen_l) {
        if (c.name == "Prop_T_mid") ++mid;
        if (c.name == "Prop_T_ISI-free") ++isi;
    }
    CHECK(mid == 9);
    CHECK(isi == 9);

    const auto gen_eta = run_scenario(cfg, Scenario::gen_eta);
    std::set<std::pair<double, double>> combos;
    for (const auto& c : gen_eta)
        if (c.name == "Prop_T_mid") combos.emplace(c.eta_train, c.eta_test);
    CHECK(combos.size() == 9);
    std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
