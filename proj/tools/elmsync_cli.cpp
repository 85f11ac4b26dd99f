// Command-line front end: calibrate, train, eval, sweep, selftest.

#include "elmsync/config.hpp"
#include "elmsync/harness.hpp"
#include "elmsync/impairments.hpp"
#include "property_suite.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iomanip>
#include <iostream>

using namespace elmsync;

namespace {

ExperimentConfig config_or_default(const std::string& path) {
    return path.empty() ? ExperimentConfig{} : load_config(path);
}

void log_line(const std::string& msg) {
    using clock = std::chrono::steady_clock;
    static const auto start = clock::now();
    const double t = std::chrono::duration<double>(clock::now() - start).count();
    std::cerr << "[" << std::fixed << std::setprecision(1) << t << "s] " << msg << '\n';
}

void print_curve(const ErrorProbabilityCurve& c) {
    std::cout << c.name;
    if (c.scenario == "genL") std::cout << " (L_train=" << c.L_train << ", L_test=" << c.L_test << ")";
    if (c.scenario == "genEta") std::cout << " (eta_train=" << c.eta_train << ", eta_test=" << c.eta_test << ")";
    std::cout << '\n';
    for (const auto& r : c.rows) {
        std::cout << "  " << std::setw(5) << r.snr_db << " dB  p_e = " << std::scientific << std::setprecision(3)
                  << r.p_error << "  [" << r.ci.low << ", " << r.ci.high << "]  (" << r.n_errors << "/" << r.n_trials
                  << ")" << std::defaultfloat << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ELM-based OFDM timing synchronization under PA nonlinearity"};
    app.require_subcommand(1);

    std::string config_path;
    std::size_t workers = 0;
    bool workers_set = false;
    auto apply_workers = [&](ExperimentConfig& cfg) {
        if (workers_set) cfg.workers = workers;
    };

    auto* cal = app.add_subcommand("calibrate", "find the HPA back-off eta reaching a target EVM");
    double target_evm = 40.0;
    std::uint64_t cal_seed = 1;
    std::size_t cal_trials = 0;
    cal->add_option("--target-evm", target_evm, "target EVM in percent")->required();
    cal->add_option("--config", config_path, "experiment config (for N, Ng, Saleh parameters)");
    cal->add_option("--seed", cal_seed, "seed for the calibration frames");
    cal->add_option("--trials", cal_trials, "frames averaged per EVM evaluation");

    auto* train = app.add_subcommand("train", "train an ELM timing estimator");
    std::string model_out;
    train->add_option("--config", config_path, "experiment config")->required();
    train->add_option("--out", model_out, "output model file")->required();
    train->add_option("--workers", workers, "worker threads (0 = all cores)")->each([&](const std::string&) {
        workers_set = true;
    });

    auto* eval = app.add_subcommand("eval", "measure timing-error probability over the SNR grid");
    std::string model_in;
    std::string csv_out;
    eval->add_option("--config", config_path, "experiment config")->required();
    eval->add_option("--model", model_in, "trained model (required for elm / ts_learn)");
    eval->add_option("--out", csv_out, "output CSV")->required();
    eval->add_option("--workers", workers, "worker threads (0 = all cores)")->each([&](const std::string&) {
        workers_set = true;
    });

    auto* sweep = app.add_subcommand("sweep", "run a full experiment scenario");
    std::string scenario_id;
    std::string outdir;
    sweep->add_option("--scenario", scenario_id, "fig2, genL or genEta")
        ->required()
        ->check(CLI::IsMember({"fig2", "genL", "genEta"}));
    sweep->add_option("--config", config_path, "experiment config");
    sweep->add_option("--outdir", outdir, "directory for CSVs and the plot script")->required();
    sweep->add_option("--workers", workers, "worker threads (0 = all cores)")->each([&](const std::string&) {
        workers_set = true;
    });

    auto* selftest = app.add_subcommand("selftest", "run the property suites");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cal->parsed()) {
            ExperimentConfig cfg = config_or_default(config_path);
            const auto result = calibrate_backoff(target_evm, cfg.saleh, cfg.system, cal_seed,
                                                  cal_trials ? cal_trials : cfg.calibration_trials);
            std::cout << "eta = " << std::setprecision(10) << result.eta << '\n'
                      << "evm = " << std::setprecision(6) << result.evm << " %\n"
                      << "iterations = " << result.iterations << '\n';
            return 0;
        }
        if (train->parsed()) {
            ExperimentConfig cfg = load_config(config_path);
            apply_workers(cfg);
            if (auto c = resolve_backoff(cfg)) log_line("calibrated eta = " + std::to_string(c->eta));
            if (cfg.estimator == EstimatorKind::sc_corr) {
                std::cerr << "estimator sc_corr has nothing to train\n";
                return 2;
            }
            log_line("training " + std::string(to_string(cfg.estimator)) + " on " + std::to_string(cfg.n_train) +
                     " samples");
            const auto model = train_model(cfg, cfg.estimator);
            save_model(model, model_out);
            log_line("wrote " + model_out);
            return 0;
        }
        if (eval->parsed()) {
            ExperimentConfig cfg = load_config(config_path);
            apply_workers(cfg);
            resolve_backoff(cfg);
            std::optional<ElmModel> model;
            if (!model_in.empty()) model = load_model(model_in);
            const auto est = make_estimator(cfg.estimator, model ? &*model : nullptr, cfg.label_scheme);
            const auto curve = evaluate_curve(cfg, est, "eval");
            write_curve_csv(csv_out, curve);
            print_curve(curve);
            return 0;
        }
        if (sweep->parsed()) {
            ExperimentConfig cfg = config_or_default(config_path);
            apply_workers(cfg);
            const auto result = run_experiment_suite(cfg, parse_scenario(scenario_id), outdir, log_line);
            for (const auto& c : result.curves) print_curve(c);
            std::cout << "wrote " << result.csv_files.size() << " CSV files and " << result.plot_script.string()
                      << '\n';
            return 0;
        }
        if (selftest->parsed()) {
            const auto results = elmsync::properties::run_all();
            bool ok = true;
            for (const auto& r : results) {
                std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
                if (!r.detail.empty()) std::cout << "  (" << r.detail << ")";
                std::cout << '\n';
                ok = ok && r.passed;
            }
            return ok ? 0 : 1;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
