#pragma once

#include "elmsync/common.hpp"
#include "elmsync/elm.hpp"
#include "elmsync/impairments.hpp"
#include "elmsync/labels.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace elmsync {

enum class EstimatorKind {
    sc_corr,   // argmax of the raw Schmidl metric
    elm,       // ELM on the normalized metric
    ts_learn,  // ELM on the raw received window (no timing preprocessing)
};

EstimatorKind parse_estimator(std::string_view id);
std::string_view to_string(EstimatorKind kind);

enum class DrawMode { fixed, random };

DrawMode parse_draw_mode(std::string_view id);
std::string_view to_string(DrawMode mode);

/// What sigma_P^2 in SNR = sigma_P^2 / sigma^2 refers to.
enum class SnrReference {
    transmitted,  // measured mean power of the HPA output at the link's eta
    sigma_d2,     // the per-subcarrier symbol power, taken literally
};

SnrReference parse_snr_reference(std::string_view id);
std::string_view to_string(SnrReference ref);

struct ExperimentConfig {
    SystemParams system;
    SalehParams saleh;
    LabelScheme label_scheme = LabelScheme::isi_free;
    std::vector<double> snr_grid_db{0.0, 4.0, 8.0, 12.0, 16.0, 20.0};
    std::size_t n_train = std::size_t{1} << 14;
    std::size_t n_test_trials = 10000;
    std::size_t n_hidden = 0;  // 0: 8(N+Ng) for metric input, 16(N+Ng) for raw input
    std::size_t L_train = 8;
    std::size_t L_test = 8;
    double eta_train = 0.05;
    double eta_test = 0.05;
    // When set, eta_train and eta_test are replaced by the calibrated back-off.
    std::optional<double> target_evm = 40.0;
    DrawMode nu_mode = DrawMode::random;
    DrawMode phi_mode = DrawMode::random;
    double nu = 0.0;   // used when nu_mode == fixed
    double phi = 0.0;  // used when phi_mode == fixed
    double nu_max = 0.5;
    double pdp_decay_db = 3.0;
    SnrReference snr_reference = SnrReference::sigma_d2;
    std::uint64_t master_seed = 1;
    EstimatorKind estimator = EstimatorKind::elm;
    double ridge_scale = 1e-8;
    std::size_t workers = 1;
    std::size_t calibration_trials = 200;
    std::vector<std::size_t> gen_L_values{8, 10, 12};
    std::vector<double> gen_eta_values{0.05, 0.2, 0.35};

    /// Throws ConfigError listing every violated constraint.
    void validate() const;
};

/**
 * Calibrates eta against cfg.target_evm (when set) and writes it into
 * eta_train and eta_test. Returns the calibration, if one was run.
 */
std::optional<BackoffCalibration> resolve_backoff(ExperimentConfig& cfg);

/// One side of the link: channel memory, HPA back-off and the SNR reference power.
struct LinkSetup {
    std::size_t channel_length = 1;
    double eta = 1.0;
    double reference_power = 1.0;
};

LinkSetup make_link(const ExperimentConfig& cfg, std::size_t channel_length, double eta);

/// One impaired observation with its ground truth.
struct TrialWindow {
    std::size_t sto = 0;
    std::size_t channel_length = 1;
    double snr_db = 0.0;
    ComplexVec received;  // cfg.system.metric_span() samples
};

/// Draws theta, frame, channel, CFO, phase and noise from `seed` alone.
TrialWindow draw_window(const ExperimentConfig& cfg, const LinkSetup& link, double snr_db, std::uint64_t seed);

/// L2-normalized Schmidl metric.
RealVec metric_feature(std::span<const Complex> received, const SystemParams& params);

/// [Re r(0..Nd-1), Im r(0..Nd-1)], L2-normalized (zero window stays zero).
RealVec raw_feature(std::span<const Complex> received, const SystemParams& params);

std::size_t feature_dim(EstimatorKind kind, const SystemParams& params);
std::size_t hidden_width(const ExperimentConfig& cfg, EstimatorKind kind);

/// Materialized (input, target) pairs; sample i equals what train_model() streams.
TrainingSet generate_training_set(const ExperimentConfig& cfg, EstimatorKind kind = EstimatorKind::elm);

/// Builds and trains an ELM for `kind` (elm or ts_learn) on cfg's training side.
ElmModel train_model(const ExperimentConfig& cfg, EstimatorKind kind = EstimatorKind::elm);

/// ELM on raw samples; throws DomainError if the model is not 2Nd wide.
std::size_t ts_learn_estimate(std::span<const Complex> received, const ElmModel& model, const SystemParams& params);

struct Estimator {
    std::string name;
    EstimatorKind kind = EstimatorKind::sc_corr;
    LabelScheme label = LabelScheme::isi_free;  // what the model was trained on
    const ElmModel* model = nullptr;
    // Replaces the built-in estimator when set. Sees the ground truth, so
    // it is only meant for probing the harness itself.
    std::function<std::size_t(const TrialWindow&)> probe;
};

Estimator make_estimator(EstimatorKind kind, const ElmModel* model = nullptr,
                         LabelScheme label = LabelScheme::isi_free);

std::size_t apply_estimator(const Estimator& est, const TrialWindow& window, const SystemParams& params);

/// theta_hat outside [theta + L, theta + Ng + 1].
bool is_timing_error(std::size_t sto, std::size_t estimate, std::size_t channel_length, std::size_t cp_len);

struct TrialOutcome {
    std::size_t sto = 0;
    std::size_t estimate = 0;
    bool error = false;
};

std::uint64_t test_trial_seed(std::uint64_t master_seed, double snr_db, std::size_t trial);

/// One test-side trial with L_test and eta_test.
TrialOutcome run_trial(const ExperimentConfig& cfg, const Estimator& est, double snr_db, std::uint64_t trial_seed);

struct WilsonInterval {
    double low = 0.0;
    double high = 1.0;
};

WilsonInterval wilson_interval(std::size_t errors, std::size_t trials, double z = 1.959963984540054);

struct CurveRow {
    double snr_db = 0.0;
    std::size_t n_trials = 0;
    std::size_t n_errors = 0;
    double p_error = 0.0;
    WilsonInterval ci;
};

struct ErrorProbabilityCurve {
    std::string scenario;
    std::string name;
    EstimatorKind estimator = EstimatorKind::sc_corr;
    std::optional<LabelScheme> label;
    std::size_t L_train = 0;
    std::size_t L_test = 0;
    double eta_train = 0.0;
    double eta_test = 0.0;
    std::uint64_t master_seed = 0;
    std::vector<CurveRow> rows;  // ascending snr_db

    /// Throws DomainError if the SNR is not on the curve.
    const CurveRow& at(double snr_db) const;
};

/**
 * Evaluates several estimators on the same trial windows (common random
 * numbers). Trial seeds depend only on (master_seed, snr, trial index).
 */
std::vector<ErrorProbabilityCurve> evaluate_curves(const ExperimentConfig& cfg, std::span<const Estimator> estimators,
                                                   std::string_view scenario = "eval");

ErrorProbabilityCurve evaluate_curve(const ExperimentConfig& cfg, const Estimator& est,
                                     std::string_view scenario = "eval");

enum class Scenario { fig2, gen_l, gen_eta };

Scenario parse_scenario(std::string_view id);
std::string_view to_string(Scenario s);

using ProgressLog = std::function<void(const std::string&)>;

/**
 * fig2:    SC_corr, TS_Learn and the three label designs at (L_train, eta).
 * gen_l:   midpoint and ISI-free models for every (L_train, L_test) pair.
 * gen_eta: the same over (eta_train, eta_test) pairs.
 * gen_* scenarios also report SC_corr at each test condition.
 */
std::vector<ErrorProbabilityCurve> run_scenario(ExperimentConfig cfg, Scenario scenario, const ProgressLog& log = {});

std::string csv_header();
void write_curve_csv(const std::filesystem::path& path, const ErrorProbabilityCurve& curve);
std::string curve_file_stem(const ErrorProbabilityCurve& curve);

/// Writes a matplotlib script plotting every CSV in `csv_files` on a semilog-y axis.
void write_plot_script(const std::filesystem::path& path, std::string_view title,
                       const std::vector<std::filesystem::path>& csv_files);

struct SuiteResult {
    std::vector<ErrorProbabilityCurve> curves;
    std::vector<std::filesystem::path> csv_files;
    std::filesystem::path plot_script;
};

/// run_scenario() + one CSV per curve + plot script under `outdir`.
SuiteResult run_experiment_suite(const ExperimentConfig& cfg, Scenario scenario,
                                 const std::filesystem::path& outdir, const ProgressLog& log = {});

}  // namespace elmsync
