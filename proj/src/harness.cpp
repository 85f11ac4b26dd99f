#include "elmsync/harness.hpp"

#include "elmsync/frame.hpp"
#include "elmsync/parallel.hpp"
#include "elmsync/rng.hpp"
#include "elmsync/timing_metric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace elmsync {

namespace {

// Stream tags for derive_seed().
constexpr std::uint64_t kTagTrain = 0x545241494EULL;
constexpr std::uint64_t kTagTest = 0x54455354ULL;
constexpr std::uint64_t kTagModel = 0x4D4F44454CULL;
constexpr std::uint64_t kTagCalibration = 0x43414C4942ULL;
constexpr std::uint64_t kTagPower = 0x504F574552ULL;

// Sub-streams of one trial seed.
enum class TrialStream : std::uint64_t { offsets = 1, frame, channel, noise, snr };

std::uint64_t sub_seed(std::uint64_t seed, TrialStream s) {
    return derive_seed(seed, {static_cast<std::uint64_t>(s)});
}

RealVec l2_normalized(RealVec v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    const double norm = std::sqrt(sq);
    if (norm < kNormFloor) {
        std::fill(v.begin(), v.end(), 0.0);
        return v;
    }
    for (double& x : v) x /= norm;
    return v;
}

std::vector<double> sorted_grid(const std::vector<double>& grid) {
    std::vector<double> g = grid;
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

std::string format_number(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

}  // namespace

EstimatorKind parse_estimator(std::string_view id) {
    if (id == "sc_corr") return EstimatorKind::sc_corr;
    if (id == "elm") return EstimatorKind::elm;
    if (id == "ts_learn") return EstimatorKind::ts_learn;
    throw ConfigError("unknown estimator '" + std::string(id) + "'");
}

std::string_view to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::sc_corr: return "sc_corr";
        case EstimatorKind::elm: return "elm";
        case EstimatorKind::ts_learn: return "ts_learn";
    }
    return "?";
}

DrawMode parse_draw_mode(std::string_view id) {
    if (id == "fixed") return DrawMode::fixed;
    if (id == "random") return DrawMode::random;
    throw ConfigError("draw mode must be 'fixed' or 'random', got '" + std::string(id) + "'");
}

std::string_view to_string(DrawMode mode) { return mode == DrawMode::fixed ? "fixed" : "random"; }

SnrReference parse_snr_reference(std::string_view id) {
    if (id == "transmitted") return SnrReference::transmitted;
    if (id == "sigma_d2") return SnrReference::sigma_d2;
    throw ConfigError("snr_reference must be 'transmitted' or 'sigma_d2', got '" + std::string(id) + "'");
}

std::string_view to_string(SnrReference ref) {
    return ref == SnrReference::transmitted ? "transmitted" : "sigma_d2";
}

void ExperimentConfig::validate() const {
    std::vector<std::string> problems;
    try {
        system.validate();
    } catch (const ConfigError& e) {
        problems.emplace_back(e.what());
    }
    try {
        saleh.validate();
    } catch (const ConfigError& e) {
        problems.emplace_back(e.what());
    }
    auto check_L = [&](std::size_t L, const char* name) {
        if (L < 1 || L >= system.cp_len)
            problems.push_back(std::string(name) + " must satisfy 1 <= L < Ng");
    };
    check_L(L_train, "L_train");
    check_L(L_test, "L_test");
    for (std::size_t L : gen_L_values) check_L(L, "genL_values entry");
    if (n_train < 1) problems.emplace_back("n_train must be >= 1");
    if (n_test_trials < 1) problems.emplace_back("n_test_trials must be >= 1");
    if (snr_grid_db.empty()) problems.emplace_back("snr_grid_db must not be empty");
    for (double s : snr_grid_db)
        if (!std::isfinite(s)) problems.emplace_back("snr_grid_db entries must be finite");
    if (!target_evm) {
        if (!(eta_train > 0.0) || !(eta_test > 0.0)) problems.emplace_back("eta values must be positive");
    } else if (!(*target_evm > 0.0 && *target_evm < 100.0)) {
        problems.emplace_back("target_evm must lie in (0, 100)");
    }
    for (double e : gen_eta_values)
        if (!(e > 0.0)) problems.emplace_back("genEta_values entries must be positive");
    if (!(nu_max >= 0.0)) problems.emplace_back("nu_max must be non-negative");
    if (!(ridge_scale >= 0.0)) problems.emplace_back("ridge_scale must be non-negative");
    if (calibration_trials < 1) problems.emplace_back("calibration_trials must be >= 1");
    if (!problems.empty()) {
        std::string msg = "invalid experiment config:";
        for (const auto& p : problems) msg += "\n  - " + p;
        throw ConfigError(msg);
    }
}

std::optional<BackoffCalibration> resolve_backoff(ExperimentConfig& cfg) {
    if (!cfg.target_evm) return std::nullopt;
    const auto cal = calibrate_backoff(*cfg.target_evm, cfg.saleh, cfg.system,
                                       derive_seed(cfg.master_seed, {kTagCalibration}), cfg.calibration_trials);
    cfg.eta_train = cal.eta;
    cfg.eta_test = cal.eta;
    cfg.target_evm.reset();
    return cal;
}

LinkSetup make_link(const ExperimentConfig& cfg, std::size_t channel_length, double eta) {
    if (cfg.target_evm) throw StateError("back-off not resolved; call resolve_backoff() first");
    LinkSetup link{channel_length, eta, cfg.system.sigma_d2};
    if (cfg.snr_reference == SnrReference::transmitted) {
        link.reference_power = measure_transmit_power(eta, cfg.saleh, cfg.system,
                                                      derive_seed(cfg.master_seed, {kTagPower}),
                                                      cfg.calibration_trials);
    }
    return link;
}

TrialWindow draw_window(const ExperimentConfig& cfg, const LinkSetup& link, double snr_db, std::uint64_t seed) {
    const auto& sys = cfg.system;
    Rng rng = make_rng(sub_seed(seed, TrialStream::offsets));
    ImpairmentConfig imp;
    imp.sto = uniform_index(rng, 0, sys.max_sto());
    const double nu = uniform(rng, -cfg.nu_max, cfg.nu_max);
    const double phi = uniform(rng, 0.0, 2.0 * kPi);
    imp.cfo = cfg.nu_mode == DrawMode::random ? nu : cfg.nu;
    imp.phase = cfg.phi_mode == DrawMode::random ? phi : cfg.phi;
    imp.snr_db = snr_db;
    imp.eta = link.eta;
    imp.channel_length = link.channel_length;
    imp.snr_reference_power = link.reference_power;

    const auto frame = generate_frame(sub_seed(seed, TrialStream::frame), sys);
    const auto distorted = saleh_distort(frame.samples, cfg.saleh, link.eta);
    const auto channel = draw_channel(link.channel_length, cfg.pdp_decay_db, sub_seed(seed, TrialStream::channel));

    TrialWindow w;
    w.sto = imp.sto;
    w.channel_length = link.channel_length;
    w.snr_db = snr_db;
    w.received = apply_channel(distorted, channel, imp, sys, sub_seed(seed, TrialStream::noise), sys.metric_span());
    return w;
}

RealVec metric_feature(std::span<const Complex> received, const SystemParams& params) {
    return normalize_tm(timing_metric(received, params)).values;
}

RealVec raw_feature(std::span<const Complex> received, const SystemParams& params) {
    const std::size_t nd = params.window_len;
    RealVec f(2 * nd, 0.0);
    for (std::size_t i = 0; i < nd && i < received.size(); ++i) {
        f[i] = received[i].real();
        f[nd + i] = received[i].imag();
    }
    return l2_normalized(std::move(f));
}

std::size_t feature_dim(EstimatorKind kind, const SystemParams& params) {
    switch (kind) {
        case EstimatorKind::elm: return params.window_len;
        case EstimatorKind::ts_learn: return 2 * params.window_len;
        case EstimatorKind::sc_corr: break;
    }
    throw ConfigError("sc_corr has no trainable model");
}

std::size_t hidden_width(const ExperimentConfig& cfg, EstimatorKind kind) {
    if (cfg.n_hidden != 0) {
        // An explicit width applies to the metric ELM; the raw-input ELM keeps the 2x ratio.
        return kind == EstimatorKind::ts_learn ? 2 * cfg.n_hidden : cfg.n_hidden;
    }
    const std::size_t base = 8 * cfg.system.symbol_len();
    return kind == EstimatorKind::ts_learn ? 2 * base : base;
}

namespace {

struct TrainingSide {
    const ExperimentConfig& cfg;
    EstimatorKind kind;
    LinkSetup link;

    void sample(std::size_t i, std::span<double> input, std::span<double> target) const {
        const std::uint64_t seed = derive_seed(cfg.master_seed, {kTagTrain, i});
        Rng snr_rng = make_rng(sub_seed(seed, TrialStream::snr));
        const double snr = cfg.snr_grid_db[uniform_index(snr_rng, 0, cfg.snr_grid_db.size() - 1)];
        const auto w = draw_window(cfg, link, snr, seed);
        const auto feature = kind == EstimatorKind::ts_learn ? raw_feature(w.received, cfg.system)
                                                             : metric_feature(w.received, cfg.system);
        std::copy(feature.begin(), feature.end(), input.begin());
        const auto label = make_label(cfg.label_scheme, w.sto, cfg.system, cfg.L_train);
        std::copy(label.values.begin(), label.values.end(), target.begin());
    }
};

void require_trainable(const ExperimentConfig& cfg, EstimatorKind kind) {
    if (kind == EstimatorKind::sc_corr) throw ConfigError("sc_corr has no trainable model");
    cfg.validate();
    if (cfg.target_evm) throw StateError("back-off not resolved; call resolve_backoff() first");
}

}  // namespace

TrainingSet generate_training_set(const ExperimentConfig& cfg, EstimatorKind kind) {
    require_trainable(cfg, kind);
    const TrainingSide side{cfg, kind, make_link(cfg, cfg.L_train, cfg.eta_train)};
    const auto in_dim = static_cast<Eigen::Index>(feature_dim(kind, cfg.system));
    const auto out_dim = static_cast<Eigen::Index>(cfg.system.window_len);
    const auto n = static_cast<Eigen::Index>(cfg.n_train);
    TrainingSet set{Eigen::MatrixXd(in_dim, n), Eigen::MatrixXd(out_dim, n)};
    parallel_for(cfg.n_train, cfg.workers, [&](std::size_t i) {
        const auto col = static_cast<Eigen::Index>(i);
        side.sample(i, std::span<double>(set.inputs.col(col).data(), static_cast<std::size_t>(in_dim)),
                    std::span<double>(set.targets.col(col).data(), static_cast<std::size_t>(out_dim)));
    });
    return set;
}

ElmModel train_model(const ExperimentConfig& cfg, EstimatorKind kind) {
    require_trainable(cfg, kind);
    const TrainingSide side{cfg, kind, make_link(cfg, cfg.L_train, cfg.eta_train)};
    ElmModel model = init_elm(hidden_width(cfg, kind), feature_dim(kind, cfg.system),
                              derive_seed(cfg.master_seed, {kTagModel, static_cast<std::uint64_t>(kind)}),
                              cfg.system.window_len);
    TrainOptions opts;
    opts.ridge_scale = cfg.ridge_scale;
    opts.workers = cfg.workers;
    train_streaming(
        model, cfg.n_train,
        [&](std::size_t i, std::span<double> in, std::span<double> target) { side.sample(i, in, target); }, opts);
    return model;
}

namespace {

// An all-zero feature is the no-signal sentinel; it maps to offset 0.
std::size_t estimate_from_feature(const RealVec& feature, const ElmModel& model) {
    if (std::all_of(feature.begin(), feature.end(), [](double v) { return v == 0.0; })) return 0;
    return estimate_sto(infer(feature, model));
}

}  // namespace

std::size_t ts_learn_estimate(std::span<const Complex> received, const ElmModel& model, const SystemParams& params) {
    if (model.input_dim() != 2 * params.window_len)
        throw DomainError("TS_Learn model expects " + std::to_string(model.input_dim()) +
                          " inputs, raw feature has " + std::to_string(2 * params.window_len));
    return estimate_from_feature(raw_feature(received, params), model);
}

Estimator make_estimator(EstimatorKind kind, const ElmModel* model, LabelScheme label) {
    Estimator est;
    est.kind = kind;
    est.model = model;
    est.label = label;
    switch (kind) {
        case EstimatorKind::sc_corr: est.name = "SC_corr"; break;
        case EstimatorKind::ts_learn: est.name = "TS_Learn"; break;
        case EstimatorKind::elm:
            switch (label) {
                case LabelScheme::onehot_end: est.name = "Ref_onehot"; break;
                case LabelScheme::midpoint: est.name = "Prop_T_mid"; break;
                case LabelScheme::isi_free: est.name = "Prop_T_ISI-free"; break;
            }
            break;
    }
    return est;
}

std::size_t apply_estimator(const Estimator& est, const TrialWindow& window, const SystemParams& params) {
    if (est.probe) return est.probe(window);
    switch (est.kind) {
        case EstimatorKind::sc_corr: return sc_corr_estimate(window.received, params);
        case EstimatorKind::elm:
            if (!est.model) throw StateError("estimator '" + est.name + "' needs a trained model");
            return estimate_from_feature(metric_feature(window.received, params), *est.model);
        case EstimatorKind::ts_learn:
            if (!est.model) throw StateError("estimator '" + est.name + "' needs a trained model");
            return ts_learn_estimate(window.received, *est.model, params);
    }
    throw ConfigError("unknown estimator kind");
}

bool is_timing_error(std::size_t sto, std::size_t estimate, std::size_t channel_length, std::size_t cp_len) {
    return !isi_free_region(sto, channel_length, cp_len).contains(estimate);
}

std::uint64_t test_trial_seed(std::uint64_t master_seed, double snr_db, std::size_t trial) {
    return derive_seed(master_seed, {kTagTest, std::bit_cast<std::uint64_t>(snr_db), trial});
}

namespace {

void require_models(std::span<const Estimator> estimators) {
    for (const auto& e : estimators) {
        if (!e.probe && e.kind != EstimatorKind::sc_corr && (!e.model || !e.model->trained()))
            throw StateError("estimator '" + e.name + "' needs a trained model");
    }
}

TrialOutcome judge(const ExperimentConfig& cfg, const TrialWindow& w, std::size_t estimate) {
    return {w.sto, estimate, is_timing_error(w.sto, estimate, w.channel_length, cfg.system.cp_len)};
}

}  // namespace

TrialOutcome run_trial(const ExperimentConfig& cfg, const Estimator& est, double snr_db, std::uint64_t trial_seed) {
    require_models(std::span(&est, 1));
    const auto link = make_link(cfg, cfg.L_test, cfg.eta_test);
    const auto w = draw_window(cfg, link, snr_db, trial_seed);
    return judge(cfg, w, apply_estimator(est, w, cfg.system));
}

WilsonInterval wilson_interval(std::size_t errors, std::size_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(errors) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {errors == 0 ? 0.0 : std::max(0.0, centre - half), errors == trials ? 1.0 : std::min(1.0, centre + half)};
}

const CurveRow& ErrorProbabilityCurve::at(double snr_db) const {
    for (const auto& r : rows)
        if (r.snr_db == snr_db) return r;
    throw DomainError("curve '" + name + "' has no row at " + format_number(snr_db) + " dB");
}

std::vector<ErrorProbabilityCurve> evaluate_curves(const ExperimentConfig& cfg, std::span<const Estimator> estimators,
                                                   std::string_view scenario) {
    cfg.validate();
    require_models(estimators);
    const auto link = make_link(cfg, cfg.L_test, cfg.eta_test);
    const auto grid = sorted_grid(cfg.snr_grid_db);
    const std::size_t n_est = estimators.size();
    const std::size_t n_trials = cfg.n_test_trials;

    std::vector<ErrorProbabilityCurve> curves(n_est);
    for (std::size_t e = 0; e < n_est; ++e) {
        auto& c = curves[e];
        c.scenario = std::string(scenario);
        c.name = estimators[e].name;
        c.estimator = estimators[e].kind;
        if (estimators[e].kind != EstimatorKind::sc_corr) c.label = estimators[e].label;
        c.L_train = cfg.L_train;
        c.L_test = cfg.L_test;
        c.eta_train = cfg.eta_train;
        c.eta_test = cfg.eta_test;
        c.master_seed = cfg.master_seed;
    }

    // Fixed task partition; integer error counts make the reduction order-free.
    const std::size_t n_tasks = std::min<std::size_t>(n_trials, 64);
    for (double snr : grid) {
        std::vector<std::vector<std::size_t>> errors(n_tasks, std::vector<std::size_t>(n_est, 0));
        parallel_for(n_tasks, cfg.workers, [&](std::size_t task) {
            const std::size_t begin = task * n_trials / n_tasks;
            const std::size_t end = (task + 1) * n_trials / n_tasks;
            for (std::size_t t = begin; t < end; ++t) {
                const auto w = draw_window(cfg, link, snr, test_trial_seed(cfg.master_seed, snr, t));
                for (std::size_t e = 0; e < n_est; ++e) {
                    if (judge(cfg, w, apply_estimator(estimators[e], w, cfg.system)).error) ++errors[task][e];
                }
            }
        });
        for (std::size_t e = 0; e < n_est; ++e) {
            CurveRow row;
            row.snr_db = snr;
            row.n_trials = n_trials;
            for (const auto& task_errors : errors) row.n_errors += task_errors[e];
            row.p_error = static_cast<double>(row.n_errors) / static_cast<double>(n_trials);
            row.ci = wilson_interval(row.n_errors, n_trials);
            curves[e].rows.push_back(row);
        }
    }
    return curves;
}

ErrorProbabilityCurve evaluate_curve(const ExperimentConfig& cfg, const Estimator& est, std::string_view scenario) {
    return evaluate_curves(cfg, std::span(&est, 1), scenario).front();
}

Scenario parse_scenario(std::string_view id) {
    if (id == "fig2") return Scenario::fig2;
    if (id == "genL") return Scenario::gen_l;
    if (id == "genEta") return Scenario::gen_eta;
    throw ConfigError("unknown scenario '" + std::string(id) + "' (expected fig2, genL or genEta)");
}

std::string_view to_string(Scenario s) {
    switch (s) {
        case Scenario::fig2: return "fig2";
        case Scenario::gen_l: return "genL";
        case Scenario::gen_eta: return "genEta";
    }
    return "?";
}

namespace {

std::vector<ErrorProbabilityCurve> run_fig2(ExperimentConfig cfg, const ProgressLog& log) {
    std::vector<ElmModel> models;
    const LabelScheme schemes[] = {LabelScheme::onehot_end, LabelScheme::midpoint, LabelScheme::isi_free};
    for (auto scheme : schemes) {
        cfg.label_scheme = scheme;
        if (log) log("training ELM with label " + std::string(to_string(scheme)));
        models.push_back(train_model(cfg, EstimatorKind::elm));
    }
    cfg.label_scheme = LabelScheme::isi_free;
    if (log) log("training TS_Learn ELM on raw samples");
    const ElmModel raw_model = train_model(cfg, EstimatorKind::ts_learn);

    std::vector<Estimator> est;
    est.push_back(make_estimator(EstimatorKind::sc_corr));
    est.push_back(make_estimator(EstimatorKind::ts_learn, &raw_model, LabelScheme::isi_free));
    for (std::size_t i = 0; i < 3; ++i) est.push_back(make_estimator(EstimatorKind::elm, &models[i], schemes[i]));
    if (log) log("evaluating " + std::to_string(est.size()) + " estimators");
    return evaluate_curves(cfg, est, "fig2");
}

template <typename Value, typename ApplyTrain, typename ApplyTest>
std::vector<ErrorProbabilityCurve> run_generalization(ExperimentConfig cfg, std::string_view scenario,
                                                      const std::vector<Value>& values, ApplyTrain apply_train,
                                                      ApplyTest apply_test, const ProgressLog& log) {
    std::vector<ErrorProbabilityCurve> out;
    const LabelScheme schemes[] = {LabelScheme::midpoint, LabelScheme::isi_free};
    for (const Value& train_value : values) {
        ExperimentConfig train_cfg = cfg;
        apply_train(train_cfg, train_value);
        std::vector<ElmModel> models;
        for (auto scheme : schemes) {
            train_cfg.label_scheme = scheme;
            if (log) log(std::string(scenario) + ": training " + std::string(to_string(scheme)) + " at train value " +
                         format_number(static_cast<double>(train_value)));
            models.push_back(train_model(train_cfg, EstimatorKind::elm));
        }
        std::vector<Estimator> est;
        est.push_back(make_estimator(EstimatorKind::sc_corr));
        for (std::size_t i = 0; i < 2; ++i) est.push_back(make_estimator(EstimatorKind::elm, &models[i], schemes[i]));
        for (const Value& test_value : values) {
            ExperimentConfig test_cfg = train_cfg;
            apply_test(test_cfg, test_value);
            if (log) log(std::string(scenario) + ": evaluating at test value " +
                         format_number(static_cast<double>(test_value)));
            auto curves = evaluate_curves(test_cfg, est, scenario);
            for (auto& c : curves) out.push_back(std::move(c));
        }
    }
    return out;
}

}  // namespace

std::vector<ErrorProbabilityCurve> run_scenario(ExperimentConfig cfg, Scenario scenario, const ProgressLog& log) {
    cfg.validate();
    switch (scenario) {
        case Scenario::fig2: {
            if (auto cal = resolve_backoff(cfg); cal && log)
                log("calibrated eta = " + format_number(cal->eta) + " (EVM " + format_number(cal->evm) + "%)");
            return run_fig2(cfg, log);
        }
        case Scenario::gen_l: {
            if (auto cal = resolve_backoff(cfg); cal && log)
                log("calibrated eta = " + format_number(cal->eta) + " (EVM " + format_number(cal->evm) + "%)");
            auto set_train = [](ExperimentConfig& c, std::size_t L) { c.L_train = L; c.L_test = L; };
            auto set_test = [](ExperimentConfig& c, std::size_t L) { c.L_test = L; };
            return run_generalization<std::size_t>(cfg, "genL", cfg.gen_L_values, set_train, set_test, log);
        }
        case Scenario::gen_eta: {
            cfg.target_evm.reset();
            auto set_train = [](ExperimentConfig& c, double eta) { c.eta_train = eta; c.eta_test = eta; };
            auto set_test = [](ExperimentConfig& c, double eta) { c.eta_test = eta; };
            return run_generalization<double>(cfg, "genEta", cfg.gen_eta_values, set_train, set_test, log);
        }
    }
    throw ConfigError("unknown scenario");
}

std::string csv_header() {
    return "scenario,estimator,label_scheme,snr_db,L_train,L_test,eta_train,eta_test,n_trials,n_errors,p_error,"
           "ci_low,ci_high,master_seed";
}

void write_curve_csv(const std::filesystem::path& path, const ErrorProbabilityCurve& curve) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << csv_header() << '\n';
    const std::string label = curve.label ? std::string(to_string(*curve.label)) : "none";
    for (const auto& r : curve.rows) {
        out << curve.scenario << ',' << curve.name << ',' << label << ',' << format_number(r.snr_db) << ','
            << curve.L_train << ',' << curve.L_test << ',' << format_number(curve.eta_train) << ','
            << format_number(curve.eta_test) << ',' << r.n_trials << ',' << r.n_errors << ','
            << format_number(r.p_error) << ',' << format_number(r.ci.low) << ',' << format_number(r.ci.high) << ','
            << curve.master_seed << '\n';
    }
    if (!out) throw Error("write failed: " + path.string());
}

std::string curve_file_stem(const ErrorProbabilityCurve& curve) {
    std::ostringstream os;
    os << curve.scenario << '_' << curve.name;
    if (curve.scenario == "genL") os << "_Ltrain" << curve.L_train << "_Ltest" << curve.L_test;
    if (curve.scenario == "genEta")
        os << "_etatrain" << format_number(curve.eta_train) << "_etatest" << format_number(curve.eta_test);
    return os.str();
}

void write_plot_script(const std::filesystem::path& path, std::string_view title,
                       const std::vector<std::filesystem::path>& csv_files) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "#!/usr/bin/env python3\n"
           "# Timing-error probability vs. SNR, one line per CSV.\n"
           "import csv\nimport os\nimport sys\n\n"
           "import matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n\n"
           "HERE = os.path.dirname(os.path.abspath(__file__))\nFILES = [\n";
    for (const auto& f : csv_files) out << "    " << std::quoted(f.filename().string()) << ",\n";
    out << "]\n\n"
           "fig, ax = plt.subplots(figsize=(7, 5))\n"
           "for name in FILES:\n"
           "    with open(os.path.join(HERE, name)) as fh:\n"
           "        rows = list(csv.DictReader(fh))\n"
           "    snr = [float(r['snr_db']) for r in rows]\n"
           "    # Zero-error points are drawn at the Wilson upper bound.\n"
           "    pe = [float(r['p_error']) or float(r['ci_high']) for r in rows]\n"
           "    ax.semilogy(snr, pe, marker='o', label=os.path.splitext(name)[0])\n"
           "ax.set_xlabel('SNR (dB)')\nax.set_ylabel('timing error probability')\n"
           "ax.set_title("
        << std::quoted(std::string(title))
        << ")\n"
           "ax.grid(True, which='both', alpha=0.3)\n"
           "ax.legend(fontsize=6)\n"
           "out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(HERE, "
        << std::quoted(path.stem().string() + ".png")
        << ")\n"
           "fig.savefig(out, dpi=150, bbox_inches='tight')\n";
    if (!out) throw Error("write failed: " + path.string());
}

SuiteResult run_experiment_suite(const ExperimentConfig& cfg, Scenario scenario, const std::filesystem::path& outdir,
                                 const ProgressLog& log) {
    std::filesystem::create_directories(outdir);
    SuiteResult result;
    result.curves = run_scenario(cfg, scenario, log);
    for (const auto& c : result.curves) {
        auto path = outdir / (curve_file_stem(c) + ".csv");
        write_curve_csv(path, c);
        result.csv_files.push_back(std::move(path));
    }
    result.plot_script = outdir / ("plot_" + std::string(to_string(scenario)) + ".py");
    write_plot_script(result.plot_script, to_string(scenario), result.csv_files);
    return result;
}

}  // namespace elmsync
