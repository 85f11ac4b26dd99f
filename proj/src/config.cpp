#include "elmsync/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace elmsync {

namespace {

const std::set<std::string, std::less<>> kKnownKeys = {
    "N",           "Ng",          "Nd",          "sigma_d2",      "payload_symbols", "alpha_a",
    "beta_a",      "alpha_phi",   "beta_phi",    "label_scheme",  "snr_grid_db",     "n_train",
    "n_test_trials", "n_hidden",  "L_train",     "L_test",        "eta_train",       "eta_test",
    "target_evm",  "nu_mode",     "phi_mode",    "nu",            "phi",             "nu_max",
    "pdp_decay_db", "snr_reference", "master_seed", "estimator",  "ridge_scale",     "workers",
    "calibration_trials", "genL_values", "genEta_values",
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    while (true) {
        const auto comma = s.find(',');
        out.push_back(trim(s.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

double to_double(std::string_view key, std::string_view v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end || v.empty())
        throw ConfigError("key '" + std::string(key) + "': '" + std::string(v) + "' is not a number");
    return out;
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end || v.empty())
        throw ConfigError("key '" + std::string(key) + "': '" + std::string(v) + "' is not a non-negative integer");
    return out;
}

template <typename T, typename Convert>
std::vector<T> to_list(std::string_view key, std::string_view v, Convert convert) {
    std::vector<T> out;
    for (auto item : split_list(v)) out.push_back(static_cast<T>(convert(key, item)));
    return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (std::size_t i = 0; i < values.size(); ++i) os << (i ? ", " : "") << values[i];
    return os.str();
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
    std::map<std::string, std::string, std::less<>> entries;
    std::vector<std::string> unknown;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (!kKnownKeys.contains(key)) {
            unknown.push_back(key);
            continue;
        }
        if (entries.contains(key))
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        entries.emplace(key, value);
    }
    if (!unknown.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw ConfigError(msg);
    }

    ExperimentConfig cfg;
    auto get = [&](std::string_view key) -> const std::string* {
        const auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second;
    };
    auto set_size = [&](std::string_view key, std::size_t& dst) {
        if (const auto* v = get(key)) dst = static_cast<std::size_t>(to_uint(key, *v));
    };
    auto set_double = [&](std::string_view key, double& dst) {
        if (const auto* v = get(key)) dst = to_double(key, *v);
    };

    set_size("N", cfg.system.n_subcarriers);
    set_size("Ng", cfg.system.cp_len);
    cfg.system.window_len = 2 * (cfg.system.n_subcarriers + cfg.system.cp_len);
    set_size("Nd", cfg.system.window_len);
    set_double("sigma_d2", cfg.system.sigma_d2);
    set_size("payload_symbols", cfg.system.payload_symbols);
    set_double("alpha_a", cfg.saleh.alpha_a);
    set_double("beta_a", cfg.saleh.beta_a);
    set_double("alpha_phi", cfg.saleh.alpha_phi);
    set_double("beta_phi", cfg.saleh.beta_phi);
    if (const auto* v = get("label_scheme")) cfg.label_scheme = parse_label_scheme(*v);
    if (const auto* v = get("snr_grid_db")) cfg.snr_grid_db = to_list<double>("snr_grid_db", *v, to_double);
    set_size("n_train", cfg.n_train);
    set_size("n_test_trials", cfg.n_test_trials);
    set_size("n_hidden", cfg.n_hidden);
    set_size("L_train", cfg.L_train);
    set_size("L_test", cfg.L_test);
    set_double("eta_train", cfg.eta_train);
    set_double("eta_test", cfg.eta_test);
    if (const auto* v = get("target_evm")) {
        if (*v == "off" || *v == "none")
            cfg.target_evm.reset();
        else
            cfg.target_evm = to_double("target_evm", *v);
    } else if (get("eta_train") || get("eta_test")) {
        cfg.target_evm.reset();
    }
    if (const auto* v = get("nu_mode")) cfg.nu_mode = parse_draw_mode(*v);
    if (const auto* v = get("phi_mode")) cfg.phi_mode = parse_draw_mode(*v);
    set_double("nu", cfg.nu);
    set_double("phi", cfg.phi);
    set_double("nu_max", cfg.nu_max);
    set_double("pdp_decay_db", cfg.pdp_decay_db);
    if (const auto* v = get("snr_reference")) cfg.snr_reference = parse_snr_reference(*v);
    if (const auto* v = get("master_seed")) cfg.master_seed = to_uint("master_seed", *v);
    if (const auto* v = get("estimator")) cfg.estimator = parse_estimator(*v);
    set_double("ridge_scale", cfg.ridge_scale);
    set_size("workers", cfg.workers);
    set_size("calibration_trials", cfg.calibration_trials);
    if (const auto* v = get("genL_values")) cfg.gen_L_values = to_list<std::size_t>("genL_values", *v, to_uint);
    if (const auto* v = get("genEta_values")) cfg.gen_eta_values = to_list<double>("genEta_values", *v, to_double);

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string format_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "N = " << cfg.system.n_subcarriers << '\n'
       << "Ng = " << cfg.system.cp_len << '\n'
       << "Nd = " << cfg.system.window_len << '\n'
       << "sigma_d2 = " << cfg.system.sigma_d2 << '\n'
       << "payload_symbols = " << cfg.system.payload_symbols << '\n'
       << "alpha_a = " << cfg.saleh.alpha_a << '\n'
       << "beta_a = " << cfg.saleh.beta_a << '\n'
       << "alpha_phi = " << cfg.saleh.alpha_phi << '\n'
       << "beta_phi = " << cfg.saleh.beta_phi << '\n'
       << "label_scheme = " << to_string(cfg.label_scheme) << '\n'
       << "snr_grid_db = " << join(cfg.snr_grid_db) << '\n'
       << "n_train = " << cfg.n_train << '\n'
       << "n_test_trials = " << cfg.n_test_trials << '\n'
       << "n_hidden = " << cfg.n_hidden << '\n'
       << "L_train = " << cfg.L_train << '\n'
       << "L_test = " << cfg.L_test << '\n'
       << "eta_train = " << cfg.eta_train << '\n'
       << "eta_test = " << cfg.eta_test << '\n';
    if (cfg.target_evm)
        os << "target_evm = " << *cfg.target_evm << '\n';
    else
        os << "target_evm = off\n";
    os << "nu_mode = " << to_string(cfg.nu_mode) << '\n'
       << "phi_mode = " << to_string(cfg.phi_mode) << '\n'
       << "nu = " << cfg.nu << '\n'
       << "phi = " << cfg.phi << '\n'
       << "nu_max = " << cfg.nu_max << '\n'
       << "pdp_decay_db = " << cfg.pdp_decay_db << '\n'
       << "snr_reference = " << to_string(cfg.snr_reference) << '\n'
       << "master_seed = " << cfg.master_seed << '\n'
       << "estimator = " << to_string(cfg.estimator) << '\n'
       << "ridge_scale = " << cfg.ridge_scale << '\n'
       << "workers = " << cfg.workers << '\n'
       << "calibration_trials = " << cfg.calibration_trials << '\n'
       << "genL_values = " << join(cfg.gen_L_values) << '\n'
       << "genEta_values = " << join(cfg.gen_eta_values) << '\n';
    return os.str();
}

}  // namespace elmsync
