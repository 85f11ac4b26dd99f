#pragma once

#include "elmsync/harness.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace elmsync {

/**
 * Experiment config files are `key = value` lines; `#` starts a comment.
 * Lists are comma-separated. Keys mirror ExperimentConfig:
 *
 *   N Ng Nd sigma_d2 payload_symbols
 *   alpha_a beta_a alpha_phi beta_phi
 *   label_scheme snr_grid_db n_train n_test_trials n_hidden
 *   L_train L_test eta_train eta_test target_evm
 *   nu_mode phi_mode nu phi nu_max pdp_decay_db snr_reference
 *   master_seed estimator ridge_scale workers calibration_trials
 *   genL_values genEta_values
 *
 * Setting eta_train or eta_test without target_evm disables calibration;
 * `target_evm = off` does the same explicitly. Nd defaults to 2(N + Ng)
 * unless given. Unknown keys are rejected, all of them in one error.
 */
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Round-trippable text form of a config.
std::string format_config(const ExperimentConfig& cfg);

}  // namespace elmsync
