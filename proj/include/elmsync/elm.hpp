#pragma once

#include "elmsync/common.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>

namespace elmsync {

enum class Activation : std::uint32_t { tanh = 1 };

/**
 * Single-hidden-layer extreme learning machine.
 *
 * `input_weights` (hidden x input) and `bias` are drawn once and never
 * trained; only `output_weights` (output x hidden) is solved for. An
 * empty `output_weights` means the model has not been trained yet.
 */
struct ElmModel {
    Eigen::MatrixXd input_weights;
    Eigen::VectorXd bias;
    Eigen::MatrixXd output_weights;
    std::size_t output_dim = 0;
    std::uint64_t init_seed = 0;
    Activation activation = Activation::tanh;

    std::size_t input_dim() const { return static_cast<std::size_t>(input_weights.cols()); }
    std::size_t hidden_dim() const { return static_cast<std::size_t>(input_weights.rows()); }
    bool trained() const { return output_weights.size() != 0; }
};

/// W and b i.i.d. uniform on [-1, 1]. `output_dim` 0 means "same as input".
ElmModel init_elm(std::size_t n_hidden, std::size_t input_dim, std::uint64_t seed,
                  std::size_t output_dim = 0);

/// tanh(W g + b)
Eigen::VectorXd hidden_output(std::span<const double> input, const ElmModel& model);

/// Moore-Penrose pseudoinverse by SVD. Singular values below
/// max(rows, cols) * eps * sigma_max are treated as zero.
Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& a);

/// Upsilon = T H^+ for H (hidden x Nt) and T (output x Nt).
Eigen::MatrixXd train_output_weights(const Eigen::MatrixXd& hidden, const Eigen::MatrixXd& targets);

/**
 * Sufficient statistics for the output-weight solve: G = H H^T and
 * C = T H^T, accumulated over sample blocks.
 */
class GramAccumulator {
public:
    GramAccumulator(std::size_t hidden_dim, std::size_t output_dim);

    /// Adds the columns of a hidden-output block and its target block.
    void add(const Eigen::MatrixXd& hidden_block, const Eigen::MatrixXd& target_block);
    void merge(const GramAccumulator& other);

    std::size_t samples() const { return samples_; }
    Eigen::MatrixXd gram() const;  // full symmetric H H^T
    const Eigen::MatrixXd& cross() const { return cross_; }

    /**
     * Upsilon = C (G + lambda I)^-1 with lambda = ridge_scale * trace(G) / hidden.
     * ridge_scale == 0 uses C G^+, which equals T H^+ exactly.
     */
    Eigen::MatrixXd solve(double ridge_scale) const;

private:
    Eigen::MatrixXd gram_lower_;  // only the lower triangle is maintained
    Eigen::MatrixXd cross_;
    std::size_t samples_ = 0;
};

struct TrainingSet {
    Eigen::MatrixXd inputs;   // input_dim x Nt, one sample per column
    Eigen::MatrixXd targets;  // output_dim x Nt

    std::size_t size() const { return static_cast<std::size_t>(inputs.cols()); }
};

struct TrainOptions {
    double ridge_scale = 1e-8;
    std::size_t workers = 1;
    // Fixed partition of the samples; partial sums are combined in chunk
    // order, so the trained weights do not depend on `workers`.
    std::size_t chunks = 8;
    std::size_t block = 256;
};

/// Writes sample i's input and target into the given spans.
using SampleSource = std::function<void(std::size_t, std::span<double>, std::span<double>)>;

/// Single closed-form pass over n_samples produced on demand.
void train_streaming(ElmModel& model, std::size_t n_samples, const SampleSource& source,
                     const TrainOptions& options = {});

void train(ElmModel& model, const TrainingSet& set, const TrainOptions& options = {});

/// O = Upsilon tanh(W g + b). Throws StateError on an untrained model.
RealVec infer(std::span<const double> input, const ElmModel& model);

/// argmax_d |O_d|^2, smallest index on ties.
std::size_t estimate_sto(std::span<const double> output);

// Model container, all integers and floats little-endian:
//   "ELMSYNC\0" | u32 version | u32 activation | u64 seed
//   u64 input_dim | u64 hidden_dim | u64 output_dim | u8 trained
//   W (row-major f64) | b | Upsilon (row-major f64, if trained)
inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const ElmModel& model, const std::filesystem::path& path);
ElmModel load_model(const std::filesystem::path& path);

}  // namespace elmsync
