#include "elmsync/elm.hpp"

#include "elmsync/parallel.hpp"
#include "elmsync/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace elmsync {

namespace {

constexpr char kMagic[8] = {'E', 'L', 'M', 'S', 'Y', 'N', 'C', '\0'};

void check_input_dim(std::span<const double> input, const ElmModel& model) {
    if (model.input_weights.size() == 0) throw StateError("ELM is not initialized");
    if (input.size() != model.input_dim())
        throw DomainError("ELM input has length " + std::to_string(input.size()) + ", expected " +
                          std::to_string(model.input_dim()));
}

class LeWriter {
public:
    explicit LeWriter(std::ostream& out) : out_(out) {}

    void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
    void u32(std::uint32_t v) { put_le(v, 4); }
    void u64(std::uint64_t v) { put_le(v, 8); }
    void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v), 8); }

    void row_major(const Eigen::MatrixXd& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
    }

private:
    void put_le(std::uint64_t v, int bytes) {
        char buf[8];
        for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
        out_.write(buf, bytes);
    }
    std::ostream& out_;
};

class LeReader {
public:
    explicit LeReader(std::istream& in) : in_(in) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(get_le(1)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
    std::uint64_t u64() { return get_le(8); }
    double f64() { return std::bit_cast<double>(get_le(8)); }

    Eigen::MatrixXd row_major(std::size_t rows, std::size_t cols) {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = f64();
        return m;
    }

    void bytes(char* dst, std::size_t n) {
        in_.read(dst, static_cast<std::streamsize>(n));
        if (in_.gcount() != static_cast<std::streamsize>(n)) throw FormatError("model file is truncated");
    }

private:
    std::uint64_t get_le(int n) {
        unsigned char buf[8];
        bytes(reinterpret_cast<char*>(buf), static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        return v;
    }
    std::istream& in_;
};

}  // namespace

ElmModel init_elm(std::size_t n_hidden, std::size_t input_dim, std::uint64_t seed, std::size_t output_dim) {
    if (n_hidden < 1) throw DomainError("ELM needs at least one hidden neuron");
    if (input_dim < 1) throw DomainError("ELM needs a non-empty input");
    ElmModel model;
    model.init_seed = seed;
    model.output_dim = output_dim == 0 ? input_dim : output_dim;
    const auto rows = static_cast<Eigen::Index>(n_hidden);
    const auto cols = static_cast<Eigen::Index>(input_dim);
    model.input_weights.resize(rows, cols);
    model.bias.resize(rows);
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    // Row-major fill order so the draw sequence does not depend on storage order.
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) model.input_weights(r, c) = u(rng);
    for (Eigen::Index r = 0; r < rows; ++r) model.bias(r) = u(rng);
    return model;
}

Eigen::VectorXd hidden_output(std::span<const double> input, const ElmModel& model) {
    check_input_dim(input, model);
    const Eigen::Map<const Eigen::VectorXd> g(input.data(), static_cast<Eigen::Index>(input.size()));
    Eigen::VectorXd pre = model.input_weights * g + model.bias;
    return pre.array().tanh().matrix();
}

Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& a) {
    if (a.size() == 0) return Eigen::MatrixXd(a.cols(), a.rows());
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double tol = static_cast<double>(std::max(a.rows(), a.cols())) *
                       std::numeric_limits<double>::epsilon() * (sv.size() ? sv(0) : 0.0);
    Eigen::VectorXd inv(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) inv(i) = sv(i) > tol ? 1.0 / sv(i) : 0.0;
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Eigen::MatrixXd train_output_weights(const Eigen::MatrixXd& hidden, const Eigen::MatrixXd& targets) {
    if (hidden.cols() != targets.cols())
        throw DomainError("hidden and target matrices disagree on sample count");
    if (!hidden.allFinite()) throw TrainingError("hidden-layer output contains non-finite entries");
    return targets * pseudoinverse(hidden);
}

GramAccumulator::GramAccumulator(std::size_t hidden_dim, std::size_t output_dim)
    : gram_lower_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(hidden_dim), static_cast<Eigen::Index>(hidden_dim))),
      cross_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(output_dim), static_cast<Eigen::Index>(hidden_dim))) {}

void GramAccumulator::add(const Eigen::MatrixXd& hidden_block, const Eigen::MatrixXd& target_block) {
    if (!hidden_block.allFinite()) throw TrainingError("hidden-layer output contains non-finite entries");
    gram_lower_.selfadjointView<Eigen::Lower>().rankUpdate(hidden_block);
    cross_.noalias() += target_block * hidden_block.transpose();
    samples_ += static_cast<std::size_t>(hidden_block.cols());
}

void GramAccumulator::merge(const GramAccumulator& other) {
    gram_lower_ += other.gram_lower_;
    cross_ += other.cross_;
    samples_ += other.samples_;
}

Eigen::MatrixXd GramAccumulator::gram() const {
    return gram_lower_.selfadjointView<Eigen::Lower>();
}

Eigen::MatrixXd GramAccumulator::solve(double ridge_scale) const {
    if (samples_ == 0) throw DomainError("no training samples accumulated");
    if (ridge_scale < 0.0) throw ConfigError("ridge scale must be non-negative");
    Eigen::MatrixXd g = gram();
    const double lambda = ridge_scale * g.trace() / static_cast<double>(g.rows());
    if (lambda > 0.0) {
        g.diagonal().array() += lambda;
        Eigen::LLT<Eigen::MatrixXd> llt(g);
        if (llt.info() == Eigen::Success) return llt.solve(cross_.transpose()).transpose();
        Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
        return ldlt.solve(cross_.transpose()).transpose();
    }
    return cross_ * pseudoinverse(g);
}

void train_streaming(ElmModel& model, std::size_t n_samples, const SampleSource& source,
                     const TrainOptions& options) {
    if (n_samples == 0) throw DomainError("training set is empty");
    if (model.input_weights.size() == 0) throw StateError("ELM is not initialized");
    const std::size_t in_dim = model.input_dim();
    const std::size_t out_dim = model.output_dim;
    const std::size_t hid = model.hidden_dim();
    const std::size_t n_chunks = std::clamp<std::size_t>(options.chunks, 1, n_samples);
    const std::size_t block = std::max<std::size_t>(options.block, 1);

    std::vector<GramAccumulator> partial(n_chunks, GramAccumulator(hid, out_dim));
    parallel_for(n_chunks, options.workers, [&](std::size_t c) {
        const std::size_t begin = c * n_samples / n_chunks;
        const std::size_t end = (c + 1) * n_samples / n_chunks;
        Eigen::MatrixXd x(static_cast<Eigen::Index>(in_dim), static_cast<Eigen::Index>(block));
        Eigen::MatrixXd t(static_cast<Eigen::Index>(out_dim), static_cast<Eigen::Index>(block));
        for (std::size_t b0 = begin; b0 < end; b0 += block) {
            const auto width = static_cast<Eigen::Index>(std::min(block, end - b0));
            for (Eigen::Index j = 0; j < width; ++j) {
                source(b0 + static_cast<std::size_t>(j), std::span<double>(x.col(j).data(), in_dim),
                       std::span<double>(t.col(j).data(), out_dim));
            }
            Eigen::MatrixXd h = model.input_weights * x.leftCols(width);
            h.colwise() += model.bias;
            h = h.array().tanh().matrix();
            partial[c].add(h, t.leftCols(width));
        }
    });

    GramAccumulator total(hid, out_dim);
    for (const auto& p : partial) total.merge(p);
    model.output_weights = total.solve(options.ridge_scale);
    if (!model.output_weights.allFinite()) throw TrainingError("output weights are not finite");
}

void train(ElmModel& model, const TrainingSet& set, const TrainOptions& options) {
    if (set.size() == 0) throw DomainError("training set is empty");
    if (static_cast<std::size_t>(set.inputs.rows()) != model.input_dim())
        throw DomainError("training inputs do not match the model input dimension");
    if (static_cast<std::size_t>(set.targets.rows()) != model.output_dim || set.targets.cols() != set.inputs.cols())
        throw DomainError("training targets do not match the model output dimension");
    train_streaming(
        model, set.size(),
        [&](std::size_t i, std::span<double> in, std::span<double> target) {
            const auto col = static_cast<Eigen::Index>(i);
            std::copy_n(set.inputs.col(col).data(), in.size(), in.begin());
            std::copy_n(set.targets.col(col).data(), target.size(), target.begin());
        },
        options);
}

RealVec infer(std::span<const double> input, const ElmModel& model) {
    if (!model.trained()) throw StateError("ELM has no output weights; train it first");
    const Eigen::VectorXd out = model.output_weights * hidden_output(input, model);
    return RealVec(out.data(), out.data() + out.size());
}

std::size_t estimate_sto(std::span<const double> output) {
    std::size_t best = 0;
    double best_power = -1.0;
    for (std::size_t d = 0; d < output.size(); ++d) {
        const double p = output[d] * output[d];
        if (p > best_power) {
            best_power = p;
            best = d;
        }
    }
    return best;
}

void save_model(const ElmModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    LeWriter w(out);
    out.write(kMagic, sizeof kMagic);
    w.u32(kModelFormatVersion);
    w.u32(static_cast<std::uint32_t>(model.activation));
    w.u64(model.init_seed);
    w.u64(model.input_dim());
    w.u64(model.hidden_dim());
    w.u64(model.output_dim);
    w.u8(model.trained() ? 1 : 0);
    w.row_major(model.input_weights);
    w.row_major(model.bias);
    if (model.trained()) w.row_major(model.output_weights);
    if (!out) throw Error("write failed: " + path.string());
}

ElmModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open model file " + path.string());
    LeReader r(in);
    char magic[8];
    r.bytes(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw FormatError("not an ELM model file (bad magic)");
    const auto version = r.u32();
    if (version != kModelFormatVersion)
        throw FormatError("unsupported model format version " + std::to_string(version));
    const auto activation = r.u32();
    if (activation != static_cast<std::uint32_t>(Activation::tanh))
        throw FormatError("unknown activation id " + std::to_string(activation));

    ElmModel model;
    model.init_seed = r.u64();
    const auto in_dim = r.u64();
    const auto hid = r.u64();
    model.output_dim = r.u64();
    const auto trained = r.u8();
    constexpr std::uint64_t kLimit = 1ULL << 20;
    if (in_dim == 0 || hid == 0 || model.output_dim == 0 || in_dim > kLimit || hid > kLimit ||
        model.output_dim > kLimit || trained > 1)
        throw FormatError("implausible model header");
    model.input_weights = r.row_major(hid, in_dim);
    model.bias = r.row_major(hid, 1);
    if (trained) model.output_weights = r.row_major(model.output_dim, hid);
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after model body");
    return model;
}

}  // namespace elmsync
