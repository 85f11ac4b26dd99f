#include "elmsync/elm.hpp"
#include "elmsync/rng.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>

using namespace elmsync;

namespace {

Eigen::MatrixXd random_matrix(std::uint64_t seed, Eigen::Index rows, Eigen::Index cols) {
    Rng rng = make_rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = n(rng);
    return m;
}

std::filesystem::path temp_file(const char* name) { return std::filesystem::temp_directory_path() / name; }

std::vector<char> read_all(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void write_all(const std::filesystem::path& p, const std::vector<char>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ElmModel trained_toy() {
    auto model = init_elm(12, 5, 3);
    TrainingSet set{random_matrix(1, 5, 20), random_matrix(2, 5, 20)};
    train(model, set);
    return model;
}

}  // namespace

TEST_SUITE("elm") {

TEST_CASE("init_elm shapes, range and determinism") {
    const auto m = init_elm(640, 160, 7);
    CHECK(m.input_weights.rows() == 640);
    CHECK(m.input_weights.cols() == 160);
    CHECK(m.bias.size() == 640);
    CHECK_FALSE(m.trained());
    CHECK(m.input_weights.minCoeff() >= -1.0);
    CHECK(m.input_weights.maxCoeff() <= 1.0);
    CHECK(std::abs(m.input_weights.mean()) < 0.01);
    const auto again = init_elm(640, 160, 7);
    CHECK(again.input_weights == m.input_weights);
    CHECK(again.bias == m.bias);
    CHECK(init_elm(640, 160, 8).input_weights != m.input_weights);
    CHECK_THROWS_AS(init_elm(0, 160, 7), DomainError);
}

TEST_CASE("hidden_output") {
    auto m = init_elm(1, 1, 0);
    m.input_weights(0, 0) = 2.0;
    m.bias(0) = 0.5;
    const double one[] = {1.0};
    CHECK(hidden_output(one, m)(0) == doctest::Approx(0.9866142981514303).epsilon(1e-12));

    auto big = init_elm(30, 10, 4);
    big.bias.setZero();
    const RealVec zeros(10, 0.0);
    CHECK(hidden_output(zeros, big).isZero(0.0));
    const RealVec ones(10, 3.0);
    const auto h = hidden_output(ones, big);
    CHECK(h.maxCoeff() < 1.0);
    CHECK(h.minCoeff() > -1.0);
    const RealVec wrong(9, 0.0);
    CHECK_THROWS_AS(hidden_output(wrong, big), DomainError);
}

TEST_CASE("train_output_weights: identity and normal equations") {
    const Eigen::MatrixXd t = random_matrix(3, 4, 5);
    CHECK((train_output_weights(Eigen::MatrixXd::Identity(5, 5), t) - t).norm() < 1e-12);

    const Eigen::MatrixXd h = random_matrix(4, 2, 3);
    const Eigen::MatrixXd t2 = random_matrix(5, 3, 3);
    const Eigen::MatrixXd oracle = t2 * h.transpose() * (h * h.transpose()).inverse();
    CHECK((train_output_weights(h, t2) - oracle).norm() < 1e-8);
}

TEST_CASE("train_output_weights: rank-deficient case is the minimum-norm solution") {
    Eigen::MatrixXd h = random_matrix(6, 3, 4);
    h.row(2) = h.row(0);
    const Eigen::MatrixXd t = random_matrix(7, 2, 4);
    const Eigen::MatrixXd u = train_output_weights(h, t);
    CHECK(u.allFinite());
    // Independent oracle: minimum-norm solve of H^T U^T = T^T.
    const Eigen::MatrixXd oracle =
        Eigen::MatrixXd(h.transpose()).completeOrthogonalDecomposition().solve(Eigen::MatrixXd(t.transpose())).transpose();
    CHECK((u - oracle).norm() < 1e-8);
}

TEST_CASE("train_output_weights rejects non-finite input") {
    Eigen::MatrixXd h = random_matrix(8, 3, 4);
    h(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(train_output_weights(h, random_matrix(9, 2, 4)), TrainingError);
}

TEST_CASE("least-squares optimality under perturbation") {
    const Eigen::MatrixXd h = random_matrix(10, 4, 6);
    const Eigen::MatrixXd t = random_matrix(11, 3, 6);
    const Eigen::MatrixXd u = train_output_weights(h, t);
    const double best = (u * h - t).norm();
    for (std::uint64_t k = 0; k < 100; ++k) {
        const Eigen::MatrixXd delta = 1e-3 * random_matrix(100 + k, 3, 4);
        CHECK(((u + delta) * h - t).norm() >= best - 1e-12);
    }
}

TEST_CASE("Gram accumulation: chunks merge to the full sums") {
    const Eigen::MatrixXd h = random_matrix(12, 6, 40);
    const Eigen::MatrixXd t = random_matrix(13, 3, 40);
    GramAccumulator whole(6, 3);
    whole.add(h, t);
    GramAccumulator a(6, 3), b(6, 3);
    a.add(h.leftCols(15), t.leftCols(15));
    b.add(h.rightCols(25), t.rightCols(25));
    a.merge(b);
    CHECK(a.samples() == 40);
    CHECK((a.gram() - h * h.transpose()).norm() < 1e-10);
    CHECK((a.cross() - t * h.transpose()).norm() < 1e-10);
    CHECK((whole.solve(0.0) - train_output_weights(h, t)).norm() < 1e-8);
}

TEST_CASE("train: single sample interpolates, repeat training is idempotent") {
    auto m = init_elm(200, 160, 1);
    const Eigen::MatrixXd x = random_matrix(14, 160, 1) / 13.0;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(160, 1);
    t(40, 0) = 1.0;
    TrainingSet one{x, t};
    train(m, one, TrainOptions{.ridge_scale = 0.0});
    const RealVec in(x.data(), x.data() + 160);
    const auto out = infer(in, m);
    for (std::size_t i = 0; i < 160; ++i) CHECK(std::abs(out[i] - t(static_cast<Eigen::Index>(i), 0)) < 1e-6);

    auto a = init_elm(20, 5, 2), b = init_elm(20, 5, 2);
    TrainingSet set{random_matrix(15, 5, 50), random_matrix(16, 5, 50)};
    train(a, set);
    train(b, set);
    train(b, set);
    CHECK(a.output_weights == b.output_weights);

    TrainingSet empty{Eigen::MatrixXd(5, 0), Eigen::MatrixXd(5, 0)};
    CHECK_THROWS_AS(train(a, empty), DomainError);
    TrainingSet mismatched{random_matrix(17, 4, 3), random_matrix(18, 5, 3)};
    CHECK_THROWS_AS(train(a, mismatched), DomainError);
}

TEST_CASE("infer") {
    auto m = trained_toy();
    const RealVec in{0.1, -0.2, 0.3, 0.0, 0.5};
    const auto o = infer(in, m);
    m.output_weights *= 2.0;
    const auto o2 = infer(in, m);
    for (std::size_t i = 0; i < o.size(); ++i) CHECK(o2[i] == 2.0 * o[i]);
    m.output_weights.setZero();
    for (double v : infer(in, m)) CHECK(v == 0.0);
    CHECK_THROWS_AS(infer(in, init_elm(12, 5, 3)), StateError);
}

TEST_CASE("estimate_sto") {
    CHECK(estimate_sto(RealVec{0.0, 0.0, 5.0, 0.0}) == 2);
    CHECK(estimate_sto(RealVec{-3.0, 2.0}) == 0);
    CHECK(estimate_sto(RealVec{1.0, 1.0}) == 0);
    const RealVec o{0.2, -0.7, 0.5, 0.1};
    for (double c : {-4.0, 0.01, 3.0}) {
        RealVec scaled = o;
        for (auto& v : scaled) v *= c;
        CHECK(estimate_sto(scaled) == 1);
    }
}

TEST_CASE("model file round trip") {
    const auto m = trained_toy();
    const auto path = temp_file("elmsync_model_ok.bin");
    save_model(m, path);
    const auto back = load_model(path);
    CHECK(back.input_weights == m.input_weights);
    CHECK(back.bias == m.bias);
    CHECK(back.output_weights == m.output_weights);
    CHECK(back.init_seed == m.init_seed);
    const RealVec in{0.3, 0.1, -0.4, 0.2, 0.0};
    CHECK(infer(in, back) == infer(in, m));

    const auto bytes = read_all(path);
    CHECK(std::string(bytes.data(), 7) == "ELMSYNC");
    std::filesystem::remove(path);
}

TEST_CASE("model file errors") {
    const auto m = trained_toy();
    const auto path = temp_file("elmsync_model_bad.bin");
    save_model(m, path);
    const auto bytes = read_all(path);

    write_all(path, std::vector<char>(bytes.begin(), bytes.end() - 9));
    CHECK_THROWS_AS(load_model(path), FormatError);
    write_all(path, std::vector<char>(bytes.begin(), bytes.begin() + 10));
    CHECK_THROWS_AS(load_model(path), FormatError);

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    write_all(path, bad_magic);
    CHECK_THROWS_AS(load_model(path), FormatError);

    auto bad_version = bytes;
    bad_version[8] = 99;
    write_all(path, bad_version);
    CHECK_THROWS_AS(load_model(path), FormatError);

    auto trailing = bytes;
    trailing.push_back(0);
    write_all(path, trailing);
    CHECK_THROWS_AS(load_model(path), FormatError);

    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_model(path), FormatError);
}

}  // TEST_SUITE
