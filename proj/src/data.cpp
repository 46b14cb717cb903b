#include "nngp/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "nngp/error.hpp"
#include "nngp/rng.hpp"

namespace nngp {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr int kSnelsonRows = 200;
constexpr int kSnelsonTrain = 10;

Vector noise(Engine& eng, Eigen::Index n, double var) {
    std::normal_distribution<double> normal(0.0, std::sqrt(var));
    Vector e(n);
    for (Eigen::Index i = 0; i < n; ++i) e(i) = normal(eng);
    return e;
}

}  // namespace

void Dataset::validate() const {
    require(X_train.rows() == y_train.size() && X_test.rows() == y_test.size(),
            ErrorCode::InvalidArgument, "dataset: input rows and targets differ in length");
    require(X_test.rows() == 0 || X_train.cols() == X_test.cols(), ErrorCode::InvalidArgument,
            "dataset: train and test inputs have different widths");
    require(noise_var >= 0.0, ErrorCode::InvalidArgument, "dataset: noise variance must be >= 0");
}

double sine_target(double x) { return std::sin(x); }

double smooth_xor_target(double x1, double x2) {
    return -x1 * x2 * std::exp(2.0 - x1 * x1 - x2 * x2);
}

Dataset gen_sine(std::uint64_t seed) {
    Engine eng = substream(seed, "dataset");
    Dataset d;
    d.name = "sine";
    d.X_train = Vector::LinSpaced(10, -kSqrt3, kSqrt3);
    d.X_train(0, 0) = -kSqrt3;
    d.X_train(9, 0) = kSqrt3;
    d.X_test.resize(100, 1);
    for (Eigen::Index i = 0; i < d.X_test.rows(); ++i) d.X_test(i, 0) = unit_uniform(eng);
    d.train_noise = noise(eng, d.X_train.rows(), d.noise_var);
    d.test_noise = noise(eng, d.X_test.rows(), d.noise_var);
    d.y_train = d.X_train.col(0).unaryExpr(&sine_target) + d.train_noise;
    d.y_test = d.X_test.col(0).unaryExpr(&sine_target) + d.test_noise;
    return d;
}

Dataset gen_smooth_xor(std::uint64_t seed) {
    Engine eng = substream(seed, "dataset");
    Dataset d;
    d.name = "xor";
    d.X_train.resize(4, 2);
    d.X_train << 1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0;
    d.X_test.resize(100, 2);
    for (Eigen::Index i = 0; i < d.X_test.rows(); ++i)
        for (Eigen::Index j = 0; j < 2; ++j) d.X_test(i, j) = 4.0 * uniform01(eng) - 2.0;
    d.train_noise = noise(eng, d.X_train.rows(), d.noise_var);
    d.test_noise = noise(eng, d.X_test.rows(), d.noise_var);
    auto targets = [](const Matrix& X) {
        Vector y(X.rows());
        for (Eigen::Index i = 0; i < X.rows(); ++i) y(i) = smooth_xor_target(X(i, 0), X(i, 1));
        return y;
    };
    d.y_train = targets(d.X_train) + d.train_noise;
    d.y_test = targets(d.X_test) + d.test_noise;
    return d;
}

Dataset parse_snelson(const std::string& text) {
    std::vector<std::pair<double, double>> rows;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream fields(line);
        double x = 0.0;
        double y = 0.0;
        std::string extra;
        if (!(fields >> x >> y) || (fields >> extra) || !std::isfinite(x) || !std::isfinite(y))
            throw Error(ErrorCode::Parse, "snelson: line " + std::to_string(line_no) +
                                              ": expected two numeric columns");
        rows.emplace_back(x, y);
    }
    require(static_cast<int>(rows.size()) == kSnelsonRows, ErrorCode::Parse,
            "snelson: expected " + std::to_string(kSnelsonRows) + " rows, found " +
                std::to_string(rows.size()) + " (line " + std::to_string(line_no) + ")");
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& l, const auto& r) { return l.first < r.first; });

    std::vector<bool> is_train(rows.size(), false);
    for (int k = 0; k < kSnelsonTrain; ++k)
        is_train[static_cast<std::size_t>(std::lround(k * (kSnelsonRows - 1) / double(kSnelsonTrain - 1)))] = true;

    Dataset d;
    d.name = "snelson";
    d.X_train.resize(kSnelsonTrain, 1);
    d.y_train.resize(kSnelsonTrain);
    d.X_test.resize(kSnelsonRows - kSnelsonTrain, 1);
    d.y_test.resize(kSnelsonRows - kSnelsonTrain);
    Eigen::Index tr = 0;
    Eigen::Index te = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (is_train[i]) {
            d.X_train(tr, 0) = rows[i].first;
            d.y_train(tr++) = rows[i].second;
        } else {
            d.X_test(te, 0) = rows[i].first;
            d.y_test(te++) = rows[i].second;
        }
    }
    return d;
}

Dataset load_snelson(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::Io, "snelson: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_snelson(buf.str());
}

}  // namespace nngp
