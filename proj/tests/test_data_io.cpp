#include <cmath>
#include <cstdint>
#include <cstring>
#include <algorithm>
#include <filesystem>
#include <functional>
#include <limits>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "nngp/data.hpp"
#include "nngp/error.hpp"
#include "nngp/io.hpp"
#include "oracles.hpp"

using namespace nngp;
using doctest::Approx;

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

bool same(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

// Snelson-like text: x values are a permutation of distinct reals, y = 3x + 1.
std::string snelson_text(int rows, std::uint64_t seed) {
    oracle::Xoshiro rng(seed);
    std::vector<double> xs;
    for (int i = 0; i < rows; ++i) xs.push_back(0.03 * i + 1e-4 * double(rng() % 97));
    for (int i = rows - 1; i > 0; --i) std::swap(xs[static_cast<std::size_t>(i)], xs[rng() % static_cast<std::uint64_t>(i + 1)]);
    std::ostringstream out;
    out.precision(17);
    for (double x : xs) out << "  " << x << "\t" << 3.0 * x + 1.0 << "\n";
    return out.str();
}

std::string read_all(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode{};
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("nngp_test_data_io_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("gen_sine") {
    const Dataset d = gen_sine(4);
    d.validate();
    CHECK(d.X_train.rows() == 10);
    CHECK(d.X_test.rows() == 100);
    CHECK(d.noise_var == 0.1);
    CHECK(d.X_train(0, 0) == -kSqrt3);
    CHECK(d.X_train(9, 0) == kSqrt3);
    for (int i = 1; i < 10; ++i) CHECK(d.X_train(i, 0) - d.X_train(i - 1, 0) == Approx(2 * kSqrt3 / 9).epsilon(1e-14));
    CHECK(sine_target(0.0) == 0.0);
    CHECK(d.X_test.minCoeff() >= -kSqrt3);
    CHECK(d.X_test.maxCoeff() <= kSqrt3);
    for (int i = 0; i < 10; ++i) CHECK(std::abs(d.y_train(i) - d.train_noise(i) - std::sin(d.X_train(i, 0))) <= 1e-15);
    for (int i = 0; i < 100; ++i) CHECK(d.y_test(i) - d.test_noise(i) == Approx(std::sin(d.X_test(i, 0))).epsilon(1e-15));

    const Dataset again = gen_sine(4);
    CHECK(same(again.X_test, d.X_test));
    CHECK(same(again.y_train, d.y_train));
    CHECK(same(again.y_test, d.y_test));
    CHECK_FALSE(same(gen_sine(5).y_train, d.y_train));

    // Pooled noise has variance 0.1 and the test inputs are spread over the interval.
    oracle::Moments e, x;
    for (std::uint64_t s = 0; s < 200; ++s) {
        const Dataset g = gen_sine(s);
        for (int i = 0; i < 100; ++i) {
            e.add(g.test_noise(i) * g.test_noise(i));
            x.add(g.X_test(i, 0));
        }
    }
    CHECK(std::abs(e.mean - 0.1) <= 4 * e.se());
    CHECK(std::abs(x.mean) <= 4 * x.se());
}

TEST_CASE("gen_smooth_xor") {
    CHECK(smooth_xor_target(1, 1) == -1.0);
    CHECK(smooth_xor_target(1, -1) == 1.0);
    CHECK(smooth_xor_target(-1, -1) == -1.0);
    CHECK(smooth_xor_target(0, 0.7) == 0.0);
    const Dataset d = gen_smooth_xor(9);
    d.validate();
    CHECK(d.X_train.rows() == 4);
    CHECK(d.X_train.cols() == 2);
    CHECK(d.X_test.rows() == 100);
    std::set<std::pair<double, double>> corners;
    for (int i = 0; i < 4; ++i) corners.insert({d.X_train(i, 0), d.X_train(i, 1)});
    CHECK(corners == std::set<std::pair<double, double>>{{-1, -1}, {-1, 1}, {1, -1}, {1, 1}});
    CHECK(d.X_test.minCoeff() >= -2.0);
    CHECK(d.X_test.maxCoeff() < 2.0);
    // Both coordinates vary, so the points cover the square rather than a segment.
    CHECK((d.X_test.col(0) - d.X_test.col(1)).cwiseAbs().maxCoeff() > 0.5);
    for (int i = 0; i < 100; ++i)
        CHECK(d.y_test(i) - d.test_noise(i) == Approx(smooth_xor_target(d.X_test(i, 0), d.X_test(i, 1))).epsilon(1e-14));
    CHECK(same(gen_smooth_xor(9).X_test, d.X_test));
    CHECK(same(gen_smooth_xor(9).y_train, d.y_train));
}

TEST_CASE("parse_snelson split") {
    const std::string text = snelson_text(200, 1);
    const Dataset d = parse_snelson(text);
    d.validate();
    CHECK(d.X_train.rows() == 10);
    CHECK(d.X_test.rows() == 190);
    CHECK(d.train_noise.size() == 0);

    std::vector<double> xs;
    std::istringstream in(text);
    double x, y;
    while (in >> x >> y) xs.push_back(x);
    std::sort(xs.begin(), xs.end());
    for (int k = 0; k < 10; ++k) CHECK(d.X_train(k, 0) == xs[static_cast<std::size_t>(std::lround(k * 199.0 / 9.0))]);
    CHECK(d.X_train(0, 0) == xs.front());
    CHECK(d.X_train(9, 0) == xs.back());

    std::set<double> train(d.X_train.data(), d.X_train.data() + 10);
    std::set<double> all(train);
    for (int i = 0; i < 190; ++i) {
        CHECK(train.count(d.X_test(i, 0)) == 0);
        all.insert(d.X_test(i, 0));
    }
    CHECK(all.size() == 200);
    for (int i = 0; i < 10; ++i) CHECK(d.y_train(i) == 3.0 * d.X_train(i, 0) + 1.0);

    // Blank lines and CRLF endings are accepted.
    std::string crlf;
    for (char c : text) {
        if (c == '\n') crlf += "\r\n";
        else crlf += c;
    }
    CHECK(same(parse_snelson("\n" + crlf + "\n\n").X_train, d.X_train));
}

TEST_CASE("parse_snelson errors") {
    auto message = [](const std::string& text) {
        try {
            parse_snelson(text);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Parse);
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message(snelson_text(199, 2)).find("199") != std::string::npos);
    CHECK(message(snelson_text(201, 2)).find("201") != std::string::npos);
    std::string bad = snelson_text(200, 2);
    std::size_t pos = 0;
    for (int line = 1; line < 7; ++line) pos = bad.find('\n', pos) + 1;
    bad.insert(pos, "1.0 oops\n");
    CHECK(message(bad).find("line 7") != std::string::npos);
    CHECK(message("1 2 3\n").find("line 1") != std::string::npos);
    CHECK(message("1 nan\n").find("line 1") != std::string::npos);
    CHECK(code_of([] { load_snelson("/nonexistent/snelson.txt"); }) == ErrorCode::Io);

    const auto dir = scratch("snelson");
    io::write_file((dir / "s.txt").string(), snelson_text(200, 3));
    CHECK(same(load_snelson((dir / "s.txt").string()).X_test, parse_snelson(snelson_text(200, 3)).X_test));
    std::filesystem::remove_all(dir);
}

TEST_CASE("Dataset::validate") {
    Dataset d = gen_sine(0);
    d.noise_var = -1.0;
    CHECK(code_of([&] { d.validate(); }) == ErrorCode::InvalidArgument);
    d = gen_sine(0);
    d.y_train.conservativeResize(3);
    CHECK(code_of([&] { d.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("format_double round-trips") {
    oracle::Xoshiro rng(5);
    for (int i = 0; i < 2000; ++i) {
        double v;
        std::uint64_t bits = rng();
        std::memcpy(&v, &bits, sizeof v);
        if (!std::isfinite(v)) continue;
        CHECK(std::strtod(io::format_double(v).c_str(), nullptr) == v);
    }
    CHECK(io::format_double(0.1) == "0.10000000000000001");
    CHECK(io::format_double(-2.0) == "-2");
}

TEST_CASE("csv writers") {
    GridResult g;
    g.mu_axis = Vector::LinSpaced(2, -1.0, 1.0);
    g.sig2_axis = Vector::LinSpaced(3, 0.5, 1.5);
    g.values.resize(2, 3);
    g.values << 1, 2, 3, 4, 5, -std::numeric_limits<double>::infinity();
    CHECK(io::grid_csv(g) == "mu\\sigma2,0.5,1,1.5\n-1,1,2,3\n1,4,5,-inf\n");

    Chain c;
    c.samples = {{0.25, 2.0}, {-0.5, 1.0}};
    c.log_densities = {-3.0, -2.5};
    CHECK(io::chain_csv(c) == "index,mu,sigma2,log_density\n0,0.25,2,-3\n1,-0.5,1,-2.5\n");

    ConvergenceCurve curve;
    curve.points = {{4, 0.5, {-0.01, 0.02}}};
    CHECK(io::curve_csv(curve) ==
          "width,mmd2,null_low,null_high\n4,0.5,-0.01,0.02\n");

    const Dataset xor_data = gen_smooth_xor(1);
    const std::string csv = io::dataset_csv(xor_data);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "split,x1,x2,y,noise");
    int train = 0, test = 0;
    while (std::getline(in, line)) {
        CHECK(std::count(line.begin(), line.end(), ',') == 4);
        train += line.rfind("train,", 0) == 0;
        test += line.rfind("test,", 0) == 0;
    }
    CHECK(train == 4);
    CHECK(test == 100);
    // Loaded data has no noise column values.
    const std::string loaded = io::dataset_csv(parse_snelson(snelson_text(200, 4)));
    CHECK(loaded.find("train,") != std::string::npos);
    CHECK(loaded.substr(loaded.find('\n') + 1, loaded.find('\n', loaded.find('\n') + 1) - loaded.find('\n') - 1).back() == ',');
}

TEST_CASE("write_file and dump_weights") {
    const auto dir = scratch("weights");
    CHECK(code_of([&] { io::write_file((dir / "missing" / "x.csv").string(), "x"); }) == ErrorCode::Io);

    const NetworkShape shape{3, {5, 4}, 2};
    const SampledNetwork net = sample_weights(shape, WeightScheme::rce(SchemeKind::F1), 0.1, 17);
    io::dump_weights(net, (dir / "w").string());
    const std::string manifest = read_all(dir / "w" / "manifest.json");
    CHECK(manifest.find("\"layer_0.f64\", \"rows\": 5, \"cols\": 3") != std::string::npos);
    CHECK(manifest.find("\"layer_2.f64\", \"rows\": 2, \"cols\": 4") != std::string::npos);
    CHECK(manifest.find("latent_a") != std::string::npos);
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        const std::string bytes = read_all(dir / "w" / ("layer_" + std::to_string(l) + ".f64"));
        const Matrix& W = net.weights[l];
        REQUIRE(bytes.size() == static_cast<std::size_t>(W.size()) * 8);
        for (Eigen::Index j = 0; j < W.rows(); ++j)
            for (Eigen::Index i = 0; i < W.cols(); ++i) {
                std::uint64_t bits = 0;
                for (int b = 0; b < 8; ++b)
                    bits |= std::uint64_t(static_cast<unsigned char>(bytes[static_cast<std::size_t>((j * W.cols() + i) * 8 + b)])) << (8 * b);
                double v;
                std::memcpy(&v, &bits, sizeof v);
                CHECK(v == W(j, i));
            }
    }
    std::filesystem::remove_all(dir);
}
