#include "nngp/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nngp/error.hpp"

namespace nngp::io {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string grid_csv(const GridResult& grid) {
    std::ostringstream out;
    out << "mu\\sigma2";
    for (Eigen::Index j = 0; j < grid.sig2_axis.size(); ++j) out << ',' << format_double(grid.sig2_axis(j));
    out << '\n';
    for (Eigen::Index i = 0; i < grid.values.rows(); ++i) {
        out << format_double(grid.mu_axis(i));
        for (Eigen::Index j = 0; j < grid.values.cols(); ++j) out << ',' << format_double(grid.values(i, j));
        out << '\n';
    }
    return out.str();
}

std::string chain_csv(const Chain& chain) {
    std::ostringstream out;
    out << "index,mu,sigma2,log_density\n";
    for (std::size_t i = 0; i < chain.samples.size(); ++i) {
        out << i << ',' << format_double(chain.samples[i].mu) << ','
            << format_double(chain.samples[i].sigma2) << ',' << format_double(chain.log_densities[i])
            << '\n';
    }
    return out.str();
}

std::string curve_csv(const ConvergenceCurve& curve) {
    std::ostringstream out;
    out << "width,mmd2,null_low,null_high\n";
    for (const auto& p : curve.points) {
        out << p.width << ',' << format_double(p.mmd2) << ',' << format_double(p.null.low) << ','
            << format_double(p.null.high) << '\n';
    }
    return out.str();
}

std::string dataset_csv(const Dataset& data) {
    std::ostringstream out;
    out << "split";
    for (Eigen::Index c = 0; c < data.X_train.cols(); ++c) out << ",x" << c + 1;
    out << ",y,noise\n";
    auto rows = [&](const char* split, const Matrix& X, const Vector& y, const Vector& e) {
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            out << split;
            for (Eigen::Index c = 0; c < X.cols(); ++c) out << ',' << format_double(X(i, c));
            out << ',' << format_double(y(i)) << ',';
            if (e.size() == y.size()) out << format_double(e(i));
            out << '\n';
        }
    };
    rows("train", data.X_train, data.y_train, data.train_noise);
    rows("test", data.X_test, data.y_test, data.test_noise);
    return out.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorCode::Io, "cannot open " + path + " for writing");
    out << contents;
    out.flush();
    require(static_cast<bool>(out), ErrorCode::Io, "failed writing " + path);
}

void dump_weights(const SampledNetwork& net, const std::string& directory) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(directory, ec);
    require(!ec, ErrorCode::Io, "cannot create " + directory + ": " + ec.message());

    std::ostringstream manifest;
    manifest << "{\n  \"format\": \"f64-le row-major\",\n  \"slope\": " << format_double(net.slope_a)
             << ",\n  \"layers\": [";
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        const Matrix& W = net.weights[l];
        const std::string file = "layer_" + std::to_string(l) + ".f64";
        std::string bytes;
        bytes.reserve(static_cast<std::size_t>(W.size()) * 8);
        for (Eigen::Index j = 0; j < W.rows(); ++j) {
            for (Eigen::Index i = 0; i < W.cols(); ++i) {
                auto bits = std::bit_cast<std::uint64_t>(W(j, i));
                for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
            }
        }
        write_file((fs::path(directory) / file).string(), bytes);
        manifest << (l ? "," : "") << "\n    {\"file\": \"" << file << "\", \"rows\": " << W.rows()
                 << ", \"cols\": " << W.cols();
        if (l < net.latents.size() && net.latents[l]) manifest << ", \"latent_a\": " << format_double(net.latents[l]->a);
        manifest << "}";
    }
    manifest << "\n  ]\n}\n";
    write_file((fs::path(directory) / "manifest.json").string(), manifest.str());
}

}  // namespace nngp::io
