#pragma once

// Benchmark regression problems: noisy sine, smooth XOR and Snelson's 1-D set.

#include <cstdint>
#include <string>

#include "nngp/kernel_core.hpp"

namespace nngp {

struct Dataset {
    std::string name;
    Matrix X_train;
    Vector y_train;
    Matrix X_test;
    Vector y_test;
    double noise_var = 0.1;
    /// Noise added to the generated targets; empty for loaded data.
    Vector train_noise;
    Vector test_noise;

    void validate() const;
};

double sine_target(double x);
double smooth_xor_target(double x1, double x2);

/// 10 training inputs on the grid over [-sqrt 3, sqrt 3], 100 uniform test inputs.
Dataset gen_sine(std::uint64_t seed);
/// Training inputs (+-1, +-1); 100 test inputs uniform on [-2, 2]^2.
Dataset gen_smooth_xor(std::uint64_t seed);

/// 200 whitespace-separated (x, y) rows. Sorted by x, the rows of rank
/// round(k * 199 / 9), k = 0..9, form the training set.
Dataset load_snelson(const std::string& path);
Dataset parse_snelson(const std::string& text);

}  // namespace nngp
