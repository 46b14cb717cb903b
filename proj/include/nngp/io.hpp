#pragma once

// CSV and binary serialisation of experiment outputs. Floats use 17
// significant digits so values round-trip exactly; lines end in '\n'.

#include <string>

#include "nngp/data.hpp"
#include "nngp/finite_net.hpp"
#include "nngp/hyper.hpp"
#include "nngp/mmd.hpp"

namespace nngp::io {

std::string format_double(double v);

/// First row: "mu\sigma2" then the sigma2 axis; each later row: mu then the values.
std::string grid_csv(const GridResult& grid);
std::string chain_csv(const Chain& chain);
std::string curve_csv(const ConvergenceCurve& curve);
/// Columns: split, x1..xd, y, noise (noise empty for loaded data).
std::string dataset_csv(const Dataset& data);

void write_file(const std::string& path, const std::string& contents);

/// layer_<l>.f64 files of little-endian doubles in row-major order and a
/// manifest.json listing the shapes.
void dump_weights(const SampledNetwork& net, const std::string& directory);

}  // namespace nngp::io
