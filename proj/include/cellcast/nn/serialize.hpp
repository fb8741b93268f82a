#pragma once

#include <filesystem>
#include <iosfwd>

#include "cellcast/nn/layers.hpp"

namespace cellcast::nn {

// Weight file: "CCWEIGHT" magic, u32 version, u64 parameter count, then per
// parameter u32 name length, name bytes, u32 rank, u64 dims, little-endian
// f64 values. Round trips are bit exact.

void write_parameters(std::ostream& out, const ParameterList& params);
/// Loads into existing parameters, matching by position, name and shape.
void read_parameters(std::istream& in, const ParameterList& params);

void save_parameters(const std::filesystem::path& path, const ParameterList& params);
void load_parameters(const std::filesystem::path& path, const ParameterList& params);

}  // namespace cellcast::nn
