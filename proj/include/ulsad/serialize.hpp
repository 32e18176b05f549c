#pragma once

#include <map>
#include <string>

#include "ulsad/tensor.hpp"

namespace ulsad {

using ArrayMap = std::map<std::string, Tensor>;

// Binary container of named float64 arrays (little-endian). Used for model
// checkpoints and converted backbone weights; tools/export_backbone_weights.py
// writes the same layout.
void write_array_file(const std::string& path, const ArrayMap& arrays);
ArrayMap read_array_file(const std::string& path);

// Minimal .npy (float64, C-order) writer for exported anomaly maps.
void write_npy(const std::string& path, const Tensor& t);

}  // namespace ulsad
