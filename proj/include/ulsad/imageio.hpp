#pragma once

#include <string>

#include "ulsad/tensor.hpp"

namespace ulsad {

// PNG (and any raster OpenCV can decode) in/out. Images are (3,H,W) RGB in
// [0,1]; masks are (H,W) in {0,1} with any nonzero source pixel anomalous.
Tensor read_image_rgb01(const std::string& path);
Tensor read_mask01(const std::string& path);
void write_image_rgb01(const std::string& path, const Tensor& img);
void write_mask01(const std::string& path, const Tensor& mask);

// Renders a calibrated anomaly map on the 0-to-1 color scale (values are
// clamped; blue = normal, red = highly anomalous).
void write_heatmap(const std::string& path, const Tensor& map2d);

}  // namespace ulsad
