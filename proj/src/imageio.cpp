#include "ulsad/imageio.hpp"

#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>

namespace ulsad {

Tensor read_image_rgb01(const std::string& path) {
    cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
    if (bgr.empty()) throw DataError("cannot read image: " + path);
    Tensor out({3, bgr.rows, bgr.cols});
    const std::int64_t plane = static_cast<std::int64_t>(bgr.rows) * bgr.cols;
    for (int y = 0; y < bgr.rows; ++y) {
        const cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x) {
            const std::int64_t i = static_cast<std::int64_t>(y) * bgr.cols + x;
            out[i] = row[x][2] / 255.0;              // R
            out[plane + i] = row[x][1] / 255.0;      // G
            out[2 * plane + i] = row[x][0] / 255.0;  // B
        }
    }
    return out;
}

Tensor read_mask01(const std::string& path) {
    cv::Mat gray = cv::imread(path, cv::IMREAD_GRAYSCALE);
    if (gray.empty()) throw DataError("cannot read mask: " + path);
    Tensor out({gray.rows, gray.cols});
    for (int y = 0; y < gray.rows; ++y) {
        const uchar* row = gray.ptr<uchar>(y);
        for (int x = 0; x < gray.cols; ++x) {
            out.at(y, x) = row[x] != 0 ? 1.0 : 0.0;
        }
    }
    return out;
}

namespace {

uchar to_u8(real v) {
    return static_cast<uchar>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

void write_image_rgb01(const std::string& path, const Tensor& img) {
    if (img.dim() != 3 || img.shape(0) != 3) {
        throw ShapeError("write_image_rgb01: expected (3,H,W)");
    }
    const int h = img.shape(1), w = img.shape(2);
    const std::int64_t plane = static_cast<std::int64_t>(h) * w;
    cv::Mat bgr(h, w, CV_8UC3);
    for (int y = 0; y < h; ++y) {
        cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < w; ++x) {
            const std::int64_t i = static_cast<std::int64_t>(y) * w + x;
            row[x] = cv::Vec3b(to_u8(img[2 * plane + i]), to_u8(img[plane + i]), to_u8(img[i]));
        }
    }
    if (!cv::imwrite(path, bgr)) throw PersistenceError("cannot write image: " + path);
}

void write_mask01(const std::string& path, const Tensor& mask) {
    if (mask.dim() != 2) throw ShapeError("write_mask01: expected (H,W)");
    cv::Mat gray(mask.shape(0), mask.shape(1), CV_8UC1);
    for (int y = 0; y < mask.shape(0); ++y) {
        uchar* row = gray.ptr<uchar>(y);
        for (int x = 0; x < mask.shape(1); ++x) {
            row[x] = mask.at(y, x) != 0.0 ? 255 : 0;
        }
    }
    if (!cv::imwrite(path, gray)) throw PersistenceError("cannot write mask: " + path);
}

void write_heatmap(const std::string& path, const Tensor& map2d) {
    if (map2d.dim() != 2) throw ShapeError("write_heatmap: expected (H,W)");
    const int h = map2d.shape(0), w = map2d.shape(1);
    cv::Mat bgr(h, w, CV_8UC3);
    for (int y = 0; y < h; ++y) {
        cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < w; ++x) {
            const real v = std::clamp(map2d.at(y, x), 0.0, 1.0);
            const real r = std::clamp(1.5 - std::abs(4.0 * v - 3.0), 0.0, 1.0);
            const real g = std::clamp(1.5 - std::abs(4.0 * v - 2.0), 0.0, 1.0);
            const real b = std::clamp(1.5 - std::abs(4.0 * v - 1.0), 0.0, 1.0);
            row[x] = cv::Vec3b(to_u8(b), to_u8(g), to_u8(r));
        }
    }
    if (!cv::imwrite(path, bgr)) throw PersistenceError("cannot write heatmap: " + path);
}

}  // namespace ulsad
