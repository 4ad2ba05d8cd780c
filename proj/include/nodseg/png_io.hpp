#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nodseg {

struct GrayImage {
    int rows = 0;
    int cols = 0;
    std::vector<uint8_t> data; // row-major
};

struct RgbImage {
    int rows = 0;
    int cols = 0;
    std::vector<uint8_t> data; // row-major, 3 bytes per pixel
};

// Reads any PNG as 8-bit grayscale (palette/RGB/16-bit inputs are converted).
GrayImage read_png_gray8(const std::string& path);

void write_png_gray8(const std::string& path, const GrayImage& img);
void write_png_rgb8(const std::string& path, const RgbImage& img);

} // namespace nodseg
