#include "nodseg/png_io.hpp"

#include <cstdio>
#include <memory>
#include <stdexcept>

#include <png.h>

namespace nodseg {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

} // namespace

GrayImage read_png_gray8(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("png: cannot open '" + path + "'");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png: out of memory reading '" + path + "'");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png: failed to read '" + path + "'");
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    const png_byte color_type = png_get_color_type(png, info);
    const png_byte bit_depth = png_get_bit_depth(png, info);

    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (color_type == PNG_COLOR_TYPE_RGB || color_type == PNG_COLOR_TYPE_RGB_ALPHA ||
        color_type == PNG_COLOR_TYPE_PALETTE)
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    png_read_update_info(png, info);

    GrayImage img;
    img.rows = int(png_get_image_height(png, info));
    img.cols = int(png_get_image_width(png, info));
    img.data.resize(size_t(img.rows) * img.cols);

    std::vector<png_bytep> row_ptrs(size_t(img.rows));
    for (int y = 0; y < img.rows; ++y) row_ptrs[size_t(y)] = img.data.data() + size_t(y) * img.cols;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

namespace {

void write_png(const std::string& path, int rows, int cols, int color_type,
               const uint8_t* data, size_t stride) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("png: cannot open '" + path + "' for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("png: out of memory writing '" + path + "'");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("png: failed to write '" + path + "'");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, png_uint_32(cols), png_uint_32(rows), 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < rows; ++y)
        png_write_row(png, const_cast<png_bytep>(data + size_t(y) * stride));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace

void write_png_gray8(const std::string& path, const GrayImage& img) {
    if (img.data.size() != size_t(img.rows) * img.cols)
        throw std::invalid_argument("png: gray image buffer size mismatch");
    write_png(path, img.rows, img.cols, PNG_COLOR_TYPE_GRAY, img.data.data(), size_t(img.cols));
}

void write_png_rgb8(const std::string& path, const RgbImage& img) {
    if (img.data.size() != size_t(img.rows) * img.cols * 3)
        throw std::invalid_argument("png: rgb image buffer size mismatch");
    write_png(path, img.rows, img.cols, PNG_COLOR_TYPE_RGB, img.data.data(), size_t(img.cols) * 3);
}

} // namespace nodseg
