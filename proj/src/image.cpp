#include "nodseg/image.hpp"

#include <cmath>
#include <stdexcept>

namespace nodseg {

void WindowSpec::validate() const {
    if (!(width > 0)) throw std::invalid_argument("window: width must be > 0");
    if (!std::isfinite(center) || !std::isfinite(width))
        throw std::invalid_argument("window: non-finite spec");
}

HuImage to_hounsfield(const RawSlice& slice) {
    HuImage out;
    out.rows = slice.rows;
    out.cols = slice.cols;
    out.values.resize(slice.stored.size());
    for (size_t i = 0; i < slice.stored.size(); ++i)
        out.values[i] = double(slice.stored[i]) * slice.rescale_slope + slice.rescale_intercept;
    return out;
}

NormImage window(const HuImage& img, const WindowSpec& spec) {
    spec.validate();
    const double lo = spec.low();
    NormImage out;
    out.rows = img.rows;
    out.cols = img.cols;
    out.values.resize(img.values.size());
    for (size_t i = 0; i < img.values.size(); ++i) {
        const double hu = img.values[i];
        if (!std::isfinite(hu))
            throw std::runtime_error("window: non-finite HU value at pixel " + std::to_string(i));
        double v = (hu - lo) / spec.width;
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        out.values[i] = float(v);
    }
    return out;
}

std::vector<uint8_t> quantize8(const NormImage& img) {
    std::vector<uint8_t> out(img.values.size());
    for (size_t i = 0; i < img.values.size(); ++i)
        out[i] = uint8_t(std::lround(double(img.values[i]) * 255.0));
    return out;
}

} // namespace nodseg
