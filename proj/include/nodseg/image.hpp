#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nodseg {

// One CT slice as decoded from DICOM: stored pixel values plus the rescale
// and identification metadata needed downstream.
struct RawSlice {
    int rows = 0;
    int cols = 0;
    std::vector<int32_t> stored;       // row-major, rows*cols
    double rescale_slope = 1.0;        // HU per stored unit
    double rescale_intercept = 0.0;    // HU
    std::optional<std::pair<double, double>> pixel_spacing; // (row mm/px, col mm/px)
    std::string patient_id;
    std::string series_id;
    int instance_number = 0;
    std::vector<std::string> warnings; // defaulted/missing optional tags
};

// Slice in Hounsfield units.
struct HuImage {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;
};

struct WindowSpec {
    double center = -500.0;
    double width = 1600.0;

    void validate() const;
    double low() const { return center - width / 2.0; }
};

// Windowed slice, every value in [0,1].
struct NormImage {
    int rows = 0;
    int cols = 0;
    std::vector<float> values;
};

// hu = stored * slope + intercept, exactly
HuImage to_hounsfield(const RawSlice& slice);

// clamp((hu - (center - width/2)) / width, 0, 1); monotone in hu
NormImage window(const HuImage& img, const WindowSpec& spec);

// round(v*255), half away from zero
std::vector<uint8_t> quantize8(const NormImage& img);

} // namespace nodseg
