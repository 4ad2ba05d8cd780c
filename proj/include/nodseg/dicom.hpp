#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nodseg/image.hpp"

namespace nodseg {

// Parses an uncompressed explicit-VR little-endian DICOM file. Compressed and
// implicit-VR transfer syntaxes are rejected, as is MONOCHROME1 photometric
// interpretation. Missing RescaleSlope/RescaleIntercept default to 1.0/0.0
// with a warning recorded on the returned slice.
RawSlice parse_dicom(const std::vector<uint8_t>& bytes);

// Minimal explicit-VR little-endian writer, used to materialize synthetic
// slices. Pixels are written as signed 16-bit.
std::vector<uint8_t> write_dicom(const RawSlice& slice);

std::vector<uint8_t> read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, const std::vector<uint8_t>& bytes);

} // namespace nodseg
