#pragma once

// Synthetic circles dataset: bright random disks on noisy dark backgrounds,
// grouped into patients, with paired masks and a spacing sidecar. Exercises
// the whole pipeline without clinical data.

#include <cstdint>
#include <string>

namespace nodseg {

struct CirclesConfig {
    int count = 40;    // images
    int size = 64;     // square side in pixels
    int patients = 10; // images are split across patients in contiguous runs
    double frac_empty = 0.0; // fraction of images with no disk (and no mask file)
    uint64_t seed = 0;
    bool dicom = false; // write raw .dcm slices instead of windowed .png
    double spacing_mm = 1.0;

    void validate() const;
};

// Writes <out_dir>/P<k>/s<i>.png (or .dcm), paired s<i>_mask.png files for
// disk-bearing images, and metadata.jsonl.
void generate_circles(const std::string& out_dir, const CirclesConfig& cfg);

} // namespace nodseg
