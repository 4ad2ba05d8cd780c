#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nodseg/png_io.hpp"

namespace nodseg {

enum class Split { training = 0, validation = 1, test = 2, unassigned = 3 };

const char* split_name(Split s);
Split split_from_name(const std::string& name);

struct SampleRecord {
    std::string image_path; // relative to the manifest root
    std::string mask_path;  // relative; empty when the slice has no mask file
    std::string patient_id;
    bool has_nodule = false; // mask present and has >= 1 foreground pixel
    Split split = Split::unassigned;
    std::optional<std::pair<double, double>> spacing_mm; // (row, col)
};

struct Manifest {
    std::string name;
    std::string root;
    std::vector<SampleRecord> samples;
    std::map<std::string, std::vector<size_t>> patients; // patient -> sample indices

    std::string resolve(const std::string& rel) const;
    void rebuild_patient_index();
};

// Scans root for images (*.png, *.dcm) under per-patient subdirectories;
// masks share the image basename with the `_mask.png` suffix. Reads spacing
// and ids from a metadata.jsonl sidecar when one is present.
Manifest build_manifest(const std::string& root, const std::string& name = "");

struct SplitRatios {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;

    void validate() const;
};

// Patient-exclusive split: patients are shuffled by the seeded generator and
// partitioned floor(P*r_train) / floor(P*r_val) / remainder; every sample
// inherits its patient's split.
Manifest split_by_patient(Manifest m, SplitRatios ratios, uint64_t seed);

struct NoduleBins {
    int64_t under_3mm = 0;
    int64_t from_3_to_10mm = 0;
    int64_t from_10_to_30mm = 0;
    int64_t over_30mm = 0;

    int64_t total() const { return under_3mm + from_3_to_10mm + from_10_to_30mm + over_30mm; }
    void add(double diameter_mm);
};

struct NoduleStats {
    std::array<NoduleBins, 4> per_split; // indexed by Split
    NoduleBins total;
};

// One observation per 8-connected foreground component, binned by
// equivalent-circle diameter d = 2*spacing*sqrt(area/pi).
NoduleStats nodule_stats(const Manifest& m);

// A loader-ready sample reference; empty mask_path means "synthesize an
// all-zero mask".
struct ViewSample {
    std::string id;         // relative image path
    std::string image_path; // absolute
    std::string mask_path;  // absolute or empty
    std::optional<std::pair<double, double>> spacing_mm;
};

// All nodule-bearing samples of the split plus ceil(black_frac * count of
// no-nodule samples) seeded black-mask samples.
std::vector<ViewSample> training_view(const Manifest& m, Split split, double black_frac,
                                      uint64_t seed);

// Every sample of the split, with black masks synthesized for maskless slices.
std::vector<ViewSample> full_view(const Manifest& m, Split split);

void save_manifest(const Manifest& m, const std::string& path);
Manifest load_manifest(const std::string& path);

// 8-connected component areas of the nonzero pixels, in pixels.
std::vector<int64_t> connected_component_areas(const GrayImage& mask);

double equivalent_diameter_mm(int64_t area_px, double spacing_mm);

} // namespace nodseg
