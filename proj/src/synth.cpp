#include "nodseg/synth.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "nodseg/dicom.hpp"
#include "nodseg/image.hpp"
#include "nodseg/png_io.hpp"
#include "nodseg/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace nodseg {

void CirclesConfig::validate() const {
    if (count < 1) throw std::invalid_argument("circles: count must be >= 1");
    if (size < 16 || size % 2 != 0)
        throw std::invalid_argument("circles: size must be even and >= 16");
    if (patients < 1 || patients > count)
        throw std::invalid_argument("circles: patients must be in [1, count]");
    if (frac_empty < 0 || frac_empty > 1)
        throw std::invalid_argument("circles: frac_empty must be in [0,1]");
    if (!(spacing_mm > 0)) throw std::invalid_argument("circles: spacing_mm must be > 0");
}

namespace {

std::string zero_pad(const char* prefix, int value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, value);
    return buf;
}

} // namespace

void generate_circles(const std::string& out_dir, const CirclesConfig& cfg) {
    cfg.validate();
    fs::create_directories(out_dir);

    // Seeded choice of which images stay empty.
    std::vector<int> order(size_t(cfg.count));
    for (int i = 0; i < cfg.count; ++i) order[size_t(i)] = i;
    Rng pick(mix_seed(cfg.seed, 0x656d7074));
    shuffle(order, pick);
    const int n_empty = int(std::lround(cfg.frac_empty * double(cfg.count)));
    std::vector<uint8_t> is_empty(size_t(cfg.count), 0);
    for (int k = 0; k < n_empty; ++k) is_empty[size_t(order[size_t(k)])] = 1;

    std::ofstream meta((fs::path(out_dir) / "metadata.jsonl").string(), std::ios::trunc);
    if (!meta) throw std::runtime_error("circles: cannot write metadata.jsonl");

    const int S = cfg.size;
    for (int i = 0; i < cfg.count; ++i) {
        const int patient = i * cfg.patients / cfg.count;
        const std::string patient_id = zero_pad("P", patient, 3);
        const std::string stem = zero_pad("s", i, 4);
        fs::create_directories(fs::path(out_dir) / patient_id);

        Rng rng(mix_seed(cfg.seed, uint64_t(i), 0x63697263));
        double cy = 0, cx = 0, r = 0;
        if (!is_empty[size_t(i)]) {
            r = rng.next_uniform(double(S) / 8.0, double(S) / 4.0);
            cy = rng.next_uniform(r + 2.0, double(S) - r - 2.0);
            cx = rng.next_uniform(r + 2.0, double(S) - r - 2.0);
        }
        // Bright disk on a darker smooth background, light pixel noise on both.
        const double disk_level = rng.next_uniform(0.75, 0.9);
        const double background_level = rng.next_uniform(0.05, 0.25);

        GrayImage mask;
        mask.rows = mask.cols = S;
        mask.data.assign(size_t(S) * size_t(S), 0);
        std::vector<double> values(size_t(S) * size_t(S)); // normalized [0,1]
        for (int y = 0; y < S; ++y) {
            for (int x = 0; x < S; ++x) {
                const size_t idx = size_t(y) * size_t(S) + size_t(x);
                const bool inside = !is_empty[size_t(i)] &&
                                    (y - cy) * (y - cy) + (x - cx) * (x - cx) <= r * r;
                const double level = inside ? disk_level : background_level;
                if (inside) mask.data[idx] = 255;
                values[idx] = level + rng.next_uniform(-0.02, 0.02);
            }
        }

        std::string image_rel;
        if (cfg.dicom) {
            // Invert the default window (center -500, width 1600) so windowed
            // DICOM slices reproduce the PNG intensities.
            RawSlice slice;
            slice.rows = slice.cols = S;
            slice.rescale_slope = 1.0;
            slice.rescale_intercept = -1024.0;
            slice.pixel_spacing = {cfg.spacing_mm, cfg.spacing_mm};
            slice.patient_id = patient_id;
            slice.series_id = "1.2.3." + std::to_string(patient);
            slice.instance_number = i;
            slice.stored.resize(values.size());
            for (size_t k = 0; k < values.size(); ++k) {
                const double hu = -1300.0 + values[k] * 1600.0;
                slice.stored[k] = int32_t(std::lround(hu - slice.rescale_intercept));
            }
            image_rel = patient_id + "/" + stem + ".dcm";
            write_binary_file((fs::path(out_dir) / image_rel).string(), write_dicom(slice));
        } else {
            GrayImage img;
            img.rows = img.cols = S;
            img.data.resize(values.size());
            for (size_t k = 0; k < values.size(); ++k) {
                const double v = std::min(1.0, std::max(0.0, values[k]));
                img.data[k] = uint8_t(std::lround(v * 255.0));
            }
            image_rel = patient_id + "/" + stem + ".png";
            write_png_gray8((fs::path(out_dir) / image_rel).string(), img);
        }
        if (!is_empty[size_t(i)]) {
            const std::string mask_rel = patient_id + "/" + stem + "_mask.png";
            write_png_gray8((fs::path(out_dir) / mask_rel).string(), mask);
        }

        json line;
        line["image"] = image_rel;
        line["spacing_mm"] = {cfg.spacing_mm, cfg.spacing_mm};
        line["patient_id"] = patient_id;
        meta << line.dump() << "\n";
    }
}

} // namespace nodseg
