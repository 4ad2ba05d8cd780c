#pragma once

// Label-consistent geometric augmentation: horizontal/vertical flips and
// quarter-turn rotations, with the same sampled transform applied to an
// image and its mask. Rotations are restricted to 90-degree multiples so
// binary masks never need interpolation.

#include <array>
#include <stdexcept>
#include <vector>

#include "nodseg/image.hpp"
#include "nodseg/png_io.hpp"
#include "nodseg/rng.hpp"

namespace nodseg {

struct AugmentPolicy {
    double p_hflip = 0.5;
    double p_vflip = 0.5;
    // Allowed quarter-turn counts (counter-clockwise); index k = k*90 degrees.
    std::array<bool, 4> rotations{true, true, true, true};

    void validate() const {
        if (p_hflip < 0 || p_hflip > 1 || p_vflip < 0 || p_vflip > 1)
            throw std::invalid_argument("augment: flip probabilities must be in [0,1]");
        if (!(rotations[0] || rotations[1] || rotations[2] || rotations[3]))
            throw std::invalid_argument("augment: at least one rotation must be allowed");
    }

    static AugmentPolicy identity() {
        AugmentPolicy p;
        p.p_hflip = 0;
        p.p_vflip = 0;
        p.rotations = {true, false, false, false};
        return p;
    }
};

// One concrete draw from the policy; applied as hflip, then vflip, then rotation.
struct SampledTransform {
    bool hflip = false;
    bool vflip = false;
    int quarter_turns = 0;
};

template <class T>
void flip_horizontal(std::vector<T>& buf, int rows, int cols) {
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols / 2; ++c)
            std::swap(buf[size_t(r) * cols + c], buf[size_t(r) * cols + (cols - 1 - c)]);
}

template <class T>
void flip_vertical(std::vector<T>& buf, int rows, int cols) {
    for (int r = 0; r < rows / 2; ++r)
        for (int c = 0; c < cols; ++c)
            std::swap(buf[size_t(r) * cols + c], buf[size_t(rows - 1 - r) * cols + c]);
}

// Counter-clockwise quarter turn: out is cols x rows, out(i,j) = in(j, cols-1-i).
template <class T>
std::vector<T> rotate90_ccw(const std::vector<T>& buf, int rows, int cols) {
    std::vector<T> out(buf.size());
    for (int i = 0; i < cols; ++i)
        for (int j = 0; j < rows; ++j)
            out[size_t(i) * rows + j] = buf[size_t(j) * cols + (cols - 1 - i)];
    return out;
}

template <class T>
void apply_transform(SampledTransform t, std::vector<T>& buf, int& rows, int& cols) {
    if (t.hflip) flip_horizontal(buf, rows, cols);
    if (t.vflip) flip_vertical(buf, rows, cols);
    for (int k = 0; k < (t.quarter_turns & 3); ++k) {
        buf = rotate90_ccw(buf, rows, cols);
        std::swap(rows, cols);
    }
}

// Draw order is fixed (hflip, vflip, rotation) so a given rng state always
// yields the same transform.
inline SampledTransform sample_transform(const AugmentPolicy& policy, Rng& rng) {
    policy.validate();
    SampledTransform t;
    t.hflip = rng.next_double() < policy.p_hflip;
    t.vflip = rng.next_double() < policy.p_vflip;
    std::array<int, 4> allowed{};
    int n = 0;
    for (int k = 0; k < 4; ++k)
        if (policy.rotations[size_t(k)]) allowed[size_t(n++)] = k;
    t.quarter_turns = allowed[size_t(rng.next_below(uint64_t(n)))];
    return t;
}

inline SampledTransform augment_pair(NormImage& image, GrayImage& mask, Rng& rng,
                                     const AugmentPolicy& policy) {
    if (image.rows != mask.rows || image.cols != mask.cols)
        throw std::invalid_argument("augment: image is " + std::to_string(image.rows) + "x" +
                                    std::to_string(image.cols) + " but mask is " +
                                    std::to_string(mask.rows) + "x" + std::to_string(mask.cols));
    const SampledTransform t = sample_transform(policy, rng);
    apply_transform(t, image.values, image.rows, image.cols);
    apply_transform(t, mask.data, mask.rows, mask.cols);
    return t;
}

} // namespace nodseg
