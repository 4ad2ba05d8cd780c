#pragma once

// Thresholding, Dice/IoU scoring, split-level evaluation and the
// overlay renderer (yellow = true positive, red = false negative,
// green = false positive, grayscale = true negative).

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nodseg/loader.hpp"
#include "nodseg/png_io.hpp"
#include "nodseg/tensor.hpp"

namespace nodseg {

struct ConfusionCounts {
    int64_t tp = 0;
    int64_t fp = 0;
    int64_t fn = 0;
    int64_t tn = 0;
};

// Plane `sample` of a (N,1,H,W) probability tensor, thresholded at p >= t.
GrayImage binarize(const TensorF& probs, int sample, double threshold = 0.5);

// Masks treat any nonzero pixel as foreground.
ConfusionCounts confusion(const GrayImage& pred, const GrayImage& gt);

// 2tp / (2tp + fp + fn); both masks empty -> 1.0
double dice_score(const GrayImage& pred, const GrayImage& gt);

// tp / (tp + fp + fn); both masks empty -> 1.0
double iou_score(const GrayImage& pred, const GrayImage& gt);

RgbImage overlay(const GrayImage& pred, const GrayImage& gt, const GrayImage& base);

struct ImageScore {
    std::string id;
    double dice = 0;
    double iou = 0;
    bool has_nodule = false;
};

struct MetricsReport {
    std::vector<ImageScore> rows;
    double mean_dice = 0;
    double mean_iou = 0;
    size_t with_nodule = 0;
    size_t without_nodule = 0;
    double threshold = 0.5;
};

// Published full-scale reference scores, reported in summaries for context;
// never an acceptance target at desk scale.
inline constexpr double kReferenceDice = 0.75;
inline constexpr double kReferenceIou = 0.73;

using PredictFn = std::function<TensorF(const TensorF&)>;

// Scores every sample of the view: decode (no shuffle, no augmentation),
// predict, binarize, per-image dice/iou, unweighted means. No-nodule images
// are included; empty-vs-empty scores 1.0.
MetricsReport evaluate(const PredictFn& predict, const std::vector<ViewSample>& view,
                       const LoaderConfig& loader_cfg, double threshold = 0.5);

// id,dice,iou,has_nodule with the reference scores in a leading comment
void write_metrics_csv(const MetricsReport& report, const std::string& path);

std::string metrics_summary(const MetricsReport& report);

} // namespace nodseg
