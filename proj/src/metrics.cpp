#include "nodseg/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nodseg {

namespace {

void check_same_shape(const GrayImage& a, const GrayImage& b, const char* what) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw std::invalid_argument(std::string(what) + ": shape mismatch, " +
                                    std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                                    " vs " + std::to_string(b.rows) + "x" +
                                    std::to_string(b.cols));
}

} // namespace

GrayImage binarize(const TensorF& probs, int sample, double threshold) {
    if (threshold < 0 || threshold > 1)
        throw std::invalid_argument("binarize: threshold must be in [0,1]");
    if (sample < 0 || sample >= probs.n())
        throw std::invalid_argument("binarize: sample index out of range");
    GrayImage out;
    out.rows = probs.h();
    out.cols = probs.w();
    out.data.resize(size_t(out.rows) * size_t(out.cols));
    const float* p = probs.plane(sample, 0);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = p[i] >= float(threshold) ? 1 : 0;
    return out;
}

ConfusionCounts confusion(const GrayImage& pred, const GrayImage& gt) {
    check_same_shape(pred, gt, "confusion");
    ConfusionCounts c;
    for (size_t i = 0; i < pred.data.size(); ++i) {
        const bool p = pred.data[i] != 0;
        const bool g = gt.data[i] != 0;
        if (p && g)
            ++c.tp;
        else if (p && !g)
            ++c.fp;
        else if (!p && g)
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

double dice_score(const GrayImage& pred, const GrayImage& gt) {
    const ConfusionCounts c = confusion(pred, gt);
    const int64_t denom = 2 * c.tp + c.fp + c.fn;
    if (denom == 0) return 1.0; // both masks empty: correct silence
    return double(2 * c.tp) / double(denom);
}

double iou_score(const GrayImage& pred, const GrayImage& gt) {
    const ConfusionCounts c = confusion(pred, gt);
    const int64_t denom = c.tp + c.fp + c.fn;
    if (denom == 0) return 1.0;
    return double(c.tp) / double(denom);
}

RgbImage overlay(const GrayImage& pred, const GrayImage& gt, const GrayImage& base) {
    check_same_shape(pred, gt, "overlay");
    check_same_shape(pred, base, "overlay");
    RgbImage out;
    out.rows = pred.rows;
    out.cols = pred.cols;
    out.data.resize(size_t(out.rows) * size_t(out.cols) * 3);
    for (size_t i = 0; i < pred.data.size(); ++i) {
        const bool p = pred.data[i] != 0;
        const bool g = gt.data[i] != 0;
        uint8_t* px = &out.data[i * 3];
        if (p && g) { // true positive: yellow
            px[0] = 255;
            px[1] = 255;
            px[2] = 0;
        } else if (!p && g) { // false negative: red
            px[0] = 255;
            px[1] = 0;
            px[2] = 0;
        } else if (p && !g) { // false positive: green
            px[0] = 0;
            px[1] = 255;
            px[2] = 0;
        } else {
            px[0] = px[1] = px[2] = base.data[i];
        }
    }
    return out;
}

MetricsReport evaluate(const PredictFn& predict, const std::vector<ViewSample>& view,
                       const LoaderConfig& loader_cfg, double threshold) {
    if (threshold < 0 || threshold > 1)
        throw std::invalid_argument("evaluate: threshold must be in [0,1]");
    LoaderConfig lc = loader_cfg;
    lc.shuffle = false;
    lc.augment.reset();
    Loader loader(view, lc);

    MetricsReport report;
    report.threshold = threshold;
    loader.start_epoch(0);
    while (auto batch = loader.next_batch()) {
        const TensorF probs = predict(batch->images);
        if (!probs.same_shape(batch->masks))
            throw std::runtime_error("evaluate: prediction shape " + probs.shape_str() +
                                     " does not match masks " + batch->masks.shape_str());
        for (int n = 0; n < probs.n(); ++n) {
            const GrayImage pred = binarize(probs, n, threshold);
            const GrayImage gt = binarize(batch->masks, n, 0.5);
            ImageScore row;
            row.id = batch->sample_ids[size_t(n)];
            row.dice = dice_score(pred, gt);
            row.iou = iou_score(pred, gt);
            row.has_nodule = std::any_of(gt.data.begin(), gt.data.end(),
                                         [](uint8_t v) { return v != 0; });
            (row.has_nodule ? report.with_nodule : report.without_nodule) += 1;
            report.rows.push_back(std::move(row));
        }
    }

    double dsum = 0, isum = 0;
    for (const ImageScore& r : report.rows) {
        dsum += r.dice;
        isum += r.iou;
    }
    report.mean_dice = dsum / double(report.rows.size());
    report.mean_iou = isum / double(report.rows.size());
    return report;
}

void write_metrics_csv(const MetricsReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("metrics: cannot open '" + path + "' for writing");
    out << "# reference (published, full-scale test set): dice " << kReferenceDice << ", iou "
        << kReferenceIou << "\n";
    out << "id,dice,iou,has_nodule\n";
    for (const ImageScore& r : report.rows)
        out << r.id << "," << r.dice << "," << r.iou << "," << (r.has_nodule ? 1 : 0) << "\n";
    out << "# mean_dice=" << report.mean_dice << " mean_iou=" << report.mean_iou
        << " threshold=" << report.threshold << "\n";
}

std::string metrics_summary(const MetricsReport& report) {
    std::ostringstream os;
    os << "images evaluated: " << report.rows.size() << " (" << report.with_nodule
       << " with nodules, " << report.without_nodule << " without)\n";
    os << "threshold: " << report.threshold << "\n";
    os << "mean dice: " << report.mean_dice << "\n";
    os << "mean iou:  " << report.mean_iou << "\n";
    os << "reference (published, full-scale test set): dice " << kReferenceDice << ", iou "
       << kReferenceIou << "\n";
    return os.str();
}

} // namespace nodseg
