// Acceptance runner: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion is self-contained and checked against the pinned
// tolerance and time budget; pass `acceptance 4 6` to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "nodseg/adam.hpp"
#include "nodseg/bench.hpp"
#include "nodseg/gradcheck.hpp"
#include "nodseg/image.hpp"
#include "nodseg/loader.hpp"
#include "nodseg/manifest.hpp"
#include "nodseg/metrics.hpp"
#include "nodseg/rng.hpp"
#include "nodseg/synth.hpp"
#include "nodseg/tensor.hpp"
#include "nodseg/trainer.hpp"
#include "nodseg/unet.hpp"

namespace fs = std::filesystem;
using namespace nodseg;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

void require(bool cond, const std::string& msg) {
    if (!cond) fail(msg);
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct TempDir {
    fs::path path;

    TempDir() {
        path = fs::temp_directory_path() /
               ("nodseg-acceptance-" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string sub(const std::string& name) const { return (path / name).string(); }
};

GrayImage random_mask(int rows, int cols, double density, Rng& rng) {
    GrayImage m;
    m.rows = rows;
    m.cols = cols;
    m.data.resize(size_t(rows) * size_t(cols));
    for (auto& px : m.data)
        px = rng.next_bool(density) ? uint8_t(1 + rng.next_below(255)) : 0;
    return m;
}

// ---------------------------------------------------------------------------
// 1. Dice/IoU agree exactly with a brute-force pixel-count oracle, and satisfy
//    iou = dice / (2 - dice) to < 1e-12, over 1000 seeded random mask pairs.
// ---------------------------------------------------------------------------
std::string criterion_metric_oracle() {
    Rng rng(mix_seed(0xd1ce, 1));
    double worst_identity = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        // densities include 0 so the both-empty convention is exercised
        const double da = trial % 20 == 0 ? 0.0 : rng.next_uniform(0.02, 0.9);
        const double db = trial % 20 == 1 ? 0.0 : rng.next_uniform(0.02, 0.9);
        const GrayImage a = random_mask(16, 16, da, rng);
        const GrayImage b = random_mask(16, 16, db, rng);

        int64_t tp = 0, fp = 0, fn = 0;
        for (size_t i = 0; i < a.data.size(); ++i) {
            const bool pa = a.data[i] != 0, pb = b.data[i] != 0;
            tp += pa && pb;
            fp += pa && !pb;
            fn += !pa && pb;
        }
        const double oracle_dice = 2 * tp + fp + fn == 0
                                       ? 1.0
                                       : double(2 * tp) / double(2 * tp + fp + fn);
        const double oracle_iou =
            tp + fp + fn == 0 ? 1.0 : double(tp) / double(tp + fp + fn);

        const double dice = dice_score(a, b);
        const double iou = iou_score(a, b);
        if (dice != oracle_dice)
            fail("pair " + std::to_string(trial) + ": dice " + num(dice) +
                 " != oracle " + num(oracle_dice));
        if (iou != oracle_iou)
            fail("pair " + std::to_string(trial) + ": iou " + num(iou) +
                 " != oracle " + num(oracle_iou));
        worst_identity = std::max(worst_identity, std::abs(iou - dice / (2.0 - dice)));
    }
    require(worst_identity < 1e-12,
            "identity |iou - dice/(2-dice)| = " + num(worst_identity) + " >= 1e-12");
    return "1000 pairs exact, identity max err " + num(worst_identity);
}

// ---------------------------------------------------------------------------
// 2. Windowing matches the closed form within 1 ulp on every integer HU in
//    [-2048, 3071]; -1300 -> 0, -500 -> 0.5, 300 -> 1 exactly; monotone.
// ---------------------------------------------------------------------------
std::string criterion_windowing() {
    const WindowSpec spec{-500.0, 1600.0};
    HuImage img;
    img.rows = 1;
    img.cols = 3071 - (-2048) + 1;
    img.values.resize(size_t(img.cols));
    for (int hu = -2048; hu <= 3071; ++hu) img.values[size_t(hu + 2048)] = double(hu);

    const NormImage out = window(img, spec);
    auto within_one_ulp = [](float a, float e) {
        return a == e || a == std::nextafter(e, std::numeric_limits<float>::infinity()) ||
               a == std::nextafter(e, -std::numeric_limits<float>::infinity());
    };
    for (int hu = -2048; hu <= 3071; ++hu) {
        const float got = out.values[size_t(hu + 2048)];
        const float expect =
            float(std::clamp((double(hu) - spec.low()) / spec.width, 0.0, 1.0));
        if (!within_one_ulp(got, expect))
            fail("hu " + std::to_string(hu) + ": " + num(got) + " vs closed form " +
                 num(expect) + " differs by more than 1 ulp");
        if (hu > -2048 && got < out.values[size_t(hu + 2047)])
            fail("not monotone at hu " + std::to_string(hu));
    }
    require(out.values[2048 - 1300] == 0.0f, "-1300 HU must map to exactly 0");
    require(out.values[2048 - 500] == 0.5f, "-500 HU must map to exactly 0.5");
    require(out.values[2048 + 300] == 1.0f, "300 HU must map to exactly 1");
    return "5120 HU values within 1 ulp, anchors exact, monotone";
}

// ---------------------------------------------------------------------------
// 3. 64-bit central-difference gradient suite: every layer < 1e-6 max relative
//    error, the end-to-end tiny network < 1e-5.
// ---------------------------------------------------------------------------
std::string criterion_gradients() {
    const auto entries = run_gradient_suite(0x5eed);
    require(!entries.empty(), "gradient suite returned no entries");
    double worst = 0.0;
    std::string worst_name;
    for (const auto& e : entries) {
        if (!e.ok)
            fail(e.name + ": max rel err " + num(e.max_rel_err) + " >= tol " + num(e.tol));
        if (e.max_rel_err > worst) {
            worst = e.max_rel_err;
            worst_name = e.name;
        }
    }
    return std::to_string(entries.size()) + " checks ok, worst " + worst_name + " at " +
           num(worst);
}

// ---------------------------------------------------------------------------
// 4. Desk-scale overfit: 40 synthetic 64x64 circle images, levels 3 / base 8,
//    50 epochs at lr 1e-4, batch 8 -> train dice >= 0.9, validation >= 0.8.
// ---------------------------------------------------------------------------
std::string criterion_overfit() {
    TempDir tmp;
    CirclesConfig cc;
    cc.count = 40;
    cc.size = 64;
    cc.patients = 20;
    cc.frac_empty = 0.0;
    cc.seed = 7;
    generate_circles(tmp.sub("circles"), cc);

    Manifest m = build_manifest(tmp.sub("circles"), "circles");
    m = split_by_patient(std::move(m), SplitRatios{0.85, 0.1, 0.05}, 7);
    const auto train_view = training_view(m, Split::training, 0.0, 7);
    const auto val_view = full_view(m, Split::validation);
    require(!train_view.empty() && !val_view.empty(), "empty training or validation view");

    UNetF model = build_unet<float>(UNetConfig{3, 8, 1, 1}, 7);
    TrainConfig tc;
    tc.epochs = 50;
    tc.batch_size = 8;
    tc.adam.lr = 1e-4;
    tc.seed = 7;
    tc.checkpoint_dir = tmp.sub("");
    tc.workers = 2;
    tc.augment = false; // the targets measure memorization, not generalization
    const TrainResult result = train(model, train_view, val_view, tc);

    UNetF best = load_checkpoint(result.checkpoint_path);
    const auto predict = [&best](const TensorF& x) { return unet_forward(best, x); };
    LoaderConfig lc;
    lc.batch_size = 8;
    lc.workers = 2;
    const MetricsReport on_train = evaluate(predict, train_view, lc);
    const MetricsReport on_val = evaluate(predict, val_view, lc);

    require(on_train.mean_dice >= 0.9,
            "train dice " + num(on_train.mean_dice) + " < 0.9");
    require(on_val.mean_dice >= 0.8,
            "validation dice " + num(on_val.mean_dice) + " < 0.8");
    return "train dice " + num(on_train.mean_dice) + ", validation dice " +
           num(on_val.mean_dice) + " (reference full-scale: dice " + num(kReferenceDice) +
           ", iou " + num(kReferenceIou) + ")";
}

// ---------------------------------------------------------------------------
// 5. Loader contract over workers {1,2,4} x queue_ratio {2,8}: exactly-once
//    delivery, bounded queue occupancy, batches bitwise independent of the
//    worker count.
// ---------------------------------------------------------------------------
std::string criterion_loader_contract() {
    const int kSamples = 37, kBatch = 5;
    std::vector<ViewSample> view(static_cast<size_t>(kSamples));
    for (int i = 0; i < kSamples; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "a%02d", i);
        view[size_t(i)].id = buf;
        view[size_t(i)].image_path = buf;
    }
    // Deterministic content keyed on the id; wall-clock jitter provokes
    // out-of-order completion without affecting the decoded bytes.
    const DecodeFn decode = [](const ViewSample& s) {
        const int idx = std::stoi(s.id.substr(1));
        std::this_thread::sleep_for(std::chrono::microseconds(100 + (idx * 131) % 500));
        DecodedSample d;
        d.image.rows = d.image.cols = 8;
        d.image.values.resize(64);
        d.mask.rows = d.mask.cols = 8;
        d.mask.data.resize(64);
        for (int p = 0; p < 64; ++p) {
            d.image.values[size_t(p)] = float((idx * 31 + p * 7) % 256) / 255.0f;
            d.mask.data[size_t(p)] = (idx + p) % 3 == 0 ? 1 : 0;
        }
        return d;
    };

    struct Run {
        std::vector<std::string> ids;
        std::vector<float> images, masks;
    };
    const auto run_epoch = [&](int workers, int ratio, int epoch) {
        LoaderConfig cfg;
        cfg.batch_size = kBatch;
        cfg.workers = workers;
        cfg.queue_ratio = ratio;
        cfg.shuffle_seed = 99;
        cfg.augment = AugmentPolicy{};
        Loader loader(view, cfg, decode);
        loader.start_epoch(epoch);
        Run r;
        while (auto b = loader.next_batch()) {
            r.ids.insert(r.ids.end(), b->sample_ids.begin(), b->sample_ids.end());
            r.images.insert(r.images.end(), b->images.data.begin(), b->images.data.end());
            r.masks.insert(r.masks.end(), b->masks.data.begin(), b->masks.data.end());
        }
        const size_t cap = cfg.queue_capacity();
        require(loader.epoch_stats().max_queue_occupancy <= cap,
                "workers=" + std::to_string(workers) + " ratio=" + std::to_string(ratio) +
                    ": occupancy " + std::to_string(loader.epoch_stats().max_queue_occupancy) +
                    " > capacity " + std::to_string(cap));
        return r;
    };

    for (int epoch : {0, 1}) {
        std::vector<Run> runs;
        for (int ratio : {2, 8})
            for (int workers : {1, 2, 4}) runs.push_back(run_epoch(workers, ratio, epoch));
        for (const Run& r : runs) {
            std::set<std::string> seen(r.ids.begin(), r.ids.end());
            require(r.ids.size() == size_t(kSamples) && seen.size() == size_t(kSamples),
                    "epoch must deliver each sample exactly once");
        }
        for (size_t i = 1; i < runs.size(); ++i) {
            require(runs[i].ids == runs[0].ids, "delivery order depends on worker count");
            require(runs[i].images.size() == runs[0].images.size() &&
                        std::memcmp(runs[i].images.data(), runs[0].images.data(),
                                    runs[0].images.size() * sizeof(float)) == 0,
                    "image bytes depend on worker count");
            require(runs[i].masks.size() == runs[0].masks.size() &&
                        std::memcmp(runs[i].masks.data(), runs[0].masks.data(),
                                    runs[0].masks.size() * sizeof(float)) == 0,
                    "mask bytes depend on worker count");
        }
    }
    return "6 configs x 2 epochs: exactly-once, occupancy bounded, bitwise equal";
}

// ---------------------------------------------------------------------------
// 6. Throughput: with a 5 ms synthetic decode delay, 4 workers give >= 2x the
//    samples/s of 1 worker (median of 3 epochs), and no cell exceeds the
//    workers / delay bound.
// ---------------------------------------------------------------------------
std::string criterion_throughput() {
    TempDir tmp;
    CirclesConfig cc;
    cc.count = 96;
    cc.size = 16;
    cc.patients = 4;
    cc.seed = 3;
    generate_circles(tmp.sub("circles"), cc);
    Manifest m = build_manifest(tmp.sub("circles"), "circles");
    for (auto& s : m.samples) s.split = Split::test;
    const auto view = full_view(m, Split::test);

    const double delay_ms = 5.0;
    LoaderConfig base;
    base.batch_size = 8;
    const SweepResult result = sweep(view, {1, 4}, {8}, 3, base, delay_ms);

    const SweepRow* one = nullptr;
    const SweepRow* four = nullptr;
    for (const SweepRow& r : result.rows) {
        if (r.workers == 1) one = &r;
        if (r.workers == 4) four = &r;
        const double bound = double(r.workers) / (delay_ms / 1000.0);
        require(r.samples_per_sec <= bound * 1.01,
                "workers=" + std::to_string(r.workers) + ": " + num(r.samples_per_sec) +
                    " samples/s exceeds the " + num(bound) + " bound");
    }
    require(one && four, "sweep missing a workers cell");
    require(four->samples_per_sec >= 2.0 * one->samples_per_sec,
            "samples/s scaled only " + num(four->samples_per_sec / one->samples_per_sec) +
                "x from 1 to 4 workers (need >= 2x)");
    return num(one->samples_per_sec) + " -> " + num(four->samples_per_sec) +
           " samples/s (" + num(four->samples_per_sec / one->samples_per_sec) +
           "x), under the W/D bound";
}

// ---------------------------------------------------------------------------
// 7. 623 patients at 0.8/0.1/0.1 split 498/62/63, and the split is
//    patient-exclusive for 100 random seeds.
// ---------------------------------------------------------------------------
std::string criterion_split() {
    Manifest m;
    m.name = "synthetic";
    for (int p = 0; p < 623; ++p) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "P%03d", p);
        for (int s = 0; s < 2; ++s) {
            SampleRecord rec;
            rec.patient_id = buf;
            rec.image_path = std::string(buf) + "/s" + std::to_string(s) + ".png";
            m.samples.push_back(std::move(rec));
        }
    }
    m.rebuild_patient_index();

    Rng seed_rng(0x5eed5);
    for (int trial = 0; trial < 100; ++trial) {
        const uint64_t seed = seed_rng.next_u64();
        const Manifest split = split_by_patient(m, SplitRatios{0.8, 0.1, 0.1}, seed);
        std::map<std::string, Split> assigned;
        for (const SampleRecord& s : split.samples) {
            auto [it, inserted] = assigned.emplace(s.patient_id, s.split);
            if (!inserted && it->second != s.split)
                fail("seed " + std::to_string(seed) + ": patient " + s.patient_id +
                     " spans two splits");
        }
        std::array<int, 4> counts{};
        for (const auto& [_, sp] : assigned) counts[size_t(sp)] += 1;
        if (counts[0] != 498 || counts[1] != 62 || counts[2] != 63)
            fail("seed " + std::to_string(seed) + ": patient counts " +
                 std::to_string(counts[0]) + "/" + std::to_string(counts[1]) + "/" +
                 std::to_string(counts[2]) + " != 498/62/63");
    }
    return "498/62/63 patients and exclusivity across 100 seeds";
}

// ---------------------------------------------------------------------------
// 8. Architecture: (1,1,512,512) at levels 5 -> same-shape probabilities in
//    (0,1); channels double per level with a base*2^4 bottleneck; a 100x100
//    input is rejected.
// ---------------------------------------------------------------------------
std::string criterion_architecture() {
    const UNetConfig cfg{5, 8, 1, 1};
    UNetF net = build_unet<float>(cfg, 11);

    for (int level = 0; level < cfg.levels; ++level) {
        const int expect = cfg.base_channels << level;
        require(net.enc2[size_t(level)].w.value.n() == expect,
                "level " + std::to_string(level) + " has " +
                    std::to_string(net.enc2[size_t(level)].w.value.n()) +
                    " channels, expected " + std::to_string(expect));
    }
    require(net.enc2[4].w.value.n() == cfg.base_channels * 16,
            "bottleneck must carry base*2^4 channels");

    TensorF x(1, 1, 512, 512);
    for (size_t i = 0; i < x.data.size(); ++i)
        x.data[i] = float((i * 2654435761u) % 1000) / 1000.0f;
    const TensorF probs = unet_forward(net, x);
    require(probs.n() == 1 && probs.c() == 1 && probs.h() == 512 && probs.w() == 512,
            "output shape " + probs.shape_str() + " != (1,1,512,512)");
    for (float v : probs.data)
        if (!(v > 0.0f && v < 1.0f)) fail("probability " + num(v) + " outside (0,1)");

    TensorF bad(1, 1, 100, 100);
    try {
        unet_forward(net, bad);
        fail("100x100 input was not rejected");
    } catch (const std::invalid_argument& e) {
        require(std::string(e.what()).find("divisible") != std::string::npos,
                std::string("rejection must name the divisibility rule, got: ") + e.what());
    }
    return "512->512 probabilities in (0,1), channels 8..128, 100x100 rejected";
}

// ---------------------------------------------------------------------------
// 9. Adam first step with a constant gradient matches -lr*g/(|g|+eps) to
//    < 1e-10 in 64-bit; lr = 0 leaves parameters untouched.
// ---------------------------------------------------------------------------
std::string criterion_adam() {
    const double grads[] = {1.7e-3, -2.4, 5.0, 1e-9, 0.0, -3.25e4};
    TensorD init(1, 1, 2, 3);
    const double values[] = {0.25, -1.5, 3.0, 0.0, -0.75, 10.0};
    std::copy(std::begin(values), std::end(values), init.data.begin());

    AdamConfig cfg; // lr 1e-4, beta 0.9/0.999, eps 1e-8
    Parameter<double> p("w", init);
    std::copy(std::begin(grads), std::end(grads), p.grad.data.begin());
    adam_step(p, cfg);

    double worst = 0.0;
    for (size_t i = 0; i < p.value.data.size(); ++i) {
        const double g = grads[i];
        const double expect = values[i] - cfg.lr * g / (std::abs(g) + cfg.eps);
        worst = std::max(worst, std::abs(p.value.data[i] - expect));
    }
    require(worst < 1e-10, "first-step update off closed form by " + num(worst));

    Parameter<double> frozen("w", init);
    std::copy(std::begin(grads), std::end(grads), frozen.grad.data.begin());
    AdamConfig zero = cfg;
    zero.lr = 0.0;
    adam_step(frozen, zero);
    require(std::memcmp(frozen.value.data.data(), init.data.data(),
                        init.data.size() * sizeof(double)) == 0,
            "lr = 0 must leave parameters bitwise untouched");
    return "closed-form match within " + num(worst) + ", lr=0 is a no-op";
}

// ---------------------------------------------------------------------------
// 10. Overlay color counts equal the confusion counts on 100 random pairs;
//     red marks false negatives.
// ---------------------------------------------------------------------------
std::string criterion_overlay() {
    Rng rng(mix_seed(0x0ce1, 2));
    for (int trial = 0; trial < 100; ++trial) {
        const int rows = 1 + int(rng.next_below(12));
        const int cols = 1 + int(rng.next_below(12));
        const GrayImage pred = random_mask(rows, cols, rng.next_uniform(0.0, 1.0), rng);
        const GrayImage gt = random_mask(rows, cols, rng.next_uniform(0.0, 1.0), rng);
        GrayImage base;
        base.rows = rows;
        base.cols = cols;
        base.data.resize(size_t(rows) * size_t(cols));
        for (auto& px : base.data) px = uint8_t(rng.next_below(256));

        const RgbImage img = overlay(pred, gt, base);
        int64_t yellow = 0, red = 0, green = 0, gray = 0;
        for (size_t i = 0; i < pred.data.size(); ++i) {
            const uint8_t r = img.data[i * 3], g = img.data[i * 3 + 1], b = img.data[i * 3 + 2];
            if (r == 255 && g == 255 && b == 0)
                ++yellow;
            else if (r == 255 && g == 0 && b == 0)
                ++red;
            else if (r == 0 && g == 255 && b == 0)
                ++green;
            else if (r == g && g == b && r == base.data[i])
                ++gray;
            else
                fail("pair " + std::to_string(trial) + ": unexpected overlay pixel");
        }
        const ConfusionCounts c = confusion(pred, gt);
        if (yellow != c.tp || red != c.fn || green != c.fp || gray != c.tn)
            fail("pair " + std::to_string(trial) + ": colors " + std::to_string(yellow) +
                 "/" + std::to_string(red) + "/" + std::to_string(green) +
                 " != confusion tp/fn/fp " + std::to_string(c.tp) + "/" +
                 std::to_string(c.fn) + "/" + std::to_string(c.fp));
    }
    return "100 pairs: yellow=tp, red=fn, green=fp exactly";
}

// ---------------------------------------------------------------------------
// 11. Checkpoint save -> load reproduces forward outputs bitwise; a corrupted
//     checksum is rejected.
// ---------------------------------------------------------------------------
std::string criterion_checkpoint() {
    TempDir tmp;
    UNetF net = build_unet<float>(UNetConfig{3, 4, 1, 1}, 77);
    Rng rng(123);
    const TensorF x = TensorF::uniform(2, 1, 16, 16, 0.0f, 1.0f, rng);
    const TensorF before = unet_forward(net, x);

    const std::string path = tmp.sub("model.ckpt");
    save_checkpoint(net, path);
    UNetF loaded = load_checkpoint(path);
    const TensorF after = unet_forward(loaded, x);
    require(before.same_shape(after) &&
                std::memcmp(before.data.data(), after.data.data(),
                            before.data.size() * sizeof(float)) == 0,
            "reloaded model's forward outputs are not bitwise identical");

    std::ifstream in(path, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    in.close();
    bytes[bytes.size() / 2] ^= 0x40;
    std::ofstream out(tmp.sub("corrupt.ckpt"), std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), std::streamsize(bytes.size()));
    out.close();
    try {
        load_checkpoint(tmp.sub("corrupt.ckpt"));
        fail("corrupted checkpoint was accepted");
    } catch (const std::runtime_error& e) {
        require(std::string(e.what()).find("checksum") != std::string::npos,
                std::string("corruption must be reported as a checksum error, got: ") +
                    e.what());
    }
    return "forward bitwise identical after reload, corruption rejected";
}

struct Criterion {
    int id;
    const char* title;
    double limit_seconds; // 0 = no budget stated
    std::function<std::string()> fn;
};

} // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    const std::vector<Criterion> criteria = {
        {1, "metric oracle equivalence", 5, criterion_metric_oracle},
        {2, "windowing exactness", 1, criterion_windowing},
        {3, "gradient suite", 60, criterion_gradients},
        {4, "desk-scale overfit", 300, criterion_overfit},
        {5, "loader contract", 30, criterion_loader_contract},
        {6, "throughput scaling", 120, criterion_throughput},
        {7, "split reproduction", 5, criterion_split},
        {8, "architecture shape", 60, criterion_architecture},
        {9, "adam closed form", 0, criterion_adam},
        {10, "overlay/confusion consistency", 0, criterion_overlay},
        {11, "checkpoint round-trip", 0, criterion_checkpoint},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        std::string verdict, detail;
        try {
            detail = c.fn();
            verdict = "PASS";
        } catch (const std::exception& e) {
            detail = e.what();
            verdict = "FAIL";
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (verdict == "PASS" && c.limit_seconds > 0 && seconds > c.limit_seconds) {
            verdict = "FAIL";
            detail = "exceeded the " + num(c.limit_seconds) + "s budget";
        }
        if (verdict == "FAIL") ++failures;
        std::printf("[%s] %2d %-30s %s (%.2fs)\n", verdict.c_str(), c.id, c.title,
                    detail.c_str(), seconds);
        std::fflush(stdout);
    }
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
