#pragma once

// Multi-worker prefetching dataloader. W producer threads decode, window and
// augment samples into a bounded reorder buffer; the consumer assembles
// batches in the shuffled order, so delivered batches are independent of
// worker count and scheduling.

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "nodseg/augment.hpp"
#include "nodseg/image.hpp"
#include "nodseg/manifest.hpp"
#include "nodseg/tensor.hpp"

namespace nodseg {

struct LoaderConfig {
    int batch_size = 12;
    int workers = 2;
    int queue_ratio = 8; // queue capacity = queue_ratio * batch_size samples
    uint64_t shuffle_seed = 0;
    bool shuffle = true;
    std::optional<AugmentPolicy> augment;
    WindowSpec window{}; // applied when decoding raw DICOM inputs
    double decode_delay_ms = 0.0; // synthetic per-sample latency for benchmarks

    void validate() const;
    size_t queue_capacity() const { return size_t(queue_ratio) * size_t(batch_size); }
};

struct Batch {
    TensorF images; // (N,1,H,W), values in [0,1]
    TensorF masks;  // (N,1,H,W), values exactly 0 or 1
    std::vector<std::string> sample_ids;
};

struct DecodedSample {
    NormImage image;
    GrayImage mask; // binarized to {0,1}; all zeros when the sample has no mask
};

using DecodeFn = std::function<DecodedSample(const ViewSample&)>;

// PNG images are mapped to [0,1] by /255; DICOM images are converted to HU
// and windowed. Missing masks decode as all-zero.
DecodedSample default_decode(const ViewSample& sample, const WindowSpec& window);

struct EpochStats {
    size_t samples = 0;
    size_t batches = 0;
    double epoch_seconds = 0;
    double samples_per_sec = 0;
    double mean_consumer_wait_ms = 0; // per batch
    double mean_queue_occupancy = 0;  // sampled at each producer push
    size_t max_queue_occupancy = 0;
    std::vector<double> worker_busy_fraction; // decode time / epoch wall time
};

class Loader {
public:
    Loader(std::vector<ViewSample> view, LoaderConfig cfg, DecodeFn decode = {});
    ~Loader();

    Loader(const Loader&) = delete;
    Loader& operator=(const Loader&) = delete;

    // The shuffled per-batch sample ids for an epoch, without any decoding.
    std::vector<std::vector<std::string>> epoch_plan(int epoch) const;

    void start_epoch(int epoch);

    // Blocks until the next batch is ready; empty at end of epoch. Throws the
    // first worker failure, naming the sample.
    std::optional<Batch> next_batch();

    // Stats for the most recently completed epoch.
    const EpochStats& epoch_stats() const;

    size_t size() const { return view_.size(); }
    size_t batches_per_epoch() const;

private:
    struct EpochState;

    std::vector<size_t> shuffled_order(int epoch) const;
    void worker_main(size_t worker_index);
    void finish_epoch();

    std::vector<ViewSample> view_;
    LoaderConfig cfg_;
    DecodeFn decode_;
    std::unique_ptr<EpochState> epoch_;
    std::vector<std::thread> threads_;
    EpochStats last_stats_;
    bool stats_valid_ = false;
};

} // namespace nodseg
