#pragma once

// Loader grid sweep and training/inference timing. Absolute durations are
// hardware-bound; the sweep's synthetic decode delay makes the worker-scaling
// property portable.

#include <string>
#include <vector>

#include "nodseg/loader.hpp"
#include "nodseg/trainer.hpp"
#include "nodseg/unet.hpp"

namespace nodseg {

struct SweepRow {
    int workers = 0;
    int queue_ratio = 0;
    double epoch_seconds = 0; // median of the measured epochs
    double samples_per_sec = 0;
    double mean_wait_ms = 0; // consumer wait per batch in the median epoch
};

struct SweepResult {
    std::vector<SweepRow> rows;
    size_t best_index = 0; // row with minimum epoch_seconds

    const SweepRow& best() const { return rows.at(best_index); }
};

inline constexpr int kMaxSweepWorkers = 64;

// For every (workers, queue_ratio) cell: one warmup epoch, then
// epochs_per_cell measured epochs of full loader traversal with a no-op
// consumer; the cell reports the median epoch. decode_delay_ms > 0 injects a
// fixed synthetic per-sample latency.
SweepResult sweep(const std::vector<ViewSample>& view, const std::vector<int>& workers_set,
                  const std::vector<int>& queue_ratio_set, int epochs_per_cell,
                  const LoaderConfig& base, double decode_delay_ms = 0.0);

struct TimingReport {
    std::string config; // human-readable model/loader description
    double train_epoch_seconds = 0;     // gradient steps only
    double train_val_epoch_seconds = 0; // gradient steps plus a validation pass
    double infer_seconds_per_image_single = 0; // batch of 1
    double infer_seconds_per_image_batched = 0;
    int batch_size = 0;
    int workers = 0;
    size_t samples = 0;
};

// Mean wall-clock over `epochs` training epochs, reported with and without
// the validation pass. Mutates the model (real gradient steps).
TimingReport time_training(UNetF& model, const std::vector<ViewSample>& train_view,
                           const std::vector<ViewSample>& val_view, const TrainConfig& cfg,
                           int epochs);

// Mean forward seconds per image at batch 1 and at cfg.batch_size.
TimingReport time_inference(UNetF& model, const std::vector<ViewSample>& view,
                            const LoaderConfig& cfg);

void write_sweep_csv(const SweepResult& result, const std::string& path);
// x = workers, one "y" series per queue ratio, for external plotting
void write_sweep_plot_data(const SweepResult& result, const std::string& path);
void write_timing_csv(const TimingReport& report, const std::string& path);

} // namespace nodseg
