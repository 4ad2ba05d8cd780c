#pragma once

// Training protocol: Dice-loss training on nodule-bearing slices with
// best-on-validation checkpointing, then black-mask finetuning.

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "nodseg/adam.hpp"
#include "nodseg/augment.hpp"
#include "nodseg/loader.hpp"
#include "nodseg/manifest.hpp"
#include "nodseg/unet.hpp"

namespace nodseg {

struct TrainConfig {
    int epochs = 200;
    int batch_size = 12;
    AdamConfig adam{}; // lr defaults to 1e-4
    double dice_smooth = 1.0;
    uint64_t seed = 0;
    std::string checkpoint_dir = ".";
    double black_frac = 0.02; // finetune only
    int finetune_epochs = 10;
    int workers = 2;
    int queue_ratio = 8;
    bool augment = true;
    WindowSpec window{}; // for raw DICOM inputs

    void validate() const;
    LoaderConfig loader_config(bool training) const;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0;
    double val_loss = 0;
    double seconds = 0;
};

struct TrainHistory {
    std::vector<EpochRecord> rows;
    int best_epoch = -1;
    double best_val_loss = std::numeric_limits<double>::infinity();
};

struct TrainResult {
    TrainHistory history;
    std::string checkpoint_path; // best (train) or final (finetune)
};

// Invoked after every epoch; `improved` marks new validation-loss bests.
using EpochCallback = std::function<void(const EpochRecord&, bool improved)>;

// Trains in place; the best-on-validation checkpoint lands in
// cfg.checkpoint_dir/best.ckpt. Deterministic for a fixed seed.
TrainResult train(UNetF& model, const std::vector<ViewSample>& train_view,
                  const std::vector<ViewSample>& val_view, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

// Loads the checkpoint, rebuilds the training view with black_frac no-nodule
// samples, trains cfg.finetune_epochs with fresh optimizer state, and saves
// the final weights to cfg.checkpoint_dir/finetuned.ckpt.
TrainResult finetune(const std::string& checkpoint_path, const Manifest& manifest,
                     const TrainConfig& cfg, const EpochCallback& on_epoch = {});

// Mean dice loss of the model over one pass of the loader's view.
double validation_loss(UNetF& model, const std::vector<ViewSample>& view, const TrainConfig& cfg);

// epoch,train_loss,val_loss,seconds
void write_history_csv(const TrainHistory& history, const std::string& path);
// one JSON object per line: config, epoch and best events
void write_train_log(const TrainHistory& history, const TrainConfig& cfg, const std::string& path);

} // namespace nodseg
