#include "nodseg/trainer.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "nodseg/dice.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace nodseg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Sample-weighted mean train loss over one epoch of gradient steps.
double train_epoch(UNetF& model, Loader& loader, int epoch, const TrainConfig& cfg) {
    loader.start_epoch(epoch);
    double loss_sum = 0;
    size_t samples = 0;
    int batch_index = 0;
    while (auto batch = loader.next_batch()) {
        UNetTrace<float> trace;
        const TensorF probs = unet_forward(model, batch->images, &trace);
        // Non-finite weights surface as non-finite probabilities, so check the
        // forward output as well as the loss before stepping the optimizer.
        if (!probs.all_finite())
            throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                     std::to_string(epoch) + ", batch " +
                                     std::to_string(batch_index));
        const double loss = dice_loss(probs, batch->masks, cfg.dice_smooth);
        if (!std::isfinite(loss))
            throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                     std::to_string(epoch) + ", batch " +
                                     std::to_string(batch_index));
        const TensorF grad = dice_loss_backward(probs, batch->masks, cfg.dice_smooth);
        unet_backward(model, trace, grad);
        model.for_each_param([&](Parameter<float>& p) { adam_step(p, cfg.adam); });

        loss_sum += loss * batch->images.n();
        samples += size_t(batch->images.n());
        ++batch_index;
    }
    return loss_sum / double(samples);
}

double eval_epoch(UNetF& model, Loader& loader, int epoch, const TrainConfig& cfg) {
    loader.start_epoch(epoch);
    double loss_sum = 0;
    size_t samples = 0;
    while (auto batch = loader.next_batch()) {
        const TensorF probs = unet_forward(model, batch->images);
        loss_sum += dice_loss(probs, batch->masks, cfg.dice_smooth) * batch->images.n();
        samples += size_t(batch->images.n());
    }
    return loss_sum / double(samples);
}

TrainResult run_training(UNetF& model, const std::vector<ViewSample>& train_view,
                         const std::vector<ViewSample>& val_view, const TrainConfig& cfg,
                         int epochs, bool keep_best, const std::string& filename,
                         const EpochCallback& on_epoch) {
    fs::create_directories(cfg.checkpoint_dir);
    const std::string ckpt_path = (fs::path(cfg.checkpoint_dir) / filename).string();

    Loader train_loader(train_view, cfg.loader_config(true));
    Loader val_loader(val_view, cfg.loader_config(false));

    TrainResult result;
    result.checkpoint_path = ckpt_path;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        const auto t0 = Clock::now();
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = train_epoch(model, train_loader, epoch, cfg);
        rec.val_loss = eval_epoch(model, val_loader, epoch, cfg);
        rec.seconds = seconds_since(t0);

        const bool improved = rec.val_loss < result.history.best_val_loss;
        if (improved) {
            result.history.best_val_loss = rec.val_loss;
            result.history.best_epoch = epoch;
            if (keep_best) save_checkpoint(model, ckpt_path);
        }
        result.history.rows.push_back(rec);
        if (on_epoch) on_epoch(rec, improved);
    }
    if (!keep_best) save_checkpoint(model, ckpt_path); // final weights
    return result;
}

} // namespace

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (!(dice_smooth > 0)) throw std::invalid_argument("train: dice_smooth must be > 0");
    if (black_frac < 0 || black_frac > 1)
        throw std::invalid_argument("train: black_frac must be in [0,1]");
    if (finetune_epochs < 1) throw std::invalid_argument("train: finetune_epochs must be >= 1");
    if (workers < 1) throw std::invalid_argument("train: workers must be >= 1");
    if (queue_ratio < 1) throw std::invalid_argument("train: queue_ratio must be >= 1");
    adam.validate();
    window.validate();
}

LoaderConfig TrainConfig::loader_config(bool training) const {
    LoaderConfig lc;
    lc.batch_size = batch_size;
    lc.workers = workers;
    lc.queue_ratio = queue_ratio;
    lc.shuffle_seed = seed;
    lc.shuffle = training;
    if (training && augment) lc.augment = AugmentPolicy{};
    lc.window = window;
    return lc;
}

TrainResult train(UNetF& model, const std::vector<ViewSample>& train_view,
                  const std::vector<ViewSample>& val_view, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
    cfg.validate();
    return run_training(model, train_view, val_view, cfg, cfg.epochs, /*keep_best=*/true,
                        "best.ckpt", on_epoch);
}

TrainResult finetune(const std::string& checkpoint_path, const Manifest& manifest,
                     const TrainConfig& cfg, const EpochCallback& on_epoch) {
    cfg.validate();
    if (!(cfg.black_frac > 0))
        throw std::invalid_argument("finetune: black_frac must be > 0");

    size_t no_nodule = 0;
    for (const SampleRecord& rec : manifest.samples)
        if (rec.split == Split::training && !rec.has_nodule) ++no_nodule;
    if (no_nodule == 0)
        throw std::runtime_error("finetune: training split has no nodule-free samples "
                                 "to draw black masks from");

    UNetF model = load_checkpoint(checkpoint_path);
    model.for_each_param([](Parameter<float>& p) { p.reset_optimizer_state(); });

    const auto ft_view = training_view(manifest, Split::training, cfg.black_frac, cfg.seed);
    const auto val_view = full_view(manifest, Split::validation);
    return run_training(model, ft_view, val_view, cfg, cfg.finetune_epochs, /*keep_best=*/false,
                        "finetuned.ckpt", on_epoch);
}

double validation_loss(UNetF& model, const std::vector<ViewSample>& view, const TrainConfig& cfg) {
    cfg.validate();
    Loader loader(view, cfg.loader_config(false));
    return eval_epoch(model, loader, 0, cfg);
}

void write_history_csv(const TrainHistory& history, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("history: cannot open '" + path + "' for writing");
    out << "epoch,train_loss,val_loss,seconds\n";
    for (const EpochRecord& r : history.rows)
        out << r.epoch << "," << r.train_loss << "," << r.val_loss << "," << r.seconds << "\n";
}

void write_train_log(const TrainHistory& history, const TrainConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("log: cannot open '" + path + "' for writing");
    json config;
    config["event"] = "config";
    config["epochs"] = cfg.epochs;
    config["batch_size"] = cfg.batch_size;
    config["lr"] = cfg.adam.lr;
    config["dice_smooth"] = cfg.dice_smooth;
    config["seed"] = cfg.seed;
    config["workers"] = cfg.workers;
    config["queue_ratio"] = cfg.queue_ratio;
    config["augment"] = cfg.augment;
    out << config.dump() << "\n";
    for (const EpochRecord& r : history.rows) {
        json e;
        e["event"] = "epoch";
        e["epoch"] = r.epoch;
        e["train_loss"] = r.train_loss;
        e["val_loss"] = r.val_loss;
        e["seconds"] = r.seconds;
        out << e.dump() << "\n";
    }
    json best;
    best["event"] = "best";
    best["epoch"] = history.best_epoch;
    best["val_loss"] = history.best_val_loss;
    out << best.dump() << "\n";
}

} // namespace nodseg
