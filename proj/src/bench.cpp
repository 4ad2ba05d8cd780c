#include "nodseg/bench.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <stdexcept>

#include "nodseg/dice.hpp"

namespace nodseg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs one full epoch, discarding batches.
EpochStats drain_epoch(Loader& loader, int epoch) {
    loader.start_epoch(epoch);
    while (loader.next_batch()) {
    }
    return loader.epoch_stats();
}

} // namespace

SweepResult sweep(const std::vector<ViewSample>& view, const std::vector<int>& workers_set,
                  const std::vector<int>& queue_ratio_set, int epochs_per_cell,
                  const LoaderConfig& base, double decode_delay_ms) {
    if (workers_set.empty() || queue_ratio_set.empty())
        throw std::invalid_argument("sweep: worker and queue-ratio grids must be nonempty");
    if (epochs_per_cell < 1) throw std::invalid_argument("sweep: epochs_per_cell must be >= 1");
    for (int w : workers_set)
        if (w < 1 || w > kMaxSweepWorkers)
            throw std::invalid_argument("sweep: workers must be in [1," +
                                        std::to_string(kMaxSweepWorkers) + "], got " +
                                        std::to_string(w));

    SweepResult result;
    for (int w : workers_set) {
        for (int q : queue_ratio_set) {
            LoaderConfig cfg = base;
            cfg.workers = w;
            cfg.queue_ratio = q;
            cfg.decode_delay_ms = decode_delay_ms;
            Loader loader(view, cfg);

            drain_epoch(loader, 0); // warmup, discarded
            std::vector<EpochStats> stats;
            for (int e = 0; e < epochs_per_cell; ++e) stats.push_back(drain_epoch(loader, e + 1));
            std::sort(stats.begin(), stats.end(),
                      [](const EpochStats& a, const EpochStats& b) {
                          return a.epoch_seconds < b.epoch_seconds;
                      });
            const EpochStats& median = stats[stats.size() / 2];

            SweepRow row;
            row.workers = w;
            row.queue_ratio = q;
            row.epoch_seconds = median.epoch_seconds;
            row.samples_per_sec = median.samples_per_sec;
            row.mean_wait_ms = median.mean_consumer_wait_ms;
            result.rows.push_back(row);
        }
    }
    for (size_t i = 0; i < result.rows.size(); ++i)
        if (result.rows[i].epoch_seconds < result.rows[result.best_index].epoch_seconds)
            result.best_index = i;
    return result;
}

TimingReport time_training(UNetF& model, const std::vector<ViewSample>& train_view,
                           const std::vector<ViewSample>& val_view, const TrainConfig& cfg,
                           int epochs) {
    cfg.validate();
    if (epochs < 1) throw std::invalid_argument("time_training: epochs must be >= 1");

    Loader train_loader(train_view, cfg.loader_config(true));
    Loader val_loader(val_view, cfg.loader_config(false));

    TimingReport report;
    report.config = "levels=" + std::to_string(model.cfg.levels) +
                    " base=" + std::to_string(model.cfg.base_channels) +
                    " batch=" + std::to_string(cfg.batch_size) +
                    " workers=" + std::to_string(cfg.workers);
    report.batch_size = cfg.batch_size;
    report.workers = cfg.workers;
    report.samples = train_view.size();

    double train_s = 0, train_val_s = 0;
    for (int e = 0; e < epochs; ++e) {
        const auto t0 = Clock::now();
        train_loader.start_epoch(e);
        while (auto batch = train_loader.next_batch()) {
            UNetTrace<float> trace;
            const TensorF probs = unet_forward(model, batch->images, &trace);
            const TensorF grad = dice_loss_backward(probs, batch->masks, cfg.dice_smooth);
            unet_backward(model, trace, grad);
            model.for_each_param([&](Parameter<float>& p) { adam_step(p, cfg.adam); });
        }
        const double t_train = seconds_since(t0);

        val_loader.start_epoch(e);
        while (auto batch = val_loader.next_batch())
            unet_forward(model, batch->images);
        train_s += t_train;
        train_val_s += seconds_since(t0);
    }
    report.train_epoch_seconds = train_s / epochs;
    report.train_val_epoch_seconds = train_val_s / epochs;
    return report;
}

TimingReport time_inference(UNetF& model, const std::vector<ViewSample>& view,
                            const LoaderConfig& cfg) {
    cfg.validate();
    TimingReport report;
    report.config = "levels=" + std::to_string(model.cfg.levels) +
                    " base=" + std::to_string(model.cfg.base_channels) +
                    " batch=" + std::to_string(cfg.batch_size);
    report.batch_size = cfg.batch_size;
    report.workers = cfg.workers;
    report.samples = view.size();

    // Decode once up front so only the forward pass is timed.
    LoaderConfig lc = cfg;
    lc.shuffle = false;
    lc.augment.reset();
    Loader loader(view, lc);
    std::vector<TensorF> batches;
    loader.start_epoch(0);
    while (auto batch = loader.next_batch()) batches.push_back(std::move(batch->images));

    size_t images = 0;
    for (const TensorF& b : batches) images += size_t(b.n());

    { // batch-of-1 path
        unet_forward(model, TensorF(1, batches[0].c(), batches[0].h(), batches[0].w())); // warmup
        const auto t0 = Clock::now();
        for (const TensorF& b : batches) {
            for (int n = 0; n < b.n(); ++n) {
                TensorF one(1, b.c(), b.h(), b.w());
                const size_t plane = size_t(b.c()) * size_t(b.h()) * size_t(b.w());
                std::copy(b.data.begin() + long(size_t(n) * plane),
                          b.data.begin() + long(size_t(n + 1) * plane), one.data.begin());
                unet_forward(model, one);
            }
        }
        report.infer_seconds_per_image_single = seconds_since(t0) / double(images);
    }
    { // batched path
        const auto t0 = Clock::now();
        for (const TensorF& b : batches) unet_forward(model, b);
        report.infer_seconds_per_image_batched = seconds_since(t0) / double(images);
    }
    return report;
}

void write_sweep_csv(const SweepResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("sweep: cannot open '" + path + "' for writing");
    out << "workers,queue_ratio,epoch_seconds,samples_per_sec,mean_wait_ms,best\n";
    for (size_t i = 0; i < result.rows.size(); ++i) {
        const SweepRow& r = result.rows[i];
        out << r.workers << "," << r.queue_ratio << "," << r.epoch_seconds << ","
            << r.samples_per_sec << "," << r.mean_wait_ms << ","
            << (i == result.best_index ? 1 : 0) << "\n";
    }
}

void write_sweep_plot_data(const SweepResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("sweep: cannot open '" + path + "' for writing");
    std::map<int, std::vector<const SweepRow*>> by_ratio;
    for (const SweepRow& r : result.rows) by_ratio[r.queue_ratio].push_back(&r);
    for (const auto& [ratio, rows] : by_ratio) {
        out << "# series queue_ratio=" << ratio << " (x=workers, y=epoch_seconds)\n";
        for (const SweepRow* r : rows) out << r->workers << " " << r->epoch_seconds << "\n";
        out << "\n";
    }
}

void write_timing_csv(const TimingReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("timing: cannot open '" + path + "' for writing");
    out << "config,train_epoch_seconds,train_val_epoch_seconds,"
           "infer_seconds_per_image_single,infer_seconds_per_image_batched,"
           "batch_size,workers,samples\n";
    out << report.config << "," << report.train_epoch_seconds << ","
        << report.train_val_epoch_seconds << "," << report.infer_seconds_per_image_single << ","
        << report.infer_seconds_per_image_batched << "," << report.batch_size << ","
        << report.workers << "," << report.samples << "\n";
}

} // namespace nodseg
