// nodseg: lung-nodule CT segmentation pipeline.
//
// Subcommands cover the full workflow: DICOM ingestion with Hounsfield
// windowing, manifest construction, patient-exclusive splitting, nodule size
// stats, U-Net training and black-mask finetuning, evaluation, overlay
// rendering, loader benchmarking, gradient checking, and synthetic data
// generation.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage/validation error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nodseg/bench.hpp"
#include "nodseg/dicom.hpp"
#include "nodseg/gradcheck.hpp"
#include "nodseg/image.hpp"
#include "nodseg/loader.hpp"
#include "nodseg/manifest.hpp"
#include "nodseg/metrics.hpp"
#include "nodseg/png_io.hpp"
#include "nodseg/synth.hpp"
#include "nodseg/trainer.hpp"
#include "nodseg/unet.hpp"

namespace fs = std::filesystem;
using namespace nodseg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

void log_line(const std::string& msg) { std::cerr << "[nodseg] " << msg << "\n"; }

// The effective configuration is always echoed so runs are auditable.
void echo_config(const std::string& subcommand,
                 const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ostringstream os;
    os << "config " << subcommand;
    for (const auto& [k, v] : kv) os << " " << k << "=" << v;
    log_line(os.str());
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::vector<int> parse_int_list(const std::string& csv, const char* what) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stoi(tok));
    if (out.empty())
        throw std::invalid_argument(std::string(what) + ": expected a comma-separated int list");
    return out;
}

SplitRatios parse_ratios(const std::string& csv) {
    std::vector<double> vals;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) vals.push_back(std::stod(tok));
    if (vals.size() != 3)
        throw std::invalid_argument("--ratios: expected three comma-separated values");
    SplitRatios r{vals[0], vals[1], vals[2]};
    r.validate();
    return r;
}

int cmd_ingest(const std::string& in_dir, const std::string& out_dir, double center, double width) {
    WindowSpec spec{center, width};
    spec.validate();
    echo_config("ingest", {{"in", in_dir},
                           {"out", out_dir},
                           {"window_center", fmt(center)},
                           {"window_width", fmt(width)}});

    if (!fs::is_directory(in_dir))
        throw std::runtime_error("ingest: '" + in_dir + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(in_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".dcm")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("ingest: no samples found under '" + in_dir + "'");

    fs::create_directories(out_dir);
    std::ofstream meta((fs::path(out_dir) / "metadata.jsonl").string(), std::ios::trunc);
    size_t warned = 0;
    for (const fs::path& file : files) {
        const RawSlice slice = parse_dicom(read_binary_file(file.string()));
        for (const std::string& w : slice.warnings) {
            log_line("warning: " + file.filename().string() + ": " + w);
            ++warned;
        }
        const NormImage norm = window(to_hounsfield(slice), spec);
        GrayImage img;
        img.rows = norm.rows;
        img.cols = norm.cols;
        img.data = quantize8(norm);

        const std::string patient = slice.patient_id.empty() ? "unknown" : slice.patient_id;
        const fs::path rel = fs::path(patient) / (file.stem().string() + ".png");
        fs::create_directories(fs::path(out_dir) / patient);
        write_png_gray8((fs::path(out_dir) / rel).string(), img);

        // keep the mask alongside if one ships next to the source slice
        const fs::path src_mask = file.parent_path() / (file.stem().string() + "_mask.png");
        if (fs::exists(src_mask))
            fs::copy_file(src_mask, fs::path(out_dir) / patient / src_mask.filename(),
                          fs::copy_options::overwrite_existing);

        meta << "{\"image\": \"" << rel.generic_string() << "\"";
        if (slice.pixel_spacing)
            meta << ", \"spacing_mm\": [" << slice.pixel_spacing->first << ", "
                 << slice.pixel_spacing->second << "]";
        meta << ", \"patient_id\": \"" << patient << "\"}\n";
    }
    log_line("ingested " + std::to_string(files.size()) + " slices (" + std::to_string(warned) +
             " warnings) into " + out_dir);
    return kExitOk;
}

int cmd_manifest(const std::string& root, const std::string& name, const std::string& out) {
    echo_config("manifest", {{"root", root}, {"name", name}, {"out", out}});
    const Manifest m = build_manifest(root, name);
    save_manifest(m, out);
    size_t with_nodule = 0;
    for (const auto& s : m.samples) with_nodule += s.has_nodule ? 1 : 0;
    log_line("manifest '" + m.name + "': " + std::to_string(m.samples.size()) + " samples, " +
             std::to_string(m.patients.size()) + " patients, " + std::to_string(with_nodule) +
             " with nodules -> " + out);
    return kExitOk;
}

int cmd_split(const std::string& manifest_path, const std::string& ratios_csv, uint64_t seed,
              const std::string& out) {
    const SplitRatios ratios = parse_ratios(ratios_csv);
    echo_config("split", {{"manifest", manifest_path},
                          {"ratios", ratios_csv},
                          {"seed", std::to_string(seed)},
                          {"out", out}});
    Manifest m = split_by_patient(load_manifest(manifest_path), ratios, seed);
    save_manifest(m, out);

    std::array<size_t, 3> patients{}, samples{};
    std::map<std::string, Split> per_patient;
    for (const auto& s : m.samples) {
        samples[size_t(s.split)] += 1;
        per_patient[s.patient_id] = s.split;
    }
    for (const auto& [id, split] : per_patient) patients[size_t(split)] += 1;
    log_line("split patients train/val/test = " + std::to_string(patients[0]) + "/" +
             std::to_string(patients[1]) + "/" + std::to_string(patients[2]) + ", samples = " +
             std::to_string(samples[0]) + "/" + std::to_string(samples[1]) + "/" +
             std::to_string(samples[2]) + " -> " + out);
    return kExitOk;
}

int cmd_stats(const std::string& manifest_path, const std::string& out) {
    echo_config("stats", {{"manifest", manifest_path}, {"out", out.empty() ? "-" : out}});
    const Manifest m = load_manifest(manifest_path);
    const NoduleStats stats = nodule_stats(m);

    std::ostringstream os;
    os << "split,under_3mm,3_to_10mm,10_to_30mm,over_30mm,total\n";
    const auto row = [&os](const std::string& label, const NoduleBins& b) {
        os << label << "," << b.under_3mm << "," << b.from_3_to_10mm << "," << b.from_10_to_30mm
           << "," << b.over_30mm << "," << b.total() << "\n";
    };
    for (Split s : {Split::training, Split::validation, Split::test, Split::unassigned})
        row(split_name(s), stats.per_split[size_t(s)]);
    row("total", stats.total);

    if (out.empty()) {
        std::cout << os.str();
    } else {
        std::ofstream f(out, std::ios::trunc);
        if (!f) throw std::runtime_error("stats: cannot open '" + out + "' for writing");
        f << os.str();
    }
    return kExitOk;
}

struct TrainFlags {
    std::string manifest_path;
    std::string out_dir = "run";
    TrainConfig cfg;
    UNetConfig net;
    std::string checkpoint; // finetune only
};

void add_common_train_flags(CLI::App* app, TrainFlags& f) {
    app->add_option("--manifest", f.manifest_path, "split manifest JSON")->required();
    app->add_option("--out-dir", f.out_dir, "artifact directory")->capture_default_str();
    app->add_option("--batch-size", f.cfg.batch_size)->capture_default_str();
    app->add_option("--lr", f.cfg.adam.lr, "Adam learning rate")->capture_default_str();
    app->add_option("--dice-smooth", f.cfg.dice_smooth)->capture_default_str();
    app->add_option("--seed", f.cfg.seed)->capture_default_str();
    app->add_option("--workers", f.cfg.workers, "loader producer threads")->capture_default_str();
    app->add_option("--queue-ratio", f.cfg.queue_ratio, "queue capacity multiplier")
        ->capture_default_str();
    app->add_flag("--no-augment", [&f](int64_t) { f.cfg.augment = false; },
                  "disable flip/rotation augmentation");
    app->add_option("--window-center", f.cfg.window.center, "HU window center (DICOM inputs)")
        ->capture_default_str();
    app->add_option("--window-width", f.cfg.window.width, "HU window width (DICOM inputs)")
        ->capture_default_str();
}

int cmd_train(TrainFlags& f) {
    f.cfg.checkpoint_dir = f.out_dir;
    f.cfg.validate();
    f.net.validate();
    echo_config("train", {{"manifest", f.manifest_path},
                          {"out_dir", f.out_dir},
                          {"epochs", std::to_string(f.cfg.epochs)},
                          {"batch_size", std::to_string(f.cfg.batch_size)},
                          {"lr", fmt(f.cfg.adam.lr)},
                          {"dice_smooth", fmt(f.cfg.dice_smooth)},
                          {"levels", std::to_string(f.net.levels)},
                          {"base_channels", std::to_string(f.net.base_channels)},
                          {"seed", std::to_string(f.cfg.seed)},
                          {"workers", std::to_string(f.cfg.workers)},
                          {"queue_ratio", std::to_string(f.cfg.queue_ratio)},
                          {"augment", f.cfg.augment ? "on" : "off"}});

    const Manifest m = load_manifest(f.manifest_path);
    const auto train_view = training_view(m, Split::training, 0.0, f.cfg.seed);
    const auto val_view = full_view(m, Split::validation);
    log_line("training view: " + std::to_string(train_view.size()) + " samples, validation: " +
             std::to_string(val_view.size()));

    UNetF model = build_unet<float>(f.net, f.cfg.seed);
    log_line("model: levels=" + std::to_string(f.net.levels) + " base=" +
             std::to_string(f.net.base_channels) + " parameters=" +
             std::to_string(model.parameter_count()));

    const TrainResult result =
        train(model, train_view, val_view, f.cfg, [](const EpochRecord& r, bool improved) {
            std::ostringstream os;
            os << "epoch " << r.epoch << " train_loss=" << r.train_loss
               << " val_loss=" << r.val_loss << " seconds=" << r.seconds
               << (improved ? " *" : "");
            log_line(os.str());
        });

    write_history_csv(result.history, (fs::path(f.out_dir) / "history.csv").string());
    write_train_log(result.history, f.cfg, (fs::path(f.out_dir) / "train_log.jsonl").string());
    log_line("best epoch " + std::to_string(result.history.best_epoch) + " val_loss=" +
             fmt(result.history.best_val_loss) + ", checkpoint -> " + result.checkpoint_path);
    return kExitOk;
}

int cmd_finetune(TrainFlags& f) {
    f.cfg.checkpoint_dir = f.out_dir;
    f.cfg.validate();
    echo_config("finetune", {{"manifest", f.manifest_path},
                             {"checkpoint", f.checkpoint},
                             {"out_dir", f.out_dir},
                             {"epochs", std::to_string(f.cfg.finetune_epochs)},
                             {"black_frac", fmt(f.cfg.black_frac)},
                             {"lr", fmt(f.cfg.adam.lr)},
                             {"seed", std::to_string(f.cfg.seed)}});

    const Manifest m = load_manifest(f.manifest_path);
    const TrainResult result =
        finetune(f.checkpoint, m, f.cfg, [](const EpochRecord& r, bool) {
            std::ostringstream os;
            os << "epoch " << r.epoch << " train_loss=" << r.train_loss
               << " val_loss=" << r.val_loss << " seconds=" << r.seconds;
            log_line(os.str());
        });

    write_history_csv(result.history, (fs::path(f.out_dir) / "finetune_history.csv").string());
    write_train_log(result.history, f.cfg,
                    (fs::path(f.out_dir) / "finetune_log.jsonl").string());
    log_line("finetuned checkpoint -> " + result.checkpoint_path);
    return kExitOk;
}

struct EvalFlags {
    std::string manifest_path;
    std::string checkpoint;
    std::string split = "test";
    std::string out_dir = "eval";
    double threshold = 0.5;
    int batch_size = 12;
    int workers = 2;
    int queue_ratio = 8;
    WindowSpec window{};
};

LoaderConfig eval_loader_config(const EvalFlags& f) {
    LoaderConfig lc;
    lc.batch_size = f.batch_size;
    lc.workers = f.workers;
    lc.queue_ratio = f.queue_ratio;
    lc.shuffle = false;
    lc.window = f.window;
    return lc;
}

int cmd_eval(const EvalFlags& f) {
    echo_config("eval", {{"manifest", f.manifest_path},
                         {"checkpoint", f.checkpoint},
                         {"split", f.split},
                         {"threshold", fmt(f.threshold)},
                         {"out_dir", f.out_dir}});
    const Manifest m = load_manifest(f.manifest_path);
    const auto view = full_view(m, split_from_name(f.split));
    UNetF model = load_checkpoint(f.checkpoint);

    const MetricsReport report = evaluate(
        [&model](const TensorF& images) { return unet_forward(model, images); }, view,
        eval_loader_config(f), f.threshold);

    fs::create_directories(f.out_dir);
    write_metrics_csv(report, (fs::path(f.out_dir) / "metrics.csv").string());
    std::cout << metrics_summary(report);
    return kExitOk;
}

int cmd_overlay(const EvalFlags& f) {
    echo_config("overlay", {{"manifest", f.manifest_path},
                            {"checkpoint", f.checkpoint},
                            {"split", f.split},
                            {"threshold", fmt(f.threshold)},
                            {"out_dir", f.out_dir}});
    const Manifest m = load_manifest(f.manifest_path);
    const auto view = full_view(m, split_from_name(f.split));
    UNetF model = load_checkpoint(f.checkpoint);

    fs::create_directories(f.out_dir);
    Loader loader(view, eval_loader_config(f));
    loader.start_epoch(0);
    size_t written = 0;
    while (auto batch = loader.next_batch()) {
        const TensorF probs = unet_forward(model, batch->images);
        for (int n = 0; n < probs.n(); ++n) {
            const GrayImage pred = binarize(probs, n, f.threshold);
            const GrayImage gt = binarize(batch->masks, n, 0.5);
            GrayImage base;
            base.rows = pred.rows;
            base.cols = pred.cols;
            base.data.resize(pred.data.size());
            const float* img = batch->images.plane(n, 0);
            for (size_t i = 0; i < base.data.size(); ++i)
                base.data[i] = uint8_t(std::lround(std::min(1.0f, std::max(0.0f, img[i])) * 255));

            std::string name = batch->sample_ids[size_t(n)];
            for (char& c : name)
                if (c == '/' || c == '\\') c = '_';
            const size_t dot = name.find_last_of('.');
            if (dot != std::string::npos) name.resize(dot);
            write_png_rgb8((fs::path(f.out_dir) / (name + "_overlay.png")).string(),
                           overlay(pred, gt, base));
            ++written;
        }
    }
    log_line("wrote " + std::to_string(written) + " overlays to " + f.out_dir);
    return kExitOk;
}

int cmd_bench_sweep(const std::string& manifest_path, const std::string& split_name_str,
                    const std::string& workers_csv, const std::string& ratios_csv,
                    int epochs_per_cell, double decode_delay_ms, int batch_size,
                    const std::string& out_dir) {
    echo_config("bench-sweep", {{"manifest", manifest_path},
                                {"split", split_name_str},
                                {"workers", workers_csv},
                                {"queue_ratios", ratios_csv},
                                {"epochs_per_cell", std::to_string(epochs_per_cell)},
                                {"decode_delay_ms", fmt(decode_delay_ms)},
                                {"batch_size", std::to_string(batch_size)},
                                {"out_dir", out_dir}});
    const Manifest m = load_manifest(manifest_path);
    const auto view = full_view(m, split_from_name(split_name_str));

    LoaderConfig base;
    base.batch_size = batch_size;
    const SweepResult result = sweep(view, parse_int_list(workers_csv, "--workers"),
                                     parse_int_list(ratios_csv, "--queue-ratios"),
                                     epochs_per_cell, base, decode_delay_ms);

    fs::create_directories(out_dir);
    write_sweep_csv(result, (fs::path(out_dir) / "sweep.csv").string());
    write_sweep_plot_data(result, (fs::path(out_dir) / "sweep_plot.txt").string());
    const SweepRow& best = result.best();
    log_line("best cell: workers=" + std::to_string(best.workers) + " queue_ratio=" +
             std::to_string(best.queue_ratio) + " epoch_seconds=" + fmt(best.epoch_seconds) +
             " samples_per_sec=" + fmt(best.samples_per_sec));
    std::cout << "workers=" << best.workers << " queue_ratio=" << best.queue_ratio
              << " epoch_seconds=" << best.epoch_seconds << "\n";
    return kExitOk;
}

int cmd_gradcheck(uint64_t seed) {
    echo_config("gradcheck", {{"seed", std::to_string(seed)}});
    const auto entries = run_gradient_suite(seed);
    bool all_ok = true;
    std::printf("%-28s %12s %12s %8s %s\n", "check", "max_rel_err", "tolerance", "skipped",
                "status");
    for (const auto& e : entries) {
        all_ok = all_ok && e.ok;
        std::printf("%-28s %12.3e %12.1e %8zu %s\n", e.name.c_str(), e.max_rel_err, e.tol,
                    e.skipped, e.ok ? "ok" : "FAIL");
    }
    if (!all_ok) throw std::runtime_error("gradient checks failed");
    log_line("all gradient checks passed");
    return kExitOk;
}

int cmd_synth(const std::string& out_dir, CirclesConfig& cfg) {
    echo_config("synth-circles", {{"out_dir", out_dir},
                                  {"count", std::to_string(cfg.count)},
                                  {"size", std::to_string(cfg.size)},
                                  {"patients", std::to_string(cfg.patients)},
                                  {"frac_empty", fmt(cfg.frac_empty)},
                                  {"seed", std::to_string(cfg.seed)},
                                  {"format", cfg.dicom ? "dicom" : "png"}});
    generate_circles(out_dir, cfg);
    log_line("wrote " + std::to_string(cfg.count) + " synthetic slices to " + out_dir);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lung-nodule CT segmentation pipeline"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file with [subcommand] sections");
    app.allow_config_extras(CLI::config_extras_mode::ignore_all);

    int exit_code = kExitOk;
    const auto run = [&exit_code](auto&& fn) {
        return [&exit_code, fn]() { exit_code = fn(); };
    };

    // ingest
    std::string in_dir, out_dir_ingest;
    double window_center = -500.0, window_width = 1600.0;
    auto* ingest = app.add_subcommand("ingest", "convert DICOM slices to windowed PNGs");
    ingest->add_option("--in-dir", in_dir, "directory of .dcm files")->required();
    ingest->add_option("--out-dir", out_dir_ingest)->required();
    ingest->add_option("--window-center", window_center, "HU window center")
        ->capture_default_str();
    ingest->add_option("--window-width", window_width, "HU window width")->capture_default_str();
    ingest->callback(run([&] { return cmd_ingest(in_dir, out_dir_ingest, window_center,
                                                 window_width); }));

    // manifest
    std::string man_root, man_name, man_out = "manifest.json";
    auto* manifest = app.add_subcommand("manifest", "index a dataset directory");
    manifest->add_option("--root", man_root, "dataset root with per-patient directories")
        ->required();
    manifest->add_option("--name", man_name, "dataset name (default: directory name)");
    manifest->add_option("--out", man_out)->capture_default_str();
    manifest->callback(run([&] { return cmd_manifest(man_root, man_name, man_out); }));

    // split
    std::string split_manifest, split_ratios = "0.8,0.1,0.1", split_out = "manifest_split.json";
    uint64_t split_seed = 0;
    auto* split = app.add_subcommand("split", "patient-exclusive train/val/test split");
    split->add_option("--manifest", split_manifest)->required();
    split->add_option("--ratios", split_ratios, "train,val,test fractions")
        ->capture_default_str();
    split->add_option("--seed", split_seed)->capture_default_str();
    split->add_option("--out", split_out)->capture_default_str();
    split->callback(
        run([&] { return cmd_split(split_manifest, split_ratios, split_seed, split_out); }));

    // stats
    std::string stats_manifest, stats_out;
    auto* stats = app.add_subcommand("stats", "nodule size distribution per split");
    stats->add_option("--manifest", stats_manifest)->required();
    stats->add_option("--out", stats_out, "CSV path (default: stdout)");
    stats->callback(run([&] { return cmd_stats(stats_manifest, stats_out); }));

    // train
    TrainFlags tf;
    auto* train_cmd = app.add_subcommand("train", "train the U-Net on nodule-bearing slices");
    add_common_train_flags(train_cmd, tf);
    train_cmd->add_option("--epochs", tf.cfg.epochs)->capture_default_str();
    train_cmd->add_option("--levels", tf.net.levels, "U-Net depth")->capture_default_str();
    train_cmd->add_option("--base-channels", tf.net.base_channels, "channels at full resolution")
        ->capture_default_str();
    train_cmd->callback(run([&] { return cmd_train(tf); }));

    // finetune
    TrainFlags ff;
    auto* finetune_cmd =
        app.add_subcommand("finetune", "continue training with black-mask samples");
    add_common_train_flags(finetune_cmd, ff);
    finetune_cmd->add_option("--checkpoint", ff.checkpoint, "input checkpoint")->required();
    finetune_cmd->add_option("--black-frac", ff.cfg.black_frac,
                             "fraction of no-nodule slices to add")
        ->capture_default_str();
    finetune_cmd->add_option("--epochs", ff.cfg.finetune_epochs)->capture_default_str();
    finetune_cmd->callback(run([&] { return cmd_finetune(ff); }));

    // eval
    EvalFlags ef;
    auto* eval_cmd = app.add_subcommand("eval", "dice/iou report for a split");
    eval_cmd->add_option("--manifest", ef.manifest_path)->required();
    eval_cmd->add_option("--checkpoint", ef.checkpoint)->required();
    eval_cmd->add_option("--split", ef.split)->capture_default_str();
    eval_cmd->add_option("--threshold", ef.threshold)->capture_default_str();
    eval_cmd->add_option("--out-dir", ef.out_dir)->capture_default_str();
    eval_cmd->add_option("--batch-size", ef.batch_size)->capture_default_str();
    eval_cmd->add_option("--workers", ef.workers)->capture_default_str();
    eval_cmd->callback(run([&] { return cmd_eval(ef); }));

    // overlay
    EvalFlags of;
    of.out_dir = "overlays";
    auto* overlay_cmd = app.add_subcommand("overlay", "render prediction/ground-truth overlays");
    overlay_cmd->add_option("--manifest", of.manifest_path)->required();
    overlay_cmd->add_option("--checkpoint", of.checkpoint)->required();
    overlay_cmd->add_option("--split", of.split)->capture_default_str();
    overlay_cmd->add_option("--threshold", of.threshold)->capture_default_str();
    overlay_cmd->add_option("--out-dir", of.out_dir)->capture_default_str();
    overlay_cmd->add_option("--batch-size", of.batch_size)->capture_default_str();
    overlay_cmd->add_option("--workers", of.workers)->capture_default_str();
    overlay_cmd->callback(run([&] { return cmd_overlay(of); }));

    // bench-sweep
    std::string bench_manifest, bench_split = "training", bench_workers = "1,2,4",
                bench_ratios = "2,8", bench_out = "bench";
    int bench_epochs = 3, bench_batch = 12;
    double bench_delay = 0.0;
    auto* bench_cmd = app.add_subcommand("bench-sweep", "loader worker/queue-ratio grid search");
    bench_cmd->add_option("--manifest", bench_manifest)->required();
    bench_cmd->add_option("--split", bench_split)->capture_default_str();
    bench_cmd->add_option("--workers", bench_workers, "comma-separated worker counts")
        ->capture_default_str();
    bench_cmd->add_option("--queue-ratios", bench_ratios, "comma-separated queue ratios")
        ->capture_default_str();
    bench_cmd->add_option("--epochs-per-cell", bench_epochs)->capture_default_str();
    bench_cmd->add_option("--decode-delay-ms", bench_delay, "synthetic per-sample latency")
        ->capture_default_str();
    bench_cmd->add_option("--batch-size", bench_batch)->capture_default_str();
    bench_cmd->add_option("--out-dir", bench_out)->capture_default_str();
    bench_cmd->callback(run([&] {
        return cmd_bench_sweep(bench_manifest, bench_split, bench_workers, bench_ratios,
                               bench_epochs, bench_delay, bench_batch, bench_out);
    }));

    // gradcheck
    uint64_t grad_seed = 0;
    auto* grad_cmd = app.add_subcommand("gradcheck", "64-bit finite-difference gradient suite");
    grad_cmd->add_option("--seed", grad_seed)->capture_default_str();
    grad_cmd->callback(run([&] { return cmd_gradcheck(grad_seed); }));

    // synth-circles
    std::string synth_out = "circles";
    CirclesConfig synth_cfg;
    auto* synth_cmd = app.add_subcommand("synth-circles", "generate the synthetic disk dataset");
    synth_cmd->add_option("--out-dir", synth_out)->capture_default_str();
    synth_cmd->add_option("--count", synth_cfg.count)->capture_default_str();
    synth_cmd->add_option("--size", synth_cfg.size)->capture_default_str();
    synth_cmd->add_option("--patients", synth_cfg.patients)->capture_default_str();
    synth_cmd->add_option("--frac-empty", synth_cfg.frac_empty)->capture_default_str();
    synth_cmd->add_option("--seed", synth_cfg.seed)->capture_default_str();
    synth_cmd->add_flag("--dicom", synth_cfg.dicom, "write raw DICOM slices instead of PNGs");
    synth_cmd->add_option("--spacing-mm", synth_cfg.spacing_mm)->capture_default_str();
    synth_cmd->callback(run([&] { return cmd_synth(synth_out, synth_cfg); }));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "[nodseg] invalid configuration: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "[nodseg] error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return exit_code;
}
