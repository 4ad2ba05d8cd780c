#include "nodseg/loader.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <stdexcept>

#include "nodseg/dicom.hpp"
#include "nodseg/rng.hpp"

namespace nodseg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace

void LoaderConfig::validate() const {
    if (batch_size < 1) throw std::invalid_argument("loader: batch_size must be >= 1");
    if (workers < 1) throw std::invalid_argument("loader: workers must be >= 1");
    if (queue_ratio < 1) throw std::invalid_argument("loader: queue_ratio must be >= 1");
    if (decode_delay_ms < 0) throw std::invalid_argument("loader: decode_delay_ms must be >= 0");
    if (augment) augment->validate();
    window.validate();
}

DecodedSample default_decode(const ViewSample& sample, const WindowSpec& window_spec) {
    DecodedSample out;
    if (ends_with(sample.image_path, ".dcm")) {
        const RawSlice slice = parse_dicom(read_binary_file(sample.image_path));
        out.image = window(to_hounsfield(slice), window_spec);
    } else {
        const GrayImage img = read_png_gray8(sample.image_path);
        out.image.rows = img.rows;
        out.image.cols = img.cols;
        out.image.values.resize(img.data.size());
        for (size_t i = 0; i < img.data.size(); ++i)
            out.image.values[i] = float(img.data[i]) / 255.0f;
    }

    if (sample.mask_path.empty()) {
        out.mask.rows = out.image.rows;
        out.mask.cols = out.image.cols;
        out.mask.data.assign(size_t(out.mask.rows) * size_t(out.mask.cols), 0);
    } else {
        out.mask = read_png_gray8(sample.mask_path);
        for (uint8_t& v : out.mask.data) v = v ? 1 : 0;
        if (out.mask.rows != out.image.rows || out.mask.cols != out.image.cols)
            throw std::runtime_error("sample '" + sample.id + "': mask is " +
                                     std::to_string(out.mask.rows) + "x" +
                                     std::to_string(out.mask.cols) + " but image is " +
                                     std::to_string(out.image.rows) + "x" +
                                     std::to_string(out.image.cols));
    }
    return out;
}

// All shared epoch state. Producers claim positions in shuffled order from
// `next_claim`; a producer may publish position p only once p fits inside the
// queue window [next_consume, next_consume + capacity), which both enforces
// the occupancy bound and makes the position the consumer is waiting for
// always admissible (so the pipeline cannot deadlock).
struct Loader::EpochState {
    int epoch = 0;
    std::vector<size_t> order; // shuffled view indices
    Clock::time_point start_time;

    std::atomic<size_t> next_claim{0};

    std::mutex mu;
    std::condition_variable can_publish; // producers: window advanced or abort
    std::condition_variable published;   // consumer: new item or abort
    std::map<size_t, DecodedSample> ready; // position -> decoded sample
    size_t next_consume = 0;
    std::atomic<bool> abort{false};
    std::string error; // first worker failure

    // instrumentation
    size_t pushes = 0;
    size_t occupancy_sum = 0;
    size_t occupancy_max = 0;
    double consumer_wait_s = 0;
    std::vector<double> worker_busy_s;
};

Loader::Loader(std::vector<ViewSample> view, LoaderConfig cfg, DecodeFn decode)
    : view_(std::move(view)), cfg_(cfg), decode_(std::move(decode)) {
    cfg_.validate();
    if (view_.empty()) throw std::invalid_argument("loader: view is empty");
    if (!decode_) {
        const WindowSpec w = cfg_.window;
        decode_ = [w](const ViewSample& s) { return default_decode(s, w); };
    }
}

Loader::~Loader() {
    if (epoch_) {
        {
            std::lock_guard<std::mutex> lock(epoch_->mu);
            epoch_->abort = true;
        }
        epoch_->can_publish.notify_all();
        epoch_->published.notify_all();
        for (auto& t : threads_) t.join();
        threads_.clear();
    }
}

size_t Loader::batches_per_epoch() const {
    return (view_.size() + size_t(cfg_.batch_size) - 1) / size_t(cfg_.batch_size);
}

std::vector<size_t> Loader::shuffled_order(int epoch) const {
    std::vector<size_t> order(view_.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (cfg_.shuffle) {
        Rng rng(mix_seed(cfg_.shuffle_seed, uint64_t(epoch), 0x65706f63));
        shuffle(order, rng);
    }
    return order;
}

std::vector<std::vector<std::string>> Loader::epoch_plan(int epoch) const {
    const std::vector<size_t> order = shuffled_order(epoch);
    std::vector<std::vector<std::string>> plan;
    for (size_t start = 0; start < order.size(); start += size_t(cfg_.batch_size)) {
        const size_t end = std::min(order.size(), start + size_t(cfg_.batch_size));
        std::vector<std::string> ids;
        for (size_t p = start; p < end; ++p) ids.push_back(view_[order[p]].id);
        plan.push_back(std::move(ids));
    }
    return plan;
}

void Loader::start_epoch(int epoch) {
    if (epoch_) throw std::logic_error("loader: epoch already active");
    epoch_ = std::make_unique<EpochState>();
    epoch_->epoch = epoch;
    epoch_->order = shuffled_order(epoch);
    epoch_->worker_busy_s.assign(size_t(cfg_.workers), 0.0);
    epoch_->start_time = Clock::now();
    stats_valid_ = false;

    threads_.reserve(size_t(cfg_.workers));
    for (int w = 0; w < cfg_.workers; ++w)
        threads_.emplace_back([this, w] { worker_main(size_t(w)); });
}

void Loader::worker_main(size_t worker_index) {
    EpochState& st = *epoch_;
    const size_t n = st.order.size();
    const size_t capacity = cfg_.queue_capacity();

    while (!st.abort.load()) {
        const size_t pos = st.next_claim.fetch_add(1);
        if (pos >= n) return;
        const ViewSample& sample = view_[st.order[pos]];

        DecodedSample item;
        const auto t0 = Clock::now();
        try {
            item = decode_(sample);
            if (cfg_.decode_delay_ms > 0)
                std::this_thread::sleep_for(
                    std::chrono::duration<double, std::milli>(cfg_.decode_delay_ms));
            if (cfg_.augment) {
                Rng rng(mix_seed(cfg_.shuffle_seed, uint64_t(st.epoch), st.order[pos]));
                augment_pair(item.image, item.mask, rng, *cfg_.augment);
            }
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(st.mu);
            if (st.error.empty())
                st.error = "sample '" + sample.id + "' failed to load: " + e.what();
            st.abort = true;
            st.can_publish.notify_all();
            st.published.notify_all();
            return;
        }
        st.worker_busy_s[worker_index] += seconds_since(t0);

        std::unique_lock<std::mutex> lock(st.mu);
        st.can_publish.wait(lock, [&] { return st.abort || pos < st.next_consume + capacity; });
        if (st.abort) return;
        st.ready.emplace(pos, std::move(item));
        ++st.pushes;
        st.occupancy_sum += st.ready.size();
        st.occupancy_max = std::max(st.occupancy_max, st.ready.size());
        st.published.notify_all();
    }
}

std::optional<Batch> Loader::next_batch() {
    if (!epoch_) throw std::logic_error("loader: no active epoch");
    EpochState& st = *epoch_;
    const size_t n = st.order.size();

    if (st.next_consume >= n) {
        finish_epoch();
        return std::nullopt;
    }

    const size_t start = st.next_consume;
    const size_t end = std::min(n, start + size_t(cfg_.batch_size));

    std::vector<DecodedSample> items;
    std::vector<std::string> ids;
    items.reserve(end - start);
    const auto wait0 = Clock::now();
    {
        std::unique_lock<std::mutex> lock(st.mu);
        for (size_t pos = start; pos < end; ++pos) {
            st.published.wait(lock, [&] { return st.abort || st.ready.count(pos) != 0; });
            if (st.abort && st.ready.count(pos) == 0) {
                const std::string err =
                    st.error.empty() ? std::string("loader: epoch aborted") : st.error;
                lock.unlock();
                finish_epoch();
                throw std::runtime_error(err);
            }
            auto it = st.ready.find(pos);
            items.push_back(std::move(it->second));
            st.ready.erase(it);
            ids.push_back(view_[st.order[pos]].id);
            st.next_consume = pos + 1;
            st.can_publish.notify_all();
        }
    }
    st.consumer_wait_s += seconds_since(wait0);

    const int rows = items.front().image.rows;
    const int cols = items.front().image.cols;
    Batch batch;
    batch.images = TensorF(int(items.size()), 1, rows, cols);
    batch.masks = TensorF(int(items.size()), 1, rows, cols);
    for (size_t i = 0; i < items.size(); ++i) {
        const DecodedSample& s = items[i];
        if (s.image.rows != rows || s.image.cols != cols)
            throw std::runtime_error("sample '" + ids[i] + "' is " + std::to_string(s.image.rows) +
                                     "x" + std::to_string(s.image.cols) + " but the batch is " +
                                     std::to_string(rows) + "x" + std::to_string(cols));
        const size_t plane = size_t(rows) * size_t(cols);
        std::copy(s.image.values.begin(), s.image.values.end(),
                  batch.images.data.begin() + long(i * plane));
        for (size_t p = 0; p < plane; ++p)
            batch.masks.data[i * plane + p] = float(s.mask.data[p]);
    }
    batch.sample_ids = std::move(ids);
    return batch;
}

void Loader::finish_epoch() {
    EpochState& st = *epoch_;
    for (auto& t : threads_) t.join();
    threads_.clear();

    const double wall = seconds_since(st.start_time);
    EpochStats stats;
    stats.samples = st.order.size();
    stats.batches = batches_per_epoch();
    stats.epoch_seconds = wall;
    stats.samples_per_sec = wall > 0 ? double(stats.samples) / wall : 0.0;
    stats.mean_consumer_wait_ms =
        stats.batches > 0 ? 1e3 * st.consumer_wait_s / double(stats.batches) : 0.0;
    stats.mean_queue_occupancy =
        st.pushes > 0 ? double(st.occupancy_sum) / double(st.pushes) : 0.0;
    stats.max_queue_occupancy = st.occupancy_max;
    stats.worker_busy_fraction.resize(st.worker_busy_s.size());
    for (size_t w = 0; w < st.worker_busy_s.size(); ++w)
        stats.worker_busy_fraction[w] = wall > 0 ? st.worker_busy_s[w] / wall : 0.0;

    last_stats_ = std::move(stats);
    stats_valid_ = true;
    epoch_.reset();
}

const EpochStats& Loader::epoch_stats() const {
    if (!stats_valid_) throw std::logic_error("loader: no completed epoch to report");
    return last_stats_;
}

} // namespace nodseg
