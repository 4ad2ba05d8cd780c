#include "nodseg/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "nodseg/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace nodseg {

const char* split_name(Split s) {
    switch (s) {
        case Split::training: return "training";
        case Split::validation: return "validation";
        case Split::test: return "test";
        case Split::unassigned: return "unassigned";
    }
    return "unassigned";
}

Split split_from_name(const std::string& name) {
    for (Split s : {Split::training, Split::validation, Split::test, Split::unassigned})
        if (name == split_name(s)) return s;
    throw std::invalid_argument("unknown split '" + name + "'");
}

std::string Manifest::resolve(const std::string& rel) const {
    return (fs::path(root) / rel).string();
}

void Manifest::rebuild_patient_index() {
    patients.clear();
    for (size_t i = 0; i < samples.size(); ++i) patients[samples[i].patient_id].push_back(i);
}

namespace {

constexpr const char* kMaskSuffix = "_mask.png";

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool mask_has_foreground(const std::string& path) {
    GrayImage img = read_png_gray8(path);
    return std::any_of(img.data.begin(), img.data.end(), [](uint8_t v) { return v != 0; });
}

std::string first_component(const fs::path& rel) {
    auto it = rel.begin();
    if (it == rel.end()) return "(root)";
    if (std::next(it) == rel.end()) return "(root)"; // file directly under root
    return it->string();
}

struct SidecarRecord {
    std::optional<std::pair<double, double>> spacing_mm;
    std::string patient_id;
};

std::map<std::string, SidecarRecord> load_sidecar(const fs::path& root) {
    std::map<std::string, SidecarRecord> out;
    const fs::path path = root / "metadata.jsonl";
    if (!fs::exists(path)) return out;
    std::ifstream in(path);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error("manifest: bad metadata.jsonl line " + std::to_string(lineno) +
                                     ": " + e.what());
        }
        SidecarRecord rec;
        if (j.contains("spacing_mm") && j["spacing_mm"].is_array() && j["spacing_mm"].size() == 2)
            rec.spacing_mm = {j["spacing_mm"][0].get<double>(), j["spacing_mm"][1].get<double>()};
        if (j.contains("patient_id")) rec.patient_id = j["patient_id"].get<std::string>();
        out[j.at("image").get<std::string>()] = std::move(rec);
    }
    return out;
}

} // namespace

Manifest build_manifest(const std::string& root, const std::string& name) {
    if (!fs::is_directory(root)) throw std::runtime_error("manifest: '" + root + "' is not a directory");
    const fs::path abs_root = fs::absolute(root).lexically_normal();

    std::vector<std::string> images;
    std::vector<std::string> masks;
    for (const auto& entry : fs::recursive_directory_iterator(abs_root)) {
        if (!entry.is_regular_file()) continue;
        const std::string rel = fs::path(entry.path()).lexically_relative(abs_root).generic_string();
        if (ends_with(rel, kMaskSuffix))
            masks.push_back(rel);
        else if (ends_with(rel, ".png") || ends_with(rel, ".dcm"))
            images.push_back(rel);
    }
    std::sort(images.begin(), images.end());
    std::sort(masks.begin(), masks.end());
    if (images.empty()) throw std::runtime_error("manifest: no samples found under '" + root + "'");

    std::set<std::string> image_set(images.begin(), images.end());
    std::set<std::string> claimed_masks;
    const auto sidecar = load_sidecar(abs_root);

    Manifest m;
    m.name = name.empty() ? abs_root.filename().string() : name;
    m.root = abs_root.string();
    for (const std::string& rel : images) {
        SampleRecord rec;
        rec.image_path = rel;
        rec.patient_id = first_component(fs::path(rel));

        const std::string stem = rel.substr(0, rel.size() - 4); // strip .png/.dcm
        const std::string mask_rel = stem + kMaskSuffix;
        if (std::binary_search(masks.begin(), masks.end(), mask_rel)) {
            rec.mask_path = mask_rel;
            claimed_masks.insert(mask_rel);
            try {
                rec.has_nodule = mask_has_foreground((abs_root / mask_rel).string());
            } catch (const std::exception& e) {
                throw std::runtime_error("manifest: unreadable mask '" + mask_rel + "': " + e.what());
            }
        }
        if (auto it = sidecar.find(rel); it != sidecar.end()) {
            rec.spacing_mm = it->second.spacing_mm;
            if (!it->second.patient_id.empty()) rec.patient_id = it->second.patient_id;
        }
        m.samples.push_back(std::move(rec));
    }

    for (const std::string& mask : masks)
        if (!claimed_masks.count(mask))
            throw std::runtime_error("manifest: orphan mask '" + mask + "' has no matching image");

    m.rebuild_patient_index();
    return m;
}

void SplitRatios::validate() const {
    if (!(train > 0) || !(val > 0) || !(test > 0))
        throw std::invalid_argument("split: ratios must be positive");
    if (std::abs(train + val + test - 1.0) > 1e-9)
        throw std::invalid_argument("split: ratios must sum to 1");
}

Manifest split_by_patient(Manifest m, SplitRatios ratios, uint64_t seed) {
    ratios.validate();
    std::vector<std::string> ids;
    ids.reserve(m.patients.size());
    for (const auto& [id, _] : m.patients) ids.push_back(id);
    const size_t P = ids.size();
    if (P < 3)
        throw std::runtime_error("split: need at least 3 patients, have " + std::to_string(P));

    Rng rng(mix_seed(seed, 0x73706c69));
    shuffle(ids, rng);

    const size_t n_train = size_t(std::floor(double(P) * ratios.train));
    const size_t n_val = size_t(std::floor(double(P) * ratios.val));

    for (size_t i = 0; i < P; ++i) {
        const Split s = i < n_train              ? Split::training
                        : i < n_train + n_val    ? Split::validation
                                                 : Split::test;
        for (size_t idx : m.patients.at(ids[i])) m.samples[idx].split = s;
    }
    return m;
}

void NoduleBins::add(double d) {
    if (d < 3.0)
        ++under_3mm;
    else if (d < 10.0)
        ++from_3_to_10mm;
    else if (d < 30.0)
        ++from_10_to_30mm;
    else
        ++over_30mm;
}

double equivalent_diameter_mm(int64_t area_px, double spacing_mm) {
    return 2.0 * spacing_mm * std::sqrt(double(area_px) / std::numbers::pi);
}

std::vector<int64_t> connected_component_areas(const GrayImage& mask) {
    const int R = mask.rows, C = mask.cols;
    std::vector<int64_t> areas;
    std::vector<uint8_t> seen(size_t(R) * C, 0);
    std::vector<int> stack;
    for (int start = 0; start < R * C; ++start) {
        if (mask.data[size_t(start)] == 0 || seen[size_t(start)]) continue;
        int64_t area = 0;
        stack.push_back(start);
        seen[size_t(start)] = 1;
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            ++area;
            const int y = p / C, x = p % C;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dy == 0 && dx == 0) continue;
                    const int ny = y + dy, nx = x + dx;
                    if (ny < 0 || ny >= R || nx < 0 || nx >= C) continue;
                    const int np = ny * C + nx;
                    if (mask.data[size_t(np)] == 0 || seen[size_t(np)]) continue;
                    seen[size_t(np)] = 1;
                    stack.push_back(np);
                }
            }
        }
        areas.push_back(area);
    }
    return areas;
}

NoduleStats nodule_stats(const Manifest& m) {
    NoduleStats stats;
    for (const SampleRecord& rec : m.samples) {
        if (rec.mask_path.empty() || !rec.has_nodule) continue;
        if (!rec.spacing_mm)
            throw std::runtime_error("nodule_stats: missing pixel spacing for slice '" +
                                     rec.image_path + "'");
        const double spacing = std::sqrt(rec.spacing_mm->first * rec.spacing_mm->second);
        GrayImage mask = read_png_gray8(m.resolve(rec.mask_path));
        for (int64_t area : connected_component_areas(mask)) {
            const double d = equivalent_diameter_mm(area, spacing);
            stats.per_split[size_t(rec.split)].add(d);
            stats.total.add(d);
        }
    }
    return stats;
}

namespace {

ViewSample make_view_sample(const Manifest& m, const SampleRecord& rec) {
    ViewSample v;
    v.id = rec.image_path;
    v.image_path = m.resolve(rec.image_path);
    v.mask_path = rec.mask_path.empty() ? std::string() : m.resolve(rec.mask_path);
    v.spacing_mm = rec.spacing_mm;
    return v;
}

} // namespace

std::vector<ViewSample> training_view(const Manifest& m, Split split, double black_frac,
                                      uint64_t seed) {
    if (black_frac < 0 || black_frac > 1)
        throw std::invalid_argument("training_view: black_frac must be in [0,1]");

    std::vector<ViewSample> view;
    std::vector<size_t> black_pool;
    for (size_t i = 0; i < m.samples.size(); ++i) {
        const SampleRecord& rec = m.samples[i];
        if (rec.split != split) continue;
        if (rec.has_nodule)
            view.push_back(make_view_sample(m, rec));
        else
            black_pool.push_back(i);
    }
    if (view.empty())
        throw std::runtime_error(std::string("training_view: split '") + split_name(split) +
                                 "' has no nodule-bearing samples");

    const size_t k = size_t(std::ceil(black_frac * double(black_pool.size())));
    if (k > 0) {
        Rng rng(mix_seed(seed, 0x626c6163));
        shuffle(black_pool, rng);
        black_pool.resize(k);
        std::sort(black_pool.begin(), black_pool.end()); // manifest order within the black tail
        for (size_t idx : black_pool) {
            ViewSample v = make_view_sample(m, m.samples[idx]);
            v.mask_path.clear(); // train against an all-zero mask
            view.push_back(std::move(v));
        }
    }
    return view;
}

std::vector<ViewSample> full_view(const Manifest& m, Split split) {
    std::vector<ViewSample> view;
    for (const SampleRecord& rec : m.samples) {
        if (rec.split != split) continue;
        ViewSample v = make_view_sample(m, rec);
        if (!rec.has_nodule) v.mask_path.clear();
        view.push_back(std::move(v));
    }
    if (view.empty())
        throw std::runtime_error(std::string("view: split '") + split_name(split) + "' is empty");
    return view;
}

void save_manifest(const Manifest& m, const std::string& path) {
    json j;
    j["name"] = m.name;
    j["root"] = m.root;
    j["images"] = json::array();
    for (const SampleRecord& rec : m.samples) {
        json img;
        img["location"] = rec.image_path;
        img["label"] = rec.mask_path.empty() ? json(nullptr) : json(rec.mask_path);
        img["patient"] = rec.patient_id;
        img["has_nodule"] = rec.has_nodule;
        if (rec.spacing_mm)
            img["spacing_mm"] = {rec.spacing_mm->first, rec.spacing_mm->second};
        j["images"].push_back(std::move(img));
    }
    json split;
    for (Split s : {Split::training, Split::validation, Split::test}) {
        json indices = json::array();
        for (size_t i = 0; i < m.samples.size(); ++i)
            if (m.samples[i].split == s) indices.push_back(i);
        split[split_name(s)] = std::move(indices);
    }
    j["split"] = std::move(split);

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("manifest: cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

Manifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("manifest: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("manifest: bad JSON in '" + path + "': " + e.what());
    }

    Manifest m;
    m.name = j.at("name").get<std::string>();
    m.root = j.value("root", std::string());
    if (m.root.empty() || fs::path(m.root).is_relative())
        m.root = (fs::absolute(path).parent_path() / m.root).lexically_normal().string();
    for (const json& img : j.at("images")) {
        SampleRecord rec;
        rec.image_path = img.at("location").get<std::string>();
        if (img.contains("label") && !img["label"].is_null())
            rec.mask_path = img["label"].get<std::string>();
        rec.patient_id = img.value("patient", first_component(fs::path(rec.image_path)));
        rec.has_nodule = img.value("has_nodule", !rec.mask_path.empty());
        if (img.contains("spacing_mm") && img["spacing_mm"].is_array())
            rec.spacing_mm = {img["spacing_mm"][0].get<double>(), img["spacing_mm"][1].get<double>()};
        m.samples.push_back(std::move(rec));
    }
    if (j.contains("split")) {
        for (Split s : {Split::training, Split::validation, Split::test}) {
            if (!j["split"].contains(split_name(s))) continue;
            for (const json& idx : j["split"][split_name(s)]) {
                const size_t i = idx.get<size_t>();
                if (i >= m.samples.size())
                    throw std::runtime_error("manifest: split index out of range in '" + path + "'");
                m.samples[i].split = s;
            }
        }
    }
    m.rebuild_patient_index();
    return m;
}

} // namespace nodseg
