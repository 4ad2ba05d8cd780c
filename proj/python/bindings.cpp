// Python bindings for the main pipeline operations: windowing, metrics,
// model inference, manifests and synthetic data.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <stdexcept>

#include "nodseg/image.hpp"
#include "nodseg/manifest.hpp"
#include "nodseg/metrics.hpp"
#include "nodseg/synth.hpp"
#include "nodseg/unet.hpp"

namespace py = pybind11;
using namespace nodseg;

namespace {

GrayImage to_mask(const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& arr,
                  const char* name) {
    if (arr.ndim() != 2) throw std::invalid_argument(std::string(name) + " must be 2-D");
    GrayImage img;
    img.rows = int(arr.shape(0));
    img.cols = int(arr.shape(1));
    img.data.assign(arr.data(), arr.data() + arr.size());
    return img;
}

class Model {
public:
    explicit Model(UNetF net) : net_(std::move(net)) {}

    static Model create(int levels, int base_channels, uint64_t seed) {
        UNetConfig cfg;
        cfg.levels = levels;
        cfg.base_channels = base_channels;
        return Model(build_unet<float>(cfg, seed));
    }

    static Model load(const std::string& path) { return Model(load_checkpoint(path)); }

    void save(const std::string& path) { save_checkpoint(net_, path); }

    // (H,W) or (N,H,W) float array in [0,1] -> probabilities, same shape
    py::array_t<float> predict(
        const py::array_t<float, py::array::c_style | py::array::forcecast>& arr) {
        const bool batched = arr.ndim() == 3;
        if (!batched && arr.ndim() != 2)
            throw std::invalid_argument("predict expects a (H,W) or (N,H,W) array");
        const int n = batched ? int(arr.shape(0)) : 1;
        const int h = int(arr.shape(batched ? 1 : 0));
        const int w = int(arr.shape(batched ? 2 : 1));
        TensorF x({n, 1, h, w});
        std::copy(arr.data(), arr.data() + arr.size(), x.data.begin());
        const TensorF probs = unet_forward(net_, x);
        py::array_t<float> out(batched ? std::vector<py::ssize_t>{n, h, w}
                                       : std::vector<py::ssize_t>{h, w});
        std::copy(probs.data.begin(), probs.data.end(), out.mutable_data());
        return out;
    }

    int levels() const { return net_.cfg.levels; }
    int base_channels() const { return net_.cfg.base_channels; }
    size_t parameter_count() { return net_.parameter_count(); }

private:
    UNetF net_;
};

} // namespace

PYBIND11_MODULE(_nodseg, m) {
    m.doc() = "lung-nodule CT segmentation pipeline (native core)";
    m.attr("__version__") = "0.1.0";

    m.def(
        "window",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& hu,
           double center, double width) {
            if (hu.ndim() != 2) throw std::invalid_argument("window expects a 2-D HU array");
            HuImage img;
            img.rows = int(hu.shape(0));
            img.cols = int(hu.shape(1));
            img.values.assign(hu.data(), hu.data() + hu.size());
            const NormImage norm = window(img, WindowSpec{center, width});
            py::array_t<float> out({py::ssize_t(norm.rows), py::ssize_t(norm.cols)});
            std::copy(norm.values.begin(), norm.values.end(), out.mutable_data());
            return out;
        },
        py::arg("hu"), py::arg("center") = -500.0, py::arg("width") = 1600.0,
        "Clamped affine map of Hounsfield units onto [0,1].");

    m.def(
        "dice_score",
        [](const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& pred,
           const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& gt) {
            return dice_score(to_mask(pred, "pred"), to_mask(gt, "gt"));
        },
        py::arg("pred"), py::arg("gt"));

    m.def(
        "iou_score",
        [](const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& pred,
           const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& gt) {
            return iou_score(to_mask(pred, "pred"), to_mask(gt, "gt"));
        },
        py::arg("pred"), py::arg("gt"));

    m.def(
        "generate_circles",
        [](const std::string& out_dir, int count, int size, int patients, double frac_empty,
           uint64_t seed, bool dicom, double spacing_mm) {
            CirclesConfig cfg;
            cfg.count = count;
            cfg.size = size;
            cfg.patients = patients;
            cfg.frac_empty = frac_empty;
            cfg.seed = seed;
            cfg.dicom = dicom;
            cfg.spacing_mm = spacing_mm;
            generate_circles(out_dir, cfg);
        },
        py::arg("out_dir"), py::arg("count") = 40, py::arg("size") = 64, py::arg("patients") = 10,
        py::arg("frac_empty") = 0.0, py::arg("seed") = 0, py::arg("dicom") = false,
        py::arg("spacing_mm") = 1.0);

    m.def(
        "build_manifest",
        [](const std::string& root, const std::string& name, const std::string& out) {
            const Manifest man = build_manifest(root, name);
            save_manifest(man, out);
            py::dict d;
            d["name"] = man.name;
            d["samples"] = man.samples.size();
            d["patients"] = man.patients.size();
            return d;
        },
        py::arg("root"), py::arg("name") = "", py::arg("out") = "manifest.json");

    m.def(
        "split_manifest",
        [](const std::string& manifest_path, const std::string& out, double train, double val,
           double test, uint64_t seed) {
            Manifest man = split_by_patient(load_manifest(manifest_path),
                                            SplitRatios{train, val, test}, seed);
            save_manifest(man, out);
            std::map<std::string, Split> per_patient;
            for (const auto& s : man.samples) per_patient[s.patient_id] = s.split;
            std::array<size_t, 3> counts{};
            for (const auto& [id, split] : per_patient) counts[size_t(split)] += 1;
            py::dict d;
            d["training"] = counts[0];
            d["validation"] = counts[1];
            d["test"] = counts[2];
            return d;
        },
        py::arg("manifest"), py::arg("out"), py::arg("train") = 0.8, py::arg("val") = 0.1,
        py::arg("test") = 0.1, py::arg("seed") = 0);

    py::class_<Model>(m, "Model")
        .def_static("create", &Model::create, py::arg("levels") = 5,
                    py::arg("base_channels") = 64, py::arg("seed") = 0)
        .def_static("load", &Model::load, py::arg("path"))
        .def("save", &Model::save, py::arg("path"))
        .def("predict", &Model::predict, py::arg("images"))
        .def_property_readonly("levels", &Model::levels)
        .def_property_readonly("base_channels", &Model::base_channels)
        .def_property_readonly("parameter_count", &Model::parameter_count);
}
