// Python bindings for the main toolkit operations: codebook math, data
// transforms, clustering, training and sampling. Images cross the boundary as
// float32 numpy arrays shaped (n, 3, h, w) in [0, 1].

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "da/clustering.hpp"
#include "da/image_io.hpp"
#include "da/sampling.hpp"
#include "da/train.hpp"

namespace py = pybind11;
using namespace da;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

Tensor tensor_from_array(const FloatArray& arr) {
    py::buffer_info info = arr.request();
    Tensor t;
    t.shape.assign(info.shape.begin(), info.shape.end());
    const float* p = static_cast<const float*>(info.ptr);
    t.v.assign(p, p + info.size);
    return t;
}

py::array_t<float> array_from_tensor(const Tensor& t) {
    std::vector<py::ssize_t> shape(t.shape.begin(), t.shape.end());
    py::array_t<float> arr(shape);
    std::copy(t.v.begin(), t.v.end(), static_cast<float*>(arr.request().ptr));
    return arr;
}

py::array_t<float> array_from_dataset(const Dataset& ds) {
    Tensor t({static_cast<int>(ds.size()), 3, ds.h, ds.w});
    t.v.assign(ds.pixels.begin(), ds.pixels.end());
    return array_from_tensor(t);
}

CodebookSpec spec_from_args(const std::vector<std::pair<uint32_t, uint32_t>>& layers,
                            uint32_t n_clusters, uint64_t seed) {
    CodebookSpec spec;
    for (auto [n, k] : layers) spec.layers.push_back({n, k});
    spec.n_clusters = n_clusters;
    spec.seed = seed;
    spec.validate();
    return spec;
}

py::object py_int_from_decimal(const std::string& s) {
    PyObject* v = PyLong_FromString(s.c_str(), nullptr, 10);
    if (!v) throw py::error_already_set();
    return py::reinterpret_steal<py::object>(v);
}

BigUint biguint_from_py(const py::object& obj) {
    return BigUint::from_string(py::cast<std::string>(py::str(obj)));
}

}  // namespace

PYBIND11_MODULE(deciphering_ae, m) {
    m.doc() = "deciphering-autoencoder toolkit: dropout-pattern codebooks, the "
              "pattern-conditioned generator, training and sampling";
    m.attr("__version__") = kToolkitVersion;

    py::register_exception<Error>(m, "ToolkitError");

    // codebook
    m.def(
        "capacity",
        [](const std::vector<std::pair<uint32_t, uint32_t>>& layers, uint32_t n_clusters) {
            return py_int_from_decimal(capacity(spec_from_args(layers, n_clusters, 0)).to_string());
        },
        py::arg("layers"), py::arg("n_clusters") = 1,
        "Exact number of expressible dropout patterns.");

    m.def(
        "unrank_subset",
        [](uint32_t n, uint32_t k, const py::object& rank) {
            return unrank_subset(n, k, biguint_from_py(rank));
        },
        py::arg("n"), py::arg("k"), py::arg("rank"));

    m.def(
        "rank_subset",
        [](uint32_t n, const std::vector<uint32_t>& indices) {
            return py_int_from_decimal(rank_subset(n, indices).to_string());
        },
        py::arg("n"), py::arg("indices"));

    m.def(
        "assign_patterns",
        [](uint64_t n_items, const std::vector<std::pair<uint32_t, uint32_t>>& layers,
           uint64_t seed, uint32_t n_clusters,
           const std::optional<std::vector<uint16_t>>& cluster_of) {
            CodebookSpec spec = spec_from_args(layers, n_clusters, seed);
            Codebook cb = assign_patterns(n_items, spec, cluster_of ? &*cluster_of : nullptr);
            std::vector<std::vector<std::vector<uint32_t>>> out;
            out.reserve(cb.size());
            for (const auto& p : cb.patterns) out.push_back(p.per_layer);
            return out;
        },
        py::arg("n_items"), py::arg("layers"), py::arg("seed") = 0, py::arg("n_clusters") = 1,
        py::arg("cluster_of") = std::nullopt,
        "Unique dropout pattern per item; returns per-item per-layer index lists.");

    m.def(
        "make_codebook",
        [](uint64_t n_items, const std::vector<std::pair<uint32_t, uint32_t>>& layers,
           uint64_t seed, const std::string& out_path, uint32_t n_clusters,
           const std::optional<std::vector<uint16_t>>& cluster_of) {
            CodebookSpec spec = spec_from_args(layers, n_clusters, seed);
            Codebook cb = assign_patterns(n_items, spec, cluster_of ? &*cluster_of : nullptr);
            save_codebook(cb, out_path);
            return cb.retries;
        },
        py::arg("n_items"), py::arg("layers"), py::arg("seed"), py::arg("out_path"),
        py::arg("n_clusters") = 1, py::arg("cluster_of") = std::nullopt);

    m.def(
        "sample_novel_patterns",
        [](const std::vector<std::pair<uint32_t, uint32_t>>& layers, int count, uint64_t seed,
           uint32_t n_clusters, const std::optional<std::vector<double>>& cluster_weights) {
            CodebookSpec spec = spec_from_args(layers, n_clusters, seed);
            Pcg32 rng(mix_seed(seed, 0x5A3D));
            std::vector<std::vector<std::vector<uint32_t>>> out;
            for (int i = 0; i < count; ++i)
                out.push_back(
                    sample_novel_pattern(spec, cluster_weights ? &*cluster_weights : nullptr, rng)
                        .per_layer);
            return out;
        },
        py::arg("layers"), py::arg("count") = 1, py::arg("seed") = 0, py::arg("n_clusters") = 1,
        py::arg("cluster_weights") = std::nullopt);

    // data
    m.def(
        "load_cifar10",
        [](const std::string& dir) {
            Dataset ds = load_cifar10(dir);
            return py::make_tuple(array_from_dataset(ds), py::array(py::cast(ds.labels)));
        },
        py::arg("dir"));
    m.def(
        "load_cifar10_file",
        [](const std::string& path) {
            Dataset ds = load_cifar10_file(path);
            return py::make_tuple(array_from_dataset(ds), py::array(py::cast(ds.labels)));
        },
        py::arg("path"));
    m.def(
        "synth_dataset",
        [](size_t n, uint64_t seed, int hw) {
            return array_from_dataset(synth_dataset(n, seed, hw, hw));
        },
        py::arg("n"), py::arg("seed") = 0, py::arg("hw") = 32);
    m.def(
        "shift_transform",
        [](const FloatArray& x, int r, int max_shift) {
            return array_from_tensor(shift_transform(tensor_from_array(x), r, max_shift));
        },
        py::arg("images"), py::arg("r"), py::arg("max_shift") = 8);

    // clustering
    m.def(
        "kmeans_fit",
        [](const FloatArray& images, uint32_t k, uint64_t seed, int max_iters, double tol) {
            py::buffer_info info = images.request();
            if (info.ndim != 4 || info.shape[1] != 3)
                throw ClusterConfigError("images must be (n, 3, h, w)");
            Dataset ds;
            ds.h = static_cast<int>(info.shape[2]);
            ds.w = static_cast<int>(info.shape[3]);
            const float* p = static_cast<const float*>(info.ptr);
            ds.pixels.assign(p, p + info.size);
            KmeansResult res = kmeans_fit(ds, k, seed, max_iters, tol);
            py::array_t<float> centroids({static_cast<py::ssize_t>(k),
                                          static_cast<py::ssize_t>(res.model.dim)});
            std::copy(res.model.centroids.begin(), res.model.centroids.end(),
                      static_cast<float*>(centroids.request().ptr));
            return py::make_tuple(centroids, py::array(py::cast(res.assignments)),
                                  res.model.inertia, res.iterations);
        },
        py::arg("images"), py::arg("k"), py::arg("seed") = 0, py::arg("max_iters") = 100,
        py::arg("tol") = 1e-4);

    // training & sampling
    m.def(
        "train",
        [](const std::string& config_path, const std::string& resume_path) {
            TrainConfig cfg = TrainConfig::from_file(config_path);
            Trainer trainer(cfg);
            std::string ckpt = trainer.run(resume_path);
            py::dict out;
            out["checkpoint"] = ckpt;
            out["epochs"] = trainer.epoch();
            out["steps"] = trainer.step();
            out["final_loss"] =
                trainer.history().empty() ? 0.0 : trainer.history().back().mean_loss;
            return out;
        },
        py::arg("config_path"), py::arg("resume_path") = std::string(),
        "Run the two-phase schedule described by a key = value config file.");

    m.def(
        "generate",
        [](const std::string& checkpoint, int count, uint64_t seed, bool use_ema,
           const std::optional<std::vector<double>>& cluster_weights) {
            CheckpointData cd = CheckpointData::load(checkpoint);
            SampleRequest req;
            req.count = count;
            req.seed = seed;
            req.use_ema = use_ema;
            if (cluster_weights) req.cluster_weights = *cluster_weights;
            return array_from_tensor(generate(cd, req));
        },
        py::arg("checkpoint"), py::arg("count") = 16, py::arg("seed") = 0,
        py::arg("use_ema") = true, py::arg("cluster_weights") = std::nullopt);

    m.def(
        "reconstruct",
        [](const std::string& checkpoint, const std::string& codebook,
           const std::vector<uint32_t>& indices, bool use_ema) {
            CheckpointData cd = CheckpointData::load(checkpoint);
            Codebook cb = load_codebook(codebook);
            return array_from_tensor(reconstruct(cd, cb, indices, use_ema));
        },
        py::arg("checkpoint"), py::arg("codebook"), py::arg("indices"), py::arg("use_ema") = true);

    m.def(
        "psnr",
        [](const FloatArray& a, const FloatArray& b) {
            return py::array(py::cast(psnr(tensor_from_array(a), tensor_from_array(b))));
        },
        py::arg("a"), py::arg("b"));

    m.def(
        "export_png",
        [](const FloatArray& images, const std::string& dir) {
            export_for_fid(tensor_from_array(images), dir);
        },
        py::arg("images"), py::arg("dir"));

    m.def("write_feature_asset", &write_random_feature_asset, py::arg("path"),
          py::arg("channels"), py::arg("seed") = 0,
          "Seeded random conv stack in the perceptual-asset layout (for smoke tests).");

    m.def("set_threads", &set_max_threads, py::arg("n"));
}
