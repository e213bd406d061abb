// da: command-line driver for the deciphering-autoencoder toolkit.
//
// Subcommands cover the whole pipeline: cluster -> codebook -> train ->
// sample / reconstruct / eval. Every command is deterministic given its
// flags; seeds are always explicit.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "da/clustering.hpp"
#include "da/image_io.hpp"
#include "da/sampling.hpp"
#include "da/train.hpp"

namespace fs = std::filesystem;
using namespace da;

namespace {

std::vector<uint32_t> parse_index_list(const std::string& s) {
    std::vector<uint32_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        size_t colon = item.find(':');
        if (colon != std::string::npos) {  // half-open range a:b
            uint32_t a = static_cast<uint32_t>(std::stoul(item.substr(0, colon)));
            uint32_t b = static_cast<uint32_t>(std::stoul(item.substr(colon + 1)));
            for (uint32_t i = a; i < b; ++i) out.push_back(i);
        } else {
            out.push_back(static_cast<uint32_t>(std::stoul(item)));
        }
    }
    return out;
}

CodebookSpec parse_spec(const std::string& s, uint32_t n_clusters, uint64_t seed) {
    CodebookSpec spec;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError("--spec entries must be n:k, got " + item);
        spec.layers.push_back({static_cast<uint32_t>(std::stoul(item.substr(0, colon))),
                               static_cast<uint32_t>(std::stoul(item.substr(colon + 1)))});
    }
    spec.n_clusters = n_clusters;
    spec.seed = seed;
    spec.validate();
    return spec;
}

Dataset load_data_args(const std::string& kind, const std::string& path, int synth_n,
                       int synth_hw, uint64_t seed) {
    TrainConfig shim;
    shim.data_kind = kind;
    shim.data_path = path;
    shim.synth_n = synth_n;
    shim.synth_hw = synth_hw;
    shim.seed = seed;
    return load_dataset(shim);
}

std::optional<Dataset> dataset_from_checkpoint(const CheckpointData& cd) {
    try {
        const std::string kind = cd.file.meta_at("data.kind");
        Dataset ds;
        if (kind == "synthetic") {
            const int hw = std::stoi(cd.file.meta_at("data.synth_hw"));
            const uint64_t seed = std::stoull(cd.file.meta_at("data.synth_seed"));
            ds = synth_dataset(cd.data_n, seed, hw, hw);
        } else {
            ds = load_data_args(kind, cd.data_path, 0, 0, 0);
        }
        if (ds.content_hash() != cd.data_hash) return std::nullopt;
        return ds;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

Codebook codebook_for_checkpoint(const CheckpointData& cd, const std::string& override_path) {
    const std::string path = override_path.empty() ? cd.codebook_path : override_path;
    if (path.empty()) throw RunConfigError("no codebook path (use --codebook)");
    if (!fs::exists(path)) throw RunConfigError("codebook file missing: " + path);
    if (override_path.empty() && fnv1a_file(path) != cd.codebook_hash)
        throw RunConfigError("codebook file changed since training: " + path);
    return load_codebook(path);
}

int cmd_cluster(const std::string& kind, const std::string& data, int synth_n, int synth_hw,
                uint32_t k, uint64_t seed, int iters, double tol, const std::string& out) {
    Dataset ds = load_data_args(kind, data, synth_n, synth_hw, seed);
    std::printf("loaded %zu images (%dx%d)\n", ds.size(), ds.h, ds.w);
    KmeansResult res = kmeans_fit(ds, k, seed, iters, tol);
    save_clusters(res.model, res.assignments, out);
    std::printf("k = %u  iterations = %d  inertia = %.6g\n", k, res.iterations,
                res.model.inertia);
    std::vector<size_t> hist(k, 0);
    for (uint16_t a : res.assignments) ++hist[a];
    std::printf("cluster histogram:");
    for (size_t c = 0; c < hist.size(); ++c) std::printf(" %zu", hist[c]);
    std::printf("\nwrote %s\n", out.c_str());
    return 0;
}

int cmd_codebook(uint64_t n, const std::string& spec_str, const std::string& clusters_path,
                 uint64_t seed, const std::string& out) {
    uint32_t n_clusters = 1;
    std::vector<uint16_t> cluster_of;
    if (!clusters_path.empty()) {
        auto [model, assignments] = load_clusters(clusters_path);
        if (assignments.size() != n)
            throw RunConfigError("cluster file has " + std::to_string(assignments.size()) +
                                 " assignments, --n is " + std::to_string(n));
        n_clusters = model.k;
        cluster_of = std::move(assignments);
    }
    CodebookSpec spec = parse_spec(spec_str, n_clusters, seed);
    std::printf("capacity = %s\n", capacity(spec).to_scientific(3).c_str());
    Codebook cb = assign_patterns(n, spec, cluster_of.empty() ? nullptr : &cluster_of);
    save_codebook(cb, out);
    std::printf("assigned %zu unique patterns (collision retries: %llu)\nwrote %s\n", cb.size(),
                static_cast<unsigned long long>(cb.retries), out.c_str());
    return 0;
}

int cmd_train(const std::string& config_path, bool resume, std::string resume_path) {
    TrainConfig cfg = TrainConfig::from_file(config_path);
    Trainer trainer(cfg);
    if (resume && resume_path.empty())
        resume_path = (fs::path(cfg.out_dir) / "checkpoint_last.dawt").string();
    std::string final_ckpt = trainer.run(resume_path);
    std::printf("finished at epoch %lld; final checkpoint: %s\n",
                static_cast<long long>(trainer.epoch()), final_ckpt.c_str());
    return 0;
}

void write_images(const Tensor& images, const std::string& out_dir) {
    export_for_fid(images, out_dir);
    write_png_grid(images, (fs::path(out_dir) / "grid.png").string(), 8);
}

int cmd_sample(const std::string& ckpt_path, int count, uint64_t seed, const std::string& out,
               bool uniform_clusters, bool no_ema) {
    CheckpointData cd = CheckpointData::load(ckpt_path);
    SampleRequest req;
    req.count = count;
    req.seed = seed;
    req.use_ema = !no_ema;
    if (uniform_clusters && cd.cb_spec.clustered())
        req.cluster_weights.assign(cd.cb_spec.n_clusters, 1.0);
    Tensor images = generate(cd, req);
    write_images(images, out);

    if (count >= 2) {
        std::optional<Dataset> train_ds = dataset_from_checkpoint(cd);
        DiversityReport rep = diversity_report(images, train_ds ? &*train_ds : nullptr);
        std::ofstream((fs::path(out) / "diversity.txt").string()) << diversity_text(rep);
        std::printf("pairwise L2: min %.4g mean %.4g%s\n", rep.min_pairwise, rep.mean_pairwise,
                    train_ds ? "" : " (training set unavailable; no NN column)");
    }
    std::printf("wrote %d samples to %s\n", count, out.c_str());
    return 0;
}

int cmd_reconstruct(const std::string& ckpt_path, const std::string& indices_str,
                    const std::string& out, const std::string& codebook_path, bool no_ema) {
    CheckpointData cd = CheckpointData::load(ckpt_path);
    Codebook cb = codebook_for_checkpoint(cd, codebook_path);
    std::vector<uint32_t> indices = parse_index_list(indices_str);
    if (indices.empty()) throw ConfigError("no indices given");
    Tensor images = reconstruct(cd, cb, indices, !no_ema);
    write_images(images, out);
    for (uint32_t i : indices)
        std::printf("%u\tpattern_hash %016llx\n", i,
                    static_cast<unsigned long long>(cb.patterns[i].hash()));
    std::printf("wrote %zu reconstructions to %s\n", indices.size(), out.c_str());
    return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& out,
             const std::string& codebook_path, const std::string& data_kind,
             const std::string& data_path, int count, bool no_ema) {
    CheckpointData cd = CheckpointData::load(ckpt_path);
    Codebook cb = codebook_for_checkpoint(cd, codebook_path);

    std::optional<Dataset> ds;
    if (!data_kind.empty())
        ds = load_data_args(data_kind, data_path, static_cast<int>(cd.data_n),
                            std::stoi(cd.file.meta_at("model.out_hw")), 0);
    else
        ds = dataset_from_checkpoint(cd);
    if (!ds) throw RunConfigError("training data unavailable; pass --data-kind/--data");

    const uint32_t n = static_cast<uint32_t>(ds->size());
    count = std::min<int>(count, static_cast<int>(n));
    std::vector<uint32_t> indices;
    for (int i = 0; i < count; ++i)
        indices.push_back(static_cast<uint32_t>(static_cast<uint64_t>(i) * n / count));

    Tensor recon = reconstruct(cd, cb, indices, !no_ema);
    Tensor originals = ds->gather(indices);
    auto db = psnr(recon, originals);
    std::string table = psnr_table(indices, db);
    fs::create_directories(out);
    std::ofstream((fs::path(out) / "psnr.txt").string()) << table;
    write_png_grid(recon, (fs::path(out) / "recon_grid.png").string(), 8);
    write_png_grid(originals, (fs::path(out) / "original_grid.png").string(), 8);

    double mean = 0;
    for (double v : db) mean += std::min(v, 99.0);
    mean /= static_cast<double>(db.size());
    std::printf("%s", table.c_str());
    std::printf("reconstruction PSNR over %d held indices: mean %.2f dB\n", count, mean);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    set_max_threads(-1);  // honor DA_THREADS

    CLI::App app{"deciphering-autoencoder toolkit"};
    app.require_subcommand(1);

    // cluster
    auto* cluster = app.add_subcommand("cluster", "k-means over training images -> DACL file");
    std::string cl_kind = "cifar10", cl_data, cl_out;
    int cl_synth_n = 64, cl_synth_hw = 32, cl_iters = 100;
    uint32_t cl_k = 32;
    uint64_t cl_seed = 0;
    double cl_tol = 1e-4;
    cluster->add_option("--data", cl_data, "dataset path (dir for cifar10, file otherwise)");
    cluster->add_option("--data-kind", cl_kind, "cifar10|cifar10_bin|celeba_daim|synthetic");
    cluster->add_option("--synth-n", cl_synth_n, "image count for synthetic data");
    cluster->add_option("--synth-hw", cl_synth_hw, "image size for synthetic data");
    cluster->add_option("--k", cl_k, "number of clusters (1 = degenerate single cluster)");
    cluster->add_option("--seed", cl_seed, "seeding RNG");
    cluster->add_option("--iters", cl_iters, "Lloyd iteration cap");
    cluster->add_option("--tol", cl_tol, "centroid-shift stop tolerance");
    cluster->add_option("--out", cl_out, "output DACL path")->required();

    // codebook
    auto* codebook = app.add_subcommand("codebook", "assign unique dropout patterns -> DACB file");
    uint64_t cb_n = 0, cb_seed = 0;
    std::string cb_spec = "128:1,256:4,512:16", cb_clusters, cb_out;
    codebook->add_option("--n", cb_n, "number of training items")->required();
    codebook->add_option("--spec", cb_spec, "per-layer n:k list");
    codebook->add_option("--clusters", cb_clusters, "DACL file; encodes ids in the first layer");
    codebook->add_option("--seed", cb_seed, "assignment RNG seed");
    codebook->add_option("--out", cb_out, "output DACB path")->required();

    // train
    auto* train = app.add_subcommand("train", "run the two-phase training schedule");
    std::string tr_config, tr_resume_path;
    bool tr_resume = false;
    train->add_option("--config", tr_config, "run config file (key = value lines)")->required();
    train->add_flag("--resume", tr_resume, "resume from out_dir/checkpoint_last.dawt");
    train->add_option("--resume-path", tr_resume_path, "resume from an explicit checkpoint");

    // sample
    auto* sample = app.add_subcommand("sample", "novel images from fresh dropout patterns");
    std::string sm_ckpt, sm_out;
    int sm_count = 64;
    uint64_t sm_seed = 0;
    bool sm_uniform = false, sm_no_ema = false;
    sample->add_option("--checkpoint", sm_ckpt, "DAWT checkpoint")->required();
    sample->add_option("--count", sm_count, "number of samples");
    sample->add_option("--seed", sm_seed, "sampling RNG seed");
    sample->add_option("--out", sm_out, "output directory")->required();
    sample->add_flag("--uniform-clusters", sm_uniform,
                     "uniform cluster weights instead of training occupancy");
    sample->add_flag("--no-ema", sm_no_ema, "use live weights instead of the EMA shadow");

    // reconstruct
    auto* rec = app.add_subcommand("reconstruct", "decode stored training patterns");
    std::string rc_ckpt, rc_indices = "0:8", rc_out, rc_codebook;
    bool rc_no_ema = false;
    rec->add_option("--checkpoint", rc_ckpt, "DAWT checkpoint")->required();
    rec->add_option("--indices", rc_indices, "comma list and a:b ranges, e.g. 0,5,16:24");
    rec->add_option("--out", rc_out, "output directory")->required();
    rec->add_option("--codebook", rc_codebook, "override the codebook recorded in the checkpoint");
    rec->add_flag("--no-ema", rc_no_ema, "use live weights");

    // eval
    auto* eval = app.add_subcommand("eval", "reconstruction PSNR table over held indices");
    std::string ev_ckpt, ev_out, ev_codebook, ev_data_kind, ev_data;
    int ev_count = 64;
    bool ev_no_ema = false;
    eval->add_option("--checkpoint", ev_ckpt, "DAWT checkpoint")->required();
    eval->add_option("--out", ev_out, "output directory")->required();
    eval->add_option("--codebook", ev_codebook, "override codebook path");
    eval->add_option("--data-kind", ev_data_kind, "override dataset kind");
    eval->add_option("--data", ev_data, "override dataset path");
    eval->add_option("--count", ev_count, "held index sample size");
    eval->add_flag("--no-ema", ev_no_ema, "use live weights");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cluster->parsed())
            return cmd_cluster(cl_kind, cl_data, cl_synth_n, cl_synth_hw, cl_k, cl_seed,
                               cl_iters, cl_tol, cl_out);
        if (codebook->parsed()) return cmd_codebook(cb_n, cb_spec, cb_clusters, cb_seed, cb_out);
        if (train->parsed()) return cmd_train(tr_config, tr_resume, tr_resume_path);
        if (sample->parsed())
            return cmd_sample(sm_ckpt, sm_count, sm_seed, sm_out, sm_uniform, sm_no_ema);
        if (rec->parsed()) return cmd_reconstruct(rc_ckpt, rc_indices, rc_out, rc_codebook,
                                                  rc_no_ema);
        if (eval->parsed())
            return cmd_eval(ev_ckpt, ev_out, ev_codebook, ev_data_kind, ev_data, ev_count,
                            ev_no_ema);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.family());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
