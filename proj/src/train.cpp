#include "da/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace da {

namespace {

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoi(item));
    }
    return out;
}

std::string join_int_list(const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

TrainConfig TrainConfig::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw RunConfigError("cannot open config: " + path);
    TrainConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t sep = t.find('=');
        if (sep == std::string::npos)
            throw RunConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        cfg.apply(trim(t.substr(0, sep)), trim(t.substr(sep + 1)));
    }
    cfg.validate();
    return cfg;
}

void TrainConfig::apply(const std::string& key, const std::string& value) {
    try {
        if (key == "lr_main") lr_main = std::stod(value);
        else if (key == "lr_mlp") lr_mlp = std::stod(value);
        else if (key == "batch_size") batch_size = std::stoi(value);
        else if (key == "epochs_phase1") epochs_phase1 = std::stoi(value);
        else if (key == "epochs_phase2") epochs_phase2 = std::stoi(value);
        else if (key == "wd_max") wd_max = std::stod(value);
        else if (key == "wd_warmup_epochs") wd_warmup_epochs = std::stoi(value);
        else if (key == "ema_decay") ema_decay = std::stod(value);
        else if (key == "max_shift") max_shift = std::stoi(value);
        else if (key == "distance") distance = value;
        else if (key == "seed") seed = std::stoull(value);
        else if (key == "perceptual_asset") perceptual_asset = value;
        else if (key == "data_kind") data_kind = value;
        else if (key == "data_path") data_path = value;
        else if (key == "synth_n") synth_n = std::stoi(value);
        else if (key == "synth_hw") synth_hw = std::stoi(value);
        else if (key == "codebook") codebook_path = value;
        else if (key == "clusters") clusters_path = value;
        else if (key == "out_dir") out_dir = value;
        else if (key == "checkpoint_every") checkpoint_every = std::stoi(value);
        else if (key == "hierarchy_channels") model.hierarchy_channels = parse_int_list(value);
        else if (key == "active_channels") model.active_channels = parse_int_list(value);
        else if (key == "latent_dim") model.latent_dim = std::stoi(value);
        else if (key == "encoder_spatial") model.encoder_spatial = std::stoi(value);
        else if (key == "blocks_per_hierarchy") model.blocks_per_hierarchy = std::stoi(value);
        else if (key == "decoder_groups") model.decoder_groups = std::stoi(value);
        else if (key == "mlp_hidden") model.mlp_hidden = std::stoi(value);
        else if (key == "out_hw") model.out_hw = std::stoi(value);
        else if (key == "shift_condition") {
            if (value == "add") model.shift_concat = false;
            else if (value == "concat") model.shift_concat = true;
            else throw RunConfigError("shift_condition must be add or concat");
        }
        else throw RunConfigError("unknown config key: " + key);
    } catch (const std::invalid_argument&) {
        throw RunConfigError("bad value for " + key + ": " + value);
    } catch (const std::out_of_range&) {
        throw RunConfigError("value out of range for " + key + ": " + value);
    }
}

void TrainConfig::validate() const {
    if (lr_main <= 0 || lr_mlp <= 0) throw RunConfigError("learning rates must be > 0");
    if (batch_size < 1) throw RunConfigError("batch_size must be >= 1");
    if (epochs_phase1 < 0 || epochs_phase2 < 0) throw RunConfigError("epoch counts must be >= 0");
    if (wd_max < 0) throw RunConfigError("wd_max must be >= 0");
    if (wd_warmup_epochs < 0) throw RunConfigError("wd_warmup_epochs must be >= 0");
    if (wd_warmup_epochs > epochs_phase1)
        throw RunConfigError("wd_warmup_epochs must be <= epochs_phase1");
    if (ema_decay < 0 || ema_decay >= 1) throw RunConfigError("ema_decay must be in [0,1)");
    if (max_shift < 0) throw RunConfigError("max_shift must be >= 0");
    if (distance != "mse" && distance != "perceptual")
        throw RunConfigError("distance must be mse or perceptual");
    if (checkpoint_every < 1) throw RunConfigError("checkpoint_every must be >= 1");
    if (data_kind != "cifar10" && data_kind != "cifar10_bin" && data_kind != "celeba_daim" &&
        data_kind != "synthetic")
        throw RunConfigError("unknown data_kind: " + data_kind);
    ModelConfig m = model;
    m.max_shift = max_shift;
    m.validate();
}

std::string TrainConfig::canonical_text() const {
    std::string s;
    s += "active_channels = " + join_int_list(model.active_channels) + "\n";
    s += "batch_size = " + std::to_string(batch_size) + "\n";
    s += "blocks_per_hierarchy = " + std::to_string(model.blocks_per_hierarchy) + "\n";
    s += "checkpoint_every = " + std::to_string(checkpoint_every) + "\n";
    s += "clusters = " + clusters_path + "\n";
    s += "codebook = " + codebook_path + "\n";
    s += "data_kind = " + data_kind + "\n";
    s += "data_path = " + data_path + "\n";
    s += "decoder_groups = " + std::to_string(model.decoder_groups) + "\n";
    s += "distance = " + distance + "\n";
    s += "ema_decay = " + fmt_double(ema_decay) + "\n";
    s += "encoder_spatial = " + std::to_string(model.encoder_spatial) + "\n";
    s += "epochs_phase1 = " + std::to_string(epochs_phase1) + "\n";
    s += "epochs_phase2 = " + std::to_string(epochs_phase2) + "\n";
    s += "hierarchy_channels = " + join_int_list(model.hierarchy_channels) + "\n";
    s += "latent_dim = " + std::to_string(model.latent_dim) + "\n";
    s += "lr_main = " + fmt_double(lr_main) + "\n";
    s += "lr_mlp = " + fmt_double(lr_mlp) + "\n";
    s += "max_shift = " + std::to_string(max_shift) + "\n";
    s += "mlp_hidden = " + std::to_string(model.mlp_hidden) + "\n";
    // out_dir is intentionally absent: the hash identifies the training
    // semantics, not where a run stores its artifacts.
    s += "out_hw = " + std::to_string(model.out_hw) + "\n";
    s += "perceptual_asset = " + perceptual_asset + "\n";
    s += "seed = " + std::to_string(seed) + "\n";
    s += "shift_condition = " + std::string(model.shift_concat ? "concat" : "add") + "\n";
    s += "synth_hw = " + std::to_string(synth_hw) + "\n";
    s += "synth_n = " + std::to_string(synth_n) + "\n";
    s += "wd_max = " + fmt_double(wd_max) + "\n";
    s += "wd_warmup_epochs = " + std::to_string(wd_warmup_epochs) + "\n";
    return s;
}

uint64_t TrainConfig::config_hash() const {
    std::string t = canonical_text();
    return fnv1a(t.data(), t.size());
}

Dataset load_dataset(const TrainConfig& cfg) {
    if (cfg.data_kind == "cifar10") return load_cifar10(cfg.data_path);
    if (cfg.data_kind == "cifar10_bin") return load_cifar10_file(cfg.data_path);
    if (cfg.data_kind == "celeba_daim") return load_celeba_packed(cfg.data_path);
    return synth_dataset(static_cast<size_t>(cfg.synth_n), cfg.seed, cfg.synth_hw, cfg.synth_hw);
}

// ---------------------------------------------------------------------------
// checkpoint metadata helpers
// ---------------------------------------------------------------------------

void model_cfg_to_meta(TensorFile& tf, const ModelConfig& cfg) {
    tf.set_meta("model.hierarchy_channels", join_int_list(cfg.hierarchy_channels));
    tf.set_meta("model.active_channels", join_int_list(cfg.active_channels));
    tf.set_meta("model.latent_dim", std::to_string(cfg.latent_dim));
    tf.set_meta("model.encoder_spatial", std::to_string(cfg.encoder_spatial));
    tf.set_meta("model.blocks_per_hierarchy", std::to_string(cfg.blocks_per_hierarchy));
    tf.set_meta("model.decoder_groups", std::to_string(cfg.decoder_groups));
    tf.set_meta("model.mlp_hidden", std::to_string(cfg.mlp_hidden));
    tf.set_meta("model.out_hw", std::to_string(cfg.out_hw));
    tf.set_meta("model.max_shift", std::to_string(cfg.max_shift));
    tf.set_meta("model.shift_condition", cfg.shift_concat ? "concat" : "add");
}

ModelConfig model_cfg_from_meta(const TensorFile& tf) {
    ModelConfig cfg;
    try {
        cfg.hierarchy_channels = parse_int_list(tf.meta_at("model.hierarchy_channels"));
        cfg.active_channels = parse_int_list(tf.meta_at("model.active_channels"));
        cfg.latent_dim = std::stoi(tf.meta_at("model.latent_dim"));
        cfg.encoder_spatial = std::stoi(tf.meta_at("model.encoder_spatial"));
        cfg.blocks_per_hierarchy = std::stoi(tf.meta_at("model.blocks_per_hierarchy"));
        cfg.decoder_groups = std::stoi(tf.meta_at("model.decoder_groups"));
        cfg.mlp_hidden = std::stoi(tf.meta_at("model.mlp_hidden"));
        cfg.out_hw = std::stoi(tf.meta_at("model.out_hw"));
        cfg.max_shift = std::stoi(tf.meta_at("model.max_shift"));
        cfg.shift_concat = tf.meta_at("model.shift_condition") == "concat";
    } catch (const std::exception& e) {
        throw CheckpointFormatError(std::string("bad model config block: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

namespace {

void cbspec_to_meta(TensorFile& tf, const CodebookSpec& spec) {
    std::string layers;
    for (size_t i = 0; i < spec.layers.size(); ++i)
        layers += (i ? "," : "") + std::to_string(spec.layers[i].n_channels) + ":" +
                  std::to_string(spec.layers[i].k_active);
    tf.set_meta("codebook.layers", layers);
    tf.set_meta("codebook.n_clusters", std::to_string(spec.n_clusters));
    tf.set_meta("codebook.seed", std::to_string(spec.seed));
}

CodebookSpec cbspec_from_meta(const TensorFile& tf) {
    CodebookSpec spec;
    std::stringstream ss(tf.meta_at("codebook.layers"));
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t sep = item.find(':');
        if (sep == std::string::npos) throw CheckpointFormatError("bad codebook.layers entry");
        spec.layers.push_back({static_cast<uint32_t>(std::stoul(item.substr(0, sep))),
                               static_cast<uint32_t>(std::stoul(item.substr(sep + 1)))});
    }
    spec.n_clusters = static_cast<uint32_t>(std::stoul(tf.meta_at("codebook.n_clusters")));
    spec.seed = std::stoull(tf.meta_at("codebook.seed"));
    spec.validate();
    return spec;
}

void load_tensor_into(const TensorFile& tf, const std::string& name, Tensor& dst) {
    const Tensor& src = tf.at(name);
    if (src.shape != dst.shape) throw CheckpointFormatError("shape mismatch for " + name);
    dst.v = src.v;
}

}  // namespace

CheckpointData CheckpointData::load(const std::string& path) {
    CheckpointData cd;
    cd.file = TensorFile::load(path);
    if (cd.file.has_meta("kind") && cd.file.meta_at("kind") != "checkpoint")
        throw CheckpointFormatError(path + " is not a checkpoint (kind = " +
                                    cd.file.meta_at("kind") + ")");
    cd.model_cfg = model_cfg_from_meta(cd.file);
    cd.cb_spec = cbspec_from_meta(cd.file);
    cd.epoch = std::stoll(cd.file.meta_at("epoch"));
    cd.step = std::stoll(cd.file.meta_at("step"));
    cd.codebook_path = cd.file.has_meta("codebook.path") ? cd.file.meta_at("codebook.path") : "";
    cd.data_path = cd.file.has_meta("data.path") ? cd.file.meta_at("data.path") : "";
    cd.codebook_hash = std::stoull(cd.file.meta_at("codebook.hash"));
    cd.data_hash = std::stoull(cd.file.meta_at("data.hash"));
    cd.data_n = std::stoull(cd.file.meta_at("data.n"));
    if (const Tensor* occ = cd.file.find("meta.cluster_occupancy")) {
        cd.cluster_occupancy.assign(occ->v.begin(), occ->v.end());
    }
    return cd;
}

Generator<float> CheckpointData::build_generator(bool use_ema) const {
    Generator<float> gen(model_cfg);
    auto& ps = gen.params();
    const std::string prefix = use_ema ? "ema." : "param.";
    for (auto& p : ps.params) load_tensor_into(file, prefix + p.name, *p.value);
    for (auto& b : ps.buffers) load_tensor_into(file, "buf." + b.name, *b.value);
    return gen;
}

// ---------------------------------------------------------------------------
// Trainer
// ---------------------------------------------------------------------------

Trainer::Trainer(TrainConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    cfg_.model.max_shift = cfg_.max_shift;

    ds_ = load_dataset(cfg_);
    if (ds_.size() == 0) throw RunConfigError("dataset is empty");

    if (cfg_.codebook_path.empty()) throw RunConfigError("codebook path not set");
    if (!fs::exists(cfg_.codebook_path))
        throw RunConfigError("codebook file missing: " + cfg_.codebook_path);
    cb_ = load_codebook(cfg_.codebook_path);
    if (cb_.size() != ds_.size())
        throw RunConfigError("codebook has " + std::to_string(cb_.size()) + " patterns, dataset " +
                             std::to_string(ds_.size()) + " images");
    const auto& hc = cfg_.model.hierarchy_channels;
    const auto& ac = cfg_.model.active_channels;
    if (cb_.spec.layers.size() != hc.size())
        throw RunConfigError("codebook layer count != model hierarchy count");
    for (size_t l = 0; l < hc.size(); ++l)
        if (cb_.spec.layers[l].n_channels != static_cast<uint32_t>(hc[l]) ||
            cb_.spec.layers[l].k_active != static_cast<uint32_t>(ac[l]))
            throw RunConfigError("codebook layer " + std::to_string(l) +
                                 " does not match model config");
    if (cfg_.model.out_hw != ds_.h || ds_.h != ds_.w)
        throw RunConfigError("model out_hw != dataset image size");

    model_ = std::make_unique<Generator<float>>(cfg_.model);
    model_->init(mix_seed(cfg_.seed, 0));
    opt_ = std::make_unique<AdamW<float>>(model_->params());
    ema_ = Ema<float>(model_->params());
    distance_ = make_distance<float>(cfg_.distance, cfg_.perceptual_asset);
    shift_rng_ = Pcg32(mix_seed(cfg_.seed, 1));
    shuffle_rng_ = Pcg32(mix_seed(cfg_.seed, 2));
}

double Trainer::train_step(const std::vector<uint32_t>& indices, int phase) {
    const int b = static_cast<int>(indices.size());
    Tensor x = ds_.gather(indices);
    std::vector<int> shifts(b, 0);
    Tensor target;
    if (phase == 1 && cfg_.max_shift > 0) {
        for (int n = 0; n < b; ++n) shifts[n] = shift_rng_.uniform_int(-cfg_.max_shift, cfg_.max_shift);
        target = Tensor(x.shape);
        const int c = x.dim(1), h = x.dim(2), w = x.dim(3);
        for (int n = 0; n < b; ++n) {
            const int r = shifts[n];
            for (int ch = 0; ch < c; ++ch)
                for (int i = 0; i < h; ++i) {
                    const float* xr = &x.at4(n, ch, i, 0);
                    float* tr = &target.at4(n, ch, i, 0);
                    for (int j = 0; j < w; ++j) {
                        const int src = j - r;
                        tr[j] = (src >= 0 && src < w) ? xr[src] : 0.0f;
                    }
                }
        }
    } else {
        target = x;
    }

    std::vector<const DropoutPattern*> patterns(b);
    for (int n = 0; n < b; ++n) patterns[n] = &cb_.patterns[indices[n]];

    Tensor yhat = model_->forward(patterns, shifts, /*train=*/true);
    LossGrad<float> lg = (*distance_)(yhat, target, /*need_grad=*/true);
    if (!std::isfinite(lg.loss)) {
        fs::create_directories(cfg_.out_dir);
        save_checkpoint((fs::path(cfg_.out_dir) / "checkpoint_diverged.dawt").string());
        throw DivergenceError("non-finite loss at step " + std::to_string(step_));
    }
    model_->zero_grads();
    model_->backward(lg.grad);
    const float wd = static_cast<float>(
        wd_schedule(static_cast<int>(epoch_), cfg_.wd_max, cfg_.wd_warmup_epochs));
    opt_->step(model_->params(), static_cast<float>(cfg_.lr_main),
               static_cast<float>(cfg_.lr_mlp), wd);
    ema_.update(model_->params(), static_cast<float>(cfg_.ema_decay));
    ++step_;
    return lg.loss;
}

EpochStats Trainer::run_epoch() {
    const auto t0 = std::chrono::steady_clock::now();
    const int phase = epoch_ < cfg_.epochs_phase1 ? 1 : 2;
    auto batches = epoch_batches(ds_.size(), static_cast<size_t>(cfg_.batch_size), shuffle_rng_);
    double sum = 0.0;
    for (const auto& batch : batches) sum += train_step(batch, phase);

    EpochStats st;
    st.epoch = static_cast<int>(epoch_);
    st.phase = phase;
    st.mean_loss = sum / static_cast<double>(batches.size());
    st.wd = wd_schedule(static_cast<int>(epoch_), cfg_.wd_max, cfg_.wd_warmup_epochs);
    st.wallclock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return st;
}

std::string Trainer::run(const std::string& resume_path, int64_t max_epochs) {
    fs::create_directories(cfg_.out_dir);
    check_manifest();
    write_manifest();
    if (!resume_path.empty()) restore(resume_path);

    std::ofstream log((fs::path(cfg_.out_dir) / "metrics.log").string(),
                      resume_path.empty() ? std::ios::trunc : std::ios::app);
    const int64_t total = cfg_.epochs_phase1 + cfg_.epochs_phase2;
    const fs::path dir(cfg_.out_dir);
    int64_t executed = 0;
    while (epoch_ < total && (max_epochs < 0 || executed < max_epochs)) {
        EpochStats st = run_epoch();
        history_.push_back(st);
        char line[160];
        std::snprintf(line, sizeof(line), "%d\t%d\t%.8g\t%.6g\t%.3f\n", st.epoch, st.phase,
                      st.mean_loss, st.wd, st.wallclock_s);
        log << line;
        log.flush();
        ++epoch_;
        ++executed;
        const bool phase_boundary = epoch_ == cfg_.epochs_phase1;
        if (epoch_ % cfg_.checkpoint_every == 0 || phase_boundary || epoch_ == total) {
            char name[64];
            std::snprintf(name, sizeof(name), "checkpoint_epoch%06lld.dawt",
                          static_cast<long long>(epoch_));
            save_checkpoint((dir / name).string());
        }
    }
    std::string last = (dir / "checkpoint_last.dawt").string();
    save_checkpoint(last);
    return last;
}

void Trainer::save_checkpoint(const std::string& path) {
    TensorFile tf;
    tf.set_meta("kind", "checkpoint");
    tf.set_meta("toolkit", kToolkitVersion);
    tf.set_meta("epoch", std::to_string(epoch_));
    tf.set_meta("step", std::to_string(step_));
    tf.set_meta("adam.t", std::to_string(opt_->steps()));
    tf.set_meta("rng.shift.state", std::to_string(shift_rng_.state()));
    tf.set_meta("rng.shift.inc", std::to_string(shift_rng_.inc()));
    tf.set_meta("rng.shuffle.state", std::to_string(shuffle_rng_.state()));
    tf.set_meta("rng.shuffle.inc", std::to_string(shuffle_rng_.inc()));
    tf.set_meta("config.hash", std::to_string(cfg_.config_hash()));
    model_cfg_to_meta(tf, cfg_.model);
    cbspec_to_meta(tf, cb_.spec);
    tf.set_meta("codebook.path", cfg_.codebook_path);
    tf.set_meta("codebook.hash", std::to_string(fnv1a_file(cfg_.codebook_path)));
    tf.set_meta("data.kind", cfg_.data_kind);
    tf.set_meta("data.path", cfg_.data_path);
    tf.set_meta("data.hash", std::to_string(ds_.content_hash()));
    tf.set_meta("data.n", std::to_string(ds_.size()));
    if (cfg_.data_kind == "synthetic") {
        tf.set_meta("data.synth_seed", std::to_string(cfg_.seed));
        tf.set_meta("data.synth_hw", std::to_string(cfg_.synth_hw));
    }

    auto& ps = model_->params();
    for (auto& p : ps.params) tf.add("param." + p.name, *p.value);
    for (auto& b : ps.buffers) tf.add("buf." + b.name, *b.value);
    auto& m = opt_->first_moments();
    auto& v = opt_->second_moments();
    for (size_t i = 0; i < ps.params.size(); ++i) {
        tf.add("adam_m." + ps.params[i].name, m[i]);
        tf.add("adam_v." + ps.params[i].name, v[i]);
    }
    auto& sh = ema_.shadows();
    for (size_t i = 0; i < ps.params.size(); ++i) tf.add("ema." + ps.params[i].name, sh[i]);

    auto occ = cb_.cluster_occupancy();
    if (!occ.empty()) {
        Tensor t({static_cast<int>(occ.size())});
        for (size_t i = 0; i < occ.size(); ++i) t[i] = static_cast<float>(occ[i]);
        tf.add("meta.cluster_occupancy", std::move(t));
    }
    tf.save(path);
}

void Trainer::restore(const std::string& checkpoint_path) {
    if (!fs::exists(checkpoint_path))
        throw RunConfigError("resume checkpoint missing: " + checkpoint_path);
    CheckpointData cd = CheckpointData::load(checkpoint_path);
    if (cd.data_n != ds_.size() || cd.data_hash != ds_.content_hash())
        throw RunConfigError("checkpoint/dataset mismatch (N or content hash differs)");
    if (cd.codebook_hash != fnv1a_file(cfg_.codebook_path))
        throw RunConfigError("checkpoint/codebook mismatch (file hash differs)");
    ModelConfig want = cfg_.model;
    want.max_shift = cfg_.max_shift;
    TensorFile probe;
    model_cfg_to_meta(probe, want);
    TensorFile have;
    model_cfg_to_meta(have, cd.model_cfg);
    if (probe.meta != have.meta) throw RunConfigError("checkpoint model config differs from run config");

    auto& ps = model_->params();
    for (auto& p : ps.params) p.value->v = cd.file.at("param." + p.name).v;
    for (auto& b : ps.buffers) b.value->v = cd.file.at("buf." + b.name).v;
    auto& m = opt_->first_moments();
    auto& v = opt_->second_moments();
    for (size_t i = 0; i < ps.params.size(); ++i) {
        m[i].v = cd.file.at("adam_m." + ps.params[i].name).v;
        v[i].v = cd.file.at("adam_v." + ps.params[i].name).v;
    }
    auto& sh = ema_.shadows();
    for (size_t i = 0; i < ps.params.size(); ++i)
        sh[i].v = cd.file.at("ema." + ps.params[i].name).v;

    opt_->set_steps(std::stoll(cd.file.meta_at("adam.t")));
    epoch_ = cd.epoch;
    step_ = cd.step;
    shift_rng_.restore(std::stoull(cd.file.meta_at("rng.shift.state")),
                       std::stoull(cd.file.meta_at("rng.shift.inc")));
    shuffle_rng_.restore(std::stoull(cd.file.meta_at("rng.shuffle.state")),
                         std::stoull(cd.file.meta_at("rng.shuffle.inc")));
}

void Trainer::write_manifest() const {
    const fs::path p = fs::path(cfg_.out_dir) / "manifest.txt";
    if (fs::exists(p)) return;  // keep the original record of this run
    std::ofstream os(p);
    os << "toolkit = " << kToolkitVersion << "\n";
    os << "config_hash = " << cfg_.config_hash() << "\n";
    os << "dataset = " << cfg_.data_path << "\n";
    os << "codebook = " << cfg_.codebook_path << "\n";
    os << "clusters = " << cfg_.clusters_path << "\n";
    os << "checkpoints = " << cfg_.out_dir << "\n";
    os << "samples = " << (fs::path(cfg_.out_dir) / "samples").string() << "\n";
    os << "seed = " << cfg_.seed << "\n";
    os << "--- config ---\n";
    os << cfg_.canonical_text();
}

void Trainer::check_manifest() const {
    const fs::path p = fs::path(cfg_.out_dir) / "manifest.txt";
    if (!fs::exists(p)) return;
    std::ifstream is(p);
    std::string content((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    const std::string sep = "--- config ---\n";
    size_t pos = content.find(sep);
    if (pos == std::string::npos) throw RunConfigError("manifest missing config section: " + p.string());
    std::string cfg_text = content.substr(pos + sep.size());
    uint64_t recorded = 0;
    std::stringstream ss(content.substr(0, pos));
    std::string line;
    while (std::getline(ss, line)) {
        if (line.rfind("config_hash = ", 0) == 0) recorded = std::stoull(line.substr(14));
    }
    uint64_t recomputed = fnv1a(cfg_text.data(), cfg_text.size());
    if (recomputed != recorded)
        throw RunConfigError("manifest config hash mismatch (tampered?): " + p.string());
    if (recorded != cfg_.config_hash())
        throw RunConfigError("run config drifted from manifest in " + cfg_.out_dir +
                             "; use a fresh out_dir for a different config");
}

}  // namespace da
