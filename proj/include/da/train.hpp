#pragma once

#include <memory>
#include <string>
#include <vector>

#include "da/codebook.hpp"
#include "da/dataset.hpp"
#include "da/distance.hpp"
#include "da/model.hpp"
#include "da/optim.hpp"
#include "da/tensorio.hpp"

namespace da {

// Full run configuration; every field is settable from a line-oriented
// `key = value` config file, unknown keys are rejected.
struct TrainConfig {
    double lr_main = 2e-3;
    double lr_mlp = 2e-4;
    int batch_size = 256;
    int epochs_phase1 = 1000;
    int epochs_phase2 = 2000;
    double wd_max = 0.08;
    int wd_warmup_epochs = 400;
    double ema_decay = 0.99995;
    int max_shift = 8;
    std::string distance = "mse";  // mse | perceptual
    uint64_t seed = 0;
    std::string perceptual_asset;

    std::string data_kind = "cifar10";  // cifar10 | cifar10_bin | celeba_daim | synthetic
    std::string data_path;
    int synth_n = 64;
    int synth_hw = 32;
    std::string codebook_path;
    std::string clusters_path;  // provenance only
    std::string out_dir = "run";
    int checkpoint_every = 100;

    ModelConfig model;

    static TrainConfig from_file(const std::string& path);
    void apply(const std::string& key, const std::string& value);
    void validate() const;
    std::string canonical_text() const;
    uint64_t config_hash() const;
};

// A loaded checkpoint: enough to rebuild the generator for sampling and to
// resume training bit-exactly.
struct CheckpointData {
    TensorFile file;
    ModelConfig model_cfg;
    CodebookSpec cb_spec;
    std::vector<double> cluster_occupancy;  // empty when unclustered
    int64_t epoch = 0;
    int64_t step = 0;
    std::string codebook_path;
    std::string data_path;
    uint64_t codebook_hash = 0;
    uint64_t data_hash = 0;
    uint64_t data_n = 0;

    static CheckpointData load(const std::string& path);
    // Generator with live params (use_ema=false) or the EMA shadow weights
    // (use_ema=true); batch-norm running stats are the live ones either way.
    Generator<float> build_generator(bool use_ema) const;
};

struct EpochStats {
    int epoch = 0;
    int phase = 1;
    double mean_loss = 0.0;
    double wd = 0.0;
    double wallclock_s = 0.0;
};

class Trainer {
public:
    explicit Trainer(TrainConfig cfg);

    // Executes the remaining epochs (phase 1 then phase 2), writing metrics
    // and checkpoints under cfg.out_dir. Returns the final checkpoint path.
    // max_epochs > 0 stops after that many epochs (an interrupted run).
    std::string run(const std::string& resume_path = "", int64_t max_epochs = -1);

    // One optimizer step over an explicit index batch; exposed for tests.
    double train_step(const std::vector<uint32_t>& indices, int phase);

    void save_checkpoint(const std::string& path);
    void restore(const std::string& checkpoint_path);

    Generator<float>& model() { return *model_; }
    Ema<float>& ema() { return ema_; }
    const Dataset& dataset() const { return ds_; }
    const Codebook& codebook() const { return cb_; }
    const TrainConfig& config() const { return cfg_; }
    int64_t epoch() const { return epoch_; }
    int64_t step() const { return step_; }
    const std::vector<EpochStats>& history() const { return history_; }

private:
    EpochStats run_epoch();
    void write_manifest() const;
    void check_manifest() const;

    TrainConfig cfg_;
    Dataset ds_;
    Codebook cb_;
    std::unique_ptr<Generator<float>> model_;
    std::unique_ptr<AdamW<float>> opt_;
    Ema<float> ema_;
    std::unique_ptr<Distance<float>> distance_;
    Pcg32 shift_rng_, shuffle_rng_;
    int64_t epoch_ = 0;
    int64_t step_ = 0;
    std::vector<EpochStats> history_;
};

// Dataset loader shared by the trainer and the CLI.
Dataset load_dataset(const TrainConfig& cfg);

// Model-config <-> metadata round trip used by checkpoints.
void model_cfg_to_meta(TensorFile& tf, const ModelConfig& cfg);
ModelConfig model_cfg_from_meta(const TensorFile& tf);

}  // namespace da
