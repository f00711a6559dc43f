#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uavids/dataio.hpp"
#include "uavids/metrics.hpp"
#include "uavids/nn/checkpoint.hpp"
#include "uavids/nn/optimizer.hpp"

namespace uavids {

// Model-ready samples: one input grid and one target tuple per row.
struct EncodedSet {
    std::vector<Eigen::MatrixXd> grids;
    Eigen::MatrixXd targets;   // N x tuple width
    std::vector<int> classes;  // class index per sample

    std::size_t size() const { return grids.size(); }
    EncodedSet subset(const std::vector<std::size_t>& rows) const;
};

// `data.labels` hold class indices of `codebook`. Each feature row is zero-padded
// into an h x w grid.
EncodedSet encode_set(const LabeledData& data, const Codebook& codebook, Eigen::Index h, Eigen::Index w);

struct TrainingConfig {
    int epochs = 100;
    int batch_size = 50;
    int folds = 5;
    double learning_rate = 0.01;
    double momentum = 0.9;
    nn::MomentumForm momentum_form = nn::MomentumForm::damped;
    std::uint64_t seed = 0;
    int threads = 1;  // folds trained concurrently; results do not depend on it

    void validate() const;
};

// Shuffled partition of [0, n) into k folds whose sizes differ by at most one
// (the first n % k folds get the extra sample). DataError when n < k.
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, int k, std::uint64_t seed);

struct EpochRecord {
    double train_loss = 0;
    double train_accuracy = 0;
    double val_loss = 0;
    double val_accuracy = 0;
};

struct FoldResult {
    int fold_index = 0;
    std::size_t train_size = 0;
    std::size_t validation_size = 0;
    std::vector<EpochRecord> epochs;
    double final_loss = 0;  // validation loss after the last epoch
};

struct TrainingReport {
    std::uint64_t seed = 0;
    std::vector<FoldResult> folds;
    double total_loss = 0;               // mean of the fold losses
    std::vector<EpochRecord> mean_curve; // averaged over folds
    std::vector<EpochRecord> final_fit;  // retrain on the whole set; validation fields unused
    KeyValues config;                    // snapshot of the resolved settings

    void save(const std::filesystem::path& path) const;
    // long format: epoch,fold,metric,value
    void save_curves_csv(const std::filesystem::path& path) const;
};

struct TrainingOutcome {
    TrainingReport report;
    nn::Checkpoint checkpoint;  // retrained on the full training set
};

// K-fold cross-validation (fresh init per fold) followed by a retrain on all of
// `train`. DivergenceError naming the fold and epoch on a non-finite loss.
TrainingOutcome train_model(const EncodedSet& train, const nn::ModelConfig& model, const Codebook& codebook,
                            const TrainingConfig& config, const KeyValues& config_snapshot = {});

// One fold's training. `fold_index` selects the init and shuffle streams.
FoldResult train_fold(const EncodedSet& train, const EncodedSet* validation, const nn::ModelConfig& model,
                      const Codebook& codebook, const TrainingConfig& config, int fold_index,
                      nn::NetworkParams* trained = nullptr);

struct EvalReport {
    ConfusionMatrix confusion;
    MulticlassMetrics metrics;
    double loss = 0;
    std::size_t samples = 0;

    void save(const std::filesystem::path& dir) const;  // confusion.csv, metrics.csv, eval_report.txt
};

// Inference mode. DataError on an empty set, ShapeError when grids or tuple width
// do not match the checkpoint.
EvalReport evaluate(const nn::Checkpoint& checkpoint, const EncodedSet& test);

// Loss and accuracy in inference mode.
std::pair<double, double> loss_and_accuracy(const nn::NetworkParams& params, const nn::ModelConfig& model,
                                            const Codebook& codebook, const EncodedSet& set);

}  // namespace uavids
