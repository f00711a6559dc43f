#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "uavids/dataio.hpp"
#include "uavids/flowgen.hpp"
#include "uavids/nn/model.hpp"
#include "uavids/nn/optimizer.hpp"
#include "uavids/preprocess.hpp"
#include "uavids/training.hpp"

namespace uavids {

// Every setting of a pipeline run. Stored as flat key=value text; keys match the
// member names below and the CLI flags (underscores become dashes).
struct RunConfig {
    FlowMode mode = FlowMode::UF;
    Task task = Task::binary;

    // data generation
    int per_class = 500;
    int min_flow_length = 40;
    int max_flow_length = 120;

    // preprocessing
    double train_fraction = 0.10;
    bool correlation_filter = true;  // multiclass only
    double theta = 0.95;
    Alignment align = Alignment::sorted;
    int pca_k = 12;                  // multiclass only
    bool standardize_binary = true;  // binary path: standardize raw features before padding
    std::string uavs = "auto";       // comma list of uav types, or auto

    // model
    int grid_h = 0;  // 0: 8 for binary, 6 for multiclass
    int grid_w = 0;
    nn::ConvLayout conv_layout = nn::ConvLayout::grid2d;
    bool two_unit_binary = false;
    std::string six_class_codes = "default";  // e.g. 010,011,110,111,000,100

    // training
    int epochs = 100;
    int batch = 50;
    int folds = 5;
    double learning_rate = 0.01;
    double momentum = 0.9;
    nn::MomentumForm momentum_form = nn::MomentumForm::damped;
    double dropout = 0.4;
    std::uint64_t seed = 0;
    int threads = 1;

    // paths
    std::string out_dir = "out";
    std::string data_dir;  // empty: <out_dir>/data

    // ConfigError on unknown keys or unparsable values.
    void set(const std::string& key, const std::string& value);
    static RunConfig from_key_values(const KeyValues& kv);
    static RunConfig load(const std::filesystem::path& path);

    // Defaults expanded (grid, uav list, data_dir).
    KeyValues to_key_values() const;
    void save(const std::filesystem::path& path) const;

    RunConfig resolved() const;
    void validate() const;

    static const std::vector<std::string>& keys();

    // derived views
    std::vector<UavType> uav_list() const;
    Codebook codebook() const;
    nn::ModelConfig model_config() const;
    TrainingConfig training_config() const;
    std::filesystem::path data_path() const;
    std::filesystem::path stage_path(const std::string& stage) const;
};

}  // namespace uavids
