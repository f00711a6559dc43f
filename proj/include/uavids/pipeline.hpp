#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uavids/config.hpp"

namespace uavids::pipeline {

// `per_class` normal rows followed by `per_class` attack rows for one uav type,
// labels 0/1.
LabeledData generate_dataset(UavType uav, FlowMode mode, int per_class, std::uint64_t seed, int min_flow_length = 40,
                             int max_flow_length = 120);

struct PreprocessResult {
    LabeledData train;  // labels are class indices of the task's codebook
    LabeledData test;
    std::optional<CorrelationReport> correlation;
    std::optional<Standardizer> standardizer;  // binary path
    std::optional<PcaModel> pca;               // multiclass path
    std::vector<std::string> warnings;
};

// Per-uav raw datasets (0/1 labels) -> split, transformed train/test sets.
// Multiclass: correlation filter across the uav datasets, concatenation, split,
// standardize + PCA fitted on the training rows. Binary: concatenation, split and
// (optionally) standardization; no filter and no PCA.
PreprocessResult preprocess_sources(const std::map<UavType, LabeledData>& sources, const RunConfig& config);

// CLI subcommands. Each writes the resolved config beside its outputs.
void cmd_gen_data(const RunConfig& config);
void cmd_preprocess(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_eval(const RunConfig& config);
void cmd_report(const RunConfig& config);

}  // namespace uavids::pipeline
