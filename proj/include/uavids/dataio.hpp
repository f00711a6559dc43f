#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uavids/flowgen.hpp"

namespace uavids {

// n x p feature matrix with unique column names.
struct FeatureMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> column_names;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }

    // index of a column, or nullopt
    std::optional<Eigen::Index> find(const std::string& name) const;

    // New matrix holding only `names`, in that order. DataError on unknown names.
    FeatureMatrix select_columns(const std::vector<std::string>& names) const;
    FeatureMatrix select_rows(const std::vector<Eigen::Index>& rows) const;

    // Throws DataError on shape mismatch, duplicate names or non-finite entries.
    void validate() const;
};

struct LabeledData {
    FeatureMatrix features;
    std::vector<int> labels;  // one per row; empty when the source had no label column

    Eigen::Index size() const { return features.rows(); }
    LabeledData select_rows(const std::vector<Eigen::Index>& rows) const;
};

// Reads a CSV with a header row. With `has_label` the last column is the label.
LabeledData load_csv(const std::filesystem::path& path, bool has_label);

// Floats written with 9 significant digits; the label column is named "label".
void save_csv(const std::filesystem::path& path, const LabeledData& data);

// --- labels -----------------------------------------------------------------

enum class Task { binary, four_class, six_class };

std::string_view to_string(Task t);
Task parse_task(std::string_view s);

struct LabelTuple {
    int width = 1;
    std::array<int, 3> bits{0, 0, 0};

    friend bool operator==(const LabelTuple& a, const LabelTuple& b) {
        if (a.width != b.width) return false;
        for (int j = 0; j < a.width; ++j)
            if (a.bits[j] != b.bits[j]) return false;
        return true;
    }
    std::string str() const;
};

LabelTuple parse_tuple(std::string_view s);  // "(1,0,1)" or "101"

// Class index <-> tuple table for a task. Class indices are ordered
// DBPower-Normal, DBPower-Attack, Parrot-Normal, Parrot-Attack, DJISpark-Normal,
// DJISpark-Attack (truncated to the task's class count); binary is Normal, Attack.
struct Codebook {
    Task task = Task::binary;
    int width = 1;
    std::vector<LabelTuple> codes;
    std::vector<std::string> class_names;

    int num_classes() const { return static_cast<int>(codes.size()); }
    const LabelTuple& encode(int class_index) const;
    std::optional<int> find(const LabelTuple& t) const;
};

// Six-class default codes, in class-index order.
std::vector<LabelTuple> default_six_class_codes();

// `six_class_codes` overrides the default six-class table (must be 6 distinct
// width-3 tuples drawn from the valid set). `two_unit_binary` makes the binary
// task use the width-2 one-hot codes (1,0) normal / (0,1) attack.
Codebook make_codebook(Task task, const std::vector<LabelTuple>& six_class_codes = {},
                       bool two_unit_binary = false);

// Class index for a (uav, attack) pair under a task. ConfigError when the uav type
// has no code at that width (DJI Spark under four_class).
int class_index(Task task, UavType uav, bool attack);

// raw attack flag per row (+ uav type per row for multiclass) -> tuple per row
std::vector<LabelTuple> encode_labels(const std::vector<int>& raw, const std::vector<UavType>& uav,
                                      const Codebook& codebook);

// --- splits ------------------------------------------------------------------

struct DatasetSplit {
    LabeledData train;
    LabeledData test;
    double train_fraction = 0.1;
    std::vector<Eigen::Index> train_rows;  // indices into the input
    std::vector<Eigen::Index> test_rows;
    std::vector<std::string> warnings;
};

// Stratified by label; |train| = round(train_fraction * n). Deterministic per seed.
DatasetSplit split_train_test(const LabeledData& data, double train_fraction, std::uint64_t seed);

// Row-wise concatenation; DataError naming the symmetric difference on mismatched headers.
LabeledData concat_datasets(const std::vector<LabeledData>& parts);

// --- key=value files (manifests, run configs) ---------------------------------

using KeyValues = std::map<std::string, std::string>;

KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(const std::filesystem::path& path, const KeyValues& kv,
                      const std::string& header_comment = {});

}  // namespace uavids
