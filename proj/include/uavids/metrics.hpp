#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uavids/dataio.hpp"

namespace uavids {

// rows = true class, columns = predicted class
struct ConfusionMatrix {
    std::vector<std::string> class_names;
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;

    int num_classes() const { return static_cast<int>(counts.rows()); }
    std::int64_t total() const { return counts.sum(); }
};

// DataError on labels outside [0, num_classes).
ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted, int num_classes,
                          std::vector<std::string> class_names = {});

// nullopt marks an undefined ratio (zero denominator).
struct MetricSet {
    std::optional<double> accuracy;         // AC
    std::optional<double> precision;        // PR
    std::optional<double> detection_rate;   // DR
    std::optional<double> false_alarm_rate; // FAR
    std::optional<double> f1;
    std::optional<double> error_rate;       // Er = 1 - AC
};

struct BinaryCounts {
    std::int64_t tp = 0, tn = 0, fp = 0, fn = 0;
};

MetricSet metrics_from_counts(const BinaryCounts& c);

// One-vs-rest reduction of the matrix around `positive_class`.
BinaryCounts one_vs_rest(const ConfusionMatrix& cm, int positive_class);

// Binary reduction. DataError on an empty matrix.
MetricSet compute_metrics(const ConfusionMatrix& cm, int positive_class);

struct MulticlassMetrics {
    std::vector<MetricSet> per_class;  // one-vs-rest
    MetricSet macro;                   // unweighted mean over classes where defined
    double micro_accuracy = 0;         // trace / total
};

MulticlassMetrics compute_metrics_macro(const ConfusionMatrix& cm);

// Thresholds each probability at 0.5; a tuple outside the codebook falls back to
// the code with the largest product of per-bit Bernoulli likelihoods (lowest
// class index on ties).
int decode_prediction(const Eigen::Ref<const Eigen::VectorXd>& probabilities, const Codebook& codebook);

// --- emission ------------------------------------------------------------------

std::string format_metric(const std::optional<double>& v);

void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& cm);
ConfusionMatrix read_confusion_csv(const std::filesystem::path& path);

// scope,class,AC,PR,DR,FAR,F1,Er rows: per class, macro, micro accuracy
void write_metrics_csv(const std::filesystem::path& path, const ConfusionMatrix& cm);

// Text block with the matrix and metrics.
std::string metrics_report_block(const ConfusionMatrix& cm);

}  // namespace uavids
