#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uavids/dataio.hpp"

namespace uavids {

// How two feature columns of different datasets are paired for the Pearson
// coefficient. `sorted` compares the two empirical distributions (sorted values,
// the longer one resampled at the shorter one's quantile levels); `truncate` keeps
// the first min(n, n') rows of each. Equal-length columns are always compared
// row by row.
enum class Alignment { sorted, truncate };

std::string_view to_string(Alignment a);
Alignment parse_alignment(std::string_view s);

// Pearson coefficient, clamped to [-1, 1]. Returns 0 when either side is constant.
// Throws DataError on length mismatch or fewer than 2 samples.
double correlation(const Eigen::Ref<const Eigen::VectorXd>& m,
                   const Eigen::Ref<const Eigen::VectorXd>& m_prime);

// Pairs two columns per `align` (see Alignment) and returns the coefficient.
struct AlignedCorrelation {
    double coefficient = 0;
    bool degenerate = false;  // a side was constant
};
AlignedCorrelation aligned_correlation(const Eigen::Ref<const Eigen::VectorXd>& m,
                                       const Eigen::Ref<const Eigen::VectorXd>& m_prime,
                                       Alignment align);

struct CorrelationEntry {
    std::string feature;
    double coefficient = 0;
    bool degenerate = false;
    bool dropped = false;
};

struct CorrelationReport {
    double threshold = 0.95;
    Alignment align = Alignment::sorted;
    std::vector<CorrelationEntry> entries;  // one per common feature, first dataset's order

    std::vector<std::string> retained() const;
    std::vector<std::string> dropped() const;

    void save(const std::filesystem::path& path) const;
    static CorrelationReport load(const std::filesystem::path& path);
};

// A feature is dropped when |Cor| > threshold.
CorrelationReport correlate_features(const FeatureMatrix& m, const FeatureMatrix& m_prime,
                                     double threshold, Alignment align = Alignment::sorted);

struct FeatureSelection {
    CorrelationReport report;
    FeatureMatrix m;
    FeatureMatrix m_prime;
};

// Restricts both matrices to the retained common features, identically ordered.
// DataError when there are no common columns or every feature is dropped.
FeatureSelection select_features(const FeatureMatrix& m, const FeatureMatrix& m_prime,
                                 double threshold, Alignment align = Alignment::sorted);

// Several datasets: the union of pairwise drops over every pair. The merged report
// keeps, per feature, the coefficient of largest magnitude.
CorrelationReport select_features_multi(const std::vector<FeatureMatrix>& sets, double threshold,
                                        Alignment align = Alignment::sorted);

// --- standardization ---------------------------------------------------------

struct Standardizer {
    Eigen::VectorXd means;
    Eigen::VectorXd scales;  // population std; 1 for constant columns

    Eigen::MatrixXd apply(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
};

Standardizer standardize_fit(const Eigen::Ref<const Eigen::MatrixXd>& x);

inline Eigen::MatrixXd standardize_apply(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                         const Standardizer& s) {
    return s.apply(x);
}

// --- PCA ---------------------------------------------------------------------

struct PcaModel {
    std::vector<std::string> feature_names;  // optional, carried for reports
    Eigen::VectorXd feature_means;
    Eigen::VectorXd feature_scales;
    Eigen::MatrixXd components;  // k x p, orthonormal rows
    Eigen::VectorXd explained_variance;
    Eigen::VectorXd total_variance_share;  // explained_variance / trace(cov)

    Eigen::Index k() const { return components.rows(); }
    Eigen::Index p() const { return components.cols(); }

    void save(const std::filesystem::path& path) const;
    static PcaModel load(const std::filesystem::path& path);
};

// Top-k eigenvectors of the population covariance of `x`. The model centres on
// x's own column means with unit scales, so an already standardized training
// matrix goes through unchanged. Each component's largest-magnitude entry is
// positive. ConfigError when k > min(p, n - 1).
PcaModel pca_fit(const Eigen::Ref<const Eigen::MatrixXd>& x, Eigen::Index k);

// As above on raw data: standardizes with `s` first and stores it in the model.
PcaModel pca_fit(const Eigen::Ref<const Eigen::MatrixXd>& raw, Eigen::Index k, const Standardizer& s);

Eigen::MatrixXd pca_transform(const Eigen::Ref<const Eigen::MatrixXd>& x, const PcaModel& model);
Eigen::MatrixXd pca_inverse_transform(const Eigen::Ref<const Eigen::MatrixXd>& z, const PcaModel& model);

// --- model input grid ----------------------------------------------------------

struct InputGrid {
    Eigen::MatrixXd data;  // h x w, filled row-major
    Eigen::Index pad_count = 0;
};

// Row-major fill with trailing zeros. ShapeError when h*w < row length.
InputGrid zero_pad_reshape(const Eigen::Ref<const Eigen::VectorXd>& row, Eigen::Index h, Eigen::Index w);

}  // namespace uavids
