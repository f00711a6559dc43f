#include "uavids/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "uavids/error.hpp"

namespace uavids {

std::string_view to_string(Alignment a) { return a == Alignment::sorted ? "sorted" : "truncate"; }

Alignment parse_alignment(std::string_view s) {
    if (s == "sorted") return Alignment::sorted;
    if (s == "truncate") return Alignment::truncate;
    throw ConfigError("unknown alignment '" + std::string(s) + "' (expected sorted or truncate)");
}

namespace {

// Pearson with a constant-side flag. Both inputs have equal length >= 2.
AlignedCorrelation pearson(const Eigen::Ref<const Eigen::VectorXd>& a,
                           const Eigen::Ref<const Eigen::VectorXd>& b) {
    const Eigen::ArrayXd da = a.array() - a.mean();
    const Eigen::ArrayXd db = b.array() - b.mean();
    const double saa = da.square().sum();
    const double sbb = db.square().sum();
    // below rounding noise of the raw values counts as constant
    auto constant = [](double ss, const Eigen::Ref<const Eigen::VectorXd>& v) {
        const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
        return ss <= 1e-26 * scale * scale * static_cast<double>(v.size());
    };
    if (constant(saa, a) || constant(sbb, b)) return {0.0, true};
    const double r = (da * db).sum() / std::sqrt(saa * sbb);
    return {std::clamp(r, -1.0, 1.0), false};
}

Eigen::VectorXd sorted_copy(const Eigen::Ref<const Eigen::VectorXd>& v) {
    Eigen::VectorXd s = v;
    std::sort(s.data(), s.data() + s.size());
    return s;
}

// values of the sorted vector `s` at n evenly spaced quantile levels
Eigen::VectorXd resample_quantiles(const Eigen::VectorXd& s, Eigen::Index n) {
    Eigen::VectorXd out(n);
    const double last = static_cast<double>(s.size() - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double pos = last * static_cast<double>(i) / static_cast<double>(n - 1);
        const auto lo = static_cast<Eigen::Index>(std::floor(pos));
        const auto hi = std::min(lo + 1, s.size() - 1);
        const double t = pos - static_cast<double>(lo);
        out(i) = (1.0 - t) * s(lo) + t * s(hi);
    }
    return out;
}

}  // namespace

double correlation(const Eigen::Ref<const Eigen::VectorXd>& m,
                   const Eigen::Ref<const Eigen::VectorXd>& m_prime) {
    if (m.size() != m_prime.size())
        throw DataError("correlation: length mismatch (" + std::to_string(m.size()) + " vs " +
                        std::to_string(m_prime.size()) + ")");
    if (m.size() < 2) throw DataError("correlation needs at least 2 samples");
    return pearson(m, m_prime).coefficient;
}

AlignedCorrelation aligned_correlation(const Eigen::Ref<const Eigen::VectorXd>& m,
                                       const Eigen::Ref<const Eigen::VectorXd>& m_prime,
                                       Alignment align) {
    const Eigen::Index n = std::min(m.size(), m_prime.size());
    if (n < 2) throw DataError("correlation needs at least 2 samples");
    if (m.size() == m_prime.size()) return pearson(m, m_prime);
    if (align == Alignment::truncate) return pearson(m.head(n), m_prime.head(n));
    const Eigen::VectorXd a = sorted_copy(m);
    const Eigen::VectorXd b = sorted_copy(m_prime);
    return pearson(a.size() == n ? a : resample_quantiles(a, n),
                   b.size() == n ? b : resample_quantiles(b, n));
}

std::vector<std::string> CorrelationReport::retained() const {
    std::vector<std::string> out;
    for (const auto& e : entries)
        if (!e.dropped) out.push_back(e.feature);
    return out;
}

std::vector<std::string> CorrelationReport::dropped() const {
    std::vector<std::string> out;
    for (const auto& e : entries)
        if (e.dropped) out.push_back(e.feature);
    return out;
}

void CorrelationReport::save(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    char buf[64];
    out << "uavids-correlation-report 1\n";
    std::snprintf(buf, sizeof buf, "%.17g", threshold);
    out << "threshold " << buf << "\nalign " << to_string(align) << "\n";
    out << "feature,coefficient,degenerate,status\n";
    for (const auto& e : entries) {
        std::snprintf(buf, sizeof buf, "%.17g", e.coefficient);
        out << e.feature << ',' << buf << ',' << (e.degenerate ? 1 : 0) << ','
            << (e.dropped ? "dropped" : "retained") << '\n';
    }
}

CorrelationReport CorrelationReport::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::string line, word;
    int version = 0;
    in >> word >> version;
    if (word != "uavids-correlation-report" || version != 1)
        throw DataError("'" + path.string() + "' is not a version 1 correlation report");
    CorrelationReport r;
    std::string align;
    in >> word >> r.threshold >> word >> align;
    r.align = parse_alignment(align);
    std::getline(in, line);
    std::getline(in, line);  // column header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        CorrelationEntry e;
        std::string coef, degenerate, status;
        std::getline(ss, e.feature, ',');
        std::getline(ss, coef, ',');
        std::getline(ss, degenerate, ',');
        std::getline(ss, status, ',');
        e.coefficient = std::stod(coef);
        e.degenerate = degenerate == "1";
        e.dropped = status == "dropped";
        r.entries.push_back(std::move(e));
    }
    return r;
}

CorrelationReport correlate_features(const FeatureMatrix& m, const FeatureMatrix& m_prime,
                                     double threshold, Alignment align) {
    CorrelationReport report;
    report.threshold = threshold;
    report.align = align;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const auto& name = m.column_names[static_cast<std::size_t>(j)];
        auto other = m_prime.find(name);
        if (!other) continue;
        auto c = aligned_correlation(m.values.col(j), m_prime.values.col(*other), align);
        report.entries.push_back({name, c.coefficient, c.degenerate, std::abs(c.coefficient) > threshold});
    }
    if (report.entries.empty()) throw DataError("the two datasets share no common feature");
    return report;
}

FeatureSelection select_features(const FeatureMatrix& m, const FeatureMatrix& m_prime,
                                 double threshold, Alignment align) {
    FeatureSelection sel;
    sel.report = correlate_features(m, m_prime, threshold, align);
    const auto keep = sel.report.retained();
    if (keep.empty()) throw DataError("empty feature set");
    sel.m = m.select_columns(keep);
    sel.m_prime = m_prime.select_columns(keep);
    return sel;
}

CorrelationReport select_features_multi(const std::vector<FeatureMatrix>& sets, double threshold,
                                        Alignment align) {
    if (sets.size() < 2) throw DataError("feature selection needs at least two datasets");
    CorrelationReport merged;
    merged.threshold = threshold;
    merged.align = align;
    std::map<std::string, std::size_t> slot;
    for (std::size_t a = 0; a < sets.size(); ++a) {
        for (std::size_t b = a + 1; b < sets.size(); ++b) {
            const auto pair = correlate_features(sets[a], sets[b], threshold, align);
            for (const auto& e : pair.entries) {
                auto it = slot.find(e.feature);
                if (it == slot.end()) {
                    slot.emplace(e.feature, merged.entries.size());
                    merged.entries.push_back(e);
                    continue;
                }
                auto& cur = merged.entries[it->second];
                cur.dropped = cur.dropped || e.dropped;
                cur.degenerate = cur.degenerate || e.degenerate;
                if (std::abs(e.coefficient) > std::abs(cur.coefficient)) cur.coefficient = e.coefficient;
            }
        }
    }
    // only features common to every dataset survive
    std::erase_if(merged.entries, [&](const CorrelationEntry& e) {
        return std::any_of(sets.begin(), sets.end(), [&](const FeatureMatrix& s) { return !s.find(e.feature); });
    });
    if (merged.entries.empty()) throw DataError("the datasets share no common feature");
    if (merged.retained().empty()) throw DataError("empty feature set");
    return merged;
}

// --- standardization ---------------------------------------------------------

Standardizer standardize_fit(const Eigen::Ref<const Eigen::MatrixXd>& x) {
    if (x.rows() == 0) throw DataError("cannot fit a standardizer on zero rows");
    Standardizer s;
    s.means = x.colwise().mean().transpose();
    const Eigen::MatrixXd centered = x.rowwise() - s.means.transpose();
    s.scales = (centered.colwise().squaredNorm() / static_cast<double>(x.rows())).cwiseSqrt().transpose();
    for (Eigen::Index j = 0; j < s.scales.size(); ++j)
        if (!(s.scales(j) > 1e-12 * std::max(1.0, std::abs(s.means(j))))) s.scales(j) = 1.0;
    return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
    if (x.cols() != means.size())
        throw DataError("standardizer fitted on " + std::to_string(means.size()) +
                        " columns, applied to " + std::to_string(x.cols()));
    return (x.rowwise() - means.transpose()).array().rowwise() / scales.transpose().array();
}

// --- PCA ---------------------------------------------------------------------

PcaModel pca_fit(const Eigen::Ref<const Eigen::MatrixXd>& x, Eigen::Index k) {
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    const Eigen::Index k_max = std::min(p, n - 1);
    if (k < 1 || k > k_max)
        throw ConfigError("pca: k=" + std::to_string(k) + " is out of range; the maximum for " +
                          std::to_string(n) + "x" + std::to_string(p) + " data is " +
                          std::to_string(std::max<Eigen::Index>(k_max, 0)));

    PcaModel model;
    model.feature_means = x.colwise().mean().transpose();
    model.feature_scales = Eigen::VectorXd::Ones(p);
    const Eigen::MatrixXd centered = x.rowwise() - model.feature_means.transpose();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw DataError("pca: eigendecomposition failed");

    // eigenvalues come back ascending
    model.components.resize(k, p);
    model.explained_variance.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const Eigen::Index src = p - 1 - i;
        Eigen::VectorXd v = eig.eigenvectors().col(src);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        model.components.row(i) = v.transpose();
        model.explained_variance(i) = std::max(eig.eigenvalues()(src), 0.0);
    }
    const double trace = cov.trace();
    model.total_variance_share =
        trace > 0 ? Eigen::VectorXd(model.explained_variance / trace) : Eigen::VectorXd::Zero(k);
    return model;
}

PcaModel pca_fit(const Eigen::Ref<const Eigen::MatrixXd>& raw, Eigen::Index k, const Standardizer& s) {
    PcaModel model = pca_fit(s.apply(raw), k);
    // fold the (numerically ~0) residual centre of the standardized data into the means
    model.feature_means = s.means + model.feature_means.cwiseProduct(s.scales);
    model.feature_scales = s.scales;
    return model;
}

Eigen::MatrixXd pca_transform(const Eigen::Ref<const Eigen::MatrixXd>& x, const PcaModel& model) {
    if (x.cols() != model.p())
        throw DataError("pca model expects " + std::to_string(model.p()) + " features, got " +
                        std::to_string(x.cols()));
    const Eigen::MatrixXd z =
        (x.rowwise() - model.feature_means.transpose()).array().rowwise() / model.feature_scales.transpose().array();
    return z * model.components.transpose();
}

Eigen::MatrixXd pca_inverse_transform(const Eigen::Ref<const Eigen::MatrixXd>& z, const PcaModel& model) {
    if (z.cols() != model.k())
        throw DataError("pca inverse expects " + std::to_string(model.k()) + " components");
    Eigen::MatrixXd x = z * model.components;
    x = x.array().rowwise() * model.feature_scales.transpose().array();
    return x.rowwise() + model.feature_means.transpose();
}

namespace {

void write_vector(std::ostream& out, const char* key, const Eigen::VectorXd& v) {
    char buf[32];
    out << key;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", v(i));
        out << ' ' << buf;
    }
    out << '\n';
}

Eigen::VectorXd read_vector(std::istream& in, const char* key, Eigen::Index n) {
    std::string word;
    in >> word;
    if (word != key) throw DataError(std::string("pca model: expected '") + key + "'");
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(in >> v(i))) throw DataError(std::string("pca model: truncated '") + key + "'");
    return v;
}

}  // namespace

void PcaModel::save(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "uavids-pca-model 1\n";
    out << "p " << p() << "\nk " << k() << "\nnames";
    for (const auto& n : feature_names) out << ' ' << n;
    out << '\n';
    write_vector(out, "means", feature_means);
    write_vector(out, "scales", feature_scales);
    write_vector(out, "explained_variance", explained_variance);
    write_vector(out, "variance_share", total_variance_share);
    for (Eigen::Index i = 0; i < k(); ++i) write_vector(out, "component", components.row(i).transpose());
}

PcaModel PcaModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::string word, line;
    int version = 0;
    in >> word >> version;
    if (word != "uavids-pca-model" || version != 1)
        throw DataError("'" + path.string() + "' is not a version 1 pca model");
    Eigen::Index p = 0, k = 0;
    in >> word >> p >> word >> k >> word;
    if (word != "names" || p <= 0 || k <= 0) throw DataError("pca model: bad header");
    PcaModel m;
    std::getline(in, line);
    std::stringstream names(line);
    while (names >> word) m.feature_names.push_back(word);
    m.feature_means = read_vector(in, "means", p);
    m.feature_scales = read_vector(in, "scales", p);
    m.explained_variance = read_vector(in, "explained_variance", k);
    m.total_variance_share = read_vector(in, "variance_share", k);
    m.components.resize(k, p);
    for (Eigen::Index i = 0; i < k; ++i) m.components.row(i) = read_vector(in, "component", p).transpose();
    return m;
}

// --- grid ----------------------------------------------------------------------

InputGrid zero_pad_reshape(const Eigen::Ref<const Eigen::VectorXd>& row, Eigen::Index h, Eigen::Index w) {
    if (h <= 0 || w <= 0) throw ShapeError("grid dimensions must be positive");
    if (h * w < row.size())
        throw ShapeError("cannot fit " + std::to_string(row.size()) + " values into a " +
                         std::to_string(h) + "x" + std::to_string(w) + " grid");
    InputGrid g;
    g.data = Eigen::MatrixXd::Zero(h, w);
    for (Eigen::Index i = 0; i < row.size(); ++i) g.data(i / w, i % w) = row(i);
    g.pad_count = h * w - row.size();
    return g;
}

}  // namespace uavids
