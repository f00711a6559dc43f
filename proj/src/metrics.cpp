#include "uavids/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "uavids/error.hpp"

namespace uavids {

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted, int num_classes,
                          std::vector<std::string> class_names) {
    if (truth.size() != predicted.size()) throw DataError("confusion: label vectors differ in length");
    if (num_classes < 1) throw DataError("confusion: need at least one class");
    ConfusionMatrix cm;
    cm.counts.setZero(num_classes, num_classes);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int t = truth[i];
        const int p = predicted[i];
        if (t < 0 || t >= num_classes || p < 0 || p >= num_classes)
            throw DataError("confusion: label out of range at sample " + std::to_string(i));
        ++cm.counts(t, p);
    }
    if (class_names.empty())
        for (int c = 0; c < num_classes; ++c) class_names.push_back("class" + std::to_string(c));
    if (static_cast<int>(class_names.size()) != num_classes) throw DataError("confusion: class name count mismatch");
    cm.class_names = std::move(class_names);
    return cm;
}

namespace {

std::optional<double> ratio(std::int64_t num, std::int64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MetricSet metrics_from_counts(const BinaryCounts& c) {
    MetricSet m;
    m.accuracy = ratio(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn);
    m.precision = ratio(c.tp, c.tp + c.fp);
    m.detection_rate = ratio(c.tp, c.tp + c.fn);
    m.false_alarm_rate = ratio(c.fp, c.fp + c.tn);
    // count form of the harmonic mean; only where PR and DR both exist
    if (m.precision && m.detection_rate) m.f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
    if (m.accuracy) m.error_rate = 1.0 - *m.accuracy;
    return m;
}

BinaryCounts one_vs_rest(const ConfusionMatrix& cm, int positive_class) {
    if (positive_class < 0 || positive_class >= cm.num_classes())
        throw DataError("positive class " + std::to_string(positive_class) + " out of range");
    BinaryCounts c;
    const auto k = positive_class;
    c.tp = cm.counts(k, k);
    c.fn = cm.counts.row(k).sum() - c.tp;
    c.fp = cm.counts.col(k).sum() - c.tp;
    c.tn = cm.total() - c.tp - c.fn - c.fp;
    return c;
}

MetricSet compute_metrics(const ConfusionMatrix& cm, int positive_class) {
    if (cm.counts.size() == 0 || cm.total() == 0) throw DataError("metrics: empty confusion matrix");
    return metrics_from_counts(one_vs_rest(cm, positive_class));
}

MulticlassMetrics compute_metrics_macro(const ConfusionMatrix& cm) {
    if (cm.counts.size() == 0 || cm.total() == 0) throw DataError("metrics: empty confusion matrix");
    MulticlassMetrics out;
    for (int c = 0; c < cm.num_classes(); ++c) out.per_class.push_back(compute_metrics(cm, c));

    auto mean_of = [&out](std::optional<double> MetricSet::*field) -> std::optional<double> {
        double sum = 0;
        int n = 0;
        for (const auto& m : out.per_class)
            if (m.*field) {
                sum += *(m.*field);
                ++n;
            }
        if (n == 0) return std::nullopt;
        return sum / n;
    };
    out.macro.accuracy = mean_of(&MetricSet::accuracy);
    out.macro.precision = mean_of(&MetricSet::precision);
    out.macro.detection_rate = mean_of(&MetricSet::detection_rate);
    out.macro.false_alarm_rate = mean_of(&MetricSet::false_alarm_rate);
    out.macro.f1 = mean_of(&MetricSet::f1);
    if (out.macro.accuracy) out.macro.error_rate = 1.0 - *out.macro.accuracy;
    out.micro_accuracy = static_cast<double>(cm.counts.trace()) / static_cast<double>(cm.total());
    return out;
}

int decode_prediction(const Eigen::Ref<const Eigen::VectorXd>& probabilities, const Codebook& codebook) {
    if (probabilities.size() != codebook.width)
        throw ShapeError("decode: expected " + std::to_string(codebook.width) + " probabilities");
    LabelTuple t;
    t.width = codebook.width;
    for (int j = 0; j < t.width; ++j) t.bits[static_cast<std::size_t>(j)] = probabilities(j) > 0.5 ? 1 : 0;
    if (auto idx = codebook.find(t)) return *idx;

    // log-likelihood keeps long products away from underflow
    int best = 0;
    double best_ll = -INFINITY;
    for (int c = 0; c < codebook.num_classes(); ++c) {
        const auto& code = codebook.codes[static_cast<std::size_t>(c)];
        double ll = 0;
        for (int j = 0; j < code.width; ++j) {
            const double p = std::clamp(probabilities(j), 1e-300, 1.0 - 1e-16);
            ll += code.bits[static_cast<std::size_t>(j)] ? std::log(p) : std::log1p(-p);
        }
        if (ll > best_ll) {
            best_ll = ll;
            best = c;
        }
    }
    return best;
}

std::string format_metric(const std::optional<double>& v) {
    if (!v) return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", *v);
    return buf;
}

void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& cm) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "true\\predicted";
    for (const auto& n : cm.class_names) out << ',' << n;
    out << '\n';
    for (int i = 0; i < cm.num_classes(); ++i) {
        out << cm.class_names[static_cast<std::size_t>(i)];
        for (int j = 0; j < cm.num_classes(); ++j) out << ',' << cm.counts(i, j);
        out << '\n';
    }
}

ConfusionMatrix read_confusion_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::string line, cell;
    std::getline(in, line);
    ConfusionMatrix cm;
    {
        std::stringstream ss(line);
        std::getline(ss, cell, ',');
        while (std::getline(ss, cell, ',')) cm.class_names.push_back(cell);
    }
    const auto c = static_cast<Eigen::Index>(cm.class_names.size());
    cm.counts.setZero(c, c);
    for (Eigen::Index i = 0; i < c; ++i) {
        if (!std::getline(in, line)) throw DataError("'" + path.string() + "': truncated confusion matrix");
        std::stringstream ss(line);
        std::getline(ss, cell, ',');
        for (Eigen::Index j = 0; j < c; ++j) {
            if (!std::getline(ss, cell, ',')) throw DataError("'" + path.string() + "': short row");
            cm.counts(i, j) = std::stoll(cell);
        }
    }
    return cm;
}

namespace {

void metric_row(std::ostream& out, const std::string& scope, const std::string& cls, const MetricSet& m) {
    out << scope << ',' << cls << ',' << format_metric(m.accuracy) << ',' << format_metric(m.precision) << ','
        << format_metric(m.detection_rate) << ',' << format_metric(m.false_alarm_rate) << ','
        << format_metric(m.f1) << ',' << format_metric(m.error_rate) << '\n';
}

}  // namespace

void write_metrics_csv(const std::filesystem::path& path, const ConfusionMatrix& cm) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    const auto mm = compute_metrics_macro(cm);
    out << "scope,class,AC,PR,DR,FAR,F1,Er\n";
    for (int c = 0; c < cm.num_classes(); ++c)
        metric_row(out, "class", cm.class_names[static_cast<std::size_t>(c)], mm.per_class[static_cast<std::size_t>(c)]);
    metric_row(out, "macro", "all", mm.macro);
    MetricSet micro;
    micro.accuracy = mm.micro_accuracy;
    micro.error_rate = 1.0 - mm.micro_accuracy;
    metric_row(out, "micro", "all", micro);
}

std::string metrics_report_block(const ConfusionMatrix& cm) {
    std::ostringstream out;
    out << "confusion (rows=true, cols=predicted)\n";
    for (int i = 0; i < cm.num_classes(); ++i) {
        out << "  " << cm.class_names[static_cast<std::size_t>(i)] << ':';
        for (int j = 0; j < cm.num_classes(); ++j) out << ' ' << cm.counts(i, j);
        out << '\n';
    }
    const auto mm = compute_metrics_macro(cm);
    auto line = [&out](const std::string& label, const MetricSet& m) {
        out << "  " << label << ": AC=" << format_metric(m.accuracy) << " PR=" << format_metric(m.precision)
            << " DR=" << format_metric(m.detection_rate) << " FAR=" << format_metric(m.false_alarm_rate)
            << " F1=" << format_metric(m.f1) << " Er=" << format_metric(m.error_rate) << '\n';
    };
    out << "metrics\n";
    if (cm.num_classes() == 2) line("binary (positive=" + cm.class_names[1] + ")", mm.per_class[1]);
    for (int c = 0; c < cm.num_classes(); ++c)
        line(cm.class_names[static_cast<std::size_t>(c)], mm.per_class[static_cast<std::size_t>(c)]);
    line("macro", mm.macro);
    out << "  micro accuracy: " << format_metric(mm.micro_accuracy) << '\n';
    return out.str();
}

}  // namespace uavids
