#include "uavids/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <numeric>

#include "uavids/error.hpp"
#include "uavids/preprocess.hpp"
#include "uavids/rng.hpp"

namespace uavids {

EncodedSet EncodedSet::subset(const std::vector<std::size_t>& rows) const {
    EncodedSet out;
    out.targets.resize(static_cast<Eigen::Index>(rows.size()), targets.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.grids.push_back(grids[rows[k]]);
        out.targets.row(static_cast<Eigen::Index>(k)) = targets.row(static_cast<Eigen::Index>(rows[k]));
        out.classes.push_back(classes[rows[k]]);
    }
    return out;
}

EncodedSet encode_set(const LabeledData& data, const Codebook& codebook, Eigen::Index h, Eigen::Index w) {
    if (data.labels.size() != static_cast<std::size_t>(data.size())) throw DataError("encode: one label per row required");
    EncodedSet set;
    set.targets.resize(data.size(), codebook.width);
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        const int cls = data.labels[static_cast<std::size_t>(i)];
        const auto& code = codebook.encode(cls);
        for (int j = 0; j < codebook.width; ++j) set.targets(i, j) = code.bits[static_cast<std::size_t>(j)];
        set.classes.push_back(cls);
        set.grids.push_back(zero_pad_reshape(data.features.values.row(i).transpose(), h, w).data);
    }
    return set;
}

void TrainingConfig::validate() const {
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (!(learning_rate > 0)) throw ConfigError("learning rate must be positive");
    if (!(momentum >= 0 && momentum < 1)) throw ConfigError("momentum must lie in [0, 1)");
}

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, int k, std::uint64_t seed) {
    if (k < 1) throw ConfigError("k must be positive");
    const auto kk = static_cast<std::size_t>(k);
    if (n < kk) throw DataError("k-fold split needs n >= k (n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed({seed, 0xf01d}));
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<std::vector<std::size_t>> folds(kk);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < kk; ++f) {
        const std::size_t size = n / kk + (f < n % kk ? 1 : 0);
        folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                        order.begin() + static_cast<std::ptrdiff_t>(pos + size));
        pos += size;
    }
    return folds;
}

std::pair<double, double> loss_and_accuracy(const nn::NetworkParams& params, const nn::ModelConfig& model,
                                            const Codebook& codebook, const EncodedSet& set) {
    if (set.size() == 0) throw DataError("cannot score an empty set");
    Eigen::MatrixXd probs(static_cast<Eigen::Index>(set.size()), model.output_width);
    std::size_t correct = 0;
    for (std::size_t s = 0; s < set.size(); ++s) {
        const Eigen::VectorXd p = nn::model_forward(set.grids[s], params, model, nn::Mode::inference);
        probs.row(static_cast<Eigen::Index>(s)) = p.transpose();
        if (decode_prediction(p, codebook) == set.classes[s]) ++correct;
    }
    return {nn::bce_loss(probs, set.targets), static_cast<double>(correct) / static_cast<double>(set.size())};
}

FoldResult train_fold(const EncodedSet& train, const EncodedSet* validation, const nn::ModelConfig& model,
                      const Codebook& codebook, const TrainingConfig& config, int fold_index,
                      nn::NetworkParams* trained) {
    if (train.size() == 0) throw DataError("fold " + std::to_string(fold_index) + " has no training samples");
    FoldResult result;
    result.fold_index = fold_index;
    result.train_size = train.size();
    result.validation_size = validation ? validation->size() : 0;

    const auto fold = static_cast<std::uint64_t>(fold_index);
    nn::NetworkParams params = nn::init_params(model, derive_seed({config.seed, fold}));
    auto optimizer = nn::make_optimizer(params, config.learning_rate, config.momentum, config.momentum_form);

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<Eigen::MatrixXd> batch_grids;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Rng rng(derive_seed({config.seed, fold, static_cast<std::uint64_t>(epoch)}));
        std::shuffle(order.begin(), order.end(), rng);

        double loss_sum = 0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            const auto n = static_cast<Eigen::Index>(end - start);
            batch_grids.clear();
            Eigen::MatrixXd targets(n, model.output_width);
            for (std::size_t k = start; k < end; ++k) {
                batch_grids.push_back(train.grids[order[k]]);
                targets.row(static_cast<Eigen::Index>(k - start)) = train.targets.row(static_cast<Eigen::Index>(order[k]));
            }
            auto bg = nn::batch_gradient(params, model, batch_grids, targets, nn::Mode::training, &rng);
            if (!std::isfinite(bg.loss) || !bg.grads.all_finite())
                throw DivergenceError("divergence detected in fold " + std::to_string(fold_index) + ", epoch " +
                                      std::to_string(epoch + 1));
            nn::sgd_momentum_step(params, bg.grads, optimizer);
            loss_sum += bg.loss * static_cast<double>(n);
            for (Eigen::Index s = 0; s < n; ++s)
                if (decode_prediction(bg.probs.row(s).transpose(), codebook) ==
                    train.classes[order[start + static_cast<std::size_t>(s)]])
                    ++correct;
        }

        EpochRecord rec;
        rec.train_loss = loss_sum / static_cast<double>(train.size());
        rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(train.size());
        if (validation) std::tie(rec.val_loss, rec.val_accuracy) = loss_and_accuracy(params, model, codebook, *validation);
        if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.val_loss))
            throw DivergenceError("divergence detected in fold " + std::to_string(fold_index) + ", epoch " +
                                  std::to_string(epoch + 1));
        result.epochs.push_back(rec);
    }
    if (validation) result.final_loss = loss_and_accuracy(params, model, codebook, *validation).first;
    if (trained) *trained = std::move(params);
    return result;
}

TrainingOutcome train_model(const EncodedSet& train, const nn::ModelConfig& model, const Codebook& codebook,
                            const TrainingConfig& config, const KeyValues& config_snapshot) {
    config.validate();
    model.validate();
    if (model.output_width != codebook.width) throw ShapeError("model output width does not match the label width");
    for (const auto& g : train.grids)
        if (g.rows() != model.input_h || g.cols() != model.input_w)
            throw ShapeError("training grids do not match the configured " + std::to_string(model.input_h) + "x" +
                             std::to_string(model.input_w) + " input");

    const auto folds = kfold_split(train.size(), config.folds, config.seed);
    auto run_fold = [&](int f) {
        std::vector<std::size_t> train_rows;
        for (int g = 0; g < config.folds; ++g)
            if (g != f) train_rows.insert(train_rows.end(), folds[static_cast<std::size_t>(g)].begin(),
                                          folds[static_cast<std::size_t>(g)].end());
        std::sort(train_rows.begin(), train_rows.end());
        const EncodedSet fold_train = train.subset(train_rows);
        const EncodedSet fold_val = train.subset(folds[static_cast<std::size_t>(f)]);
        return train_fold(fold_train, &fold_val, model, codebook, config, f);
    };

    TrainingOutcome out;
    auto& report = out.report;
    report.seed = config.seed;
    report.config = config_snapshot;
    if (config.threads > 1) {
        std::vector<std::future<FoldResult>> jobs;
        // a simple cap on concurrency: launch in waves of `threads`
        for (int base = 0; base < config.folds; base += config.threads) {
            jobs.clear();
            for (int f = base; f < std::min(config.folds, base + config.threads); ++f)
                jobs.push_back(std::async(std::launch::async, run_fold, f));
            for (auto& j : jobs) report.folds.push_back(j.get());
        }
    } else {
        for (int f = 0; f < config.folds; ++f) report.folds.push_back(run_fold(f));
    }

    double sum = 0;
    for (const auto& f : report.folds) sum += f.final_loss;
    report.total_loss = sum / static_cast<double>(report.folds.size());

    report.mean_curve.assign(static_cast<std::size_t>(config.epochs), EpochRecord{});
    for (const auto& f : report.folds) {
        for (std::size_t e = 0; e < f.epochs.size(); ++e) {
            auto& m = report.mean_curve[e];
            m.train_loss += f.epochs[e].train_loss;
            m.train_accuracy += f.epochs[e].train_accuracy;
            m.val_loss += f.epochs[e].val_loss;
            m.val_accuracy += f.epochs[e].val_accuracy;
        }
    }
    const double k = static_cast<double>(report.folds.size());
    for (auto& m : report.mean_curve) {
        m.train_loss /= k;
        m.train_accuracy /= k;
        m.val_loss /= k;
        m.val_accuracy /= k;
    }

    out.checkpoint.config = model;
    out.checkpoint.codebook = codebook;
    const auto final_fold = train_fold(train, nullptr, model, codebook, config, config.folds, &out.checkpoint.params);
    report.final_fit = final_fold.epochs;
    return out;
}

namespace {

std::string fmt(double v, const char* pattern = "%.6f") {
    char buf[48];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

}  // namespace

void TrainingReport::save(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "uavids-training-report 1\n";
    out << "seed=" << seed << "\nfolds=" << folds.size() << "\ntotal_loss=" << fmt(total_loss) << '\n';
    out << "[config]\n";
    for (const auto& [key, value] : config) out << key << '=' << value << '\n';
    for (const auto& f : folds) {
        out << "[fold " << f.fold_index << "]\n";
        out << "train_size=" << f.train_size << "\nvalidation_size=" << f.validation_size
            << "\nfinal_loss=" << fmt(f.final_loss) << '\n';
        out << "epoch,train_loss,train_accuracy,val_loss,val_accuracy\n";
        for (std::size_t e = 0; e < f.epochs.size(); ++e) {
            const auto& r = f.epochs[e];
            out << e + 1 << ',' << fmt(r.train_loss) << ',' << fmt(r.train_accuracy) << ',' << fmt(r.val_loss) << ','
                << fmt(r.val_accuracy) << '\n';
        }
    }
    out << "[mean]\nepoch,train_loss,train_accuracy,val_loss,val_accuracy\n";
    for (std::size_t e = 0; e < mean_curve.size(); ++e) {
        const auto& r = mean_curve[e];
        out << e + 1 << ',' << fmt(r.train_loss) << ',' << fmt(r.train_accuracy) << ',' << fmt(r.val_loss) << ','
            << fmt(r.val_accuracy) << '\n';
    }
    out << "[final_fit]\nepoch,train_loss,train_accuracy\n";
    for (std::size_t e = 0; e < final_fit.size(); ++e)
        out << e + 1 << ',' << fmt(final_fit[e].train_loss) << ',' << fmt(final_fit[e].train_accuracy) << '\n';
}

void TrainingReport::save_curves_csv(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "epoch,fold,metric,value\n";
    auto emit = [&out](const std::string& fold, const std::vector<EpochRecord>& curve, bool with_val) {
        for (std::size_t e = 0; e < curve.size(); ++e) {
            const auto ep = std::to_string(e + 1);
            out << ep << ',' << fold << ",train_loss," << fmt(curve[e].train_loss) << '\n';
            out << ep << ',' << fold << ",train_accuracy," << fmt(curve[e].train_accuracy) << '\n';
            if (!with_val) continue;
            out << ep << ',' << fold << ",val_loss," << fmt(curve[e].val_loss) << '\n';
            out << ep << ',' << fold << ",val_accuracy," << fmt(curve[e].val_accuracy) << '\n';
        }
    };
    for (const auto& f : folds) emit(std::to_string(f.fold_index), f.epochs, true);
    emit("mean", mean_curve, true);
    emit("final", final_fit, false);
}

EvalReport evaluate(const nn::Checkpoint& checkpoint, const EncodedSet& test) {
    if (test.size() == 0) throw DataError("evaluation set is empty");
    const auto& cfg = checkpoint.config;
    if (test.targets.cols() != cfg.output_width)
        throw ShapeError("test labels have width " + std::to_string(test.targets.cols()) + ", checkpoint expects " +
                         std::to_string(cfg.output_width));
    EvalReport report;
    report.samples = test.size();
    Eigen::MatrixXd probs(static_cast<Eigen::Index>(test.size()), cfg.output_width);
    std::vector<int> predicted;
    predicted.reserve(test.size());
    for (std::size_t s = 0; s < test.size(); ++s) {
        const Eigen::VectorXd p = nn::model_forward(test.grids[s], checkpoint.params, cfg, nn::Mode::inference);
        probs.row(static_cast<Eigen::Index>(s)) = p.transpose();
        predicted.push_back(decode_prediction(p, checkpoint.codebook));
    }
    report.loss = nn::bce_loss(probs, test.targets);
    report.confusion = confusion(test.classes, predicted, checkpoint.codebook.num_classes(), checkpoint.codebook.class_names);
    report.metrics = compute_metrics_macro(report.confusion);
    return report;
}

void EvalReport::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    write_confusion_csv(dir / "confusion.csv", confusion);
    write_metrics_csv(dir / "metrics.csv", confusion);
    std::ofstream out(dir / "eval_report.txt", std::ios::binary);
    if (!out) throw DataError("cannot write '" + (dir / "eval_report.txt").string() + "'");
    out << "uavids-eval-report 1\n";
    out << "samples=" << samples << "\nloss=" << fmt(loss) << "\naccuracy=" << fmt(metrics.micro_accuracy) << '\n';
    out << metrics_report_block(confusion);
}

}  // namespace uavids
