#include "uavids/pipeline.hpp"

#include <fstream>
#include <iostream>

#include "uavids/error.hpp"
#include "uavids/rng.hpp"

namespace uavids::pipeline {

namespace fs = std::filesystem;

LabeledData generate_dataset(UavType uav, FlowMode mode, int per_class, std::uint64_t seed, int min_flow_length,
                             int max_flow_length) {
    if (per_class < 1) throw ConfigError("per_class must be >= 1");
    LabeledData data;
    data.features.column_names = feature_column_names(mode);
    const auto p = static_cast<Eigen::Index>(data.features.column_names.size());
    data.features.values.resize(2 * per_class, p);

    Eigen::Index row = 0;
    for (int attack = 0; attack < 2; ++attack) {
        ClassProfile profile = default_profile(uav, attack == 1);
        profile.min_length = min_flow_length;
        profile.max_length = max_flow_length;
        for (int i = 0; i < per_class; ++i, ++row) {
            const auto flow_seed = derive_seed({seed, static_cast<std::uint64_t>(uav), static_cast<std::uint64_t>(attack),
                                                static_cast<std::uint64_t>(i)});
            FeatureRow fr;
            if (mode == FlowMode::UF) {
                fr = build_feature_row(std::nullopt, std::nullopt, synth_flow(profile, flow_seed), mode);
            } else {
                auto set = synth_flow_set(profile, flow_seed);
                fr = build_feature_row(set.uplink, set.downlink, set.total, mode);
            }
            data.features.values.row(row) = Eigen::Map<const Eigen::RowVectorXd>(fr.values.data(), p);
            data.labels.push_back(attack);
        }
    }
    return data;
}

namespace {

std::vector<std::string> pc_names(Eigen::Index k) {
    std::vector<std::string> names;
    for (Eigen::Index i = 0; i < k; ++i) names.push_back("pc" + std::to_string(i + 1));
    return names;
}

void save_standardizer(const fs::path& path, const Standardizer& s, const std::vector<std::string>& names) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "feature,mean,scale\n";
    char buf[64];
    for (Eigen::Index j = 0; j < s.means.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g", s.means(j), s.scales(j));
        out << names[static_cast<std::size_t>(j)] << ',' << buf << '\n';
    }
}

}  // namespace

PreprocessResult preprocess_sources(const std::map<UavType, LabeledData>& sources, const RunConfig& config) {
    const RunConfig cfg = config.resolved();
    cfg.validate();
    const auto uavs = cfg.uav_list();
    PreprocessResult result;

    std::vector<LabeledData> parts;
    for (auto t : uavs) {
        auto it = sources.find(t);
        if (it == sources.end()) throw DataError("no dataset for uav type '" + std::string(to_string(t)) + "'");
        parts.push_back(it->second);
    }

    if (cfg.task != Task::binary && cfg.correlation_filter && parts.size() >= 2) {
        std::vector<FeatureMatrix> sets;
        for (const auto& part : parts) sets.push_back(part.features);
        CorrelationReport report = parts.size() == 2
                                       ? select_features(sets[0], sets[1], cfg.theta, cfg.align).report
                                       : select_features_multi(sets, cfg.theta, cfg.align);
        const auto keep = report.retained();
        for (auto& part : parts) part.features = part.features.select_columns(keep);
        result.correlation = std::move(report);
    }

    // raw 0/1 labels -> class indices of the task
    for (std::size_t s = 0; s < parts.size(); ++s)
        for (auto& label : parts[s].labels) {
            if (label != 0 && label != 1) throw DataError("raw labels must be 0 or 1");
            label = class_index(cfg.task, uavs[s], label == 1);
        }

    const LabeledData combined = concat_datasets(parts);
    auto split = split_train_test(combined, cfg.train_fraction, cfg.seed);
    result.warnings = split.warnings;
    result.train = std::move(split.train);
    result.test = std::move(split.test);

    if (cfg.task == Task::binary) {
        if (cfg.standardize_binary) {
            Standardizer st = standardize_fit(result.train.features.values);
            result.train.features.values = st.apply(result.train.features.values);
            result.test.features.values = st.apply(result.test.features.values);
            result.standardizer = std::move(st);
        }
    } else {
        const Standardizer st = standardize_fit(result.train.features.values);
        PcaModel pca = pca_fit(result.train.features.values, cfg.pca_k, st);
        pca.feature_names = result.train.features.column_names;
        result.train.features.values = pca_transform(result.train.features.values, pca);
        result.test.features.values = pca_transform(result.test.features.values, pca);
        result.train.features.column_names = result.test.features.column_names = pc_names(cfg.pca_k);
        result.pca = std::move(pca);
    }
    return result;
}

void cmd_gen_data(const RunConfig& config) {
    const RunConfig cfg = config.resolved();
    cfg.validate();
    const fs::path dir = cfg.data_dir;
    fs::create_directories(dir);
    KeyValues manifest;
    manifest["mode"] = std::string(to_string(cfg.mode));
    manifest["task_width"] = std::to_string(cfg.codebook().width);
    manifest["seed"] = std::to_string(cfg.seed);
    manifest["per_class"] = std::to_string(cfg.per_class);
    manifest["label"] = "binary";
    for (auto t : kAllUavTypes) {
        const auto name = std::string(to_string(t)) + "_" + std::string(to_string(cfg.mode)) + ".csv";
        save_csv(dir / name, generate_dataset(t, cfg.mode, cfg.per_class, cfg.seed, cfg.min_flow_length,
                                              cfg.max_flow_length));
        manifest["source." + std::string(to_string(t))] = name;
    }
    write_key_values(dir / "manifest.txt", manifest, "uavids dataset manifest");
    cfg.save(dir / "run_config.txt");
}

void cmd_preprocess(const RunConfig& config) {
    const RunConfig cfg = config.resolved();
    cfg.validate();
    const fs::path data_dir = cfg.data_dir;
    const auto manifest = read_key_values(data_dir / "manifest.txt");
    if (auto it = manifest.find("mode"); it != manifest.end() && parse_flow_mode(it->second) != cfg.mode)
        throw ConfigError("dataset mode '" + it->second + "' does not match the configured mode");

    std::map<UavType, LabeledData> sources;
    for (auto t : cfg.uav_list()) {
        auto it = manifest.find("source." + std::string(to_string(t)));
        if (it == manifest.end())
            throw DataError("manifest in '" + data_dir.string() + "' lists no source for " + std::string(to_string(t)));
        const fs::path file = fs::path(it->second).is_absolute() ? fs::path(it->second) : data_dir / it->second;
        sources.emplace(t, load_csv(file, true));
    }

    const auto result = preprocess_sources(sources, cfg);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';

    const fs::path out = cfg.stage_path("preprocess");
    fs::create_directories(out);
    save_csv(out / "train.csv", result.train);
    save_csv(out / "test.csv", result.test);
    if (result.correlation) result.correlation->save(out / "correlation_report.txt");
    if (result.pca) result.pca->save(out / "pca_model.txt");
    if (result.standardizer) save_standardizer(out / "standardizer.csv", *result.standardizer,
                                               result.train.features.column_names);

    KeyValues m;
    m["mode"] = std::string(to_string(cfg.mode));
    m["task"] = std::string(to_string(cfg.task));
    m["task_width"] = std::to_string(cfg.codebook().width);
    m["seed"] = std::to_string(cfg.seed);
    m["features"] = std::to_string(result.train.features.cols());
    m["train"] = "train.csv";
    m["train_rows"] = std::to_string(result.train.size());
    m["test"] = "test.csv";
    m["test_rows"] = std::to_string(result.test.size());
    m["sources"] = cfg.uavs;
    m["source_dir"] = data_dir.string();
    if (result.correlation) m["dropped_features"] = std::to_string(result.correlation->dropped().size());
    write_key_values(out / "manifest.txt", m, "uavids preprocess manifest");
    cfg.save(out / "run_config.txt");
}

namespace {

void check_stage_task(const fs::path& prep, const RunConfig& cfg) {
    const auto m = read_key_values(prep / "manifest.txt");
    auto it = m.find("task");
    if (it != m.end() && parse_task(it->second) != cfg.task)
        throw ConfigError("preprocessed data is for task '" + it->second + "', configured task is '" +
                          std::string(to_string(cfg.task)) + "'");
}

}  // namespace

void cmd_train(const RunConfig& config) {
    const RunConfig cfg = config.resolved();
    cfg.validate();
    const fs::path prep = cfg.stage_path("preprocess");
    check_stage_task(prep, cfg);
    const auto train = load_csv(prep / "train.csv", true);
    const auto codebook = cfg.codebook();
    const auto model = cfg.model_config();
    model.validate();
    if (train.features.cols() > model.input_h * model.input_w)
        throw ConfigError(std::to_string(train.features.cols()) + " features do not fit a " +
                          std::to_string(model.input_h) + "x" + std::to_string(model.input_w) + " grid");
    const auto encoded = encode_set(train, codebook, model.input_h, model.input_w);
    const auto outcome = train_model(encoded, model, codebook, cfg.training_config(), cfg.to_key_values());

    const fs::path out = cfg.stage_path("train");
    fs::create_directories(out);
    nn::save_checkpoint(out / "checkpoint.bin", outcome.checkpoint);
    outcome.report.save(out / "training_report.txt");
    outcome.report.save_curves_csv(out / "curves.csv");
    cfg.save(out / "run_config.txt");
}

void cmd_eval(const RunConfig& config) {
    const RunConfig cfg = config.resolved();
    cfg.validate();
    const fs::path ckpt_path = cfg.stage_path("train") / "checkpoint.bin";
    if (!fs::exists(ckpt_path))
        throw DataError("checkpoint not found: '" + ckpt_path.string() + "' (run the train command first)");
    const auto ckpt = nn::load_checkpoint(ckpt_path);
    const fs::path prep = cfg.stage_path("preprocess");
    const auto test = load_csv(prep / "test.csv", true);
    const auto encoded = encode_set(test, ckpt.codebook, ckpt.config.input_h, ckpt.config.input_w);
    const auto report = evaluate(ckpt, encoded);

    const fs::path out = cfg.stage_path("eval");
    report.save(out);
    cfg.save(out / "run_config.txt");
}

void cmd_report(const RunConfig& config) {
    const RunConfig cfg = config.resolved();
    const fs::path root = cfg.out_dir;
    const fs::path out = root / "report";
    fs::create_directories(out);

    const std::vector<std::pair<std::string, std::vector<std::string>>> artifacts{
        {"preprocess", {"manifest.txt", "correlation_report.txt", "pca_model.txt", "standardizer.csv"}},
        {"train", {"training_report.txt", "curves.csv"}},
        {"eval", {"confusion.csv", "metrics.csv", "eval_report.txt"}},
    };
    for (const auto& [stage, files] : artifacts) {
        for (const auto& f : files) {
            const fs::path src = root / stage / f;
            if (fs::exists(src)) fs::copy_file(src, out / (stage + "_" + f), fs::copy_options::overwrite_existing);
        }
    }
    const fs::path eval_report = root / "eval" / "eval_report.txt";
    const fs::path train_report = root / "train" / "training_report.txt";
    if (!fs::exists(eval_report) || !fs::exists(train_report))
        throw DataError("report needs both train and eval outputs under '" + root.string() + "'");

    std::ofstream summary(out / "summary.txt", std::ios::binary);
    summary << "uavids run summary\n\n[config]\n";
    for (const auto& [k, v] : cfg.to_key_values()) summary << k << '=' << v << '\n';
    std::ifstream tr(train_report);
    std::string line;
    summary << "\n[training]\n";
    // the config block is already printed above
    bool in_config = false;
    while (std::getline(tr, line)) {
        if (!line.empty() && line.front() == '[') in_config = line == "[config]";
        if (!in_config) summary << line << '\n';
    }
    summary << "\n[evaluation]\n";
    std::ifstream ev(eval_report);
    summary << ev.rdbuf();
    cfg.save(out / "run_config.txt");
}

}  // namespace uavids::pipeline
