// uavids: gen-data | preprocess | train | eval | report
#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>

#include "uavids/error.hpp"
#include "uavids/pipeline.hpp"

namespace {

const std::map<std::string, std::string> kHelp{
    {"mode", "uf (total link) or bf (uplink, downlink, total)"},
    {"task", "binary, four_class or six_class"},
    {"per_class", "flows generated per class and uav"},
    {"min_flow_length", "shortest synthetic flow, packets"},
    {"max_flow_length", "longest synthetic flow, packets"},
    {"train_fraction", "share of rows used for training"},
    {"correlation_filter", "drop features correlated across uav datasets (multiclass)"},
    {"theta", "correlation threshold for dropping a feature"},
    {"align", "sorted or truncate: pairing of columns of unequal length"},
    {"pca_k", "principal components kept (multiclass)"},
    {"standardize_binary", "standardize features on the binary path"},
    {"uavs", "comma list of uav datasets to combine"},
    {"grid_h", "input grid rows"},
    {"grid_w", "input grid columns"},
    {"conv_layout", "grid2d or flat1d"},
    {"two_unit_binary", "two sigmoid outputs for the binary task"},
    {"six_class_codes", "six 3-bit codes in class order, or default"},
    {"epochs", "epochs per fold and for the final fit"},
    {"batch", "minibatch size"},
    {"folds", "cross-validation folds"},
    {"learning_rate", "SGD step size"},
    {"momentum", "momentum coefficient in [0, 1)"},
    {"momentum_form", "damped or classical"},
    {"dropout", "dropout rate after the dense layer"},
    {"seed", "master seed for every random stream"},
    {"threads", "folds trained concurrently"},
    {"out_dir", "root directory for stage outputs"},
    {"data_dir", "dataset directory (default <out_dir>/data)"},
};

std::string dashed(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace uavids;

    CLI::App app{"UAV intrusion detection: synthetic flows, PCA, CNN-LSTM"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "flat key=value run config")->check(CLI::ExistingFile);

    // every config key is also a flag; flags override the file
    std::map<std::string, std::string> overrides;
    const auto defaults = RunConfig{}.to_key_values();
    for (const auto& key : RunConfig::keys()) {
        auto it = kHelp.find(key);
        std::string help = it == kHelp.end() ? key : it->second;
        if (auto d = defaults.find(key); d != defaults.end() && !d->second.empty()) help += " [" + d->second + "]";
        app.add_option("--" + dashed(key), overrides[key], help)->group("Run config");
    }

    struct Sub {
        const char* name;
        const char* help;
        void (*fn)(const RunConfig&);
    };
    const Sub subs[] = {
        {"gen-data", "write synthetic per-uav flow datasets", pipeline::cmd_gen_data},
        {"preprocess", "correlation filter, split, standardize, PCA", pipeline::cmd_preprocess},
        {"train", "k-fold training and final fit", pipeline::cmd_train},
        {"eval", "evaluate the checkpoint on the held-out set", pipeline::cmd_eval},
        {"report", "collect train and eval artifacts", pipeline::cmd_report},
    };
    for (const auto& s : subs) app.add_subcommand(s.name, s.help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
        for (const auto& key : RunConfig::keys())
            if (app.count("--" + dashed(key)) > 0) cfg.set(key, overrides[key]);
        for (const auto& s : subs)
            if (app.got_subcommand(s.name)) s.fn(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << '\n';
        return 4;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
