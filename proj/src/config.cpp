#include "uavids/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "uavids/error.hpp"

namespace uavids {

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size() || value.empty())
        throw ConfigError("invalid value '" + value + "' for " + key);
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError("invalid boolean '" + value + "' for " + key);
}

// shortest text that reads back to the same double
std::string num(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> k{
        "mode",          "task",          "per_class",          "min_flow_length", "max_flow_length",
        "train_fraction", "correlation_filter", "theta",        "align",           "pca_k",
        "standardize_binary", "uavs",     "grid_h",             "grid_w",          "conv_layout",
        "two_unit_binary", "six_class_codes", "epochs",         "batch",           "folds",
        "learning_rate", "momentum",      "momentum_form",      "dropout",         "seed",
        "threads",       "out_dir",       "data_dir"};
    return k;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "mode") mode = parse_flow_mode(value);
    else if (key == "task") task = parse_task(value);
    else if (key == "per_class") per_class = parse_number<int>(key, value);
    else if (key == "min_flow_length") min_flow_length = parse_number<int>(key, value);
    else if (key == "max_flow_length") max_flow_length = parse_number<int>(key, value);
    else if (key == "train_fraction") train_fraction = parse_number<double>(key, value);
    else if (key == "correlation_filter") correlation_filter = parse_bool(key, value);
    else if (key == "theta") theta = parse_number<double>(key, value);
    else if (key == "align") align = parse_alignment(value);
    else if (key == "pca_k") pca_k = parse_number<int>(key, value);
    else if (key == "standardize_binary") standardize_binary = parse_bool(key, value);
    else if (key == "uavs") uavs = value;
    else if (key == "grid_h") grid_h = parse_number<int>(key, value);
    else if (key == "grid_w") grid_w = parse_number<int>(key, value);
    else if (key == "conv_layout") conv_layout = nn::parse_conv_layout(value);
    else if (key == "two_unit_binary") two_unit_binary = parse_bool(key, value);
    else if (key == "six_class_codes") six_class_codes = value;
    else if (key == "epochs") epochs = parse_number<int>(key, value);
    else if (key == "batch") batch = parse_number<int>(key, value);
    else if (key == "folds") folds = parse_number<int>(key, value);
    else if (key == "learning_rate") learning_rate = parse_number<double>(key, value);
    else if (key == "momentum") momentum = parse_number<double>(key, value);
    else if (key == "momentum_form") momentum_form = nn::parse_momentum_form(value);
    else if (key == "dropout") dropout = parse_number<double>(key, value);
    else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
    else if (key == "threads") threads = parse_number<int>(key, value);
    else if (key == "out_dir") out_dir = value;
    else if (key == "data_dir") data_dir = value;
    else throw ConfigError("unknown config key '" + key + "'");
}

RunConfig RunConfig::from_key_values(const KeyValues& kv) {
    RunConfig c;
    for (const auto& [k, v] : kv) c.set(k, v);
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) { return from_key_values(read_key_values(path)); }

KeyValues RunConfig::to_key_values() const {
    KeyValues kv;
    kv["mode"] = std::string(to_string(mode));
    kv["task"] = std::string(to_string(task));
    kv["per_class"] = std::to_string(per_class);
    kv["min_flow_length"] = std::to_string(min_flow_length);
    kv["max_flow_length"] = std::to_string(max_flow_length);
    kv["train_fraction"] = num(train_fraction);
    kv["correlation_filter"] = correlation_filter ? "true" : "false";
    kv["theta"] = num(theta);
    kv["align"] = std::string(to_string(align));
    kv["pca_k"] = std::to_string(pca_k);
    kv["standardize_binary"] = standardize_binary ? "true" : "false";
    kv["uavs"] = uavs;
    kv["grid_h"] = std::to_string(grid_h);
    kv["grid_w"] = std::to_string(grid_w);
    kv["conv_layout"] = std::string(nn::to_string(conv_layout));
    kv["two_unit_binary"] = two_unit_binary ? "true" : "false";
    kv["six_class_codes"] = six_class_codes;
    kv["epochs"] = std::to_string(epochs);
    kv["batch"] = std::to_string(batch);
    kv["folds"] = std::to_string(folds);
    kv["learning_rate"] = num(learning_rate);
    kv["momentum"] = num(momentum);
    kv["momentum_form"] = std::string(nn::to_string(momentum_form));
    kv["dropout"] = num(dropout);
    kv["seed"] = std::to_string(seed);
    kv["threads"] = std::to_string(threads);
    kv["out_dir"] = out_dir;
    kv["data_dir"] = data_dir;
    return kv;
}

void RunConfig::save(const std::filesystem::path& path) const {
    write_key_values(path, resolved().to_key_values(), "uavids run config (resolved)");
}

RunConfig RunConfig::resolved() const {
    RunConfig r = *this;
    const int side = task == Task::binary ? 8 : 6;
    if (r.grid_h == 0) r.grid_h = side;
    if (r.grid_w == 0) r.grid_w = side;
    if (r.uavs == "auto") {
        std::string list;
        for (auto t : uav_list()) list += (list.empty() ? "" : ",") + std::string(to_string(t));
        r.uavs = list;
    }
    if (r.data_dir.empty()) r.data_dir = (std::filesystem::path(out_dir) / "data").string();
    return r;
}

void RunConfig::validate() const {
    if (per_class < 1) throw ConfigError("per_class must be >= 1");
    if (min_flow_length < 2 || max_flow_length < min_flow_length)
        throw ConfigError("flow lengths must satisfy 2 <= min_flow_length <= max_flow_length");
    if (!(train_fraction > 0 && train_fraction < 1)) throw ConfigError("train_fraction must lie in (0, 1)");
    if (!std::isfinite(theta)) throw ConfigError("theta must be finite");
    if (pca_k < 1) throw ConfigError("pca_k must be >= 1");
    if (grid_h < 0 || grid_w < 0) throw ConfigError("grid dimensions must be >= 0");
    if (!(dropout >= 0 && dropout < 1)) throw ConfigError("dropout must lie in [0, 1)");
    if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
    training_config().validate();
    (void)uav_list();
    (void)codebook();
    if (task == Task::four_class)
        for (auto t : uav_list())
            if (t == UavType::DJISpark) throw ConfigError("four_class uses only parrot and dbpower");
}

std::vector<UavType> RunConfig::uav_list() const {
    if (uavs == "auto") {
        if (task == Task::four_class) return {UavType::DBPower, UavType::Parrot};
        return {kAllUavTypes.begin(), kAllUavTypes.end()};
    }
    std::vector<UavType> out;
    for (const auto& s : split_list(uavs)) out.push_back(parse_uav_type(s));
    if (out.empty()) throw ConfigError("uavs must name at least one uav type");
    return out;
}

Codebook RunConfig::codebook() const {
    std::vector<LabelTuple> codes;
    if (task == Task::six_class && six_class_codes != "default")
        for (const auto& s : split_list(six_class_codes)) codes.push_back(parse_tuple(s));
    return make_codebook(task, codes, two_unit_binary);
}

nn::ModelConfig RunConfig::model_config() const {
    const RunConfig r = resolved();
    nn::ModelConfig m;
    m.input_h = r.grid_h;
    m.input_w = r.grid_w;
    m.output_width = codebook().width;
    m.dropout_rate = dropout;
    m.layout = conv_layout;
    return m;
}

TrainingConfig RunConfig::training_config() const {
    TrainingConfig t;
    t.epochs = epochs;
    t.batch_size = batch;
    t.folds = folds;
    t.learning_rate = learning_rate;
    t.momentum = momentum;
    t.momentum_form = momentum_form;
    t.seed = seed;
    t.threads = threads;
    return t;
}

std::filesystem::path RunConfig::data_path() const { return resolved().data_dir; }

std::filesystem::path RunConfig::stage_path(const std::string& stage) const {
    return std::filesystem::path(out_dir) / stage;
}

}  // namespace uavids
