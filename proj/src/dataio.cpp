#include "uavids/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "uavids/error.hpp"
#include "uavids/rng.hpp"

namespace uavids {

std::optional<Eigen::Index> FeatureMatrix::find(const std::string& name) const {
    auto it = std::find(column_names.begin(), column_names.end(), name);
    if (it == column_names.end()) return std::nullopt;
    return static_cast<Eigen::Index>(it - column_names.begin());
}

FeatureMatrix FeatureMatrix::select_columns(const std::vector<std::string>& names) const {
    FeatureMatrix out;
    out.column_names = names;
    out.values.resize(rows(), static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) {
        auto idx = find(names[j]);
        if (!idx) throw DataError("unknown column '" + names[j] + "'");
        out.values.col(static_cast<Eigen::Index>(j)) = values.col(*idx);
    }
    return out;
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<Eigen::Index>& idx) const {
    FeatureMatrix out;
    out.column_names = column_names;
    out.values = values(idx, Eigen::all);
    return out;
}

void FeatureMatrix::validate() const {
    if (static_cast<std::size_t>(cols()) != column_names.size())
        throw DataError("column name count does not match matrix width");
    std::unordered_set<std::string> seen;
    for (const auto& n : column_names)
        if (!seen.insert(n).second) throw DataError("duplicate column name '" + n + "'");
    if (!values.allFinite()) throw DataError("feature matrix contains non-finite values");
}

LabeledData LabeledData::select_rows(const std::vector<Eigen::Index>& rows) const {
    LabeledData out;
    out.features = features.select_rows(rows);
    if (!labels.empty()) {
        out.labels.reserve(rows.size());
        for (auto r : rows) out.labels.push_back(labels[static_cast<std::size_t>(r)]);
    }
    return out;
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        cells.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    for (auto& c : cells) {
        while (!c.empty() && (c.front() == ' ' || c.front() == '\t')) c.remove_prefix(1);
        while (!c.empty() && (c.back() == ' ' || c.back() == '\t' || c.back() == '\r'))
            c.remove_suffix(1);
    }
    return cells;
}

std::optional<double> parse_double(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

}  // namespace

LabeledData load_csv(const std::filesystem::path& path, bool has_label) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw DataError("'" + path.string() + "' is empty");
    auto header = split_commas(line);
    const std::size_t arity = header.size();
    if (has_label && arity < 2) throw DataError("'" + path.string() + "': no feature columns");
    const std::size_t p = has_label ? arity - 1 : arity;

    LabeledData data;
    for (std::size_t j = 0; j < p; ++j) data.features.column_names.emplace_back(header[j]);

    std::vector<double> flat;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        auto cells = split_commas(line);
        if (cells.size() != arity) {
            throw DataError(path.string() + ": row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " columns, expected " +
                            std::to_string(arity));
        }
        for (std::size_t j = 0; j < arity; ++j) {
            auto v = parse_double(cells[j]);
            if (!v || !std::isfinite(*v)) {
                throw DataError(path.string() + ": row " + std::to_string(row) + ", column " +
                                std::to_string(j + 1) + " ('" +
                                (j < p ? data.features.column_names[j] : std::string("label")) +
                                "'): non-numeric value '" + std::string(cells[j]) + "'");
            }
            if (has_label && j == p) {
                if (*v != std::round(*v))
                    throw DataError(path.string() + ": row " + std::to_string(row) +
                                    ": label must be an integer");
                data.labels.push_back(static_cast<int>(*v));
            } else {
                flat.push_back(*v);
            }
        }
    }
    data.features.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        flat.data(), static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(p));
    data.features.validate();
    return data;
}

void save_csv(const std::filesystem::path& path, const LabeledData& data) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    const auto& names = data.features.column_names;
    for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
    if (!data.labels.empty()) out << (names.empty() ? "" : ",") << "label";
    out << '\n';
    char buf[32];
    const auto& v = data.features.values;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        for (Eigen::Index j = 0; j < v.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.9g", v(i, j));
            if (j) out << ',';
            out << buf;
        }
        if (!data.labels.empty())
            out << (v.cols() ? "," : "") << data.labels[static_cast<std::size_t>(i)];
        out << '\n';
    }
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

// --- labels -----------------------------------------------------------------

std::string_view to_string(Task t) {
    switch (t) {
        case Task::binary: return "binary";
        case Task::four_class: return "four_class";
        case Task::six_class: return "six_class";
    }
    return "?";
}

Task parse_task(std::string_view s) {
    if (s == "binary") return Task::binary;
    if (s == "four_class" || s == "four-class" || s == "4") return Task::four_class;
    if (s == "six_class" || s == "six-class" || s == "6") return Task::six_class;
    throw ConfigError("unknown task '" + std::string(s) + "'");
}

std::string LabelTuple::str() const {
    std::string s = "(";
    for (int j = 0; j < width; ++j) {
        if (j) s += ',';
        s += static_cast<char>('0' + bits[static_cast<std::size_t>(j)]);
    }
    return s + ")";
}

LabelTuple parse_tuple(std::string_view s) {
    LabelTuple t;
    t.width = 0;
    for (char c : s) {
        if (c == '0' || c == '1') {
            if (t.width == 3) throw ConfigError("tuple wider than 3 bits: '" + std::string(s) + "'");
            t.bits[static_cast<std::size_t>(t.width++)] = c - '0';
        } else if (c != '(' && c != ')' && c != ',' && c != ' ') {
            throw ConfigError("malformed tuple '" + std::string(s) + "'");
        }
    }
    if (t.width == 0) throw ConfigError("empty tuple");
    return t;
}

const LabelTuple& Codebook::encode(int class_index) const {
    if (class_index < 0 || class_index >= num_classes())
        throw DataError("class index " + std::to_string(class_index) + " out of range for " +
                        std::string(to_string(task)));
    return codes[static_cast<std::size_t>(class_index)];
}

std::optional<int> Codebook::find(const LabelTuple& t) const {
    for (std::size_t i = 0; i < codes.size(); ++i)
        if (codes[i] == t) return static_cast<int>(i);
    return std::nullopt;
}

namespace {

LabelTuple tuple3(int a, int b, int c) { return LabelTuple{3, {a, b, c}}; }

const std::vector<LabelTuple>& valid_six_class_codes() {
    static const std::vector<LabelTuple> codes{tuple3(0, 0, 0), tuple3(1, 0, 0), tuple3(0, 1, 0),
                                               tuple3(0, 1, 1), tuple3(1, 1, 0), tuple3(1, 1, 1)};
    return codes;
}

}  // namespace

std::vector<LabelTuple> default_six_class_codes() {
    // DBPower N/A, Parrot N/A, DJI Spark N/A
    return {tuple3(0, 1, 0), tuple3(0, 1, 1), tuple3(1, 1, 0),
            tuple3(1, 1, 1), tuple3(0, 0, 0), tuple3(1, 0, 0)};
}

Codebook make_codebook(Task task, const std::vector<LabelTuple>& six_class_codes,
                       bool two_unit_binary) {
    Codebook cb;
    cb.task = task;
    switch (task) {
        case Task::binary:
            cb.class_names = {"Normal", "Attack"};
            if (two_unit_binary) {
                cb.width = 2;
                cb.codes = {LabelTuple{2, {1, 0, 0}}, LabelTuple{2, {0, 1, 0}}};
            } else {
                cb.width = 1;
                cb.codes = {LabelTuple{1, {0, 0, 0}}, LabelTuple{1, {1, 0, 0}}};
            }
            break;
        case Task::four_class:
            cb.width = 2;
            cb.class_names = {"DBPower - Normal", "DBPower - Attack", "Parrot - Normal",
                              "Parrot - Attack"};
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) cb.codes.push_back(LabelTuple{2, {a, b, 0}});
            break;
        case Task::six_class: {
            cb.width = 3;
            cb.class_names = {"DBPower - Normal", "DBPower - Attack",  "Parrot - Normal",
                              "Parrot - Attack",  "DJISpark - Normal", "DJISpark - Attack"};
            cb.codes = six_class_codes.empty() ? default_six_class_codes() : six_class_codes;
            if (cb.codes.size() != 6) throw ConfigError("six_class_codes needs exactly 6 tuples");
            const auto& valid = valid_six_class_codes();
            for (std::size_t i = 0; i < cb.codes.size(); ++i) {
                if (std::find(valid.begin(), valid.end(), cb.codes[i]) == valid.end())
                    throw ConfigError("six_class code " + cb.codes[i].str() + " is not a valid code");
                for (std::size_t k = 0; k < i; ++k)
                    if (cb.codes[k] == cb.codes[i])
                        throw ConfigError("duplicate six_class code " + cb.codes[i].str());
            }
            break;
        }
    }
    return cb;
}

int class_index(Task task, UavType uav, bool attack) {
    const int b = attack ? 1 : 0;
    switch (task) {
        case Task::binary: return b;
        case Task::four_class:
            if (uav == UavType::DJISpark)
                throw ConfigError("djispark has no code in the four_class task");
            return 2 * (uav == UavType::Parrot ? 1 : 0) + b;
        case Task::six_class: return 2 * static_cast<int>(uav) + b;
    }
    return 0;
}

std::vector<LabelTuple> encode_labels(const std::vector<int>& raw, const std::vector<UavType>& uav,
                                      const Codebook& codebook) {
    if (codebook.task != Task::binary && uav.size() != raw.size())
        throw DataError("multiclass encoding needs a uav type for every row");
    std::vector<LabelTuple> out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] != 0 && raw[i] != 1)
            throw DataError("raw label at row " + std::to_string(i + 1) + " is not 0/1");
        const UavType t = codebook.task == Task::binary ? UavType::Parrot : uav[i];
        out.push_back(codebook.encode(class_index(codebook.task, t, raw[i] == 1)));
    }
    return out;
}

// --- splits ------------------------------------------------------------------

DatasetSplit split_train_test(const LabeledData& data, double train_fraction, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(data.size());
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("train_fraction must lie in (0, 1)");
    if (n < 10) throw DataError("split needs at least 10 samples, got " + std::to_string(n));
    if (data.labels.size() != n) throw DataError("split needs one label per row");

    const auto target = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    if (target == 0 || target >= n)
        throw ConfigError("train_fraction leaves an empty partition for n=" + std::to_string(n));

    std::map<int, std::vector<Eigen::Index>> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[data.labels[i]].push_back(static_cast<Eigen::Index>(i));

    struct Quota {
        int label;
        std::size_t size;
        std::size_t take;
        double remainder;
    };
    std::vector<Quota> quotas;
    std::size_t assigned = 0;
    for (const auto& [label, rows] : by_class) {
        const double exact = train_fraction * static_cast<double>(rows.size());
        const auto fl = static_cast<std::size_t>(std::floor(exact));
        quotas.push_back({label, rows.size(), fl, exact - static_cast<double>(fl)});
        assigned += fl;
    }
    // largest remainder; ties go to the lower label
    std::vector<std::size_t> order(quotas.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return quotas[a].remainder > quotas[b].remainder; });
    for (std::size_t k = 0; assigned < target && k < order.size(); ++k) {
        ++quotas[order[k]].take;
        ++assigned;
    }

    DatasetSplit split;
    split.train_fraction = train_fraction;

    // every class with >= 2 rows keeps at least one row on each side
    auto donor = [&](auto can_give) -> Quota* {
        Quota* best = nullptr;
        for (auto& q : quotas)
            if (can_give(q) && (!best || q.take > best->take)) best = &q;
        return best;
    };
    for (auto& q : quotas) {
        if (q.size < 2) {
            split.warnings.push_back("class " + std::to_string(q.label) + " has only " +
                                     std::to_string(q.size) + " sample(s); it cannot appear in both partitions");
            continue;
        }
        if (q.take == 0) {
            if (auto* d = donor([](const Quota& o) { return o.take > 1; })) {
                --d->take;
                ++q.take;
            } else {
                split.warnings.push_back("class " + std::to_string(q.label) + " has no training sample");
            }
        } else if (q.take == q.size) {
            if (auto* d = donor([](const Quota& o) { return o.take + 1 < o.size; })) {
                ++d->take;
                --q.take;
            } else {
                split.warnings.push_back("class " + std::to_string(q.label) + " has no test sample");
            }
        }
    }

    Rng rng(derive_seed({seed, 0x5b1170}));
    for (const auto& q : quotas) {
        auto rows = by_class[q.label];
        std::shuffle(rows.begin(), rows.end(), rng);
        split.train_rows.insert(split.train_rows.end(), rows.begin(),
                                rows.begin() + static_cast<std::ptrdiff_t>(q.take));
        split.test_rows.insert(split.test_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(q.take),
                               rows.end());
    }
    std::sort(split.train_rows.begin(), split.train_rows.end());
    std::sort(split.test_rows.begin(), split.test_rows.end());
    split.train = data.select_rows(split.train_rows);
    split.test = data.select_rows(split.test_rows);
    return split;
}

LabeledData concat_datasets(const std::vector<LabeledData>& parts) {
    if (parts.empty()) throw DataError("nothing to concatenate");
    const auto& names = parts.front().features.column_names;
    const bool labeled = !parts.front().labels.empty();
    Eigen::Index total = 0;
    for (const auto& part : parts) {
        if (part.features.column_names != names) {
            std::set<std::string> a(names.begin(), names.end());
            std::set<std::string> b(part.features.column_names.begin(), part.features.column_names.end());
            std::vector<std::string> diff;
            std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(diff));
            std::string msg = "column mismatch in concatenation";
            if (diff.empty()) {
                msg += ": same columns in a different order";
            } else {
                msg += "; symmetric difference:";
                for (const auto& d : diff) msg += " " + d;
            }
            throw DataError(msg);
        }
        if (labeled != !part.labels.empty()) throw DataError("cannot mix labeled and unlabeled data");
        total += part.size();
    }
    LabeledData out;
    out.features.column_names = names;
    out.features.values.resize(total, static_cast<Eigen::Index>(names.size()));
    Eigen::Index row = 0;
    for (const auto& part : parts) {
        out.features.values.middleRows(row, part.size()) = part.features.values;
        row += part.size();
        out.labels.insert(out.labels.end(), part.labels.begin(), part.labels.end());
    }
    return out;
}

// --- key=value files ---------------------------------------------------------

KeyValues read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t");
            auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

void write_key_values(const std::filesystem::path& path, const KeyValues& kv,
                      const std::string& header_comment) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    if (!header_comment.empty()) out << "# " << header_comment << '\n';
    for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

}  // namespace uavids
