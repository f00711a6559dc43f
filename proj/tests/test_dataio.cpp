#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "uavids/dataio.hpp"
#include "uavids/error.hpp"

using namespace uavids;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    auto d = fs::temp_directory_path() / ("uavids_dataio_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                          "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(d);
    return d;
}

void write_file(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

LabeledData make_data(Eigen::Index n, Eigen::Index p, const std::vector<int>& labels) {
    LabeledData d;
    d.features.values = Eigen::MatrixXd::Random(n, p);
    for (Eigen::Index j = 0; j < p; ++j) d.features.column_names.push_back("f" + std::to_string(j));
    d.labels = labels;
    return d;
}

std::string header(int p) {
    std::string h;
    for (int j = 0; j < p; ++j) h += "f" + std::to_string(j) + ",";
    return h + "label\n";
}

}  // namespace

TEST(Csv, UfAndBfWidths) {
    const auto dir = temp_dir();
    for (int p : {18, 54}) {
        std::string s = header(p);
        for (int r = 0; r < 3; ++r) {
            for (int j = 0; j < p; ++j) s += std::to_string(r + j) + ",";
            s += "1\n";
        }
        write_file(dir / "x.csv", s);
        const auto d = load_csv(dir / "x.csv", true);
        EXPECT_EQ(d.features.cols(), p);
        EXPECT_EQ(d.size(), 3);
        EXPECT_EQ(d.labels, (std::vector<int>{1, 1, 1}));
    }
}

TEST(Csv, NonNumericCellNamesRow) {
    const auto dir = temp_dir();
    std::string s = header(2);
    for (int r = 1; r <= 9; ++r) s += (r == 7 ? "1.0,abc,0\n" : "1.0,2.0,0\n");
    write_file(dir / "bad.csv", s);
    try {
        load_csv(dir / "bad.csv", true);
        FAIL();
    } catch (const DataError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("row 7"), std::string::npos) << msg;
        EXPECT_NE(msg.find("f1"), std::string::npos) << msg;
    }
}

TEST(Csv, RaggedRowAndMissingFile) {
    const auto dir = temp_dir();
    write_file(dir / "r.csv", header(2) + "1,2,0\n1,2\n");
    EXPECT_THROW(load_csv(dir / "r.csv", true), DataError);
    EXPECT_THROW(load_csv(dir / "nope.csv", true), DataError);
}

TEST(Csv, RoundTripKeepsValuesToNineDigits) {
    const auto dir = temp_dir();
    auto d = make_data(5, 4, {0, 1, 0, 1, 1});
    d.features.values(0, 0) = 123456.789;
    save_csv(dir / "rt.csv", d);
    const auto back = load_csv(dir / "rt.csv", true);
    EXPECT_EQ(back.features.column_names, d.features.column_names);
    EXPECT_EQ(back.labels, d.labels);
    EXPECT_TRUE(back.features.values.isApprox(d.features.values, 1e-8));
}

TEST(Labels, FourClassTuples) {
    const auto cb = make_codebook(Task::four_class);
    EXPECT_EQ(cb.encode(class_index(Task::four_class, UavType::Parrot, true)).str(), "(1,1)");
    EXPECT_EQ(cb.encode(class_index(Task::four_class, UavType::DBPower, false)).str(), "(0,0)");
    EXPECT_THROW(class_index(Task::four_class, UavType::DJISpark, false), ConfigError);
}

TEST(Labels, BinaryIdentity) {
    const auto cb = make_codebook(Task::binary);
    for (auto uav : kAllUavTypes) EXPECT_EQ(cb.encode(class_index(Task::binary, uav, true)).str(), "(1)");
    const auto two = make_codebook(Task::binary, {}, true);
    EXPECT_EQ(two.width, 2);
    EXPECT_EQ(two.encode(1).str(), "(0,1)");
}

TEST(Labels, SixClassDefaultsDistinct) {
    const auto cb = make_codebook(Task::six_class);
    ASSERT_EQ(cb.num_classes(), 6);
    std::set<std::string> seen;
    for (const auto& c : cb.codes) seen.insert(c.str());
    EXPECT_EQ(seen.size(), 6u);
    EXPECT_FALSE(cb.find(parse_tuple("101")).has_value());
}

TEST(Labels, EncodeLabels) {
    const auto cb = make_codebook(Task::four_class);
    const auto t = encode_labels({0, 1}, {UavType::Parrot, UavType::DBPower}, cb);
    EXPECT_EQ(t[0].str(), "(1,0)");
    EXPECT_EQ(t[1].str(), "(0,1)");
}

TEST(Split, TrainSizeIsRoundedFraction) {
    for (int n : {10, 57, 200, 1001}) {
        std::vector<int> labels(n);
        for (int i = 0; i < n; ++i) labels[i] = i % 3;
        const auto d = make_data(n, 2, labels);
        for (double f : {0.1, 0.25, 0.5, 0.9}) {
            const auto s = split_train_test(d, f, 4);
            EXPECT_EQ(s.train.size(), static_cast<Eigen::Index>(std::llround(f * n))) << n << " " << f;
            EXPECT_EQ(s.train.size() + s.test.size(), n);
        }
    }
}

TEST(Split, PartitionAndStratification) {
    std::vector<int> labels;
    for (int i = 0; i < 300; ++i) labels.push_back(i < 200 ? 0 : 1);
    const auto d = make_data(300, 3, labels);
    const auto s = split_train_test(d, 0.1, 11);
    std::vector<Eigen::Index> all = s.train_rows;
    all.insert(all.end(), s.test_rows.begin(), s.test_rows.end());
    std::sort(all.begin(), all.end());
    std::vector<Eigen::Index> expect(300);
    std::iota(expect.begin(), expect.end(), 0);
    EXPECT_EQ(all, expect);
    EXPECT_EQ(std::count(s.train.labels.begin(), s.train.labels.end(), 0), 20);
    EXPECT_EQ(std::count(s.train.labels.begin(), s.train.labels.end(), 1), 10);
    for (std::size_t i = 0; i < s.train_rows.size(); ++i)
        EXPECT_EQ(s.train.features.values.row(i), d.features.values.row(s.train_rows[i]));
}

TEST(Split, DeterministicPerSeed) {
    std::vector<int> labels(100, 0);
    for (int i = 50; i < 100; ++i) labels[i] = 1;
    const auto d = make_data(100, 2, labels);
    EXPECT_EQ(split_train_test(d, 0.3, 5).train_rows, split_train_test(d, 0.3, 5).train_rows);
    EXPECT_NE(split_train_test(d, 0.3, 5).train_rows, split_train_test(d, 0.3, 6).train_rows);
}

TEST(Split, RareClassWarnsAndStillSplits) {
    std::vector<int> labels(100, 0);
    labels[0] = 1;
    const auto s = split_train_test(make_data(100, 2, labels), 0.1, 1);
    EXPECT_FALSE(s.warnings.empty());
    EXPECT_EQ(s.train.size(), 10);
}

TEST(Split, DegenerateFractionsRejected) {
    const auto d = make_data(20, 2, std::vector<int>(20, 0));
    EXPECT_THROW(split_train_test(d, 1.0, 1), ConfigError);
    EXPECT_THROW(split_train_test(d, 0.0, 1), ConfigError);
    EXPECT_THROW(split_train_test(d, 0.01, 1), ConfigError);  // train would be empty
}

TEST(Concat, RowCountsAdd) {
    const auto a = make_data(11663 / 100, 3, std::vector<int>(116, 0));
    const auto b = make_data(148, 3, std::vector<int>(148, 1));
    const auto c = make_data(1, 3, std::vector<int>(1, 0));
    const auto all = concat_datasets({a, b, c});
    EXPECT_EQ(all.size(), 116 + 148 + 1);
    EXPECT_EQ(all.features.values.row(116), b.features.values.row(0));
    EXPECT_EQ(all.labels.size(), 265u);
}

TEST(Concat, SingleIsIdentity) {
    const auto a = make_data(7, 3, {0, 1, 0, 1, 0, 1, 0});
    const auto b = concat_datasets({a});
    EXPECT_EQ(b.features.values, a.features.values);
    EXPECT_EQ(b.labels, a.labels);
    EXPECT_EQ(b.features.column_names, a.features.column_names);
}

TEST(Concat, MismatchNamesExtraColumn) {
    auto a = make_data(2, 2, {0, 1});
    auto b = make_data(2, 3, {0, 1});
    b.features.column_names[2] = "extra_col";
    try {
        concat_datasets({a, b});
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("extra_col"), std::string::npos) << e.what();
    }
}

TEST(KeyValues, RoundTripWithComments) {
    const auto dir = temp_dir();
    write_key_values(dir / "kv.txt", {{"a", "1"}, {"b", "x y"}}, "hello");
    auto kv = read_key_values(dir / "kv.txt");
    EXPECT_EQ(kv.at("a"), "1");
    EXPECT_EQ(kv.at("b"), "x y");
    EXPECT_EQ(kv.size(), 2u);
}

TEST(FeatureMatrix, SelectColumnsAndValidate) {
    auto d = make_data(3, 3, {0, 0, 0});
    const auto sub = d.features.select_columns({"f2", "f0"});
    EXPECT_EQ(sub.values.col(0), d.features.values.col(2));
    EXPECT_THROW(d.features.select_columns({"nope"}), DataError);
    d.features.values(1, 1) = std::nan("");
    EXPECT_THROW(d.features.validate(), DataError);
}
