#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <vector>

#include "lightyear/data.hpp"
#include "lightyear/nn.hpp"
#include "lightyear/rng.hpp"

using namespace lightyear;
namespace fs = std::filesystem;

namespace {

// Rows as (label, features) tuples for multiset comparisons.
std::vector<std::vector<double>> row_multiset(const LabeledDataset& d) {
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(d.size()));
    for (int i = 0; i < d.size(); ++i) {
        std::vector<double> r{static_cast<double>(d.labels[static_cast<std::size_t>(i)])};
        r.insert(r.end(), d.row(i).begin(), d.row(i).end());
        rows.push_back(std::move(r));
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

std::vector<std::vector<double>> merged_multiset(const std::vector<LabeledDataset>& shards) {
    std::vector<std::vector<double>> all;
    for (const LabeledDataset& s : shards) {
        auto rows = row_multiset(s);
        all.insert(all.end(), rows.begin(), rows.end());
    }
    std::sort(all.begin(), all.end());
    return all;
}

std::vector<int> label_histogram(const LabeledDataset& d) {
    std::vector<int> h(static_cast<std::size_t>(d.n_classes), 0);
    for (const int y : d.labels) ++h[static_cast<std::size_t>(y)];
    return h;
}

class TempCsvDir {
public:
    TempCsvDir() : dir_(fs::temp_directory_path() / "lightyear_csv_tests") {
        fs::create_directories(dir_);
    }
    ~TempCsvDir() { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& content) {
        const fs::path p = dir_ / name;
        std::ofstream out(p);
        out << content;
        return p.string();
    }

private:
    fs::path dir_;
};

}  // namespace

TEST_SUITE_BEGIN("data");

TEST_CASE("gen_gaussian_task balances labels exactly and is deterministic") {
    const LabeledDataset d = gen_gaussian_task(3, 2, 300, 4.0, 7);
    REQUIRE(d.size() == 300);
    REQUIRE(d.n_features == 2);
    REQUIRE(d.n_classes == 3);
    const std::vector<int> hist = label_histogram(d);
    CHECK(hist == std::vector<int>{100, 100, 100});

    const LabeledDataset same = gen_gaussian_task(3, 2, 300, 4.0, 7);
    CHECK(d.features == same.features);
    CHECK(d.labels == same.labels);
    const LabeledDataset other = gen_gaussian_task(3, 2, 300, 4.0, 8);
    CHECK(d.features != other.features);
}

TEST_CASE("gen_gaussian_task clusters sit near their configured means") {
    const double sep = 6.0;
    const LabeledDataset d = gen_gaussian_task(4, 3, 2000, sep, 21);
    for (int k = 0; k < 4; ++k) {
        double m0 = 0.0, m1 = 0.0, m2 = 0.0;
        int count = 0;
        for (int i = 0; i < d.size(); ++i) {
            if (d.labels[static_cast<std::size_t>(i)] != k) continue;
            m0 += d.row(i)[0];
            m1 += d.row(i)[1];
            m2 += d.row(i)[2];
            ++count;
        }
        m0 /= count;
        m1 /= count;
        m2 /= count;
        const double angle = 2.0 * 3.14159265358979323846 * k / 4;
        CHECK(std::abs(m0 - sep * std::cos(angle)) < 0.25);
        CHECK(std::abs(m1 - sep * std::sin(angle)) < 0.25);
        CHECK(std::abs(m2) < 0.25);  // only the first two coordinates carry signal
    }
}

TEST_CASE("a linear model separates a wide-margin task") {
    // Oracle for separability: with class_sep 10 and unit noise the clusters
    // are ~17 sigma apart, so a freshly trained softmax classifier must
    // clear 95 percent.
    const LabeledDataset d = gen_gaussian_task(3, 2, 300, 10.0, 33);
    const ModelSpec spec{{2, 3}, Activation::relu};
    ParamVector p = init_params(spec, 1);
    Hyper h;
    h.learning_rate = 0.1;
    h.momentum = 0.9;
    h.weight_decay = 0.0;
    h.batch_size = 32;
    h.local_epochs = 30;
    const TrainResult res = train_local(p, make_optimizer(spec, h), d, 5);
    int hits = 0;
    for (int i = 0; i < d.size(); ++i) {
        const std::vector<double> z = logits(res.params, d.row(i));
        int best = 0;
        for (int k = 1; k < 3; ++k)
            if (z[static_cast<std::size_t>(k)] > z[static_cast<std::size_t>(best)]) best = k;
        hits += best == d.labels[static_cast<std::size_t>(i)] ? 1 : 0;
    }
    CHECK(static_cast<double>(hits) / d.size() > 0.95);
}

TEST_CASE("gen_gaussian_task rejects bad arguments") {
    CHECK_THROWS_AS(gen_gaussian_task(1, 2, 100, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(gen_gaussian_task(2, 1, 100, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(gen_gaussian_task(4, 2, 3, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(gen_gaussian_task(2, 2, 100, -1.0, 1), std::invalid_argument);
}

TEST_CASE("partition_dirichlet preserves the sample multiset and minimum shard size") {
    const LabeledDataset d = gen_gaussian_task(4, 3, 1200, 3.0, 9);
    for (const double alpha : {0.1, 0.5, 100.0}) {
        const auto shards = partition_dirichlet(d, 8, alpha, 42);
        REQUIRE(shards.size() == 8);
        int total = 0;
        for (const LabeledDataset& s : shards) {
            CHECK(s.size() >= 10);  // max(n_classes=4, 10)
            total += s.size();
        }
        CHECK(total == d.size());
        CHECK(merged_multiset(shards) == row_multiset(d));
    }
}

TEST_CASE("partition_dirichlet skew follows alpha") {
    const LabeledDataset d = gen_gaussian_task(4, 2, 1600, 3.0, 11);

    // Near-infinite alpha: every client's class histogram within 5
    // percentage points of the (balanced) global histogram.
    const auto uniform_shards = partition_dirichlet(d, 8, 1e6, 7);
    for (const LabeledDataset& s : uniform_shards) {
        const std::vector<int> h = label_histogram(s);
        for (const int c : h)
            CHECK(std::abs(static_cast<double>(c) / s.size() - 0.25) < 0.05);
    }

    // Small alpha: at least one client dominated by a single class.
    const auto skewed_shards = partition_dirichlet(d, 8, 0.1, 7);
    bool any_dominated = false;
    for (const LabeledDataset& s : skewed_shards) {
        const std::vector<int> h = label_histogram(s);
        const int top = *std::max_element(h.begin(), h.end());
        if (static_cast<double>(top) / s.size() >= 0.5) any_dominated = true;
    }
    CHECK(any_dominated);
}

TEST_CASE("partition_dirichlet is deterministic and validates input") {
    const LabeledDataset d = gen_gaussian_task(3, 2, 600, 3.0, 13);
    const auto a = partition_dirichlet(d, 5, 0.5, 99);
    const auto b = partition_dirichlet(d, 5, 0.5, 99);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].features == b[i].features);
    CHECK_THROWS_AS(partition_dirichlet(d, 5, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(partition_dirichlet(d, 0, 0.5, 1), std::invalid_argument);
    // 600 samples cannot give 100 clients 10 each plus slack.
    CHECK_THROWS_AS(partition_dirichlet(d, 100, 0.5, 1), std::invalid_argument);
}

TEST_CASE("partition_feature_shift splits near-equally and preserves labels") {
    const LabeledDataset d = gen_gaussian_task(2, 4, 500, 3.0, 17);
    const auto shards = partition_feature_shift(d, 5, 180.0, 0.0, 3);
    REQUIRE(shards.size() == 5);
    for (const LabeledDataset& s : shards) CHECK(s.size() == 100);

    std::vector<int> all_labels;
    for (const LabeledDataset& s : shards)
        all_labels.insert(all_labels.end(), s.labels.begin(), s.labels.end());
    std::sort(all_labels.begin(), all_labels.end());
    std::vector<int> orig = d.labels;
    std::sort(orig.begin(), orig.end());
    CHECK(all_labels == orig);
}

TEST_CASE("zero rotation and shift is a plain partition") {
    const LabeledDataset d = gen_gaussian_task(2, 3, 200, 3.0, 19);
    const auto shards = partition_feature_shift(d, 4, 0.0, 0.0, 5);
    CHECK(merged_multiset(shards) == row_multiset(d));
}

TEST_CASE("the back group is rotated and shifted") {
    // All rows at (1, 0, *): a 180 degree rotation lands the shifted group
    // at (-1, 0, *), plus the configured offset on coordinate 0.
    LabeledDataset d;
    d.n_features = 3;
    d.n_classes = 2;
    for (int i = 0; i < 40; ++i) d.push_row(std::vector<double>{1.0, 0.0, 2.5}, i % 2);

    const auto shards = partition_feature_shift(d, 5, 180.0, 0.25, 8);
    REQUIRE(shards.size() == 5);
    // 5 clients: first 3 untouched, back floor(5/2) = 2 shifted.
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < shards[static_cast<std::size_t>(c)].size(); ++i) {
            CHECK(shards[static_cast<std::size_t>(c)].row(i)[0] == 1.0);
            CHECK(shards[static_cast<std::size_t>(c)].row(i)[1] == 0.0);
        }
    for (int c = 3; c < 5; ++c)
        for (int i = 0; i < shards[static_cast<std::size_t>(c)].size(); ++i) {
            CHECK(shards[static_cast<std::size_t>(c)].row(i)[0] == doctest::Approx(-1.0 + 0.25).epsilon(1e-9));
            CHECK(std::abs(shards[static_cast<std::size_t>(c)].row(i)[1]) < 1e-9);
            CHECK(shards[static_cast<std::size_t>(c)].row(i)[2] == 2.5);  // untouched coordinate
        }
}

TEST_CASE("split_three_way cuts floor-based shard sizes") {
    const LabeledDataset d100 = gen_gaussian_task(2, 2, 100, 3.0, 23);
    const ThreeWaySplit s100 = split_three_way(d100, {0.7, 0.15, 0.15}, 1);
    CHECK(s100.train.size() == 70);
    CHECK(s100.val.size() == 15);
    CHECK(s100.test.size() == 15);

    const LabeledDataset d101 = gen_gaussian_task(2, 2, 101, 3.0, 23);
    const ThreeWaySplit s101 = split_three_way(d101, {0.7, 0.15, 0.15}, 1);
    CHECK(s101.train.size() == 71);  // remainder goes to train
    CHECK(s101.val.size() == 15);
    CHECK(s101.test.size() == 15);
}

TEST_CASE("split_three_way is a disjoint cover and deterministic") {
    const LabeledDataset d = gen_gaussian_task(3, 3, 97, 3.0, 29);
    const ThreeWaySplit s = split_three_way(d, {0.6, 0.2, 0.2}, 77);
    CHECK(merged_multiset({s.train, s.val, s.test}) == row_multiset(d));
    const ThreeWaySplit again = split_three_way(d, {0.6, 0.2, 0.2}, 77);
    CHECK(s.train.features == again.train.features);
    CHECK(s.val.features == again.val.features);
}

TEST_CASE("split_three_way validates fractions and size") {
    const LabeledDataset d = gen_gaussian_task(2, 2, 50, 3.0, 31);
    CHECK_THROWS_AS(split_three_way(d, {0.7, 0.2, 0.2}, 1), std::invalid_argument);
    CHECK_THROWS_AS(split_three_way(d, {0.9, 0.1, 0.0}, 1), std::invalid_argument);
    const LabeledDataset tiny = gen_gaussian_task(2, 2, 9, 3.0, 31);
    CHECK_THROWS_AS(split_three_way(tiny, {0.7, 0.15, 0.15}, 1), std::invalid_argument);
}

TEST_CASE("load_csv reads features, labels and infers the class count") {
    TempCsvDir tmp;
    const std::string path = tmp.write("ok.csv",
                                       "x0,x1,y,ignored\n"
                                       "1.5,-2.0,0,foo\n"
                                       "0.25,3.5,2,bar\n"
                                       "-1.0,0.0,1,baz\n");
    const LabeledDataset d = load_csv(path, {{"x0", "x1"}, "y"});
    REQUIRE(d.size() == 3);
    CHECK(d.n_features == 2);
    CHECK(d.n_classes == 3);  // max label 2 + 1
    CHECK(d.row(0)[0] == 1.5);
    CHECK(d.row(1)[1] == 3.5);
    CHECK(d.labels == std::vector<int>{0, 2, 1});
}

TEST_CASE("load_csv reports each failure mode distinctly") {
    TempCsvDir tmp;

    try {
        load_csv("/nonexistent/nope.csv", {{"x0"}, "y"});
        FAIL("expected CsvError");
    } catch (const CsvError& e) {
        CHECK(e.code() == CsvErrorCode::missing_file);
    }

    const std::string missing_col = tmp.write("mc.csv", "x0,y\n1.0,0\n");
    try {
        load_csv(missing_col, {{"x0", "x9"}, "y"});
        FAIL("expected CsvError");
    } catch (const CsvError& e) {
        CHECK(e.code() == CsvErrorCode::missing_column);
        CHECK(std::string(e.what()).find("x9") != std::string::npos);
    }

    const std::string ragged = tmp.write("ragged.csv", "x0,x1,y\n1.0,2.0,0\n1.0,0\n");
    try {
        load_csv(ragged, {{"x0", "x1"}, "y"});
        FAIL("expected CsvError");
    } catch (const CsvError& e) {
        CHECK(e.code() == CsvErrorCode::ragged_row);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }

    const std::string non_numeric = tmp.write("nn.csv", "x0,y\nabc,0\n");
    try {
        load_csv(non_numeric, {{"x0"}, "y"});
        FAIL("expected CsvError");
    } catch (const CsvError& e) {
        CHECK(e.code() == CsvErrorCode::non_numeric_feature);
    }

    const std::string negative = tmp.write("neg.csv", "x0,y\n1.0,-2\n");
    try {
        load_csv(negative, {{"x0"}, "y"});
        FAIL("expected CsvError");
    } catch (const CsvError& e) {
        CHECK(e.code() == CsvErrorCode::negative_label);
    }

    const std::string bad_label = tmp.write("bl.csv", "x0,y\n1.0,1.5\n");
    try {
        load_csv(bad_label, {{"x0"}, "y"});
        FAIL("expected CsvError");
    } catch (const CsvError& e) {
        CHECK(e.code() == CsvErrorCode::non_integer_label);
    }
}

TEST_CASE("load_csv accepts a header-only file as empty") {
    TempCsvDir tmp;
    const std::string path = tmp.write("empty.csv", "x0,x1,y\n");
    const LabeledDataset d = load_csv(path, {{"x0", "x1"}, "y"});
    CHECK(d.size() == 0);
    CHECK(d.n_classes == 0);
}

TEST_SUITE_END();
