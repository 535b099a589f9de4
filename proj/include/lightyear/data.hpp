#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lightyear {

// Row-major feature matrix (n x d) plus integer labels in [0, n_classes).
struct LabeledDataset {
    std::vector<double> features;
    std::vector<int> labels;
    int n_features = 0;
    int n_classes = 0;

    int size() const { return static_cast<int>(labels.size()); }
    std::span<const double> row(int i) const {
        return {features.data() + static_cast<std::size_t>(i) * n_features,
                static_cast<std::size_t>(n_features)};
    }
    void push_row(std::span<const double> x, int label);
    void validate() const;
};

// Copies the given rows into a new dataset (same schema).
LabeledDataset take_rows(const LabeledDataset& data, std::span<const int> rows);

// K Gaussian clusters with unit covariance, one per class, means spaced at
// equal angles on a radius-`class_sep` circle in the first two feature
// coordinates. Labels are balanced: row i gets class i % n_classes.
// Requires n_classes >= 2, n_features >= 2, n_samples >= n_classes.
LabeledDataset gen_gaussian_task(int n_classes, int n_features, int n_samples,
                                 double class_sep, std::uint64_t seed);

// Label-skew partition: each client draws class proportions from
// Dirichlet(alpha * 1_K); class indices are dealt out by largest-remainder
// quota. Redraws (up to 100 attempts) until every client holds at least
// max(n_classes, 10) samples, then throws std::runtime_error.
std::vector<LabeledDataset> partition_dirichlet(const LabeledDataset& data, int n_clients,
                                                double alpha, std::uint64_t seed);

// Near-equal random split into n_clients shards; the back half of the
// clients (floor(n/2) of them) receive feature-shifted copies: coordinates
// (0,1) rotated by rotation_deg about the origin, then `shift` added to
// coordinate 0. Labels are untouched.
std::vector<LabeledDataset> partition_feature_shift(const LabeledDataset& data, int n_clients,
                                                    double rotation_deg, double shift,
                                                    std::uint64_t seed);

struct ThreeWaySplit {
    LabeledDataset train;
    LabeledDataset val;
    LabeledDataset test;
};

// Shuffles rows, then cuts floor(f_val*n) validation and floor(f_test*n)
// test rows; the remainder is train. Fractions must be positive and sum to
// 1 within 1e-9. Requires n >= 10.
ThreeWaySplit split_three_way(const LabeledDataset& data, std::array<double, 3> fractions,
                              std::uint64_t seed);

struct CsvSchema {
    std::vector<std::string> feature_columns;
    std::string label_column;
};

enum class CsvErrorCode {
    missing_file,
    missing_column,
    ragged_row,
    non_numeric_feature,
    negative_label,
    non_integer_label,
};

class CsvError : public std::runtime_error {
public:
    CsvError(CsvErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    CsvErrorCode code() const { return code_; }

private:
    CsvErrorCode code_;
};

// Loads a headered CSV; n_classes becomes max(label) + 1. Malformed input
// throws CsvError with the specific code (ragged rows report their
// 1-based line number in the message).
LabeledDataset load_csv(const std::string& path, const CsvSchema& schema);

}  // namespace lightyear
