#include "lightyear/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "lightyear/rng.hpp"

namespace lightyear {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Marsaglia-Tsang gamma sampler; the shape < 1 case is boosted through
// shape + 1. Always returns a strictly positive value.
double gamma_sample(Rng& rng, double shape) {
    if (shape < 1.0) {
        const double u = 1.0 - rng.uniform01();  // (0, 1]
        return gamma_sample(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = 1.0 - rng.uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

std::vector<double> dirichlet_sample(Rng& rng, int k, double alpha) {
    std::vector<double> g(static_cast<std::size_t>(k));
    double sum = 0.0;
    for (double& v : g) {
        v = gamma_sample(rng, alpha);
        sum += v;
    }
    for (double& v : g) v /= sum;
    return g;
}

// Integer quotas summing exactly to `total`, proportional to `weights`.
// Largest remainder; fractional ties go to the lower index.
std::vector<int> largest_remainder_quota(const std::vector<double>& weights, int total) {
    const int n = static_cast<int>(weights.size());
    double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<double> w = weights;
    if (!(wsum > 0.0)) {
        w.assign(static_cast<std::size_t>(n), 1.0);
        wsum = n;
    }
    std::vector<int> counts(static_cast<std::size_t>(n));
    std::vector<std::pair<double, int>> frac(static_cast<std::size_t>(n));
    int assigned = 0;
    for (int i = 0; i < n; ++i) {
        const double target = w[static_cast<std::size_t>(i)] / wsum * total;
        counts[static_cast<std::size_t>(i)] = static_cast<int>(std::floor(target));
        assigned += counts[static_cast<std::size_t>(i)];
        frac[static_cast<std::size_t>(i)] = {target - std::floor(target), i};
    }
    std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (int r = 0; r < total - assigned; ++r) ++counts[static_cast<std::size_t>(frac[static_cast<std::size_t>(r)].second)];
    return counts;
}

std::vector<int> shuffled_indices(int n, Rng& rng) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    return idx;
}

[[noreturn]] void csv_fail(CsvErrorCode code, const std::string& msg) { throw CsvError(code, msg); }

}  // namespace

void LabeledDataset::push_row(std::span<const double> x, int label) {
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(label);
}

void LabeledDataset::validate() const {
    if (n_features < 1) throw std::invalid_argument("dataset needs n_features >= 1");
    if (n_classes < 2) throw std::invalid_argument("dataset needs n_classes >= 2");
    if (features.size() != labels.size() * static_cast<std::size_t>(n_features))
        throw std::invalid_argument("dataset feature matrix does not match label count");
    for (const int y : labels)
        if (y < 0 || y >= n_classes) throw std::invalid_argument("dataset label out of range");
}

LabeledDataset take_rows(const LabeledDataset& data, std::span<const int> rows) {
    LabeledDataset out;
    out.n_features = data.n_features;
    out.n_classes = data.n_classes;
    out.features.reserve(rows.size() * static_cast<std::size_t>(data.n_features));
    out.labels.reserve(rows.size());
    for (const int r : rows) out.push_row(data.row(r), data.labels[static_cast<std::size_t>(r)]);
    return out;
}

LabeledDataset gen_gaussian_task(int n_classes, int n_features, int n_samples, double class_sep,
                                 std::uint64_t seed) {
    if (n_classes < 2) throw std::invalid_argument("gen_gaussian_task: n_classes must satisfy n_classes >= 2");
    if (n_features < 2) throw std::invalid_argument("gen_gaussian_task: n_features must satisfy n_features >= 2");
    if (n_samples < n_classes) throw std::invalid_argument("gen_gaussian_task: n_samples must satisfy n_samples >= n_classes");
    if (!(class_sep >= 0.0)) throw std::invalid_argument("gen_gaussian_task: class_sep must satisfy class_sep >= 0");

    Rng rng(seed);
    LabeledDataset out;
    out.n_features = n_features;
    out.n_classes = n_classes;
    out.features.resize(static_cast<std::size_t>(n_samples) * n_features);
    out.labels.resize(static_cast<std::size_t>(n_samples));

    // Cluster means sit at equal angles in the (0,1) plane; remaining
    // coordinates are centered at zero.
    std::vector<double> mean0(static_cast<std::size_t>(n_classes));
    std::vector<double> mean1(static_cast<std::size_t>(n_classes));
    for (int k = 0; k < n_classes; ++k) {
        const double angle = 2.0 * kPi * k / n_classes;
        mean0[static_cast<std::size_t>(k)] = class_sep * std::cos(angle);
        mean1[static_cast<std::size_t>(k)] = class_sep * std::sin(angle);
    }

    for (int i = 0; i < n_samples; ++i) {
        const int y = i % n_classes;
        out.labels[static_cast<std::size_t>(i)] = y;
        double* row = out.features.data() + static_cast<std::size_t>(i) * n_features;
        for (int j = 0; j < n_features; ++j) row[j] = rng.normal();
        row[0] += mean0[static_cast<std::size_t>(y)];
        row[1] += mean1[static_cast<std::size_t>(y)];
    }
    return out;
}

std::vector<LabeledDataset> partition_dirichlet(const LabeledDataset& data, int n_clients,
                                                double alpha, std::uint64_t seed) {
    if (n_clients < 1) throw std::invalid_argument("partition_dirichlet: n_clients must satisfy n_clients >= 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("partition_dirichlet: alpha must satisfy alpha > 0");
    data.validate();

    const int k = data.n_classes;
    const int min_per_client = std::max(k, 10);
    if (static_cast<long long>(min_per_client) * n_clients > data.size())
        throw std::invalid_argument("partition_dirichlet: not enough samples to give every client " +
                                    std::to_string(min_per_client));

    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(k));
    for (int i = 0; i < data.size(); ++i)
        by_class[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(i)])].push_back(i);

    Rng rng(seed);
    constexpr int kMaxAttempts = 100;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        // Per-client class proportions.
        std::vector<std::vector<double>> props(static_cast<std::size_t>(n_clients));
        for (auto& p : props) p = dirichlet_sample(rng, k, alpha);

        std::vector<std::vector<int>> assigned(static_cast<std::size_t>(n_clients));
        for (int c = 0; c < k; ++c) {
            std::vector<int> pool = by_class[static_cast<std::size_t>(c)];
            rng.shuffle(pool);
            std::vector<double> w(static_cast<std::size_t>(n_clients));
            for (int i = 0; i < n_clients; ++i) w[static_cast<std::size_t>(i)] = props[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
            const std::vector<int> counts = largest_remainder_quota(w, static_cast<int>(pool.size()));
            std::size_t cursor = 0;
            for (int i = 0; i < n_clients; ++i) {
                auto& dst = assigned[static_cast<std::size_t>(i)];
                dst.insert(dst.end(), pool.begin() + static_cast<std::ptrdiff_t>(cursor),
                           pool.begin() + static_cast<std::ptrdiff_t>(cursor + static_cast<std::size_t>(counts[static_cast<std::size_t>(i)])));
                cursor += static_cast<std::size_t>(counts[static_cast<std::size_t>(i)]);
            }
        }

        const bool ok = std::all_of(assigned.begin(), assigned.end(), [&](const std::vector<int>& a) {
            return static_cast<int>(a.size()) >= min_per_client;
        });
        if (!ok) continue;

        std::vector<LabeledDataset> shards;
        shards.reserve(static_cast<std::size_t>(n_clients));
        for (const auto& rows : assigned) shards.push_back(take_rows(data, rows));
        return shards;
    }
    throw std::runtime_error("partition_dirichlet: no valid partition in " +
                             std::to_string(kMaxAttempts) + " attempts; raise alpha or sample count");
}

std::vector<LabeledDataset> partition_feature_shift(const LabeledDataset& data, int n_clients,
                                                    double rotation_deg, double shift,
                                                    std::uint64_t seed) {
    if (n_clients < 2) throw std::invalid_argument("partition_feature_shift: n_clients must satisfy n_clients >= 2");
    data.validate();
    if (data.n_features < 2)
        throw std::invalid_argument("partition_feature_shift: needs n_features >= 2 to rotate");
    if (data.size() < n_clients)
        throw std::invalid_argument("partition_feature_shift: fewer samples than clients");

    Rng rng(seed);
    const std::vector<int> idx = shuffled_indices(data.size(), rng);
    const std::vector<int> counts =
        largest_remainder_quota(std::vector<double>(static_cast<std::size_t>(n_clients), 1.0), data.size());

    // The back floor(n/2) clients form the shifted group.
    const int group2_start = n_clients - n_clients / 2;
    const double rad = rotation_deg * kPi / 180.0;
    const double cos_r = std::cos(rad);
    const double sin_r = std::sin(rad);

    std::vector<LabeledDataset> shards;
    shards.reserve(static_cast<std::size_t>(n_clients));
    std::size_t cursor = 0;
    for (int i = 0; i < n_clients; ++i) {
        const std::span<const int> rows(idx.data() + cursor, static_cast<std::size_t>(counts[static_cast<std::size_t>(i)]));
        LabeledDataset shard = take_rows(data, rows);
        cursor += static_cast<std::size_t>(counts[static_cast<std::size_t>(i)]);
        if (i >= group2_start) {
            for (int r = 0; r < shard.size(); ++r) {
                double* row = shard.features.data() + static_cast<std::size_t>(r) * shard.n_features;
                const double x0 = row[0];
                const double x1 = row[1];
                row[0] = cos_r * x0 - sin_r * x1 + shift;
                row[1] = sin_r * x0 + cos_r * x1;
            }
        }
        shards.push_back(std::move(shard));
    }
    return shards;
}

ThreeWaySplit split_three_way(const LabeledDataset& data, std::array<double, 3> fractions,
                              std::uint64_t seed) {
    double fsum = 0.0;
    for (const double f : fractions) {
        if (!(f > 0.0)) throw std::invalid_argument("split_three_way: fractions must be positive");
        fsum += f;
    }
    if (std::abs(fsum - 1.0) > 1e-9)
        throw std::invalid_argument("split_three_way: fractions must sum to 1");
    if (data.size() < 10) throw std::invalid_argument("split_three_way: needs at least 10 samples");

    Rng rng(seed);
    const std::vector<int> idx = shuffled_indices(data.size(), rng);
    const int n = data.size();
    const int n_val = static_cast<int>(std::floor(fractions[1] * n));
    const int n_test = static_cast<int>(std::floor(fractions[2] * n));
    const int n_train = n - n_val - n_test;

    ThreeWaySplit out;
    out.train = take_rows(data, std::span<const int>(idx.data(), static_cast<std::size_t>(n_train)));
    out.val = take_rows(data, std::span<const int>(idx.data() + n_train, static_cast<std::size_t>(n_val)));
    out.test = take_rows(data, std::span<const int>(idx.data() + n_train + n_val, static_cast<std::size_t>(n_test)));
    return out;
}

LabeledDataset load_csv(const std::string& path, const CsvSchema& schema) {
    if (schema.feature_columns.empty())
        throw std::invalid_argument("load_csv: schema needs at least one feature column");

    std::ifstream in(path);
    if (!in) csv_fail(CsvErrorCode::missing_file, "load_csv: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line))
        csv_fail(CsvErrorCode::ragged_row, "load_csv: '" + path + "' has no header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) header.push_back(field);
        if (!line.empty() && line.back() == ',') header.push_back("");
    }

    auto column_index = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            csv_fail(CsvErrorCode::missing_column, "load_csv: column '" + name + "' not in header of '" + path + "'");
        return static_cast<int>(it - header.begin());
    };

    std::vector<int> feat_idx;
    feat_idx.reserve(schema.feature_columns.size());
    for (const std::string& c : schema.feature_columns) feat_idx.push_back(column_index(c));
    const int label_idx = column_index(schema.label_column);
    const std::size_t n_cols = header.size();

    LabeledDataset out;
    out.n_features = static_cast<int>(feat_idx.size());
    int max_label = -1;
    std::vector<std::string> fields;
    std::vector<double> row(feat_idx.size());

    for (int line_no = 2; std::getline(in, line); ++line_no) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        fields.clear();
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (!line.empty() && line.back() == ',') fields.push_back("");
        if (fields.size() != n_cols)
            csv_fail(CsvErrorCode::ragged_row, "load_csv: line " + std::to_string(line_no) + " has " +
                                                   std::to_string(fields.size()) + " fields, header has " +
                                                   std::to_string(n_cols));
        for (std::size_t j = 0; j < feat_idx.size(); ++j) {
            const std::string& raw = fields[static_cast<std::size_t>(feat_idx[j])];
            char* end = nullptr;
            const double v = std::strtod(raw.c_str(), &end);
            if (raw.empty() || end != raw.c_str() + raw.size())
                csv_fail(CsvErrorCode::non_numeric_feature, "load_csv: line " + std::to_string(line_no) +
                                                                ": feature '" + raw + "' is not numeric");
            row[j] = v;
        }
        const std::string& raw_label = fields[static_cast<std::size_t>(label_idx)];
        char* end = nullptr;
        const long y = std::strtol(raw_label.c_str(), &end, 10);
        if (raw_label.empty() || end != raw_label.c_str() + raw_label.size())
            csv_fail(CsvErrorCode::non_integer_label, "load_csv: line " + std::to_string(line_no) +
                                                          ": label '" + raw_label + "' is not an integer");
        if (y < 0)
            csv_fail(CsvErrorCode::negative_label, "load_csv: line " + std::to_string(line_no) +
                                                       ": label " + std::to_string(y) + " is negative");
        out.push_row(row, static_cast<int>(y));
        max_label = std::max(max_label, static_cast<int>(y));
    }
    out.n_classes = max_label + 1;
    return out;
}

}  // namespace lightyear
