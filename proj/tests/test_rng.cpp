#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "lightyear/rng.hpp"

using namespace lightyear;

TEST_SUITE_BEGIN("rng");

TEST_CASE("same seed reproduces the sequence, different seeds do not") {
    Rng a(42), b(42), c(43);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t va = a.next_u64();
        all_equal = all_equal && va == b.next_u64();
        any_diff = any_diff || va != c.next_u64();
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("uniform01 stays in [0,1) with a sane mean") {
    Rng rng(7);
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / 20000 - 0.5) < 0.02);
}

TEST_CASE("normal has near-zero mean and near-unit variance") {
    Rng rng(11);
    const int n = 40000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("next_below respects the bound and reaches every value") {
    Rng rng(3);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t v = rng.next_below(7);
        REQUIRE(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("shuffle permutes") {
    Rng rng(5);
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    std::vector<int> orig = v;
    rng.shuffle(v);
    CHECK(v != orig);  // 50! orderings; a collision would indicate a bug
    std::sort(v.begin(), v.end());
    CHECK(v == orig);
}

TEST_CASE("derive_seed separates purposes, clients and rounds") {
    const std::uint64_t base = derive_seed(1, "train", 0, 0);
    CHECK(base == derive_seed(1, "train", 0, 0));
    CHECK(base != derive_seed(2, "train", 0, 0));
    CHECK(base != derive_seed(1, "attack", 0, 0));
    CHECK(base != derive_seed(1, "train", 1, 0));
    CHECK(base != derive_seed(1, "train", 0, 1));
}

TEST_CASE("derived streams look independent") {
    // Correlation between the train and attack streams of the same client
    // should be statistical noise.
    Rng a = derive_stream(99, "train", 3, 1);
    Rng b = derive_stream(99, "attack", 3, 1);
    const int n = 10000;
    double corr = 0.0;
    for (int i = 0; i < n; ++i) corr += (a.uniform01() - 0.5) * (b.uniform01() - 0.5);
    corr /= n;
    CHECK(std::abs(corr) < 0.01);
}

TEST_SUITE_END();
