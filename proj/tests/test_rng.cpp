#include "freqcast/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

using freqcast::RngState;

TEST_CASE("same seed gives bit-identical draw sequences") {
    RngState a(7), b(7);
    for (int i = 0; i < 1000; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    RngState c(7), d(7);
    for (int i = 0; i < 1000; ++i) {
        CHECK(c.normal() == d.normal());
    }
}

TEST_CASE("different seeds diverge") {
    RngState a(1), b(2);
    int differing = 0;
    for (int i = 0; i < 64; ++i) {
        if (a.next_u64() != b.next_u64()) ++differing;
    }
    CHECK(differing > 60);
}

TEST_CASE("restore replays the stream from a counter") {
    RngState a(42);
    for (int i = 0; i < 137; ++i) a.next_u64();
    const std::uint64_t counter = a.counter();
    std::vector<std::uint64_t> tail;
    for (int i = 0; i < 50; ++i) tail.push_back(a.next_u64());

    RngState b = RngState::restore(42, counter);
    for (int i = 0; i < 50; ++i) {
        CHECK(b.next_u64() == tail[static_cast<std::size_t>(i)]);
    }
}

TEST_CASE("uniform stays in [0,1) and covers the range") {
    RngState rng(3);
    double mn = 1.0, mx = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        mn = std::min(mn, u);
        mx = std::max(mx, u);
    }
    CHECK(mn < 0.01);
    CHECK(mx > 0.99);
}

TEST_CASE("normal moments match a standard Gaussian") {
    RngState rng(11);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("shuffle is a deterministic permutation") {
    std::vector<int> v(100);
    std::iota(v.begin(), v.end(), 0);
    std::vector<int> w = v;
    RngState a(5), b(5);
    a.shuffle(v);
    b.shuffle(w);
    CHECK(v == w);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 100; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
    CHECK(v != sorted); // astronomically unlikely to shuffle into identity
}

TEST_CASE("below stays in range") {
    RngState rng(9);
    for (int i = 0; i < 1000; ++i) {
        CHECK(rng.below(13) < 13);
    }
}
