#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "ottosim/prng.hpp"

using ottosim::Rng;
using ottosim::splitmix64;

TEST_CASE("splitmix64 matches the published sequence for seed 0") {
    std::uint64_t state = 0;
    CHECK(splitmix64(state) == 0xe220a8397b1dcdafULL);
    CHECK(splitmix64(state) == 0x6e789e6aa1b965f4ULL);
    CHECK(splitmix64(state) == 0x06c45d188009454fULL);
}

TEST_CASE("raw engine is the standard mt19937_64") {
    // The C++ standard pins the 10000th output of the default-seeded engine,
    // so this catches any accidental swap of the generator.
    Rng rng(5489u);
    std::uint64_t v = 0;
    for (int i = 0; i < 10000; ++i) v = rng.next();
    CHECK(v == 9981545732273789042ULL);
}

TEST_CASE("uniform draws stay inside [0,1) and fill it evenly") {
    Rng rng(17);
    const int n = 100000;
    double sum = 0.0;
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.02));
    CHECK(lo < 0.001);   // both tails actually reached
    CHECK(hi > 0.999);
}

TEST_CASE("ranged uniform respects its bounds") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        double v = rng.uniform(-4.0, 2.5);
        CHECK(v >= -4.0);
        CHECK(v < 2.5);
    }
}

TEST_CASE("bounded integers stay below the bound") {
    Rng rng(99);
    std::vector<int> seen(7, 0);
    for (int i = 0; i < 7000; ++i) {
        auto v = rng.bounded(7);
        REQUIRE(v < 7);
        seen[static_cast<std::size_t>(v)]++;
    }
    for (int count : seen) CHECK(count > 0);
}

TEST_CASE("normal draws have the right first two moments") {
    Rng rng(123);
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        double z = rng.normal();
        sum += z;
        sumsq += z * z;
    }
    double mean = sum / n;
    double var = sumsq / n - mean * mean;
    CHECK(std::fabs(mean) < 0.02);
    CHECK(var == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("shuffle permutes without losing elements and replays per seed") {
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);

    std::vector<int> a = v, b = v, c = v;
    Rng(7).shuffle(a);
    Rng(7).shuffle(b);
    Rng(8).shuffle(c);

    CHECK(a == b);
    CHECK(a != c);
    CHECK(a != v);  // 50 elements: identity permutation is astronomically unlikely

    std::sort(a.begin(), a.end());
    CHECK(a == v);
}

TEST_CASE("shuffle of a single element is a no-op") {
    std::vector<int> v{42};
    Rng(1).shuffle(v);
    CHECK(v == std::vector<int>{42});
}
