#include <doctest.h>

#include <cmath>

#include "maxperc/estimate.hpp"
#include "maxperc/rng.hpp"

using namespace maxperc;

TEST_CASE("counter rng is deterministic and stream-separated") {
    CounterRng a(42, RngStream::BondState, 7);
    CounterRng b(42, RngStream::BondState, 7);
    CounterRng c(42, RngStream::Noise, 7);
    CounterRng d(43, RngStream::BondState, 7);
    for (std::uint64_t k = 0; k < 64; ++k) {
        CHECK(a.bits(k) == b.bits(k));
        CHECK(a.bits(k) != c.bits(k));
        CHECK(a.bits(k) != d.bits(k));
    }
}

TEST_CASE("uniforms live strictly inside (0,1) and look uniform") {
    CounterRng rng(123, RngStream::Noise, 0);
    const int n = 200000;
    double sum = 0.0, sum_sq = 0.0;
    for (int k = 0; k < n; ++k) {
        double u = rng.uniform(k);
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        sum += u;
        sum_sq += u * u;
    }
    double mean = sum / n;
    double var = sum_sq / n - mean * mean;
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
    CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("frechet inverse transform hits exact quantiles") {
    // U = exp(-1) maps to Z = 1 for every alpha.
    for (double alpha : {0.5, 1.0, 2.0, 4.5}) {
        CHECK(frechet_from_uniform(std::exp(-1.0), alpha) ==
              doctest::Approx(1.0).epsilon(1e-12));
        CHECK(frechet_cdf(1.0, alpha, 1.0) ==
              doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    }
    CHECK(frechet_cdf(2.0, 3.0, 1.5) ==
          doctest::Approx(std::exp(-std::pow(0.75, 3.0))).epsilon(1e-12));
}

TEST_CASE("bernoulli estimate carries sample-sd stderr") {
    McEstimate e = bernoulli_estimate(25, 100, 9);
    CHECK(e.value == doctest::Approx(0.25));
    double var = 0.25 * 0.75 * 100.0 / 99.0;
    CHECK(e.stderr_ == doctest::Approx(std::sqrt(var / 100.0)));
    CHECK(e.trials == 100);
    CHECK(e.seed == 9);
    CHECK(bernoulli_estimate(0, 50, 0).stderr_ == 0.0);
    CHECK_THROWS_AS(bernoulli_estimate(0, 0, 0), std::invalid_argument);
}

TEST_CASE("trial loops are scheduling-independent") {
    auto pred = [](long t) { return (t * 2654435761u) % 7 == 0; };
    long serial = count_trials(10000, 1, pred);
    long parallel = count_trials(10000, 4, pred);
    CHECK(serial == parallel);

    auto fn = [](long t, std::vector<double>& row) {
        row[0] = (t % 3 == 0) ? 1.0 : 0.0;
        row[1] = static_cast<double>(t % 5);
    };
    auto s1 = sum_trials(9999, 1, 2, fn);
    auto s4 = sum_trials(9999, 4, 2, fn);
    CHECK(s1[0] == s4[0]);
    CHECK(s1[1] == s4[1]);
}
