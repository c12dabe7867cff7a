#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

namespace maxperc {

// Monte Carlo estimate with provenance. stderr is the Bessel-corrected
// sample standard deviation divided by sqrt(trials).
struct McEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    long trials = 0;
    std::uint64_t seed = 0;
};

inline McEstimate bernoulli_estimate(long hits, long trials,
                                     std::uint64_t seed) {
    if (trials <= 0) throw std::invalid_argument("trials must be positive");
    double phat = static_cast<double>(hits) / trials;
    double se = 0.0;
    if (trials > 1) {
        double var = phat * (1.0 - phat) * trials / (trials - 1);
        se = std::sqrt(var / trials);
    }
    return McEstimate{phat, se, trials, seed};
}

inline McEstimate mean_estimate(double sum, double sum_sq, long n,
                                std::uint64_t seed) {
    if (n <= 0) throw std::invalid_argument("sample count must be positive");
    double mean = sum / n;
    double se = 0.0;
    if (n > 1) {
        double var = (sum_sq - n * mean * mean) / (n - 1);
        if (var < 0) var = 0;  // rounding guard
        se = std::sqrt(var / n);
    }
    return McEstimate{mean, se, n, seed};
}

// Deterministic trial-parallel counting: trials are split into contiguous
// chunks, each chunk owns its state, and integer counts are combined in
// chunk order. The predicate must be a pure function of the trial index.
template <class Pred>
long count_trials(long trials, int threads, Pred&& pred) {
    if (trials < 0) throw std::invalid_argument("trials must be >= 0");
    if (threads <= 1 || trials < 2 * threads) {
        long hits = 0;
        for (long t = 0; t < trials; ++t)
            if (pred(t)) ++hits;
        return hits;
    }
    int n = threads;
    std::vector<long> partial(n, 0);
    std::vector<std::thread> pool;
    pool.reserve(n);
    long chunk = (trials + n - 1) / n;
    for (int c = 0; c < n; ++c) {
        long begin = c * chunk;
        long end = std::min(trials, begin + chunk);
        pool.emplace_back([&partial, c, begin, end, &pred] {
            long hits = 0;
            for (long t = begin; t < end; ++t)
                if (pred(t)) ++hits;
            partial[c] = hits;
        });
    }
    for (auto& th : pool) th.join();
    long hits = 0;
    for (long h : partial) hits += h;
    return hits;
}

// As count_trials but accumulating a fixed-width vector of doubles per
// trial; partial sums are combined in chunk order so results do not depend
// on scheduling.
template <class Fn>
std::vector<double> sum_trials(long trials, int threads, std::size_t width,
                               Fn&& fn) {
    std::vector<double> total(width, 0.0);
    if (threads <= 1 || trials < 2 * threads) {
        std::vector<double> row(width);
        for (long t = 0; t < trials; ++t) {
            fn(t, row);
            for (std::size_t k = 0; k < width; ++k) total[k] += row[k];
        }
        return total;
    }
    int n = threads;
    std::vector<std::vector<double>> partial(n, std::vector<double>(width, 0.0));
    std::vector<std::thread> pool;
    pool.reserve(n);
    long chunk = (trials + n - 1) / n;
    for (int c = 0; c < n; ++c) {
        long begin = c * chunk;
        long end = std::min(trials, begin + chunk);
        pool.emplace_back([&partial, c, begin, end, width, &fn] {
            std::vector<double> row(width);
            for (long t = begin; t < end; ++t) {
                fn(t, row);
                for (std::size_t k = 0; k < width; ++k) partial[c][k] += row[k];
            }
        });
    }
    for (auto& th : pool) th.join();
    for (int c = 0; c < n; ++c)
        for (std::size_t k = 0; k < width; ++k) total[k] += partial[c][k];
    return total;
}

}  // namespace maxperc
