#include "maxperc/oracle.hpp"

#include <cmath>
#include <thread>

namespace maxperc {

double Polynomial::eval(double p) const {
    double acc = 0.0;
    for (std::size_t k = coeff.size(); k-- > 0;) acc = acc * p + coeff[k];
    return acc;
}

std::string Polynomial::pretty() const {
    std::string out;
    for (std::size_t k = 0; k < coeff.size(); ++k) {
        long long c = coeff[k];
        if (c == 0) continue;
        if (out.empty()) {
            if (c < 0) out += "-";
        } else {
            out += c < 0 ? " - " : " + ";
        }
        long long a = c < 0 ? -c : c;
        if (a != 1 || k == 0) out += std::to_string(a);
        if (k >= 1) out += "p";
        if (k >= 2) out += "^" + std::to_string(k);
    }
    return out.empty() ? "0" : out;
}

Polynomial ExactResult::polynomial() const {
    // sum_k satisfying[k] p^k (1-p)^(M-k), expanded via binomials.
    std::size_t m = free_edges;
    std::vector<long long> coeff(m + 1, 0);
    // Pascal rows up to m.
    std::vector<std::vector<long long>> binom(m + 1);
    for (std::size_t r = 0; r <= m; ++r) {
        binom[r].assign(r + 1, 1);
        for (std::size_t c = 1; c < r; ++c)
            binom[r][c] = binom[r - 1][c - 1] + binom[r - 1][c];
    }
    for (std::size_t k = 0; k <= m && k < satisfying.size(); ++k) {
        long long ck = satisfying[k];
        if (ck == 0) continue;
        std::size_t rest = m - k;
        for (std::size_t j = 0; j <= rest; ++j) {
            long long term = ck * binom[rest][j];
            if (j & 1) term = -term;
            coeff[k + j] += term;
        }
    }
    while (coeff.size() > 1 && coeff.back() == 0) coeff.pop_back();
    return Polynomial{std::move(coeff)};
}

double ExactResult::at(double p) const {
    std::size_t m = free_edges;
    double acc = 0.0;
    for (std::size_t k = 0; k <= m && k < satisfying.size(); ++k) {
        if (satisfying[k] == 0) continue;
        acc += static_cast<double>(satisfying[k]) *
               std::pow(p, static_cast<double>(k)) *
               std::pow(1.0 - p, static_cast<double>(m - k));
    }
    return acc;
}

ExactResult exact_event_probability(const Window& window,
                                    const ConfigEvent& event,
                                    const EdgeMask* forced_open, int threads) {
    std::vector<std::size_t> free_edges;
    for (std::size_t e = 0; e < window.edge_count(); ++e)
        if (!forced_open || !forced_open->test(e)) free_edges.push_back(e);
    std::size_t m = free_edges.size();
    if (m > kMaxFreeEdges)
        throw std::invalid_argument(
            "exact enumeration capped at " + std::to_string(kMaxFreeEdges) +
            " free edges; window " + window.describe() + " has " +
            std::to_string(m));

    const std::uint64_t total = std::uint64_t{1} << m;

    auto tally_range = [&](std::uint64_t begin, std::uint64_t end,
                           std::vector<long long>& counts) {
        BondConfiguration cfg{window, EdgeMask(window.edge_count()), 0.0, 0, 0};
        for (std::uint64_t code = begin; code < end; ++code) {
            cfg.open.reset();
            if (forced_open) cfg.open |= *forced_open;
            int open_count = 0;
            for (std::size_t b = 0; b < m; ++b) {
                if ((code >> b) & 1) {
                    cfg.open.set(free_edges[b]);
                    ++open_count;
                }
            }
            if (event(cfg)) ++counts[open_count];
        }
    };

    std::vector<long long> counts(m + 1, 0);
    if (threads <= 1 || total < 4096) {
        tally_range(0, total, counts);
    } else {
        int n = threads;
        std::vector<std::vector<long long>> partial(
            n, std::vector<long long>(m + 1, 0));
        std::vector<std::thread> pool;
        std::uint64_t chunk = (total + n - 1) / n;
        for (int c = 0; c < n; ++c) {
            std::uint64_t begin = c * chunk;
            std::uint64_t end = std::min(total, begin + chunk);
            pool.emplace_back(
                [&, c, begin, end] { tally_range(begin, end, partial[c]); });
        }
        for (auto& th : pool) th.join();
        for (int c = 0; c < n; ++c)
            for (std::size_t k = 0; k <= m; ++k) counts[k] += partial[c][k];
    }
    return ExactResult{std::move(counts), m};
}

}  // namespace maxperc
