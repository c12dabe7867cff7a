#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "maxperc/percolation.hpp"

namespace maxperc {

// Probability of a configuration event as a polynomial in p, expanded from
// per-open-count configuration tallies. Coefficients are exact integers as
// long as the free edge count stays within the enumeration cap.
struct Polynomial {
    std::vector<long long> coeff;  // coeff[k] multiplies p^k

    double eval(double p) const;
    std::string pretty() const;  // e.g. "p^2" or "2p^2 - p^4"

    friend bool operator==(const Polynomial& a, const Polynomial& b) {
        return a.coeff == b.coeff;
    }
};

struct ExactResult {
    // satisfying[k] = number of event configurations with k open free edges
    std::vector<long long> satisfying;
    std::size_t free_edges = 0;
    Polynomial polynomial() const;
    // Exact probability at numeric p, evaluated from the tallies (stable).
    double at(double p) const;
};

using ConfigEvent = std::function<bool(const BondConfiguration&)>;

inline constexpr std::size_t kMaxFreeEdges = 24;

// Exhaustive sum over all 2^(free edges) configurations. Forced edges are
// open in every configuration and excluded from the enumeration. Throws
// when the free edge count exceeds kMaxFreeEdges.
ExactResult exact_event_probability(const Window& window,
                                    const ConfigEvent& event,
                                    const EdgeMask* forced_open = nullptr,
                                    int threads = 1);

}  // namespace maxperc
