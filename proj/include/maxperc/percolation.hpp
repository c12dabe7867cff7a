#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "maxperc/estimate.hpp"
#include "maxperc/lattice.hpp"

namespace maxperc {

// One Bernoulli bond percolation sample omega on a window: an open/closed
// state per edge, plus the parameters used to draw it.
struct BondConfiguration {
    Window window;
    EdgeMask open;
    double p = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;

    bool is_open(Edge e) const { return open.test(window.edge_index(e)); }
};

// Each non-forced edge independently open with probability p; forced edges
// open with probability 1. Edge variates are keyed by (seed, trial, edge
// index), so configurations at different p but equal keys are coupled:
// the open set at p is a subset of the open set at p' > p.
BondConfiguration sample_configuration(const Window& window, double p,
                                       std::uint64_t seed,
                                       std::uint64_t trial = 0,
                                       const EdgeMask* forced_open = nullptr);

// Union-find with path compression over node indices.
class UnionFind {
public:
    explicit UnionFind(std::size_t n);
    std::size_t root(std::size_t x);
    void join(std::size_t a, std::size_t b);
    void reset();

private:
    std::vector<std::int32_t> parent_;  // negative = root holding -size
};

// Open cluster C(k): nodes joined to k by open paths traversed in either
// direction, k included.
NodeMask open_cluster_mask(const BondConfiguration& cfg, Node k);
std::vector<Node> open_cluster(const BondConfiguration& cfg, Node k);

// C(i,j): the open cluster containing both i and j, empty when they are
// not connected.
std::vector<Node> joint_cluster(const BondConfiguration& cfg, Node i, Node j);

// Oriented cluster C->(k) = {k} u descendants over open edges.
NodeMask oriented_cluster_mask(const BondConfiguration& cfg, Node k);
std::vector<Node> oriented_cluster(const BondConfiguration& cfg, Node k);

// Percolation probability proxies: the infinite-cluster event is replaced
// by "the cluster of 0 reaches L-infinity distance `radius` from 0".
// The window must contain the box [-radius, radius]^2.
McEstimate estimate_theta(double p, const Window& window, int radius,
                          long trials, std::uint64_t seed, int threads = 1);
McEstimate estimate_oriented_theta(double p, const Window& window, int radius,
                                   long trials, std::uint64_t seed,
                                   int threads = 1);

enum class CriticalEstimator { Theta, OrientedTheta, TwoPoint };

struct CriticalBracket {
    double lo = 0.0;
    double hi = 1.0;
    double theta0 = 0.0;
    std::vector<std::pair<double, McEstimate>> evaluations;
    bool monotone_warning = false;

    double mid() const { return 0.5 * (lo + hi); }
};

// Bisection on p of the chosen shell-reaching estimator against the
// positivity threshold theta0. Edge variates are shared across all p, so
// per-trial indicators are exactly monotone in p and the empirical curve
// is a nondecreasing step function.
CriticalBracket estimate_critical(CriticalEstimator estimator,
                                  const Window& window, int radius,
                                  long trials, double tolerance,
                                  std::uint64_t seed, double theta0 = 0.02,
                                  Node ell = Node{2, 0}, int threads = 1);

}  // namespace maxperc
