#include "maxperc/percolation.hpp"

#include <algorithm>
#include <cmath>

#include "maxperc/rng.hpp"

namespace maxperc {

BondConfiguration sample_configuration(const Window& window, double p,
                                       std::uint64_t seed, std::uint64_t trial,
                                       const EdgeMask* forced_open) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("p must lie in [0,1], got " +
                                    std::to_string(p));
    CounterRng rng(seed, RngStream::BondState, trial);
    EdgeMask open(window.edge_count());
    for (std::size_t e = 0; e < window.edge_count(); ++e)
        if (rng.uniform(e) < p) open.set(e);
    if (forced_open) {
        if (forced_open->size() != window.edge_count())
            throw std::invalid_argument(
                "forced edge set does not match window " + window.describe());
        open |= *forced_open;
    }
    return BondConfiguration{window, std::move(open), p, seed, trial};
}

UnionFind::UnionFind(std::size_t n) : parent_(n, -1) {}

void UnionFind::reset() { parent_.assign(parent_.size(), -1); }

std::size_t UnionFind::root(std::size_t x) {
    std::size_t r = x;
    while (parent_[r] >= 0) r = static_cast<std::size_t>(parent_[r]);
    while (parent_[x] >= 0) {
        std::size_t next = static_cast<std::size_t>(parent_[x]);
        parent_[x] = static_cast<std::int32_t>(r);
        x = next;
    }
    return r;
}

void UnionFind::join(std::size_t a, std::size_t b) {
    std::size_t ra = root(a), rb = root(b);
    if (ra == rb) return;
    if (parent_[ra] > parent_[rb]) std::swap(ra, rb);  // ra has bigger size
    parent_[ra] += parent_[rb];
    parent_[rb] = static_cast<std::int32_t>(ra);
}

namespace {

UnionFind clusters_of(const BondConfiguration& cfg) {
    UnionFind uf(cfg.window.node_count());
    cfg.open.for_each_set([&](std::size_t ei) {
        Edge e = cfg.window.edge_at(ei);
        uf.join(cfg.window.node_index(e.origin),
                cfg.window.node_index(e.target()));
    });
    return uf;
}

}  // namespace

NodeMask open_cluster_mask(const BondConfiguration& cfg, Node k) {
    std::size_t ki = cfg.window.node_index(k);
    UnionFind uf = clusters_of(cfg);
    std::size_t rk = uf.root(ki);
    NodeMask m(cfg.window.node_count());
    for (std::size_t i = 0; i < cfg.window.node_count(); ++i)
        if (uf.root(i) == rk) m.set(i);
    return m;
}

std::vector<Node> open_cluster(const BondConfiguration& cfg, Node k) {
    return mask_to_nodes(cfg.window, open_cluster_mask(cfg, k));
}

std::vector<Node> joint_cluster(const BondConfiguration& cfg, Node i, Node j) {
    std::size_t ii = cfg.window.node_index(i);
    std::size_t ji = cfg.window.node_index(j);
    UnionFind uf = clusters_of(cfg);
    if (uf.root(ii) != uf.root(ji)) return {};
    std::size_t r = uf.root(ii);
    NodeMask m(cfg.window.node_count());
    for (std::size_t n = 0; n < cfg.window.node_count(); ++n)
        if (uf.root(n) == r) m.set(n);
    return mask_to_nodes(cfg.window, m);
}

NodeMask oriented_cluster_mask(const BondConfiguration& cfg, Node k) {
    return descendant_mask(cfg.window, k, cfg.open, /*include_self=*/true);
}

std::vector<Node> oriented_cluster(const BondConfiguration& cfg, Node k) {
    return mask_to_nodes(cfg.window, oriented_cluster_mask(cfg, k));
}

namespace {

void check_radius(const Window& window, int radius) {
    if (radius < 1) throw std::invalid_argument("radius must be >= 1");
    Window shell = Window::box(radius);
    if (!window.contains(shell.lo()) || !window.contains(shell.hi()))
        throw std::invalid_argument(
            "radius " + std::to_string(radius) + " does not fit in window " +
            window.describe() + " around the origin");
}

inline int linf_norm(Node n) {
    int ax = n.x < 0 ? -n.x : n.x;
    int ay = n.y < 0 ? -n.y : n.y;
    return ax > ay ? ax : ay;
}

// Does the undirected open cluster of 0 reach L-inf distance `radius`?
// Early-exit BFS; equivalent to extracting the union-find cluster and
// scanning the shell, but stops at first contact.
bool cluster_reaches_shell(const Window& w, const EdgeMask& open, int radius) {
    Node origin{0, 0};
    std::size_t s = w.node_index(origin);
    NodeMask visited(w.node_count());
    visited.set(s);
    std::vector<std::size_t> stack{s};
    while (!stack.empty()) {
        Node cur = w.node_at(stack.back());
        stack.pop_back();
        if (linf_norm(cur) >= radius) return true;
        const Node nb[4] = {{cur.x + 1, cur.y},
                            {cur.x, cur.y + 1},
                            {cur.x - 1, cur.y},
                            {cur.x, cur.y - 1}};
        const Edge ed[4] = {{cur, Dir::East},
                            {cur, Dir::North},
                            {{cur.x - 1, cur.y}, Dir::East},
                            {{cur.x, cur.y - 1}, Dir::North}};
        for (int k = 0; k < 4; ++k) {
            if (!w.contains(nb[k])) continue;
            if (!open.test(w.edge_index(ed[k]))) continue;
            std::size_t t = w.node_index(nb[k]);
            if (!visited.test(t)) {
                visited.set(t);
                stack.push_back(t);
            }
        }
    }
    return false;
}

bool oriented_reaches_shell(const Window& w, const EdgeMask& open, int radius) {
    Node origin{0, 0};
    std::size_t s = w.node_index(origin);
    NodeMask visited(w.node_count());
    visited.set(s);
    std::vector<std::size_t> stack{s};
    while (!stack.empty()) {
        Node cur = w.node_at(stack.back());
        stack.pop_back();
        if (linf_norm(cur) >= radius) return true;
        const Node nb[2] = {{cur.x + 1, cur.y}, {cur.x, cur.y + 1}};
        const Edge ed[2] = {{cur, Dir::East}, {cur, Dir::North}};
        for (int k = 0; k < 2; ++k) {
            if (!w.contains(nb[k])) continue;
            if (!open.test(w.edge_index(ed[k]))) continue;
            std::size_t t = w.node_index(nb[k]);
            if (!visited.test(t)) {
                visited.set(t);
                stack.push_back(t);
            }
        }
    }
    return false;
}

McEstimate shell_estimate(double p, const Window& window, int radius,
                          long trials, std::uint64_t seed, int threads,
                          bool oriented) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("p must lie in [0,1]");
    check_radius(window, radius);
    long hits = count_trials(trials, threads, [&](long t) {
        BondConfiguration cfg = sample_configuration(
            window, p, seed, static_cast<std::uint64_t>(t));
        return oriented ? oriented_reaches_shell(window, cfg.open, radius)
                        : cluster_reaches_shell(window, cfg.open, radius);
    });
    return bernoulli_estimate(hits, trials, seed);
}

}  // namespace

McEstimate estimate_theta(double p, const Window& window, int radius,
                          long trials, std::uint64_t seed, int threads) {
    return shell_estimate(p, window, radius, trials, seed, threads, false);
}

McEstimate estimate_oriented_theta(double p, const Window& window, int radius,
                                   long trials, std::uint64_t seed,
                                   int threads) {
    return shell_estimate(p, window, radius, trials, seed, threads, true);
}

namespace {

bool two_point_reaches_shell(const Window& w, const EdgeMask& open, int radius,
                             Node ell) {
    // Cluster containing both 0 and ell, and reaching the shell.
    Node origin{0, 0};
    std::size_t s = w.node_index(origin);
    std::size_t li = w.node_index(ell);
    NodeMask visited(w.node_count());
    visited.set(s);
    std::vector<std::size_t> stack{s};
    bool saw_ell = (s == li);
    bool saw_shell = false;
    while (!stack.empty() && !(saw_ell && saw_shell)) {
        Node cur = w.node_at(stack.back());
        stack.pop_back();
        if (linf_norm(cur) >= radius) saw_shell = true;
        const Node nb[4] = {{cur.x + 1, cur.y},
                            {cur.x, cur.y + 1},
                            {cur.x - 1, cur.y},
                            {cur.x, cur.y - 1}};
        const Edge ed[4] = {{cur, Dir::East},
                            {cur, Dir::North},
                            {{cur.x - 1, cur.y}, Dir::East},
                            {{cur.x, cur.y - 1}, Dir::North}};
        for (int k = 0; k < 4; ++k) {
            if (!w.contains(nb[k])) continue;
            if (!open.test(w.edge_index(ed[k]))) continue;
            std::size_t t = w.node_index(nb[k]);
            if (!visited.test(t)) {
                visited.set(t);
                if (t == li) saw_ell = true;
                stack.push_back(t);
            }
        }
    }
    return saw_ell && saw_shell;
}

}  // namespace

CriticalBracket estimate_critical(CriticalEstimator estimator,
                                  const Window& window, int radius,
                                  long trials, double tolerance,
                                  std::uint64_t seed, double theta0, Node ell,
                                  int threads) {
    if (tolerance <= 0.0)
        throw std::invalid_argument("tolerance must be positive");
    check_radius(window, radius);
    if (estimator == CriticalEstimator::TwoPoint) window.node_index(ell);

    auto evaluate = [&](double p) {
        if (estimator == CriticalEstimator::Theta)
            return estimate_theta(p, window, radius, trials, seed, threads);
        if (estimator == CriticalEstimator::OrientedTheta)
            return estimate_oriented_theta(p, window, radius, trials, seed,
                                           threads);
        long hits = count_trials(trials, threads, [&](long t) {
            BondConfiguration cfg = sample_configuration(
                window, p, seed, static_cast<std::uint64_t>(t));
            return two_point_reaches_shell(window, cfg.open, radius, ell);
        });
        return bernoulli_estimate(hits, trials, seed);
    };

    CriticalBracket result;
    result.theta0 = theta0;
    result.lo = 0.0;
    result.hi = 1.0;
    double est_lo = 0.0;  // estimate at p=0 is 0 for every shell event
    while (result.hi - result.lo > tolerance) {
        double mid = 0.5 * (result.lo + result.hi);
        McEstimate est = evaluate(mid);
        result.evaluations.emplace_back(mid, est);
        if (est.value > theta0) {
            result.hi = mid;
        } else {
            if (est.value < est_lo) result.monotone_warning = true;
            est_lo = est.value;
            result.lo = mid;
        }
    }
    return result;
}

}  // namespace maxperc
