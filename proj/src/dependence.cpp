#include "maxperc/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace maxperc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// BFS from `start` over present edges; true as soon as a visited node
// (start included) lies in `targets`.
bool reach_hits(const Window& w, Node start, const EdgeMask& open,
                const NodeMask& targets, bool backward) {
    std::size_t s = w.node_index(start);
    if (targets.test(s)) return true;
    NodeMask visited(w.node_count());
    visited.set(s);
    std::vector<std::size_t> stack{s};
    while (!stack.empty()) {
        Node cur = w.node_at(stack.back());
        stack.pop_back();
        Node nb[2];
        Edge ed[2];
        int n = 0;
        if (backward) {
            if (cur.x > w.lo().x) {
                nb[n] = Node{cur.x - 1, cur.y};
                ed[n++] = Edge{{cur.x - 1, cur.y}, Dir::East};
            }
            if (cur.y > w.lo().y) {
                nb[n] = Node{cur.x, cur.y - 1};
                ed[n++] = Edge{{cur.x, cur.y - 1}, Dir::North};
            }
        } else {
            if (cur.x < w.hi().x) {
                nb[n] = Node{cur.x + 1, cur.y};
                ed[n++] = Edge{cur, Dir::East};
            }
            if (cur.y < w.hi().y) {
                nb[n] = Node{cur.x, cur.y + 1};
                ed[n++] = Edge{cur, Dir::North};
            }
        }
        for (int k = 0; k < n; ++k) {
            if (!open.test(w.edge_index(ed[k]))) continue;
            std::size_t t = w.node_index(nb[k]);
            if (visited.test(t)) continue;
            if (targets.test(t)) return true;
            visited.set(t);
            stack.push_back(t);
        }
    }
    return false;
}

}  // namespace

void validate_subdag(const SubDag& h) {
    if (h.nodes.size() != h.window.node_count() ||
        h.edges.size() != h.window.edge_count())
        throw std::invalid_argument("sub-DAG masks do not match its window " +
                                    h.window.describe());
    bool ok = true;
    h.edges.for_each_set([&](std::size_t ei) {
        Edge e = h.window.edge_at(ei);
        if (!h.nodes.test(h.window.node_index(e.origin)) ||
            !h.nodes.test(h.window.node_index(e.target())))
            ok = false;
    });
    if (!ok)
        throw std::invalid_argument(
            "sub-DAG has an edge not joining its node set");
}

SubDag embed_subdag(const SubDag& h, const Window& window) {
    if (!window.contains(h.window.lo()) || !window.contains(h.window.hi()))
        throw std::invalid_argument("sub-DAG window " + h.window.describe() +
                                    " does not fit inside " +
                                    window.describe());
    SubDag out{window, NodeMask(window.node_count()),
               EdgeMask(window.edge_count())};
    h.nodes.for_each_set([&](std::size_t ni) {
        out.nodes.set(window.node_index(h.window.node_at(ni)));
    });
    h.edges.for_each_set([&](std::size_t ei) {
        out.edges.set(window.edge_index(h.window.edge_at(ei)));
    });
    return out;
}

SubDag pair_subdag(const Window& window, Node i, Node j) {
    SubDag h{window, NodeMask(window.node_count()),
             EdgeMask(window.edge_count())};
    h.nodes.set(window.node_index(i));
    h.nodes.set(window.node_index(j));
    return h;
}

SubDag north_columns_subdag(const Window& window) {
    SubDag h{window, NodeMask(window.node_count(), true),
             EdgeMask(window.edge_count())};
    for (std::size_t e = window.east_count(); e < window.edge_count(); ++e)
        h.edges.set(e);
    return h;
}

SubDag wall_subdag(const Window& window, int k1, int i2) {
    auto forbidden = [&](Node n) {
        return (n.x == k1 - 1 || n.x == k1 + 1) && n.y <= i2;
    };
    SubDag h{window, NodeMask(window.node_count(), true),
             EdgeMask(window.edge_count())};
    for (std::size_t e = 0; e < window.edge_count(); ++e) {
        Edge edge = window.edge_at(e);
        if (!forbidden(edge.origin) && !forbidden(edge.target()))
            h.edges.set(e);
    }
    return h;
}

NodeMask common_ancestors_mask(const BondConfiguration& cfg, Node i, Node j) {
    NodeMask a = ancestor_mask(cfg.window, i, cfg.open, /*include_self=*/true);
    NodeMask b = ancestor_mask(cfg.window, j, cfg.open, /*include_self=*/true);
    a &= b;
    return a;
}

std::vector<Node> common_ancestors(const BondConfiguration& cfg, Node i,
                                   Node j) {
    return mask_to_nodes(cfg.window, common_ancestors_mask(cfg, i, j));
}

bool are_dependent(const BondConfiguration& cfg, Node i, Node j) {
    NodeMask an_i =
        ancestor_mask(cfg.window, i, cfg.open, /*include_self=*/true);
    return reach_hits(cfg.window, j, cfg.open, an_i, /*backward=*/true);
}

namespace {

bool common_descendants_exist(const BondConfiguration& cfg, Node i, Node j) {
    NodeMask de_i =
        descendant_mask(cfg.window, i, cfg.open, /*include_self=*/true);
    return reach_hits(cfg.window, j, cfg.open, de_i, /*backward=*/false);
}

}  // namespace

bool sigma_event(const BondConfiguration& cfg, Node i, Node j) {
    return are_dependent(cfg, i, j) || common_descendants_exist(cfg, i, j);
}

McEstimate estimate_dependence_probability(const DependenceQuery& q,
                                           int threads) {
    if (q.i == q.j) throw std::invalid_argument("query nodes must differ");
    q.window.node_index(q.i);
    q.window.node_index(q.j);
    const EdgeMask* forced = q.forced_open ? &*q.forced_open : nullptr;
    long hits = count_trials(q.trials, threads, [&](long t) {
        BondConfiguration cfg = sample_configuration(
            q.window, q.p, q.seed, static_cast<std::uint64_t>(t), forced);
        return are_dependent(cfg, q.i, q.j);
    });
    return bernoulli_estimate(hits, q.trials, q.seed);
}

SigmaBoundReport check_sigma_bound(Node i, Node j, double p,
                                   const Window& window, long trials,
                                   std::uint64_t seed, int threads) {
    std::vector<double> sums =
        sum_trials(trials, threads, 2, [&](long t, std::vector<double>& row) {
            BondConfiguration cfg = sample_configuration(
                window, p, seed, static_cast<std::uint64_t>(t));
            bool dep = are_dependent(cfg, i, j);
            bool sig = dep || common_descendants_exist(cfg, i, j);
            row[0] = dep ? 1.0 : 0.0;
            row[1] = sig ? 1.0 : 0.0;
        });
    SigmaBoundReport r;
    r.ancestor_prob =
        bernoulli_estimate(static_cast<long>(sums[0] + 0.5), trials, seed);
    r.sigma_prob =
        bernoulli_estimate(static_cast<long>(sums[1] + 0.5), trials, seed);
    r.rhs = 1.0 - std::sqrt(std::max(0.0, 1.0 - r.sigma_prob.value));
    r.margin = r.ancestor_prob.value - r.rhs;
    // Delta method on the sqrt for the rhs uncertainty; conservative sum.
    double root = std::sqrt(std::max(1e-12, 1.0 - r.sigma_prob.value));
    double rhs_se = 0.5 / root * r.sigma_prob.stderr_;
    r.stderr_combined =
        std::sqrt(r.ancestor_prob.stderr_ * r.ancestor_prob.stderr_ +
                  rhs_se * rhs_se);
    r.pass = r.ancestor_prob.value >= r.rhs - 4.0 * r.stderr_combined;
    return r;
}

std::pair<Node, Node> place_pair(int distance, bool diagonal) {
    if (distance < 1) throw std::invalid_argument("distance must be >= 1");
    int dx = distance, dy = 0;
    if (diagonal) {
        dx = (distance + 1) / 2;
        dy = distance / 2;
    }
    Node i{-(dx + 1) / 2, -(dy + 1) / 2};
    Node j{i.x + dx, i.y + dy};
    return {i, j};
}

int boundary_margin(const Window& w, Node n) {
    w.node_index(n);
    int m = n.x - w.lo().x;
    m = std::min(m, w.hi().x - n.x);
    m = std::min(m, n.y - w.lo().y);
    m = std::min(m, w.hi().y - n.y);
    return m;
}

SweepResult phase_sweep(const std::vector<double>& p_grid,
                        const std::vector<int>& distance_grid,
                        const Window& window, long trials, std::uint64_t seed,
                        bool diagonal, int threads) {
    struct Placement {
        int distance;
        Node i, j;
        int margin;
    };
    std::vector<Placement> pairs;
    for (int d : distance_grid) {
        auto [i, j] = place_pair(d, diagonal);
        if (!window.contains(i) || !window.contains(j))
            throw std::invalid_argument("distance " + std::to_string(d) +
                                        " does not fit in window " +
                                        window.describe());
        int margin = std::min(boundary_margin(window, i),
                              boundary_margin(window, j));
        if (margin < d)
            throw std::invalid_argument(
                "window margin " + std::to_string(margin) + " below distance " +
                std::to_string(d) + "; enlarge the window");
        pairs.push_back({d, i, j, margin});
    }

    SweepResult result;
    for (double p : p_grid) {
        // One configuration per (p, trial), shared by all distances.
        std::vector<double> hits = sum_trials(
            trials, threads, pairs.size(), [&](long t, std::vector<double>& row) {
                BondConfiguration cfg = sample_configuration(
                    window, p, seed, static_cast<std::uint64_t>(t));
                for (std::size_t k = 0; k < pairs.size(); ++k)
                    row[k] =
                        are_dependent(cfg, pairs[k].i, pairs[k].j) ? 1.0 : 0.0;
            });
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            SweepRow row;
            row.p = p;
            row.distance = pairs[k].distance;
            row.i = pairs[k].i;
            row.j = pairs[k].j;
            row.window_side = window.width();
            row.margin = pairs[k].margin;
            row.estimate = bernoulli_estimate(
                static_cast<long>(hits[k] + 0.5), trials, seed);
            result.rows.push_back(row);
        }
    }
    return result;
}

BoxStatsReport common_ancestor_box_stats(int distance, double p,
                                         const std::vector<int>& n_grid,
                                         long trials, std::uint64_t seed,
                                         InverseCountConvention convention,
                                         int threads) {
    if (distance < 1) throw std::invalid_argument("distance must be >= 1");
    BoxStatsReport report;
    report.distance = distance;
    report.p = p;
    report.convention = convention;
    report.seed = seed;

    // Unordered pair offsets at the given graph distance (half-plane:
    // dx > 0, or dx == 0 with dy > 0).
    std::vector<Node> offsets{Node{0, distance}};
    for (int dx = 1; dx <= distance; ++dx) {
        int rest = distance - dx;
        offsets.push_back(Node{dx, rest});
        if (rest > 0) offsets.push_back(Node{dx, -rest});
    }

    for (int n : n_grid) {
        Window box = Window::box(n);
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        box.for_each_node([&](Node k) {
            for (Node off : offsets) {
                Node l{k.x + off.x, k.y + off.y};
                if (box.contains(l))
                    pairs.emplace_back(box.node_index(k), box.node_index(l));
            }
        });

        // Per trial: [0] trial average, [1] contributed flag,
        // [2] square of average, [3] empty pair count. Chunked by hand so
        // each chunk reuses one ancestor closure.
        auto run_chunk = [&](long begin, long end, std::vector<double>& out) {
            AncestorClosure closure(box);
            for (long t = begin; t < end; ++t) {
                BondConfiguration cfg = sample_configuration(
                    box, p, seed, static_cast<std::uint64_t>(t));
                closure.recompute(cfg.open);
                double acc = 0.0;
                long used = 0, empty = 0;
                for (auto [a, b] : pairs) {
                    std::size_t count =
                        Bitset::and_count(closure.closed_ancestors(a),
                                          closure.closed_ancestors(b));
                    if (count == 0) {
                        ++empty;
                        if (convention == InverseCountConvention::Zero) ++used;
                    } else {
                        acc += 1.0 / static_cast<double>(count);
                        ++used;
                    }
                }
                if (used > 0) {
                    double avg = acc / used;
                    out[0] += avg;
                    out[1] += 1.0;
                    out[2] += avg * avg;
                }
                out[3] += static_cast<double>(empty);
            }
        };
        std::vector<double> sums(4, 0.0);
        if (threads <= 1 || trials < 2 * threads) {
            run_chunk(0, trials, sums);
        } else {
            std::vector<std::vector<double>> partial(
                threads, std::vector<double>(4, 0.0));
            std::vector<std::thread> pool;
            long chunk = (trials + threads - 1) / threads;
            for (int c = 0; c < threads; ++c) {
                long begin = c * chunk;
                long end = std::min(trials, begin + chunk);
                pool.emplace_back([&, c, begin, end] {
                    run_chunk(begin, end, partial[c]);
                });
            }
            for (auto& th : pool) th.join();
            for (int c = 0; c < threads; ++c)
                for (int k = 0; k < 4; ++k) sums[k] += partial[c][k];
        }

        BoxStatsRow row;
        row.n = n;
        row.pairs = static_cast<long>(pairs.size());
        long contributed = static_cast<long>(sums[1] + 0.5);
        row.contributing_trials = contributed;
        if (contributed == 0) {
            row.value = kNaN;
            row.stderr_ = kNaN;
        } else {
            McEstimate est = mean_estimate(sums[0], sums[2], contributed, seed);
            row.value = est.value;
            row.stderr_ = est.stderr_;
        }
        row.empty_fraction =
            pairs.empty() ? 0.0
                          : sums[3] / (static_cast<double>(pairs.size()) *
                                       static_cast<double>(trials));
        report.rows.push_back(row);
    }
    return report;
}

BondConfiguration restrict_to_enlargement(const SubDag& h,
                                          const BondConfiguration& cfg) {
    if (!(cfg.window == h.window))
        throw std::invalid_argument(
            "configuration window does not match the sub-DAG window");
    // Clusters of the configuration; keep only those touching H.
    UnionFind uf(h.window.node_count());
    cfg.open.for_each_set([&](std::size_t ei) {
        Edge e = h.window.edge_at(ei);
        uf.join(h.window.node_index(e.origin),
                h.window.node_index(e.target()));
    });
    NodeMask root_of_h(h.window.node_count());
    h.nodes.for_each_set(
        [&](std::size_t ni) { root_of_h.set(uf.root(ni)); });
    EdgeMask kept(h.window.edge_count());
    cfg.open.for_each_set([&](std::size_t ei) {
        Edge e = h.window.edge_at(ei);
        if (root_of_h.test(uf.root(h.window.node_index(e.origin))))
            kept.set(ei);
    });
    kept |= h.edges;
    BondConfiguration out = cfg;
    out.open = std::move(kept);
    return out;
}

SubDag enlargement_subdag(const SubDag& h, const BondConfiguration& cfg) {
    BondConfiguration u = restrict_to_enlargement(h, cfg);
    // Every kept open edge joins two cluster nodes; singleton clusters of
    // H nodes contribute the nodes themselves.
    NodeMask nodes(h.window.node_count());
    u.open.for_each_set([&](std::size_t ei) {
        Edge e = h.window.edge_at(ei);
        nodes.set(h.window.node_index(e.origin));
        nodes.set(h.window.node_index(e.target()));
    });
    nodes |= h.nodes;
    return SubDag{h.window, std::move(nodes), std::move(u.open)};
}

BondConfiguration enlarge(const SubDag& h, double p, std::uint64_t seed,
                          std::uint64_t trial) {
    validate_subdag(h);
    return restrict_to_enlargement(
        h, sample_configuration(h.window, p, seed, trial, &h.edges));
}

McEstimate estimate_enlargement_probability(const SubDag& h, Node i, Node j,
                                            double p, long trials,
                                            std::uint64_t seed, int threads) {
    validate_subdag(h);
    if (!h.nodes.test(h.window.node_index(i)) ||
        !h.nodes.test(h.window.node_index(j)))
        throw std::invalid_argument("query nodes must belong to V(H)");
    // P_p(U(H) has the property) equals the probability of common
    // ancestors under P_p^H: the cluster of every H node lies in U(H)
    // entirely, so ancestor sets agree between U(H) and the raw sample.
    long hits = count_trials(trials, threads, [&](long t) {
        BondConfiguration cfg = sample_configuration(
            h.window, p, seed, static_cast<std::uint64_t>(t), &h.edges);
        return are_dependent(cfg, i, j);
    });
    return bernoulli_estimate(hits, trials, seed);
}

EnlargementReport estimate_enlargement_criticals(
    const SubDagBuilder& h_builder, Node i, Node j,
    const std::vector<double>& p_grid, const std::vector<int>& window_sides,
    long trials, std::uint64_t seed, int threads) {
    EnlargementReport report;
    report.caveat =
        "finite-window proxies: positivity and almost-sure dependence are "
        "asymptotic statements and are not decidable from any finite window";

    std::vector<double> ps = p_grid;
    std::sort(ps.begin(), ps.end());
    std::vector<int> sides = window_sides;
    std::sort(sides.begin(), sides.end());

    report.p_c1_proxy = kNaN;
    report.p_c2_proxy = kNaN;
    for (double p : ps) {
        bool positive_somewhere = false;
        bool all_near_one = true;
        bool nondecreasing = true;
        double prev = -1.0, prev_se = 0.0;
        for (int side : sides) {
            Window window = Window::centered(side);
            SubDag h = h_builder(window);
            McEstimate est = estimate_enlargement_probability(
                h, i, j, p, trials, seed, threads);
            report.rows.push_back(EnlargementRow{p, side, est});
            if (est.value > 4.0 * est.stderr_) positive_somewhere = true;
            if (1.0 - est.value > std::max(4.0 * est.stderr_, 1e-3))
                all_near_one = false;
            if (prev >= 0.0 &&
                est.value < prev - 2.0 * std::hypot(est.stderr_, prev_se))
                nondecreasing = false;
            prev = est.value;
            prev_se = est.stderr_;
        }
        if (positive_somewhere && std::isnan(report.p_c1_proxy))
            report.p_c1_proxy = p;
        if (all_near_one && nondecreasing && std::isnan(report.p_c2_proxy))
            report.p_c2_proxy = p;
    }
    return report;
}

}  // namespace maxperc
