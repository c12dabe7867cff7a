#include "maxperc/maxlinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "maxperc/rng.hpp"

namespace maxperc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

WeightedDag WeightedDag::uniform(const Window& window, const EdgeMask& edges) {
    WeightedDag dag{window, edges,
                    std::vector<double>(window.node_count(), 1.0),
                    std::vector<double>(window.edge_count(), 0.0)};
    edges.for_each_set([&](std::size_t e) { dag.edge_weight[e] = 1.0; });
    return dag;
}

WeightedDag WeightedDag::full(const Window& window) {
    return uniform(window, window.full_edge_mask());
}

void WeightedDag::set_edge(Edge e, double weight) {
    if (!(weight > 0.0))
        throw std::invalid_argument("edge weight must be positive");
    std::size_t idx = window.edge_index(e);
    edges.set(idx);
    edge_weight[idx] = weight;
}

void validate_weights(const WeightedDag& dag) {
    if (dag.node_weight.size() != dag.window.node_count() ||
        dag.edge_weight.size() != dag.window.edge_count())
        throw std::invalid_argument("weight arrays do not match window " +
                                    dag.window.describe());
    for (double w : dag.node_weight)
        if (!(w > 0.0))
            throw std::invalid_argument("node weights must be positive");
    for (std::size_t e = 0; e < dag.window.edge_count(); ++e) {
        bool present = dag.edges.test(e);
        double w = dag.edge_weight[e];
        if (present && !(w > 0.0))
            throw std::invalid_argument("present edge " +
                                        to_string(dag.window.edge_at(e)) +
                                        " must carry a positive weight");
        if (!present && w != 0.0)
            throw std::invalid_argument("absent edge " +
                                        to_string(dag.window.edge_at(e)) +
                                        " must carry weight 0");
    }
}

const std::vector<CoefficientMatrix::Entry>& CoefficientMatrix::column(
    Node i) const {
    auto it = columns_.find(window_.node_index(i));
    if (it == columns_.end())
        throw std::invalid_argument("node " + to_string(i) +
                                    " is not a target of this matrix");
    return it->second;
}

double CoefficientMatrix::b(Node j, Node i) const {
    std::size_t ji = window_.node_index(j);
    for (const Entry& e : column(i))
        if (e.source == ji) return e.b;
    return 0.0;
}

NodeMask CoefficientMatrix::support(Node i) const {
    NodeMask m(window_.node_count());
    for (const Entry& e : column(i)) m.set(e.source);
    return m;
}

std::vector<Node> CoefficientMatrix::targets() const {
    std::vector<Node> out;
    out.reserve(columns_.size());
    for (const auto& [idx, _] : columns_) out.push_back(window_.node_at(idx));
    return out;
}

namespace {

// Out-edges of the node at `idx` as (edge index, head node index); row-major
// indices make both heads larger than idx.
struct OutEdges {
    std::size_t edge_idx[2];
    std::size_t head_idx[2];
    int n = 0;
};

inline OutEdges out_edges_at(const Window& w, std::size_t idx) {
    OutEdges oe;
    Node cur = w.node_at(idx);
    if (cur.x < w.hi().x) {
        oe.edge_idx[oe.n] = w.edge_index(Edge{cur, Dir::East});
        oe.head_idx[oe.n] = idx + 1;
        ++oe.n;
    }
    if (cur.y < w.hi().y) {
        oe.edge_idx[oe.n] = w.edge_index(Edge{cur, Dir::North});
        oe.head_idx[oe.n] = idx + static_cast<std::size_t>(w.width());
        ++oe.n;
    }
    return oe;
}

}  // namespace

CoefficientMatrix coefficient_matrix(const WeightedDag& dag,
                                     std::span<const Node> targets) {
    validate_weights(dag);
    const Window& w = dag.window;
    CoefficientMatrix matrix(w);
    std::vector<double> log_edge(w.edge_count(), kNegInf);
    dag.edges.for_each_set(
        [&](std::size_t e) { log_edge[e] = std::log(dag.edge_weight[e]); });

    std::vector<double> best(w.node_count(), kNegInf);
    std::vector<std::size_t> via_edge(w.node_count(), 0);
    for (Node target : targets) {
        std::size_t ti = w.node_index(target);
        std::fill(best.begin(), best.begin() + ti + 1, kNegInf);
        best[ti] = 0.0;
        // Reverse topological sweep: best[j] = max log path product j -> i,
        // with the winning out-edge remembered for path reconstruction.
        for (std::size_t idx = ti; idx-- > 0;) {
            OutEdges oe = out_edges_at(w, idx);
            double b = kNegInf;
            for (int k = 0; k < oe.n; ++k) {
                if (oe.head_idx[k] > ti) continue;
                double via = log_edge[oe.edge_idx[k]] + best[oe.head_idx[k]];
                if (via > b) {
                    b = via;
                    via_edge[idx] = oe.edge_idx[k];
                }
            }
            best[idx] = b;
        }
        std::vector<CoefficientMatrix::Entry> column;
        for (std::size_t j = 0; j <= ti; ++j) {
            if (best[j] == kNegInf) continue;
            // Evaluate the winning path in linear arithmetic.
            double prod = dag.node_weight[j];
            std::size_t cur = j;
            while (cur != ti) {
                std::size_t e = via_edge[cur];
                prod *= dag.edge_weight[e];
                Edge edge = w.edge_at(e);
                cur = w.node_index(edge.target());
            }
            column.push_back({j, prod});
        }
        matrix.set_column(ti, std::move(column));
    }
    return matrix;
}

CoefficientMatrix coefficient_matrix_all(const WeightedDag& dag) {
    std::vector<Node> all;
    all.reserve(dag.window.node_count());
    dag.window.for_each_node([&](Node n) { all.push_back(n); });
    return coefficient_matrix(dag, all);
}

namespace {

// Tie-break: keep the candidate whose source node is (x,y)-lexicographically
// smallest. Ties have probability zero under continuous noise; the rule
// only pins down floating-point coincidences.
inline void take_max(double candidate, std::size_t source, const Window& w,
                     double& value, std::size_t& argmax) {
    if (candidate > value) {
        value = candidate;
        argmax = source;
    } else if (candidate == value &&
               w.node_at(source) < w.node_at(argmax)) {
        argmax = source;
    }
}

}  // namespace

Realization realize_with_noise(const WeightedDag& dag,
                               std::span<const double> noise) {
    validate_weights(dag);
    const Window& w = dag.window;
    if (noise.size() != w.node_count())
        throw std::invalid_argument("noise vector does not match window");
    Realization r;
    r.noise.assign(noise.begin(), noise.end());
    r.value.assign(w.node_count(), 0.0);
    r.argmax_source.assign(w.node_count(), 0);
    for (std::size_t idx = 0; idx < w.node_count(); ++idx) {
        double value = dag.node_weight[idx] * noise[idx];
        std::size_t argmax = idx;
        Node cur = w.node_at(idx);
        // In-edges: parents already finished in row-major order.
        if (cur.x > w.lo().x) {
            std::size_t e = w.edge_index(Edge{{cur.x - 1, cur.y}, Dir::East});
            if (dag.edges.test(e)) {
                std::size_t pi = idx - 1;
                take_max(dag.edge_weight[e] * r.value[pi],
                         r.argmax_source[pi], w, value, argmax);
            }
        }
        if (cur.y > w.lo().y) {
            std::size_t e = w.edge_index(Edge{{cur.x, cur.y - 1}, Dir::North});
            if (dag.edges.test(e)) {
                std::size_t pi = idx - static_cast<std::size_t>(w.width());
                take_max(dag.edge_weight[e] * r.value[pi],
                         r.argmax_source[pi], w, value, argmax);
            }
        }
        r.value[idx] = value;
        r.argmax_source[idx] = argmax;
    }
    return r;
}

Realization realize(const WeightedDag& dag, const NoiseSpec& spec,
                    std::uint64_t seed, std::uint64_t rep) {
    if (!(spec.alpha > 0.0) || !std::isfinite(spec.alpha))
        throw std::invalid_argument("alpha must be finite and positive");
    if (spec.kind != NoiseKind::StandardFrechet)
        throw std::invalid_argument("only standard Frechet noise is supported");
    CounterRng rng(seed, RngStream::Noise, rep);
    std::vector<double> noise(dag.window.node_count());
    for (std::size_t k = 0; k < noise.size(); ++k)
        noise[k] = frechet_from_uniform(rng.uniform(k), spec.alpha);
    Realization r = realize_with_noise(dag, noise);
    r.alpha = spec.alpha;
    r.seed = seed;
    r.rep = rep;
    return r;
}

MatrixRealization realize_from_matrix(const CoefficientMatrix& coeff,
                                      std::span<const double> noise) {
    const Window& w = coeff.window();
    if (noise.size() != w.node_count())
        throw std::invalid_argument("noise vector does not match window");
    MatrixRealization out;
    for (Node target : coeff.targets()) {
        double value = kNegInf;
        std::size_t argmax = w.node_index(target);
        bool first = true;
        for (const auto& entry : coeff.column(target)) {
            double cand = entry.b * noise[entry.source];
            if (first) {
                value = cand;
                argmax = entry.source;
                first = false;
            } else {
                take_max(cand, entry.source, w, value, argmax);
            }
        }
        out.value.push_back(value);
        out.argmax_source.push_back(argmax);
    }
    return out;
}

double joint_cdf(const CoefficientMatrix& coeff, std::span<const Node> targets,
                 std::span<const double> x, double alpha) {
    if (targets.size() != x.size())
        throw std::invalid_argument("targets and x must have equal length");
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("alpha must be finite and positive");
    for (double v : x)
        if (!(v > 0.0))
            throw std::invalid_argument("joint_cdf requires all x > 0");
    const Window& w = coeff.window();
    // max_k alpha*(log b_{j,i^k} - log x_k) per source j over the support
    // union, then sum of exponentials.
    std::vector<double> max_log_term(w.node_count(), kNegInf);
    for (std::size_t k = 0; k < targets.size(); ++k) {
        double lx = std::log(x[k]);
        for (const auto& entry : coeff.column(targets[k])) {
            double t = alpha * (std::log(entry.b) - lx);
            if (t > max_log_term[entry.source]) max_log_term[entry.source] = t;
        }
    }
    double sum = 0.0;
    for (double t : max_log_term)
        if (t > kNegInf) sum += std::exp(t);
    return std::exp(-sum);
}

double scale_parameter(const CoefficientMatrix& coeff, Node i, double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("alpha must be finite and positive");
    const auto& column = coeff.column(i);
    double max_log = kNegInf;
    for (const auto& entry : column)
        max_log = std::max(max_log, std::log(entry.b));
    if (max_log == kNegInf) return 0.0;
    double sum = 0.0;
    for (const auto& entry : column)
        sum += std::exp(alpha * (std::log(entry.b) - max_log));
    return std::exp(max_log) * std::pow(sum, 1.0 / alpha);
}

namespace {

// Log path product from (0,0) to `target` (edge weights only); the DAG is
// assumed max-weighted so any path realizes the value. NaN if unreachable.
double log_root_path(const WeightedDag& dag, Node target) {
    const Window& w = dag.window;
    std::size_t root = w.node_index(Node{0, 0});
    std::size_t ti = w.node_index(target);
    std::vector<double> best(ti + 1, kNegInf);
    best[root] = 0.0;
    for (std::size_t idx = root; idx < ti; ++idx) {
        if (best[idx] == kNegInf) continue;
        OutEdges oe = out_edges_at(w, idx);
        for (int k = 0; k < oe.n; ++k) {
            if (oe.head_idx[k] > ti || !dag.edges.test(oe.edge_idx[k]))
                continue;
            double via = best[idx] + std::log(dag.edge_weight[oe.edge_idx[k]]);
            if (via > best[oe.head_idx[k]]) best[oe.head_idx[k]] = via;
        }
    }
    return best[ti];
}

}  // namespace

WeightedDag extend_max_weighted(const WeightedDag& dag, Node new_node,
                                double c_vertical) {
    validate_weights(dag);
    if (!(c_vertical > 0.0))
        throw std::invalid_argument("free weight must be positive");
    const Window& w = dag.window;
    w.node_index(new_node);
    if (new_node.x < 0 || new_node.y < 0)
        throw std::invalid_argument(
            "max-weighted extension lives on the quadrant anchored at (0,0)");
    if (new_node == Node{0, 0})
        throw std::invalid_argument("cannot extend onto the root");

    WeightedDag out = dag;
    Node west{new_node.x - 1, new_node.y};
    Node south{new_node.x, new_node.y - 1};
    if (new_node.y == 0) {
        // Single-parent boundary node: the weight is unconstrained.
        out.set_edge(Edge{west, Dir::East}, c_vertical);
        return out;
    }
    if (new_node.x == 0) {
        out.set_edge(Edge{south, Dir::North}, c_vertical);
        return out;
    }
    double d_west = log_root_path(dag, west);
    double d_south = log_root_path(dag, south);
    if (d_west == kNegInf || d_south == kNegInf)
        throw std::invalid_argument(
            "both parents of " + to_string(new_node) +
            " must be reachable from the root before extending");
    out.set_edge(Edge{south, Dir::North}, c_vertical);
    // c_east = c_vertical * d(root, south parent) / d(root, west parent):
    // both root path products into new_node become d(root, south) * c_vertical.
    out.set_edge(Edge{west, Dir::East},
                 c_vertical * std::exp(d_south - d_west));
    return out;
}

namespace {

struct PathDp {
    std::vector<double> best_log;
    std::vector<std::int64_t> back;  // previous node index, -1 = none
};

// Forward DP from `src` for max (sign=+1) or min (sign=-1) log path sums.
PathDp path_extremum(const WeightedDag& dag, std::size_t src, int sign) {
    const Window& w = dag.window;
    PathDp dp{std::vector<double>(w.node_count(), kNegInf),
              std::vector<std::int64_t>(w.node_count(), -1)};
    dp.best_log[src] = 0.0;
    for (std::size_t idx = src; idx < w.node_count(); ++idx) {
        if (dp.best_log[idx] == kNegInf) continue;
        OutEdges oe = out_edges_at(w, idx);
        for (int k = 0; k < oe.n; ++k) {
            if (!dag.edges.test(oe.edge_idx[k])) continue;
            double contrib = sign * std::log(dag.edge_weight[oe.edge_idx[k]]);
            double via = dp.best_log[idx] + contrib;
            if (via > dp.best_log[oe.head_idx[k]]) {
                dp.best_log[oe.head_idx[k]] = via;
                dp.back[oe.head_idx[k]] = static_cast<std::int64_t>(idx);
            }
        }
    }
    return dp;
}

std::vector<Node> unwind(const Window& w, const PathDp& dp, std::size_t src,
                         std::size_t dst) {
    std::vector<Node> path;
    std::size_t cur = dst;
    while (true) {
        path.push_back(w.node_at(cur));
        if (cur == src) break;
        cur = static_cast<std::size_t>(dp.back[cur]);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

double path_product(const WeightedDag& dag, const std::vector<Node>& path) {
    double prod = 1.0;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        Dir dir = path[k + 1].x == path[k].x + 1 ? Dir::East : Dir::North;
        prod *= dag.edge_weight[dag.window.edge_index(Edge{path[k], dir})];
    }
    return prod;
}

}  // namespace

MaxWeightedCheck is_max_weighted(const WeightedDag& dag, double log_tol) {
    validate_weights(dag);
    const Window& w = dag.window;
    for (std::size_t src = 0; src < w.node_count(); ++src) {
        PathDp max_dp = path_extremum(dag, src, +1);
        bool has_reachable = false;
        for (std::size_t dst = src + 1; dst < w.node_count(); ++dst)
            if (max_dp.best_log[dst] > kNegInf) {
                has_reachable = true;
                break;
            }
        if (!has_reachable) continue;
        PathDp min_dp = path_extremum(dag, src, -1);
        for (std::size_t dst = src + 1; dst < w.node_count(); ++dst) {
            if (max_dp.best_log[dst] == kNegInf) continue;
            double hi = max_dp.best_log[dst];
            double lo = -min_dp.best_log[dst];
            if (hi - lo > log_tol) {
                PathWitness witness;
                witness.from = w.node_at(src);
                witness.to = w.node_at(dst);
                witness.path_a = unwind(w, max_dp, src, dst);
                witness.path_b = unwind(w, min_dp, src, dst);
                witness.product_a = path_product(dag, witness.path_a);
                witness.product_b = path_product(dag, witness.path_b);
                return MaxWeightedCheck{false, witness};
            }
        }
    }
    return MaxWeightedCheck{};
}

ZeroPatternOrder compare_zero_pattern(const CoefficientMatrix& a,
                                      const CoefficientMatrix& b) {
    if (!(a.window() == b.window()))
        throw std::invalid_argument(
            "zero-pattern comparison requires matrices over the same window");
    std::vector<Node> ta = a.targets(), tb = b.targets();
    if (ta.size() != tb.size())
        throw std::invalid_argument(
            "zero-pattern comparison requires equal target sets");
    for (std::size_t k = 0; k < ta.size(); ++k)
        if (ta[k] != tb[k])
            throw std::invalid_argument(
                "zero-pattern comparison requires equal target sets");

    bool a_in_b = true, b_in_a = true;
    for (Node t : ta) {
        NodeMask sa = a.support(t), sb = b.support(t);
        if (!sa.is_subset_of(sb)) a_in_b = false;
        if (!sb.is_subset_of(sa)) b_in_a = false;
    }
    if (a_in_b && b_in_a) return ZeroPatternOrder::Equal;
    if (a_in_b) return ZeroPatternOrder::StrictlyCoarser;
    if (b_in_a) return ZeroPatternOrder::StrictlyFiner;
    return ZeroPatternOrder::Incomparable;
}

}  // namespace maxperc
