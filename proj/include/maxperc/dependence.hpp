#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "maxperc/estimate.hpp"
#include "maxperc/lattice.hpp"
#include "maxperc/percolation.hpp"

namespace maxperc {

// A sub-DAG H of the oriented lattice: explicit node set plus edges that
// must join nodes of H.
struct SubDag {
    Window window;
    NodeMask nodes;
    EdgeMask edges;
};

// Throws when an edge of H fails to join nodes of H.
void validate_subdag(const SubDag& h);

// H embedded into a larger window (same nodes and edges, re-indexed).
SubDag embed_subdag(const SubDag& h, const Window& window);

// H = ({i, j}, {}) - the disconnected two-node sub-DAG.
SubDag pair_subdag(const Window& window, Node i, Node j);
// All window nodes, all North edges: every component is a column.
SubDag north_columns_subdag(const Window& window);
// All window nodes and all edges except those incident to the forbidden
// half-columns {(k1-1, y), (k1+1, y) : y <= i2}.
SubDag wall_subdag(const Window& window, int k1, int i2);

struct DependenceQuery {
    Node i;
    Node j;
    Window window;
    double p = 0.5;
    long trials = 10000;
    std::uint64_t seed = 0;
    std::optional<EdgeMask> forced_open;  // encodes E(H) under P_p^H
};

// An(i) n An(j) under the open-edge predicate of cfg.
NodeMask common_ancestors_mask(const BondConfiguration& cfg, Node i, Node j);
std::vector<Node> common_ancestors(const BondConfiguration& cfg, Node i,
                                   Node j);

// X_i and X_j are dependent iff the closed ancestor sets intersect.
bool are_dependent(const BondConfiguration& cfg, Node i, Node j);

// The pair has common ancestors or common descendants.
bool sigma_event(const BondConfiguration& cfg, Node i, Node j);

McEstimate estimate_dependence_probability(const DependenceQuery& q,
                                           int threads = 1);

struct SigmaBoundReport {
    McEstimate ancestor_prob;  // lhs: P(An(i) n An(j) != {})
    McEstimate sigma_prob;
    double rhs = 0.0;  // 1 - sqrt(1 - P(Sigma))
    double margin = 0.0;
    double stderr_combined = 0.0;
    bool pass = false;
};

// Estimates both sides of the lower bound with shared trials and reports
// lhs - rhs; PASS when lhs >= rhs - 4 * combined stderr.
SigmaBoundReport check_sigma_bound(Node i, Node j, double p,
                                   const Window& window, long trials,
                                   std::uint64_t seed, int threads = 1);

// Symmetric placement of a pair at graph distance d, centered at the
// origin; axis-aligned by default, split across both coordinates when
// diagonal is requested.
std::pair<Node, Node> place_pair(int distance, bool diagonal = false);

// Smallest distance from n to the window boundary.
int boundary_margin(const Window& w, Node n);

struct SweepRow {
    double p = 0.0;
    int distance = 0;
    Node i, j;
    int window_side = 0;
    int margin = 0;
    McEstimate estimate;
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

// Dependence probability over a (p, distance) grid. Pairs must keep a
// boundary margin of at least their distance; edge variates are shared
// across the p grid (coupled sweep).
SweepResult phase_sweep(const std::vector<double>& p_grid,
                        const std::vector<int>& distance_grid,
                        const Window& window, long trials, std::uint64_t seed,
                        bool diagonal = false, int threads = 1);

enum class InverseCountConvention { ExcludeEmpty, Zero };

struct BoxStatsRow {
    int n = 0;  // box B(n)
    long pairs = 0;
    long contributing_trials = 0;
    double value = 0.0;  // NaN when no pair ever contributes
    double stderr_ = 0.0;
    double empty_fraction = 0.0;  // share of (pair, trial) with A = 0
};

struct BoxStatsReport {
    int distance = 0;
    double p = 0.0;
    InverseCountConvention convention = InverseCountConvention::ExcludeEmpty;
    std::uint64_t seed = 0;
    std::vector<BoxStatsRow> rows;
};

// Box averages of 1/|An(k) n An(l) n B(n)| over pairs at the given
// distance, per box size n. Reported for convergence inspection only.
BoxStatsReport common_ancestor_box_stats(int distance, double p,
                                         const std::vector<int>& n_grid,
                                         long trials, std::uint64_t seed,
                                         InverseCountConvention convention,
                                         int threads = 1);

// The deterministic restriction step of the enlargement: keep exactly
// E(H) plus the open edges of the clusters of H's nodes.
BondConfiguration restrict_to_enlargement(const SubDag& h,
                                          const BondConfiguration& cfg);

// U(H) as a sub-DAG: node set = union of the clusters of H's nodes,
// edge set as in restrict_to_enlargement.
SubDag enlargement_subdag(const SubDag& h, const BondConfiguration& cfg);

// U(H): sample under P_p^H (H's edges forced open), then restrict.
BondConfiguration enlarge(const SubDag& h, double p, std::uint64_t seed,
                          std::uint64_t trial = 0);

// P_p(U(H) has dependent X_i, X_j) = P_p^H(An(i) n An(j) != {}).
McEstimate estimate_enlargement_probability(const SubDag& h, Node i, Node j,
                                            double p, long trials,
                                            std::uint64_t seed,
                                            int threads = 1);

struct EnlargementRow {
    double p = 0.0;
    int window_side = 0;
    McEstimate estimate;
};

struct EnlargementReport {
    std::vector<EnlargementRow> rows;
    // Smallest grid p whose estimate clears noise (proxy for p_{c,1});
    // NaN when none does.
    double p_c1_proxy = 0.0;
    // Smallest grid p indistinguishable from 1 at every window with a
    // nondecreasing window trend (proxy for p_{c,2}); NaN when none.
    double p_c2_proxy = 0.0;
    std::string caveat;
};

using SubDagBuilder = std::function<SubDag(const Window&)>;

EnlargementReport estimate_enlargement_criticals(
    const SubDagBuilder& h_builder, Node i, Node j,
    const std::vector<double>& p_grid, const std::vector<int>& window_sides,
    long trials, std::uint64_t seed, int threads = 1);

}  // namespace maxperc
