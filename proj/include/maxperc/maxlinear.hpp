#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "maxperc/lattice.hpp"

namespace maxperc {

// A lattice sub-DAG with positive node weights c_ii and positive weights
// c_ki on exactly the present edges (weight 0 marks an absent edge).
struct WeightedDag {
    Window window;
    EdgeMask edges;
    std::vector<double> node_weight;  // per node index, > 0
    std::vector<double> edge_weight;  // per edge index, > 0 iff edge present

    // All weights 1 on the given edge set.
    static WeightedDag uniform(const Window& window, const EdgeMask& edges);
    // Full lattice window with unit weights.
    static WeightedDag full(const Window& window);

    double weight_of(Edge e) const { return edge_weight[window.edge_index(e)]; }
    void set_edge(Edge e, double weight);
};

// Throws unless node weights are positive everywhere and edge weights are
// positive on exactly the present edges.
void validate_weights(const WeightedDag& dag);

// Max-linear coefficients b_ji for j in An(i). The max-product path
// analysis ranks paths as max-plus in log domain; the stored value is the
// linear-domain product along the winning path.
class CoefficientMatrix {
public:
    struct Entry {
        std::size_t source;  // node index of j
        double b;            // > 0
    };

    explicit CoefficientMatrix(const Window& window) : window_(window) {}

    const Window& window() const { return window_; }

    bool has_target(Node i) const {
        return columns_.count(window_.node_index(i)) > 0;
    }
    const std::vector<Entry>& column(Node i) const;

    // b_ji; 0 when j is not an ancestor of i.
    double b(Node j, Node i) const;
    // Closed support {j : b_ji > 0} = An(i).
    NodeMask support(Node i) const;
    std::vector<Node> targets() const;

    void set_column(std::size_t target_idx, std::vector<Entry> entries) {
        columns_[target_idx] = std::move(entries);
    }

private:
    Window window_;
    std::map<std::size_t, std::vector<Entry>> columns_;
};

// b_ji = max over directed paths from j to i of c_jj * prod of edge
// weights; b_ii = c_ii. Dynamic programming in topological order.
CoefficientMatrix coefficient_matrix(const WeightedDag& dag,
                                     std::span<const Node> targets);
CoefficientMatrix coefficient_matrix_all(const WeightedDag& dag);

enum class NoiseKind : std::uint8_t {
    StandardFrechet,
    // Reserved for noise in the Frechet max-domain of attraction.
};

struct NoiseSpec {
    double alpha = 1.0;  // Frechet shape, finite and positive
    NoiseKind kind = NoiseKind::StandardFrechet;
};

// One draw of the process: values, the noise that generated them, and the
// noise index that attained each maximum (ties go to the smallest node in
// (x,y)-lexicographic order).
struct Realization {
    std::vector<double> value;
    std::vector<double> noise;
    std::vector<std::size_t> argmax_source;
    double alpha = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t rep = 0;
};

// Structural recursion X_i = (max over open parents c_ki X_k) v c_ii Z_i
// with i.i.d. standard alpha-Frechet noise by inverse transform.
Realization realize(const WeightedDag& dag, const NoiseSpec& noise,
                    std::uint64_t seed, std::uint64_t rep = 0);
Realization realize_with_noise(const WeightedDag& dag,
                               std::span<const double> noise);

struct MatrixRealization {
    std::vector<double> value;
    std::vector<std::size_t> argmax_source;
};

// The same field evaluated as X_i = max over j of b_ji Z_j; must agree
// with the structural recursion within floating-point tolerance.
MatrixRealization realize_from_matrix(const CoefficientMatrix& coeff,
                                      std::span<const double> noise);

// Joint CDF at (x_1, ..., x_d) for the listed targets:
// exp(-sum over j in union of An(i^k) of max_k (b_{j,i^k}/x_k)^alpha).
double joint_cdf(const CoefficientMatrix& coeff, std::span<const Node> targets,
                 std::span<const double> x, double alpha);

// (sum over j of b_ji^alpha)^(1/alpha).
double scale_parameter(const CoefficientMatrix& coeff, Node i, double alpha);

// Adds new_node with its parent edges to a max-weighted DAG on the
// quadrant anchored at (0,0). When both parents are present the free
// weight c_vertical fixes the north in-edge and the east in-edge weight is
// set so that every root path carries the same product; a single-parent
// boundary node takes c_vertical as its only (unconstrained) weight.
WeightedDag extend_max_weighted(const WeightedDag& dag, Node new_node,
                                double c_vertical);

struct PathWitness {
    Node from, to;
    std::vector<Node> path_a, path_b;  // node sequences from `from` to `to`
    double product_a = 0.0, product_b = 0.0;
};

struct MaxWeightedCheck {
    bool ok = true;
    std::optional<PathWitness> witness;
};

// True iff all directed path products agree for every ordered pair
// (ancestor, node), within `log_tol` in log domain; otherwise returns a
// witness pair of differing paths.
MaxWeightedCheck is_max_weighted(const WeightedDag& dag,
                                 double log_tol = 1e-9);

enum class ZeroPatternOrder {
    Equal,
    StrictlyCoarser,  // support(A) strictly inside support(B): A precedes B
    StrictlyFiner,    // support(B) strictly inside support(A)
    Incomparable,
};

// Support-set comparison of two coefficient matrices over the same window
// and target set.
ZeroPatternOrder compare_zero_pattern(const CoefficientMatrix& a,
                                      const CoefficientMatrix& b);

}  // namespace maxperc
