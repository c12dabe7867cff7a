#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "maxperc/maxlinear.hpp"
#include "maxperc/percolation.hpp"
#include "maxperc/rng.hpp"

using namespace maxperc;

namespace {

// Chain (0,0) -> (1,0) -> (2,0) with unit node weights and edge weights 2, 3.
WeightedDag chain_dag() {
    Window w(Node{0, 0}, Node{2, 0});
    WeightedDag dag = WeightedDag::uniform(w, EdgeMask(w.edge_count()));
    dag.set_edge(Edge{Node{0, 0}, Dir::East}, 2.0);
    dag.set_edge(Edge{Node{1, 0}, Dir::East}, 3.0);
    return dag;
}

// The three-node communication DAGs embedded in the lattice:
// node1 = (1,0), node2 = (0,1), node3 = (1,1); H1 has the single edge
// 2 -> 3, H2 adds 1 -> 3.
const Node kN1{1, 0}, kN2{0, 1}, kN3{1, 1};
constexpr double kC11 = 2.0, kC22 = 3.0, kC33 = 7.0, kC23 = 5.0, kC13 = 11.0;

WeightedDag h1_dag() {
    Window w(Node{0, 0}, Node{1, 1});
    WeightedDag dag = WeightedDag::uniform(w, EdgeMask(w.edge_count()));
    dag.node_weight[w.node_index(kN1)] = kC11;
    dag.node_weight[w.node_index(kN2)] = kC22;
    dag.node_weight[w.node_index(kN3)] = kC33;
    dag.set_edge(Edge{kN2, Dir::East}, kC23);
    return dag;
}

WeightedDag h2_dag() {
    WeightedDag dag = h1_dag();
    dag.set_edge(Edge{kN1, Dir::North}, kC13);
    return dag;
}

std::vector<Node> three_targets() { return {kN1, kN2, kN3}; }

WeightedDag random_dag(const Window& w, double p, std::uint64_t seed,
                       std::uint64_t trial) {
    BondConfiguration cfg = sample_configuration(w, p, seed, trial);
    WeightedDag dag = WeightedDag::uniform(w, cfg.open);
    CounterRng rng(seed ^ 0xabcd, RngStream::Noise, trial);
    for (std::size_t n = 0; n < w.node_count(); ++n)
        dag.node_weight[n] = 0.25 + 1.5 * rng.uniform(n);
    std::size_t offset = w.node_count();
    cfg.open.for_each_set([&](std::size_t e) {
        dag.edge_weight[e] = 0.25 + 1.5 * rng.uniform(offset + e);
    });
    return dag;
}

}  // namespace

TEST_CASE("coefficient matrix of the weighted chain") {
    WeightedDag dag = chain_dag();
    std::vector<Node> targets{Node{2, 0}};
    CoefficientMatrix m = coefficient_matrix(dag, targets);
    CHECK(m.b(Node{0, 0}, Node{2, 0}) == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(m.b(Node{1, 0}, Node{2, 0}) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(m.b(Node{2, 0}, Node{2, 0}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.column(Node{2, 0}).size() == 3);
    CHECK_THROWS_AS(m.column(Node{0, 0}), std::invalid_argument);
}

TEST_CASE("section-5 matrices have the displayed entries and order") {
    CoefficientMatrix b1 = coefficient_matrix(h1_dag(), three_targets());
    CoefficientMatrix b2 = coefficient_matrix(h2_dag(), three_targets());

    // B1 rows: (c11,0,0), (0,c22,c22*c23), (0,0,c33).
    CHECK(b1.b(kN1, kN1) == doctest::Approx(kC11).epsilon(1e-12));
    CHECK(b1.b(kN1, kN2) == 0.0);
    CHECK(b1.b(kN1, kN3) == 0.0);
    CHECK(b1.b(kN2, kN2) == doctest::Approx(kC22).epsilon(1e-12));
    CHECK(b1.b(kN2, kN3) == doctest::Approx(kC22 * kC23).epsilon(1e-12));
    CHECK(b1.b(kN3, kN3) == doctest::Approx(kC33).epsilon(1e-12));
    CHECK(b1.b(kN2, kN1) == 0.0);
    CHECK(b1.b(kN3, kN1) == 0.0);
    CHECK(b1.b(kN3, kN2) == 0.0);

    // B2 row 1 gains c11*c13.
    CHECK(b2.b(kN1, kN3) == doctest::Approx(kC11 * kC13).epsilon(1e-12));
    CHECK(b2.b(kN2, kN3) == doctest::Approx(kC22 * kC23).epsilon(1e-12));

    CHECK(compare_zero_pattern(b1, b2) == ZeroPatternOrder::StrictlyCoarser);
    CHECK(compare_zero_pattern(b2, b1) == ZeroPatternOrder::StrictlyFiner);
    CHECK(compare_zero_pattern(b1, b1) == ZeroPatternOrder::Equal);
}

TEST_CASE("incomparable zero patterns") {
    Window w(Node{0, 0}, Node{1, 1});
    WeightedDag a = WeightedDag::uniform(w, EdgeMask(w.edge_count()));
    a.set_edge(Edge{Node{0, 0}, Dir::East}, 1.0);  // support gains ((0,0),(1,0))
    WeightedDag b = WeightedDag::uniform(w, EdgeMask(w.edge_count()));
    b.set_edge(Edge{Node{0, 1}, Dir::East}, 1.0);  // support gains ((0,1),(1,1))
    std::vector<Node> targets{Node{0, 0}, Node{1, 0}, Node{0, 1}, Node{1, 1}};
    CoefficientMatrix ma = coefficient_matrix(a, targets);
    CoefficientMatrix mb = coefficient_matrix(b, targets);
    CHECK(compare_zero_pattern(ma, mb) == ZeroPatternOrder::Incomparable);

    WeightedDag narrow = WeightedDag::uniform(Window(Node{0, 0}, Node{1, 0}),
                                              EdgeMask(1));
    CoefficientMatrix mn = coefficient_matrix_all(narrow);
    CHECK_THROWS_AS(compare_zero_pattern(ma, mn), std::invalid_argument);
}

TEST_CASE("weight validation rejects non-positive weights") {
    WeightedDag dag = chain_dag();
    dag.node_weight[0] = 0.0;
    CHECK_THROWS_AS(validate_weights(dag), std::invalid_argument);
    dag.node_weight[0] = 1.0;
    dag.edge_weight[dag.window.edge_index(Edge{Node{0, 0}, Dir::East})] = -2.0;
    CHECK_THROWS_AS(validate_weights(dag), std::invalid_argument);
    CHECK_THROWS_AS(dag.set_edge(Edge{Node{0, 0}, Dir::East}, 0.0),
                    std::invalid_argument);
}

TEST_CASE("realization replays the chain recursion") {
    WeightedDag dag = chain_dag();
    std::vector<double> z{1.0, 1.0, 1.0};
    Realization r = realize_with_noise(dag, z);
    CHECK(r.value[0] == 1.0);
    CHECK(r.value[1] == 2.0);
    CHECK(r.value[2] == 6.0);
    CHECK(r.argmax_source[0] == 0);
    CHECK(r.argmax_source[1] == 0);
    CHECK(r.argmax_source[2] == 0);

    // Single node: X = Z.
    Window w1(Node{0, 0}, Node{0, 0});
    WeightedDag single = WeightedDag::uniform(w1, EdgeMask(0));
    Realization rs = realize(single, NoiseSpec{1.0}, 5);
    CHECK(rs.value[0] == rs.noise[0]);
}

TEST_CASE("stored noise replays the realization exactly") {
    Window w(Node{0, 0}, Node{3, 3});
    WeightedDag dag = random_dag(w, 0.5, 5150, 3);
    Realization r = realize(dag, NoiseSpec{2.5}, 42, 17);
    Realization replay = realize_with_noise(dag, r.noise);
    CHECK(replay.value == r.value);
    CHECK(replay.argmax_source == r.argmax_source);

    NoiseSpec bad;
    bad.alpha = -1.0;
    CHECK_THROWS_AS(realize(dag, bad, 1), std::invalid_argument);
}

TEST_CASE("structural recursion agrees with the matrix route") {
    Window w(Node{0, 0}, Node{4, 4});
    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        WeightedDag dag = random_dag(w, 0.55, 2025, trial);
        CoefficientMatrix m = coefficient_matrix_all(dag);
        Realization r = realize(dag, NoiseSpec{1.3}, 9, trial);
        MatrixRealization mr = realize_from_matrix(m, r.noise);
        REQUIRE(mr.value.size() == r.value.size());
        for (std::size_t k = 0; k < r.value.size(); ++k) {
            CHECK(r.value[k] ==
                  doctest::Approx(mr.value[k]).epsilon(1e-12));
        }
    }
}

TEST_CASE("support of each column is exactly the closed ancestor set") {
    Window w(Node{0, 0}, Node{4, 4});
    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        WeightedDag dag = random_dag(w, 0.4, 77, trial);
        CoefficientMatrix m = coefficient_matrix_all(dag);
        for (std::size_t idx = 0; idx < w.node_count(); ++idx) {
            Node i = w.node_at(idx);
            NodeMask an = ancestor_mask(w, i, dag.edges, /*include_self=*/true);
            CHECK(m.support(i) == an);
        }
    }
}

TEST_CASE("coefficients ignore edges outside the ancestor cone") {
    Window w(Node{0, 0}, Node{3, 3});
    WeightedDag dag = random_dag(w, 0.5, 4242, 0);
    Node i{1, 1};
    std::vector<Node> targets{i};
    auto before = coefficient_matrix(dag, targets).column(i);

    WeightedDag grown = dag;
    // Add every edge whose head lies outside the cone rectangle of (1,1).
    w.for_each_edge([&](Edge e) {
        Node t = e.target();
        if ((t.x > i.x || t.y > i.y) &&
            !grown.edges.test(w.edge_index(e)))
            grown.set_edge(e, 1.7);
    });
    auto after = coefficient_matrix(grown, targets).column(i);
    REQUIRE(before.size() == after.size());
    for (std::size_t k = 0; k < before.size(); ++k) {
        CHECK(before[k].source == after[k].source);
        CHECK(before[k].b == after[k].b);
    }
}

TEST_CASE("joint cdf closed forms") {
    Window w1(Node{0, 0}, Node{0, 0});
    WeightedDag single = WeightedDag::uniform(w1, EdgeMask(0));
    CoefficientMatrix m1 = coefficient_matrix_all(single);
    std::vector<Node> t1{Node{0, 0}};
    std::vector<double> x1{1.0};
    CHECK(joint_cdf(m1, t1, x1, 1.0) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    std::vector<double> bad{-1.0};
    CHECK_THROWS_AS(joint_cdf(m1, t1, bad, 1.0), std::invalid_argument);

    // Two isolated nodes: disjoint ancestor sets factorize the CDF.
    Window w(Node{0, 0}, Node{1, 0});
    WeightedDag pairdag = WeightedDag::uniform(w, EdgeMask(w.edge_count()));
    pairdag.node_weight[0] = 2.0;
    pairdag.node_weight[1] = 0.5;
    CoefficientMatrix mp = coefficient_matrix_all(pairdag);
    std::vector<Node> tp{Node{0, 0}, Node{1, 0}};
    std::vector<double> xp{1.5, 0.7};
    double joint = joint_cdf(mp, tp, xp, 2.0);
    double lhs = joint_cdf(mp, std::vector<Node>{Node{0, 0}},
                           std::vector<double>{1.5}, 2.0);
    double rhs = joint_cdf(mp, std::vector<Node>{Node{1, 0}},
                           std::vector<double>{0.7}, 2.0);
    CHECK(joint == doctest::Approx(lhs * rhs).epsilon(1e-13));
}

TEST_CASE("joint cdf is permutation invariant and marginalizes") {
    Window w(Node{0, 0}, Node{2, 2});
    WeightedDag dag = random_dag(w, 0.6, 99, 1);
    CoefficientMatrix m = coefficient_matrix_all(dag);
    std::vector<Node> targets{Node{0, 0}, Node{2, 1}, Node{1, 2}};
    std::vector<double> x{0.9, 2.1, 1.3};
    double base = joint_cdf(m, targets, x, 1.7);

    std::vector<Node> perm{Node{1, 2}, Node{0, 0}, Node{2, 1}};
    std::vector<double> xperm{1.3, 0.9, 2.1};
    CHECK(joint_cdf(m, perm, xperm, 1.7) ==
          doctest::Approx(base).epsilon(1e-14));

    // Sending the last argument to +infinity integrates the margin out.
    std::vector<Node> two{Node{0, 0}, Node{2, 1}};
    std::vector<double> xtwo{0.9, 2.1};
    std::vector<double> xbig{0.9, 2.1, 1e12};
    CHECK(joint_cdf(m, targets, xbig, 1.7) ==
          doctest::Approx(joint_cdf(m, two, xtwo, 1.7)).epsilon(1e-9));
}

TEST_CASE("scale parameter closed forms and window growth") {
    WeightedDag dag = chain_dag();
    CoefficientMatrix m = coefficient_matrix_all(dag);
    CHECK(scale_parameter(m, Node{2, 0}, 1.0) ==
          doctest::Approx(10.0).epsilon(1e-12));
    CHECK(scale_parameter(m, Node{0, 0}, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-12));

    double prev = 0.0;
    for (int side = 2; side <= 5; ++side) {
        Window w(Node{0, 0}, Node{side - 1, side - 1});
        WeightedDag full = WeightedDag::full(w);
        CoefficientMatrix mf = coefficient_matrix(
            full, std::vector<Node>{Node{1, 1}});
        double s = scale_parameter(mf, Node{1, 1}, 2.0);
        CHECK(s >= prev);
        prev = s;
    }
}

TEST_CASE("marginals follow the frechet law with the computed scale") {
    Window w(Node{0, 0}, Node{2, 2});
    WeightedDag dag = WeightedDag::full(w);
    CoefficientMatrix m = coefficient_matrix_all(dag);
    Node target{2, 2};
    double alpha = 2.0;
    double scale = scale_parameter(m, target, alpha);
    const long reps = 20000;
    std::vector<double> sample;
    sample.reserve(reps);
    std::size_t ti = w.node_index(target);
    for (long rep = 0; rep < reps; ++rep) {
        Realization r = realize(dag, NoiseSpec{alpha}, 4321, rep);
        sample.push_back(r.value[ti]);
    }
    std::sort(sample.begin(), sample.end());
    double ks = 0.0;
    for (long k = 0; k < reps; ++k) {
        double f = frechet_cdf(sample[k], alpha, scale);
        ks = std::max(ks, std::abs(f - static_cast<double>(k + 1) / reps));
        ks = std::max(ks, std::abs(f - static_cast<double>(k) / reps));
    }
    // 1% critical value of the Kolmogorov statistic.
    CHECK(ks < 1.6276 / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("shared noise atoms appear iff ancestor sets intersect") {
    // Two disjoint chains: (0,0)->(1,0) and (2,0)->(3,0).
    Window w(Node{0, 0}, Node{3, 0});
    WeightedDag dag = WeightedDag::uniform(w, EdgeMask(w.edge_count()));
    dag.set_edge(Edge{Node{0, 0}, Dir::East}, 1.4);
    dag.set_edge(Edge{Node{2, 0}, Dir::East}, 0.8);
    std::size_t a = w.node_index(Node{1, 0});
    std::size_t b = w.node_index(Node{3, 0});
    long disjoint_shared = 0;
    for (long rep = 0; rep < 2000; ++rep) {
        Realization r = realize(dag, NoiseSpec{1.0}, 10, rep);
        if (r.argmax_source[a] == r.argmax_source[b]) ++disjoint_shared;
    }
    CHECK(disjoint_shared == 0);

    // Sharing pair: children of a common parent.
    Window w2(Node{0, 0}, Node{1, 1});
    WeightedDag dag2 = WeightedDag::full(w2);
    std::size_t c = w2.node_index(Node{1, 0});
    std::size_t d = w2.node_index(Node{0, 1});
    long shared = 0;
    for (long rep = 0; rep < 2000; ++rep) {
        Realization r = realize(dag2, NoiseSpec{1.0}, 11, rep);
        if (r.argmax_source[c] == r.argmax_source[d]) ++shared;
    }
    CHECK(shared > 0);
}

TEST_CASE("max-weighted extension equalizes both root paths") {
    // V1 with d((0,0),(1,0)) = 2 and d((0,0),(0,1)) = 5; the free weight 3
    // sits on the north in-edge and the east in-edge is forced to 3*2/5.
    Window w(Node{0, 0}, Node{3, 3});
    WeightedDag dag = WeightedDag::uniform(w, EdgeMask(w.edge_count()));
    dag.set_edge(Edge{Node{0, 0}, Dir::East}, 2.0);
    dag.set_edge(Edge{Node{0, 0}, Dir::North}, 5.0);
    WeightedDag ext = extend_max_weighted(dag, Node{1, 1}, 3.0);
    double east_in = ext.weight_of(Edge{Node{0, 1}, Dir::East});
    CHECK(east_in == doctest::Approx(1.2).epsilon(1e-12));
    double product_west = 5.0 * east_in;
    double product_south = 2.0 * ext.weight_of(Edge{Node{1, 0}, Dir::North});
    CHECK(product_west == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(product_west == doctest::Approx(product_south).epsilon(1e-12));
    CHECK(is_max_weighted(ext).ok);

    // All-ones: the symmetric case forces horizontal weight 1.
    WeightedDag ones = WeightedDag::uniform(w, EdgeMask(w.edge_count()));
    ones.set_edge(Edge{Node{0, 0}, Dir::East}, 1.0);
    ones.set_edge(Edge{Node{0, 0}, Dir::North}, 1.0);
    WeightedDag ones_ext = extend_max_weighted(ones, Node{1, 1}, 1.0);
    CHECK(ones_ext.weight_of(Edge{Node{0, 1}, Dir::East}) ==
          doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(extend_max_weighted(dag, Node{3, 3}, 1.0),
                    std::invalid_argument);  // parents unreachable
    CHECK_THROWS_AS(extend_max_weighted(dag, Node{0, 0}, 1.0),
                    std::invalid_argument);
}

TEST_CASE("repeated diagonal extension stays max-weighted") {
    const int n_max = 6;
    Window w(Node{0, 0}, Node{n_max, n_max});
    WeightedDag dag = WeightedDag::uniform(w, EdgeMask(w.edge_count()));
    CounterRng rng(2026, RngStream::Noise, 0);
    std::uint64_t draw = 0;
    dag.set_edge(Edge{Node{0, 0}, Dir::East}, 0.5 + rng.uniform(draw++));
    dag.set_edge(Edge{Node{0, 0}, Dir::North}, 0.5 + rng.uniform(draw++));
    for (int diag = 2; diag <= n_max; ++diag) {
        for (int x = 0; x <= diag; ++x) {
            Node node{x, diag - x};
            if (!w.contains(node)) continue;
            dag = extend_max_weighted(dag, node, 0.5 + rng.uniform(draw++));
            auto check = is_max_weighted(dag);
            CHECK(check.ok);
        }
    }

    // A 1% nudge on a produced horizontal weight breaks the property and
    // yields a concrete witness.
    Edge probe{Node{1, 2}, Dir::East};
    WeightedDag broken = dag;
    broken.set_edge(probe, broken.weight_of(probe) * 1.01);
    auto check = is_max_weighted(broken);
    REQUIRE_FALSE(check.ok);
    REQUIRE(check.witness.has_value());
    const PathWitness& wit = *check.witness;
    CHECK(wit.path_a.front() == wit.from);
    CHECK(wit.path_a.back() == wit.to);
    CHECK(wit.path_b.front() == wit.from);
    CHECK(wit.path_b.back() == wit.to);
    CHECK(std::abs(std::log(wit.product_a) - std::log(wit.product_b)) > 1e-9);
}

TEST_CASE("is_max_weighted spots the classic diamond and passes all-ones") {
    Window w(Node{0, 0}, Node{1, 1});
    WeightedDag ones = WeightedDag::full(w);
    CHECK(is_max_weighted(ones).ok);

    WeightedDag diamond = WeightedDag::full(w);
    diamond.set_edge(Edge{Node{0, 0}, Dir::East}, 2.0);
    diamond.set_edge(Edge{Node{1, 0}, Dir::North}, 3.0);  // product 6
    diamond.set_edge(Edge{Node{0, 0}, Dir::North}, 1.0);
    diamond.set_edge(Edge{Node{0, 1}, Dir::East}, 5.0);  // product 5
    auto check = is_max_weighted(diamond);
    REQUIRE_FALSE(check.ok);
    REQUIRE(check.witness.has_value());
    CHECK(check.witness->from == Node{0, 0});
    CHECK(check.witness->to == Node{1, 1});
    double hi = std::max(check.witness->product_a, check.witness->product_b);
    double lo = std::min(check.witness->product_a, check.witness->product_b);
    CHECK(hi == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(lo == doctest::Approx(5.0).epsilon(1e-12));
}
