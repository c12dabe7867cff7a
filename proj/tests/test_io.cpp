#include <doctest.h>

#include <cmath>
#include <sstream>

#include "maxperc/subdag_io.hpp"

using namespace maxperc;

namespace {

const char* kH2Json = R"({
  "window": {"min": [0, 0], "max": [1, 1]},
  "edges": [[[0, 1], "E"], [[1, 0], "N"]],
  "node_weights": [[[1, 0], 2.0], [[0, 1], 3.0], [[1, 1], 7.0]],
  "edge_weights": [[[[0, 1], "E"], 5.0], [[[1, 0], "N"], 11.0]]
})";

}  // namespace

TEST_CASE("weighted dag json parsing with weight defaults") {
    WeightedDag dag = parse_weighted_dag(kH2Json);
    CHECK(dag.window.lo() == Node{0, 0});
    CHECK(dag.window.hi() == Node{1, 1});
    CHECK(dag.edges.count() == 2);
    CHECK(dag.weight_of(Edge{Node{0, 1}, Dir::East}) == 5.0);
    CHECK(dag.weight_of(Edge{Node{1, 0}, Dir::North}) == 11.0);
    // Unlisted node weight defaults to 1.
    CHECK(dag.node_weight[dag.window.node_index(Node{0, 0})] == 1.0);
    CHECK(dag.node_weight[dag.window.node_index(Node{1, 1})] == 7.0);

    // Round trip through the emitter.
    WeightedDag again = parse_weighted_dag(weighted_dag_to_json(dag));
    CHECK(again.edges == dag.edges);
    CHECK(again.node_weight == dag.node_weight);
    CHECK(again.edge_weight == dag.edge_weight);
}

TEST_CASE("subdag json parsing defaults nodes to the full window") {
    SubDag h = parse_subdag(R"({
      "window": {"min": [-1, -1], "max": [1, 1]},
      "edges": [[[0, 0], "N"]]
    })");
    CHECK(h.nodes.count() == h.window.node_count());
    CHECK(h.edges.count() == 1);

    SubDag pair = parse_subdag(R"({
      "window": {"min": [0, 0], "max": [2, 2]},
      "nodes": [[0, 2], [2, 0]],
      "edges": []
    })");
    CHECK(pair.nodes.count() == 2);

    SubDag again = parse_subdag(subdag_to_json(pair));
    CHECK(again.nodes == pair.nodes);
    CHECK(again.edges == pair.edges);
}

TEST_CASE("json validation errors") {
    CHECK_THROWS_AS(parse_subdag(R"({"edges": []})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_subdag(R"({
      "window": {"min": [0, 0], "max": [1, 1]},
      "edges": [[[0, 0], "X"]]
    })"),
                    std::invalid_argument);
    // Edge leaving the declared node set.
    CHECK_THROWS_AS(parse_subdag(R"({
      "window": {"min": [0, 0], "max": [1, 1]},
      "nodes": [[0, 0]],
      "edges": [[[0, 0], "E"]]
    })"),
                    std::invalid_argument);
    // Weight on an absent edge.
    CHECK_THROWS_AS(parse_weighted_dag(R"({
      "window": {"min": [0, 0], "max": [1, 1]},
      "edges": [],
      "edge_weights": [[[[0, 0], "E"], 2.0]]
    })"),
                    std::invalid_argument);
    // Non-positive weight.
    CHECK_THROWS_AS(parse_weighted_dag(R"({
      "window": {"min": [0, 0], "max": [1, 1]},
      "edges": [[[0, 0], "E"]],
      "edge_weights": [[[[0, 0], "E"], -1.0]]
    })"),
                    std::invalid_argument);
    CHECK_THROWS_AS(load_subdag("/nonexistent/path.json"),
                    std::invalid_argument);
}

TEST_CASE("matrix csv triplets") {
    WeightedDag dag = parse_weighted_dag(kH2Json);
    CoefficientMatrix m = coefficient_matrix(
        dag, std::vector<Node>{Node{1, 0}, Node{0, 1}, Node{1, 1}});
    std::ostringstream os;
    write_matrix_csv(os, m);
    std::string csv = os.str();
    CHECK(csv.find("j1,j2,i1,i2,b\n") == 0);
    CHECK(csv.find("1,0,1,1,22") != std::string::npos);  // c11*c13
    CHECK(csv.find("0,1,1,1,15") != std::string::npos);  // c22*c23
    CHECK(csv.find("1,1,1,1,7") != std::string::npos);   // c33
}
