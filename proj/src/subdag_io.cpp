#include "maxperc/subdag_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace maxperc {

namespace {

using nlohmann::ordered_json;

ordered_json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open JSON file: " + path);
    ordered_json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw std::invalid_argument("malformed JSON in " + path + ": " +
                                    e.what());
    }
    return doc;
}

Node parse_node(const ordered_json& j) {
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument("node must be a [x, y] pair, got " +
                                    j.dump());
    return Node{j[0].get<int>(), j[1].get<int>()};
}

Edge parse_edge(const ordered_json& j) {
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument(
            "edge must be [[x, y], \"E\"|\"N\"], got " + j.dump());
    Node origin = parse_node(j[0]);
    std::string d = j[1].get<std::string>();
    if (d == "E") return Edge{origin, Dir::East};
    if (d == "N") return Edge{origin, Dir::North};
    throw std::invalid_argument("edge direction must be \"E\" or \"N\", got " +
                                d);
}

Window parse_window(const ordered_json& doc) {
    if (!doc.contains("window"))
        throw std::invalid_argument("JSON document lacks a \"window\" field");
    const auto& w = doc["window"];
    return Window(parse_node(w.at("min")), parse_node(w.at("max")));
}

ordered_json node_json(Node n) { return ordered_json::array({n.x, n.y}); }

ordered_json edge_json(Edge e) {
    return ordered_json::array(
        {node_json(e.origin), e.dir == Dir::East ? "E" : "N"});
}

// Shortest decimal that round-trips; deterministic across runs.
std::string format_weight(double w) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, w);
        if (std::strtod(buf, nullptr) == w) break;
    }
    return buf;
}

}  // namespace

SubDag parse_subdag(const std::string& json_text) {
    ordered_json doc = ordered_json::parse(json_text);
    Window window = parse_window(doc);
    SubDag h{window, NodeMask(window.node_count()),
             EdgeMask(window.edge_count())};
    if (doc.contains("nodes")) {
        for (const auto& jn : doc["nodes"])
            h.nodes.set(window.node_index(parse_node(jn)));
    } else {
        h.nodes = NodeMask(window.node_count(), true);
    }
    if (doc.contains("edges"))
        for (const auto& je : doc["edges"])
            h.edges.set(window.edge_index(parse_edge(je)));
    validate_subdag(h);
    return h;
}

SubDag load_subdag(const std::string& path) {
    return parse_subdag(read_json_file(path).dump());
}

WeightedDag parse_weighted_dag(const std::string& json_text) {
    ordered_json doc = ordered_json::parse(json_text);
    Window window = parse_window(doc);
    EdgeMask edges(window.edge_count());
    if (doc.contains("edges"))
        for (const auto& je : doc["edges"])
            edges.set(window.edge_index(parse_edge(je)));
    WeightedDag dag = WeightedDag::uniform(window, edges);
    if (doc.contains("node_weights")) {
        for (const auto& jw : doc["node_weights"]) {
            Node n = parse_node(jw.at(0));
            double w = jw.at(1).get<double>();
            if (!(w > 0.0))
                throw std::invalid_argument("node weight at " + to_string(n) +
                                            " must be positive");
            dag.node_weight[window.node_index(n)] = w;
        }
    }
    if (doc.contains("edge_weights")) {
        for (const auto& jw : doc["edge_weights"]) {
            Edge e = parse_edge(jw.at(0));
            std::size_t idx = window.edge_index(e);
            if (!edges.test(idx))
                throw std::invalid_argument("weight given for absent edge " +
                                            to_string(e));
            dag.set_edge(e, jw.at(1).get<double>());
        }
    }
    validate_weights(dag);
    return dag;
}

WeightedDag load_weighted_dag(const std::string& path) {
    return parse_weighted_dag(read_json_file(path).dump());
}

std::string subdag_to_json(const SubDag& h) {
    ordered_json doc;
    doc["window"] = {{"min", node_json(h.window.lo())},
                     {"max", node_json(h.window.hi())}};
    ordered_json nodes = ordered_json::array();
    h.nodes.for_each_set(
        [&](std::size_t ni) { nodes.push_back(node_json(h.window.node_at(ni))); });
    doc["nodes"] = std::move(nodes);
    ordered_json edges = ordered_json::array();
    h.edges.for_each_set(
        [&](std::size_t ei) { edges.push_back(edge_json(h.window.edge_at(ei))); });
    doc["edges"] = std::move(edges);
    return doc.dump(2);
}

std::string weighted_dag_to_json(const WeightedDag& dag) {
    ordered_json doc;
    doc["window"] = {{"min", node_json(dag.window.lo())},
                     {"max", node_json(dag.window.hi())}};
    ordered_json edges = ordered_json::array();
    ordered_json edge_weights = ordered_json::array();
    dag.edges.for_each_set([&](std::size_t ei) {
        Edge e = dag.window.edge_at(ei);
        edges.push_back(edge_json(e));
        edge_weights.push_back(
            ordered_json::array({edge_json(e), dag.edge_weight[ei]}));
    });
    doc["edges"] = std::move(edges);
    ordered_json node_weights = ordered_json::array();
    dag.window.for_each_node([&](Node n) {
        node_weights.push_back(ordered_json::array(
            {node_json(n), dag.node_weight[dag.window.node_index(n)]}));
    });
    doc["node_weights"] = std::move(node_weights);
    doc["edge_weights"] = std::move(edge_weights);
    return doc.dump(2);
}

void write_matrix_csv(std::ostream& os, const CoefficientMatrix& matrix) {
    os << "j1,j2,i1,i2,b\n";
    for (Node target : matrix.targets()) {
        for (const auto& entry : matrix.column(target)) {
            Node j = matrix.window().node_at(entry.source);
            os << j.x << ',' << j.y << ',' << target.x << ',' << target.y
               << ',' << format_weight(entry.b) << '\n';
        }
    }
}

}  // namespace maxperc
