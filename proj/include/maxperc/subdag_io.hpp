#pragma once

#include <iosfwd>
#include <string>

#include "maxperc/dependence.hpp"
#include "maxperc/maxlinear.hpp"

namespace maxperc {

// JSON document shape shared by sub-DAGs and weighted DAGs:
//
// {
//   "window": {"min": [x0, y0], "max": [x1, y1]},
//   "nodes": [[x, y], ...],                      // optional: all nodes
//   "edges": [[[x, y], "E"], ...],
//   "node_weights": [[[x, y], w], ...],          // optional: 1.0
//   "edge_weights": [[[[x, y], "E"], w], ...]    // optional: 1.0
// }

SubDag load_subdag(const std::string& path);
SubDag parse_subdag(const std::string& json_text);

WeightedDag load_weighted_dag(const std::string& path);
WeightedDag parse_weighted_dag(const std::string& json_text);

std::string subdag_to_json(const SubDag& h);
std::string weighted_dag_to_json(const WeightedDag& dag);

// CSV triplet export (j1,j2,i1,i2,b_ji), one row per support entry.
void write_matrix_csv(std::ostream& os, const CoefficientMatrix& matrix);

}  // namespace maxperc
