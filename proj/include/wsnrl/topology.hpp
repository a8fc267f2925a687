#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "wsnrl/config.hpp"

namespace wsnrl {

// Node layout on the bridge deck plus the node -> random-field-cell mapping.
// Immutable after construction.
struct Topology {
    std::vector<std::array<double, 2>> positions;  // meters, node index order
    int gateway_index = 0;
    int grid_rows = 4;
    int grid_cols = 30;
    std::vector<int> field_cell;  // row-major cell index per node
    double span_length_m = 0.0;
    double deck_width_m = 0.0;

    int node_count() const { return static_cast<int>(positions.size()); }
    int leaf_count() const { return node_count() - 1; }

    double distance(int i, int j) const {
        double dx = positions[i][0] - positions[j][0];
        double dy = positions[i][1] - positions[j][1];
        return std::sqrt(dx * dx + dy * dy);
    }
    double gateway_distance(int i) const { return distance(i, gateway_index); }
    double max_leaf_gateway_distance() const;
};

// Parametric deck-line layout: gateway at deck center, leaves split across up
// to four lateral rows and spaced evenly along the span (endpoints included).
// Deterministic for fixed inputs. With strict_paper_sizes set, case_size must
// be one of 16/56/112.
Topology generate_topology(int case_size, double span_length_m, const TopologyConfig& cfg);

// Coordinate file: one "x,y" pair per line (meters), node index = line number.
Topology load_topology(const std::string& path, const TopologyConfig& cfg);

}  // namespace wsnrl
