#include "wsnrl/topology.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "wsnrl/errors.hpp"

namespace wsnrl {
namespace {

int clamp_cell(double frac, int cells) {
    int c = static_cast<int>(frac * cells);
    return std::clamp(c, 0, cells - 1);
}

// Nearest cell by position; if node_count fits the grid, collisions move the
// later node to the nearest free cell (ties broken row-major) so every node
// owns its own patch of the random field.
std::vector<int> assign_field_cells(const std::vector<std::array<double, 2>>& positions,
                                    double span, double width, int rows, int cols) {
    const int n = static_cast<int>(positions.size());
    const bool want_distinct = n <= rows * cols;
    std::vector<int> cell(n, -1);
    std::vector<char> taken(static_cast<std::size_t>(rows) * cols, 0);
    for (int i = 0; i < n; ++i) {
        int c0 = clamp_cell(positions[i][0] / span, cols);
        int r0 = clamp_cell(positions[i][1] / width, rows);
        int idx = r0 * cols + c0;
        if (want_distinct && taken[idx]) {
            double best = std::numeric_limits<double>::max();
            int best_idx = -1;
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cols; ++c) {
                    int candidate = r * cols + c;
                    if (taken[candidate]) continue;
                    double cx = (c + 0.5) * span / cols;
                    double cy = (r + 0.5) * width / rows;
                    double dx = cx - positions[i][0];
                    double dy = cy - positions[i][1];
                    double d2 = dx * dx + dy * dy;
                    if (d2 < best) {
                        best = d2;
                        best_idx = candidate;
                    }
                }
            }
            idx = best_idx;
        }
        cell[i] = idx;
        if (want_distinct) taken[idx] = 1;
    }
    return cell;
}

}  // namespace

double Topology::max_leaf_gateway_distance() const {
    double best = 0.0;
    for (int i = 0; i < node_count(); ++i) {
        if (i == gateway_index) continue;
        best = std::max(best, gateway_distance(i));
    }
    return best;
}

Topology generate_topology(int case_size, double span_length_m, const TopologyConfig& cfg) {
    if (cfg.strict_paper_sizes && case_size != 16 && case_size != 56 && case_size != 112)
        throw ConfigError("strict paper mode allows case sizes 16/56/112, got " +
                          std::to_string(case_size));
    if (case_size < 2) throw ConfigError("topology needs at least 2 nodes");
    if (span_length_m <= 0.0) throw ConfigError("span_length_m must be positive");

    const double width = cfg.deck_width_m;
    Topology topo;
    topo.grid_rows = cfg.grid_rows;
    topo.grid_cols = cfg.grid_cols;
    topo.span_length_m = span_length_m;
    topo.deck_width_m = width;
    topo.gateway_index = 0;
    topo.positions.push_back({span_length_m / 2.0, width / 2.0});

    const int leaves = case_size - 1;
    const int rows = std::min(4, leaves);
    for (int r = 0; r < rows; ++r) {
        int count = leaves / rows + (r < leaves % rows ? 1 : 0);
        double y = width * (r + 0.5) / rows;
        for (int j = 0; j < count; ++j) {
            double x = count == 1 ? 0.0 : span_length_m * j / (count - 1);
            topo.positions.push_back({x, y});
        }
    }
    topo.field_cell = assign_field_cells(topo.positions, span_length_m, width,
                                         topo.grid_rows, topo.grid_cols);
    return topo;
}

Topology load_topology(const std::string& path, const TopologyConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open coordinate file: " + path);
    Topology topo;
    topo.grid_rows = cfg.grid_rows;
    topo.grid_cols = cfg.grid_cols;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        double x, y;
        char comma;
        if (!(ss >> x >> comma >> y) || comma != ',')
            throw DataError("coordinate file " + path + ": malformed line " +
                            std::to_string(line_no));
        topo.positions.push_back({x, y});
    }
    if (topo.positions.size() < 2)
        throw DataError("coordinate file " + path + " needs at least 2 nodes");
    if (cfg.gateway_index < 0 || cfg.gateway_index >= topo.node_count())
        throw ConfigError("gateway_index out of node range");
    topo.gateway_index = cfg.gateway_index;

    // grid spans the coordinate bounding box
    double max_x = 0.0, max_y = 0.0;
    for (const auto& p : topo.positions) {
        max_x = std::max(max_x, p[0]);
        max_y = std::max(max_y, p[1]);
    }
    topo.span_length_m = max_x > 0.0 ? max_x : 1.0;
    topo.deck_width_m = max_y > 0.0 ? max_y : 1.0;
    topo.field_cell = assign_field_cells(topo.positions, topo.span_length_m, topo.deck_width_m,
                                         topo.grid_rows, topo.grid_cols);
    return topo;
}

}  // namespace wsnrl
