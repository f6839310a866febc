#include "pinv/grid.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "pinv/error.hpp"

namespace pinv {

std::shared_ptr<const SpaceTimeGrid> SpaceTimeGrid::build(const GridConfig& config) {
    if (config.dim != 1 && config.dim != 2) {
        throw InvalidArgument(fmt::format("grid dimension must be 1 or 2, got {}", config.dim));
    }
    const auto d = static_cast<std::size_t>(config.dim);
    if (config.extents.size() != d || config.nx.size() != d) {
        throw InvalidArgument("grid extents/nx must have one entry per axis");
    }
    for (std::size_t a = 0; a < d; ++a) {
        if (!(config.extents[a] > 0.0) || !std::isfinite(config.extents[a])) {
            throw InvalidArgument(fmt::format("extent on axis {} must be positive", a));
        }
        if (config.nx[a] < 3) {
            throw InvalidArgument(fmt::format("nx on axis {} must be >= 3, got {}", a, config.nx[a]));
        }
    }
    if (config.nt < 2) throw InvalidArgument(fmt::format("nt must be >= 2, got {}", config.nt));
    if (!(config.T > 0.0) || !std::isfinite(config.T)) throw InvalidArgument("T must be positive");

    std::shared_ptr<SpaceTimeGrid> g(new SpaceTimeGrid());
    g->dim_ = config.dim;
    g->extents_ = config.extents;
    g->nx_ = config.nx;
    for (std::size_t a = 0; a < d; ++a) g->h_.push_back(config.extents[a] / (config.nx[a] + 1));
    g->nt_ = config.nt;
    g->T_ = config.T;
    g->dt_ = config.T / config.nt;

    const int px = config.nx[0] + 2;
    const int py = d == 2 ? config.nx[1] + 2 : 1;
    g->coords_.resize(static_cast<std::size_t>(px) * py);
    g->interior_index_.assign(g->coords_.size(), -1);
    for (int j = 0; j < py; ++j) {
        for (int i = 0; i < px; ++i) {
            const std::size_t id = g->node_id(i, j);
            g->coords_[id] = {i * g->h_[0], d == 2 ? j * g->h_[1] : 0.0};
            const bool edge_x = (i == 0 || i == px - 1);
            const bool edge_y = d == 2 && (j == 0 || j == py - 1);
            if (!edge_x && !edge_y) {
                g->interior_index_[id] = static_cast<long>(g->interior_.size());
                g->interior_.push_back(id);
            } else if (edge_x && edge_y) {
                g->corners_.push_back(id);
            }
        }
    }
    // Boundary ordering: low/high face of axis 0, then low/high face of axis 1.
    if (d == 1) {
        g->boundary_.push_back({g->node_id(0), 0, -1});
        g->boundary_.push_back({g->node_id(px - 1), 0, +1});
    } else {
        for (int j = 1; j < py - 1; ++j) g->boundary_.push_back({g->node_id(0, j), 0, -1});
        for (int j = 1; j < py - 1; ++j) g->boundary_.push_back({g->node_id(px - 1, j), 0, +1});
        for (int i = 1; i < px - 1; ++i) g->boundary_.push_back({g->node_id(i, 0), 1, -1});
        for (int i = 1; i < px - 1; ++i) g->boundary_.push_back({g->node_id(i, py - 1), 1, +1});
    }
    return g;
}

int SpaceTimeGrid::level_at_or_before(double t) const {
    const int level = static_cast<int>(std::floor(t / dt_ + 1e-9));
    return level < 0 ? 0 : (level > nt_ ? nt_ : level);
}

std::size_t SpaceTimeGrid::node_id(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_[0] + 2) + static_cast<std::size_t>(i);
}

double SpaceTimeGrid::boundary_weight(std::size_t boundary_index) const {
    if (dim_ == 1) return 1.0;
    // An edge normal to axis a runs along the other axis.
    return h_[1 - boundary_[boundary_index].axis];
}

std::vector<double> SpaceTimeGrid::laplacian(std::span<const double> values) const {
    if (values.size() != node_count()) {
        throw InvalidArgument(fmt::format("laplacian: expected {} values, got {}", node_count(), values.size()));
    }
    std::vector<double> out(interior_.size());
    const double ihx2 = 1.0 / (h_[0] * h_[0]);
    if (dim_ == 1) {
        for (std::size_t k = 0; k < interior_.size(); ++k) {
            const std::size_t id = interior_[k];
            out[k] = (values[id - 1] - 2.0 * values[id] + values[id + 1]) * ihx2;
        }
        return out;
    }
    const double ihy2 = 1.0 / (h_[1] * h_[1]);
    const std::size_t stride = static_cast<std::size_t>(nx_[0] + 2);
    for (std::size_t k = 0; k < interior_.size(); ++k) {
        const std::size_t id = interior_[k];
        out[k] = (values[id - 1] - 2.0 * values[id] + values[id + 1]) * ihx2 +
                 (values[id - stride] - 2.0 * values[id] + values[id + stride]) * ihy2;
    }
    return out;
}

std::vector<double> SpaceTimeGrid::normal_derivative(std::span<const double> values) const {
    if (values.size() != node_count()) {
        throw InvalidArgument(fmt::format("normal_derivative: expected {} values, got {}", node_count(), values.size()));
    }
    std::vector<double> out(boundary_.size());
    const std::size_t stride_x = 1;
    const std::size_t stride_y = static_cast<std::size_t>(nx_[0] + 2);
    for (std::size_t k = 0; k < boundary_.size(); ++k) {
        const auto& b = boundary_[k];
        const std::size_t stride = b.axis == 0 ? stride_x : stride_y;
        // Step inward: for the low face the interior lies at +stride.
        const std::size_t in1 = b.sign < 0 ? b.node + stride : b.node - stride;
        const std::size_t in2 = b.sign < 0 ? b.node + 2 * stride : b.node - 2 * stride;
        out[k] = (3.0 * values[b.node] - 4.0 * values[in1] + values[in2]) / (2.0 * h_[b.axis]);
    }
    return out;
}

}  // namespace pinv
