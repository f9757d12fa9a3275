#pragma once

// Per-node math shared by the parallel and serial solver kernels. Keeping a
// single definition guarantees the two code paths agree bitwise.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "impact/lattice.hpp"
#include "impact/market_model.hpp"

namespace impact::detail {

// Value at (x node ix, arbitrary y, z node iz) from one time slice; linear in
// y, extrapolating past the box with the edge-cell slope.
inline double eval_y(const GridSpec& g, const double* slice, std::size_t ix, double y,
                     std::size_t iz, long long& below_box) {
    const Cell cy = locate(g.y_nodes, y);
    if (cy.w < 0.0 || cy.w > 1.0) ++below_box;
    const std::size_t base = (ix * g.ny() + cy.i) * g.nz() + iz;
    const double v0 = slice[base];
    const double v1 = slice[base + g.nz()];
    return v0 * (1.0 - cy.w) + v1 * cy.w;
}

struct BarResult {
    double value;
    std::int32_t target;
};

// Best value over one immediate re-position: max over targets z~ of
// slice(x, y - c(z~ - z), z~). Candidates are visited in tie-priority order
// and replaced only on strict improvement, with one exception: a real trade
// displaces the stay candidate on an exact tie. Once the budget iteration
// reaches a fixed point, the stay read of the converged surface reproduces
// the jump-determined value bit for bit, so wherever the value comes from a
// jump the stay candidate ties with the true target; recording the trade
// keeps the extracted policy able to realize the computed value.
inline BarResult bar_node(const GridSpec& g, const double* slice,
                          const std::vector<double>& cmat,
                          const std::vector<std::int32_t>& order, std::size_t ix,
                          std::size_t iy, std::size_t iz, long long& below_box) {
    const double y = g.y_nodes[iy];
    const std::size_t nz = g.nz();
    const auto self = static_cast<std::int32_t>(iz);
    double best = -std::numeric_limits<double>::infinity();
    std::int32_t best_target = self;
    for (const std::int32_t tgt : order) {
        const double c = cmat[static_cast<std::size_t>(tgt) * nz + iz];
        double v;
        if (c == 0.0)  // exact node read; keeps the stay candidate noise-free
            v = slice[(ix * g.ny() + iy) * nz + static_cast<std::size_t>(tgt)];
        else
            v = eval_y(g, slice, ix, y - c, static_cast<std::size_t>(tgt), below_box);
        if (v > best || (v == best && best_target == self && tgt != self)) {
            best = v;
            best_target = tgt;
        }
    }
    return {best, best_target};
}

struct XCell {
    std::size_t i;
    double w;
    bool clamped;
};

inline XCell locate_x_clamped(const GridSpec& g, double x) {
    Cell c = locate(g.x_nodes, x);
    const bool out = c.w < 0.0 || c.w > 1.0;
    if (out) c.w = c.w < 0.0 ? 0.0 : 1.0;
    return {c.i, c.w, out};
}

// One-step continuation value at (ix, iy, iz): quadrature over x', with the
// wealth transported along y' = y + z (x' - x), read from the next-time slice.
inline double continuation_node(const GridSpec& g, const double* next,
                                const std::vector<QuadNode>& quad,
                                const std::vector<XCell>& xcells, std::size_t ix,
                                std::size_t iy, std::size_t iz, long long& below_box,
                                long long& x_clamps) {
    const double x = g.x_nodes[ix];
    const double y = g.y_nodes[iy];
    const double z = g.z_nodes[iz];
    double acc = 0.0;
    for (std::size_t q = 0; q < quad.size(); ++q) {
        const XCell& cx = xcells[q];
        if (cx.clamped) ++x_clamps;
        const double yq = y + z * (quad[q].x_next - x);
        const double v0 = eval_y(g, next, cx.i, yq, iz, below_box);
        const double v1 = eval_y(g, next, cx.i + 1, yq, iz, below_box);
        acc += quad[q].weight * (v0 * (1.0 - cx.w) + v1 * cx.w);
    }
    return acc;
}

}  // namespace impact::detail
