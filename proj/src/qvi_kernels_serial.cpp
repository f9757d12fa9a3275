#include <cmath>

#include "impact/qvi_solver.hpp"
#include "kernel_detail.hpp"

namespace impact::serial_ref {

void bar_slice(const GridSpec& g, const double* in, const std::vector<double>& cmat,
               const std::vector<std::vector<std::int32_t>>& order, double* out,
               std::int32_t* psi, KernelStats& stats) {
    const std::size_t nx = g.nx(), ny = g.ny(), nz = g.nz();
    long long below = 0;
    for (std::size_t ix = 0; ix < nx; ++ix) {
        for (std::size_t iy = 0; iy < ny; ++iy) {
            for (std::size_t iz = 0; iz < nz; ++iz) {
                const auto r = detail::bar_node(g, in, cmat, order[iz], ix, iy, iz, below);
                const std::size_t at = (ix * ny + iy) * nz + iz;
                out[at] = r.value;
                psi[at] = r.target;
            }
        }
    }
    stats.y_below_box += below;
}

void hat_slice(const GridSpec& g, const double* next, const double* bar,
               const std::vector<QuadNode>* quad_row, double exercise_tol, double* out,
               std::uint8_t* continuation, KernelStats& stats) {
    const std::size_t nx = g.nx(), ny = g.ny(), nz = g.nz();
    long long below = 0, clamps = 0;
    for (std::size_t ix = 0; ix < nx; ++ix) {
        const std::vector<QuadNode>& quad = quad_row[ix];
        std::vector<detail::XCell> xcells(quad.size());
        for (std::size_t q = 0; q < quad.size(); ++q)
            xcells[q] = detail::locate_x_clamped(g, quad[q].x_next);
        for (std::size_t iy = 0; iy < ny; ++iy) {
            for (std::size_t iz = 0; iz < nz; ++iz) {
                const double cont = detail::continuation_node(g, next, quad, xcells, ix,
                                                              iy, iz, below, clamps);
                const std::size_t at = (ix * ny + iy) * nz + iz;
                const double b = bar[at];
                out[at] = cont > b ? cont : b;
                continuation[at] = cont >= b - exercise_tol * (1.0 + std::abs(b)) ? 1 : 0;
            }
        }
    }
    stats.y_below_box += below;
    stats.out_of_box += clamps;
}

}  // namespace impact::serial_ref
