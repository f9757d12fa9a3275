#include "impact/qvi_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace impact {

QuadratureTable make_quadrature_table(const MarketModel& market, const GridSpec& grid,
                                      int n_nodes) {
    QuadratureTable q;
    q.n_steps = grid.nt() - 1;
    q.nx = grid.nx();
    q.entries.resize(q.n_steps * q.nx);
    for (std::size_t j = 0; j < q.n_steps; ++j) {
        const double t = grid.t_nodes[j];
        const double dt = grid.t_nodes[j + 1] - grid.t_nodes[j];
        for (std::size_t ix = 0; ix < q.nx; ++ix)
            q.entries[j * q.nx + ix] =
                transition_quadrature(market, t, grid.x_nodes[ix], dt, n_nodes);
    }
    return q;
}

void terminal_layer(const GridSpec& grid, const UtilitySpec& utility,
                    const CostSpec& cost, double* out) {
    const std::size_t nx = grid.nx(), ny = grid.ny(), nz = grid.nz();
    // Liquidation value U(y - c(-z)); no x dependence.
    std::vector<double> col(ny * nz);
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t iz = 0; iz < nz; ++iz)
            col[iy * nz + iz] = utility.value(grid.y_nodes[iy] - cost.cost(-grid.z_nodes[iz]));
    for (std::size_t ix = 0; ix < nx; ++ix)
        std::copy(col.begin(), col.end(), out + ix * ny * nz);
}

std::vector<double> cost_matrix(const GridSpec& grid, const CostSpec& cost) {
    const std::size_t nz = grid.nz();
    std::vector<double> m(nz * nz);
    for (std::size_t tgt = 0; tgt < nz; ++tgt)
        for (std::size_t from = 0; from < nz; ++from)
            m[tgt * nz + from] = cost.cost(grid.z_nodes[tgt] - grid.z_nodes[from]);
    return m;
}

std::vector<std::vector<std::int32_t>> tie_orders(const GridSpec& grid,
                                                  const std::vector<TiePriority>& prio) {
    const std::size_t nz = grid.nz();
    const std::size_t iz0 = grid.zero_z_index();
    std::vector<std::vector<std::int32_t>> orders(nz);
    for (std::size_t iz = 0; iz < nz; ++iz) {
        std::vector<std::int32_t> o(nz);
        std::iota(o.begin(), o.end(), 0);
        auto klass = [&](std::int32_t tgt) {
            for (std::size_t p = 0; p < prio.size(); ++p) {
                if (prio[p] == TiePriority::Stay && tgt == static_cast<std::int32_t>(iz))
                    return p;
                if (prio[p] == TiePriority::ToZero && tgt == static_cast<std::int32_t>(iz0))
                    return p;
                if (prio[p] == TiePriority::Nearest) return p;  // ranked by |dz| below
            }
            return prio.size();
        };
        std::sort(o.begin(), o.end(), [&](std::int32_t a, std::int32_t b) {
            const auto ka = klass(a), kb = klass(b);
            if (ka != kb) return ka < kb;
            const double da = std::abs(grid.z_nodes[a] - grid.z_nodes[iz]);
            const double db = std::abs(grid.z_nodes[b] - grid.z_nodes[iz]);
            if (da != db) return da < db;
            return grid.z_nodes[a] < grid.z_nodes[b];
        });
        orders[iz] = std::move(o);
    }
    return orders;
}

std::string SolveReport::to_json(std::uint64_t config_hash, std::uint64_t seed) const {
    nlohmann::json j;
    j["k"] = k_done;
    j["sup_increments"] = sup_increments;
    j["y_below_box"] = stats.y_below_box;
    j["out_of_box"] = stats.out_of_box;
    j["layer_seconds"] = layer_seconds;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    return j.dump(2);
}

SolveResult solve_vn(const SolverConfig& config, const MarketModel& market,
                     const CostSpec& cost, const UtilitySpec& utility,
                     const QuadratureTable* custom_quadrature) {
    const GridSpec& g = config.grid;
    g.validate();
    if (config.n_max < 1) throw input_error("solve_vn: n_max must be >= 1");
    if (!(config.stop_tol > 0.0)) throw input_error("solve_vn: stop_tol must be > 0");
    if (config.exercise_tol < 0.0) throw input_error("solve_vn: exercise_tol must be >= 0");
    if (std::abs(g.z_nodes.back()) > cost.M + 1e-12)
        throw input_error("solve_vn: z grid exceeds the position bound M");

    QuadratureTable built;
    const QuadratureTable* quad = custom_quadrature;
    if (!quad) {
        built = make_quadrature_table(market, g, config.quad_nodes);
        quad = &built;
    }
    if (quad->n_steps != g.nt() - 1 || quad->nx != g.nx())
        throw input_error("solve_vn: quadrature table does not match the grid");

    const std::size_t ss = g.slice_size();
    const auto cmat = cost_matrix(g, cost);
    const auto orders = tie_orders(g, config.tie_break);

    // V^0: liquidate-now value at every time slice.
    ValueSurface prev = ValueSurface::zeros(g, 0);
    terminal_layer(g, utility, cost, prev.slice(g.nt() - 1));
    for (std::size_t jt = 0; jt + 1 < g.nt(); ++jt)
        std::copy(prev.slice(g.nt() - 1), prev.slice(g.nt() - 1) + ss, prev.slice(jt));

    SolveResult res;
    res.policy = PolicyField::make(g);
    std::vector<double> bar(ss);
    std::vector<std::int32_t> psi(ss);
    std::vector<std::uint8_t> cont(ss);

    for (int k = 1; k <= config.n_max; ++k) {
        const auto t_start = std::chrono::steady_clock::now();
        ValueSurface cur = ValueSurface::zeros(g, k);
        for (std::size_t step = 0; step < g.nt(); ++step) {
            const std::size_t jt = g.nt() - 1 - step;
            kernels::bar_slice(g, prev.slice(jt), cmat, orders, bar.data(), psi.data(),
                               res.report.stats);
            if (jt == g.nt() - 1) {
                std::copy(bar.begin(), bar.end(), cur.slice(jt));
                std::fill(cont.begin(), cont.end(), 1);  // no stopping choice at T
            } else {
                kernels::hat_slice(g, cur.slice(jt + 1), bar.data(),
                                   &quad->entries[(jt)*quad->nx], config.exercise_tol,
                                   cur.slice(jt), cont.data(), res.report.stats);
            }
            const std::size_t off = jt * ss;
            for (std::size_t i = 0; i < ss; ++i) {
                res.policy.exercise[off + i] = cont[i] ? 0 : 1;
                res.policy.target_idx[off + i] = psi[i];
            }
        }

        double sup_inc = 0.0, worst_drop = 0.0;
        std::size_t worst_at = 0;
        for (std::size_t i = 0; i < cur.values.size(); ++i) {
            const double d = cur.values[i] - prev.values[i];
            sup_inc = std::max(sup_inc, std::abs(d));
            if (d < worst_drop) {
                worst_drop = d;
                worst_at = i;
            }
        }
        if (worst_drop < -1e-10) {
            std::ostringstream s;
            s.precision(17);
            s << "solve_vn: value decreased by " << -worst_drop
              << " when raising the budget to k=" << k << " at flat index " << worst_at;
            throw solver_invariant_error(s.str());
        }
        res.report.sup_increments.push_back(sup_inc);
        res.report.layer_seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
                .count());
        res.report.k_done = k;
        res.surfaces.push_back(std::move(cur));
        prev = res.surfaces.back();  // copy: keep every V^k for the property suite
        if (k >= 2 && sup_inc < config.stop_tol) break;
    }
    return res;
}

PolicyField extract_policy(const SolveResult& result, const SolverConfig& config,
                           const CostSpec& cost) {
    (void)config;
    const PolicyField& raw = result.policy;
    const GridSpec& g = raw.grid;
    PolicyField out = raw;
    const std::size_t nz = g.nz();
    std::vector<char> visited(nz);
    for (std::size_t jt = 0; jt < g.nt(); ++jt) {
        for (std::size_t ix = 0; ix < g.nx(); ++ix) {
            for (std::size_t iy = 0; iy < g.ny(); ++iy) {
                for (std::size_t iz = 0; iz < nz; ++iz) {
                    const std::size_t at = raw.idx(jt, ix, iy, iz);
                    if (!raw.exercise[at] ||
                        raw.target_idx[at] == static_cast<std::int32_t>(iz)) {
                        if (raw.exercise[at])
                            out.exercise[at] = 0;  // self-targeted: not a trade
                        continue;
                    }
                    // Follow same-instant chains through the target states.
                    std::fill(visited.begin(), visited.end(), 0);
                    visited[iz] = 1;
                    std::size_t cur_z = iz;
                    std::size_t cur_iy = iy;
                    std::int32_t tgt = raw.target_idx[at];
                    while (true) {
                        if (visited[static_cast<std::size_t>(tgt)]) {
                            std::ostringstream s;
                            s << "extract_policy: jump chain cycle at t index " << jt
                              << ", z index " << tgt;
                            throw solver_invariant_error(s.str());
                        }
                        visited[static_cast<std::size_t>(tgt)] = 1;
                        const double paid =
                            cost.cost(g.z_nodes[static_cast<std::size_t>(tgt)] -
                                      g.z_nodes[cur_z]);
                        cur_iy = g.nearest_y_index(g.y_nodes[cur_iy] - paid);
                        cur_z = static_cast<std::size_t>(tgt);
                        const std::size_t nxt = raw.idx(jt, ix, cur_iy, cur_z);
                        if (!raw.exercise[nxt] ||
                            raw.target_idx[nxt] == static_cast<std::int32_t>(cur_z))
                            break;
                        tgt = raw.target_idx[nxt];
                    }
                    out.target_idx[at] = static_cast<std::int32_t>(cur_z);
                }
            }
        }
    }
    return out;
}

}  // namespace impact
