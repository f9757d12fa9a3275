#include "impact/cara_reduced.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace impact {

void CaraProblem::validate() const {
    if (s0 < 0.0) throw input_error("cara: s0 must be >= 0");
    if (!(risk_aversion > 0.0)) throw input_error("cara: risk aversion must be > 0");
    if (t_nodes.size() < 2) throw input_error("cara: need >= 2 time nodes");
    for (std::size_t j = 1; j < t_nodes.size(); ++j)
        if (!(t_nodes[j] > t_nodes[j - 1]))
            throw input_error("cara: time nodes must be strictly increasing");
    if (z_nodes.size() < 3) throw input_error("cara: need >= 3 z nodes");
    bool has_zero = false;
    for (double z : z_nodes) {
        if (std::abs(z) > M + 1e-12) throw input_error("cara: |z| exceeds M");
        if (z == 0.0) has_zero = true;
        bool sym = false;
        for (double w : z_nodes)
            if (std::abs(w + z) <= 1e-12) sym = true;
        if (!sym) throw input_error("cara: z nodes must be symmetric");
    }
    if (!has_zero) throw input_error("cara: z nodes must include 0");
    if (jump_rounds < 1) throw input_error("cara: jump_rounds must be >= 1");
}

double CaraSolution::w(std::size_t jt, std::size_t iz) const {
    return std::exp(log_w[idx(jt, iz)]);
}

void CaraSolution::export_csv(const std::string& file) const {
    std::ofstream f(file);
    if (!f) throw input_error("cara export: cannot open " + file);
    f << "t,z,value,action,target\n";
    f.precision(17);
    for (std::size_t jt = 0; jt < t_nodes.size(); ++jt)
        for (std::size_t iz = 0; iz < z_nodes.size(); ++iz) {
            const std::size_t at = idx(jt, iz);
            f << t_nodes[jt] << ',' << z_nodes[iz] << ',' << std::exp(log_w[at]) << ','
              << (exercise[at] ? "jump" : "hold") << ','
              << z_nodes[static_cast<std::size_t>(target_idx[at])] << '\n';
        }
}

CaraSolution solve_cara(const CaraProblem& p) {
    p.validate();
    const double a = p.risk_aversion;
    const std::size_t nt = p.t_nodes.size(), nz = p.z_nodes.size();
    std::size_t iz0 = 0;
    for (std::size_t i = 0; i < nz; ++i)
        if (p.z_nodes[i] == 0.0) iz0 = i;

    CaraSolution sol;
    sol.t_nodes = p.t_nodes;
    sol.z_nodes = p.z_nodes;
    sol.log_w.assign(nt * nz, 0.0);
    sol.exercise.assign(nt * nz, 0);
    sol.target_idx.resize(nt * nz);
    for (std::size_t jt = 0; jt < nt; ++jt)
        for (std::size_t iz = 0; iz < nz; ++iz)
            sol.target_idx[sol.idx(jt, iz)] = static_cast<std::int32_t>(iz);

    // Jump costs in log space: moving z -> z~ multiplies W by exp(a c(z~-z)).
    std::vector<double> jc(nz * nz);
    for (std::size_t tgt = 0; tgt < nz; ++tgt)
        for (std::size_t from = 0; from < nz; ++from)
            jc[tgt * nz + from] = a * p.cost.cost(p.z_nodes[tgt] - p.z_nodes[from]);

    auto relax_slice = [&](std::vector<double>& cur, std::size_t jt) {
        const std::vector<double> hold = cur;
        // Transitive jump relaxation within one time slice (chained jumps
        // at the same instant collapse to their best composition).
        for (int r = 0; r < p.jump_rounds; ++r) {
            bool changed = false;
            for (std::size_t iz = 0; iz < nz; ++iz) {
                for (std::size_t tgt = 0; tgt < nz; ++tgt) {
                    if (tgt == iz) continue;
                    const double cand = jc[tgt * nz + iz] + cur[tgt];
                    if (cand < cur[iz] - 1e-14) {
                        cur[iz] = cand;
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }
        // A move is executed only when the best direct jump against the
        // settled values strictly beats holding; ties among jump targets
        // prefer liquidation, then the nearest and smaller target.
        for (std::size_t iz = 0; iz < nz; ++iz) {
            double best = std::numeric_limits<double>::infinity();
            std::int32_t best_tgt = -1;
            for (std::size_t tgt = 0; tgt < nz; ++tgt) {
                if (tgt == iz) continue;
                const double cand = jc[tgt * nz + iz] + cur[tgt];
                bool take;
                if (best_tgt < 0 || cand < best - 1e-12)
                    take = true;
                else if (cand > best + 1e-12)
                    take = false;
                else if (tgt == iz0)
                    take = true;
                else if (static_cast<std::size_t>(best_tgt) == iz0)
                    take = false;
                else {
                    const double dz_new = std::abs(p.z_nodes[tgt] - p.z_nodes[iz]);
                    const double dz_old = std::abs(
                        p.z_nodes[static_cast<std::size_t>(best_tgt)] - p.z_nodes[iz]);
                    take = dz_new != dz_old
                               ? dz_new < dz_old
                               : p.z_nodes[tgt] <
                                     p.z_nodes[static_cast<std::size_t>(best_tgt)];
                }
                if (take) {
                    best = std::min(best, cand);
                    best_tgt = static_cast<std::int32_t>(tgt);
                }
            }
            const bool jump = best < hold[iz] - 1e-12;
            sol.exercise[sol.idx(jt, iz)] = jump ? 1 : 0;
            sol.target_idx[sol.idx(jt, iz)] =
                jump ? best_tgt : static_cast<std::int32_t>(iz);
        }
    };

    // Terminal: forced liquidation, possibly split across same-instant jumps.
    std::vector<double> cur(nz);
    for (std::size_t iz = 0; iz < nz; ++iz) cur[iz] = a * p.cost.cost(-p.z_nodes[iz]);
    relax_slice(cur, nt - 1);
    std::copy(cur.begin(), cur.end(), sol.log_w.begin() + (nt - 1) * nz);

    for (std::size_t step = 1; step < nt; ++step) {
        const std::size_t jt = nt - 1 - step;
        const double dt = p.t_nodes[jt + 1] - p.t_nodes[jt];
        for (std::size_t iz = 0; iz < nz; ++iz) {
            const double z = p.z_nodes[iz];
            // Exact Gaussian moment generating function of -a z dX.
            const double hold =
                -a * p.b0 * z * dt + 0.5 * a * a * p.s0 * p.s0 * z * z * dt;
            cur[iz] = hold + sol.log_w[sol.idx(jt + 1, iz)];
        }
        relax_slice(cur, jt);
        std::copy(cur.begin(), cur.end(), sol.log_w.begin() + jt * nz);
    }
    return sol;
}

double cross_check_factorization(const ValueSurface& generic, double x0, double y0,
                                 double risk_aversion, const CaraSolution& reduced) {
    const GridSpec& g = generic.grid;
    if (g.nt() != reduced.t_nodes.size())
        throw input_error("factorization check: time grids differ");
    for (std::size_t j = 0; j < g.nt(); ++j)
        if (std::abs(g.t_nodes[j] - reduced.t_nodes[j]) > 1e-12)
            throw input_error("factorization check: time grids differ");
    std::vector<std::size_t> zmap(reduced.z_nodes.size());
    for (std::size_t i = 0; i < reduced.z_nodes.size(); ++i)
        zmap[i] = g.exact_z_index(reduced.z_nodes[i]);

    const std::size_t ix = g.nearest_x_index(x0);
    const std::size_t iy = g.nearest_y_index(y0);
    if (std::abs(g.x_nodes[ix] - x0) > 1e-9 || std::abs(g.y_nodes[iy] - y0) > 1e-9)
        throw input_error("factorization check: (x0, y0) must be grid nodes");

    const double scale = std::exp(-risk_aversion * y0);
    double worst = 0.0;
    for (std::size_t jt = 0; jt < g.nt(); ++jt) {
        for (std::size_t i = 0; i < reduced.z_nodes.size(); ++i) {
            const double w = reduced.w(jt, i);
            const double v = generic.at(jt, ix, iy, zmap[i]);
            worst = std::max(worst, std::abs(v + scale * w) / (1.0 + std::abs(w)));
        }
    }
    return worst;
}

}  // namespace impact
