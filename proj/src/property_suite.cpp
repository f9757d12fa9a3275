#include "impact/property_suite.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace impact {

namespace {

std::string node_witness(const GridSpec& g, std::size_t jt, std::size_t ix,
                         std::size_t iy, std::size_t iz, double measured, double bound) {
    std::ostringstream s;
    s.precision(12);
    s << "(t=" << g.t_nodes[jt] << ", x=" << g.x_nodes[ix] << ", y=" << g.y_nodes[iy]
      << ", z=" << g.z_nodes[iz] << ") measured " << measured << " vs bound " << bound;
    return s.str();
}

// Largest per-unit x increment over one surface (discrete Lipschitz measure).
double x_modulus(const ValueSurface& s) {
    const GridSpec& g = s.grid;
    double worst = 0.0;
    for (std::size_t jt = 0; jt < g.nt(); ++jt)
        for (std::size_t ix = 0; ix + 1 < g.nx(); ++ix)
            for (std::size_t iy = 0; iy < g.ny(); ++iy)
                for (std::size_t iz = 0; iz < g.nz(); ++iz) {
                    const double d = std::abs(s.at(jt, ix + 1, iy, iz) - s.at(jt, ix, iy, iz)) /
                                     (g.x_nodes[ix + 1] - g.x_nodes[ix]);
                    worst = std::max(worst, d);
                }
    return worst;
}

// Largest sqrt-time increment (discrete 1/2-Hoelder measure).
double t_modulus(const ValueSurface& s) {
    const GridSpec& g = s.grid;
    double worst = 0.0;
    for (std::size_t jt = 0; jt + 1 < g.nt(); ++jt) {
        const double rdt = std::sqrt(g.t_nodes[jt + 1] - g.t_nodes[jt]);
        for (std::size_t ix = 0; ix < g.nx(); ++ix)
            for (std::size_t iy = 0; iy < g.ny(); ++iy)
                for (std::size_t iz = 0; iz < g.nz(); ++iz) {
                    const double d =
                        std::abs(s.at(jt + 1, ix, iy, iz) - s.at(jt, ix, iy, iz)) / rdt;
                    worst = std::max(worst, d);
                }
    }
    return worst;
}

}  // namespace

bool all_pass(const std::vector<CheckReport>& reports) {
    for (const auto& r : reports)
        if (!r.pass && !r.skipped) return false;
    return true;
}

std::string reports_to_json(const std::vector<CheckReport>& reports) {
    std::vector<CheckReport> sorted = reports;
    std::sort(sorted.begin(), sorted.end(),
              [](const CheckReport& a, const CheckReport& b) { return a.name < b.name; });
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : sorted)
        j.push_back({{"check", r.name},
                     {"pass", r.pass},
                     {"skipped", r.skipped},
                     {"witness", r.witness},
                     {"tolerance", r.tolerance}});
    return j.dump(2);
}

std::vector<CheckReport> run_surface_checks(const std::vector<ValueSurface>& surfaces,
                                            double lambda, double Lambda,
                                            const CostSpec& cost, double growth_c) {
    if (surfaces.empty()) throw input_error("run_surface_checks: no surfaces");
    std::vector<CheckReport> out;
    const GridSpec& g = surfaces.front().grid;
    for (const auto& s : surfaces) check_same_grid(g, s.grid, "run_surface_checks");

    {
        CheckReport r{"monotone_in_budget", true, false, "", 1e-10};
        if (surfaces.size() < 2) {
            r.skipped = true;
            r.witness = "needs >= 2 surfaces";
        } else {
            for (std::size_t k = 1; k < surfaces.size() && r.pass; ++k)
                for (std::size_t i = 0; i < surfaces[k].values.size(); ++i) {
                    const double d = surfaces[k].values[i] - surfaces[k - 1].values[i];
                    if (d < -1e-10) {
                        r.pass = false;
                        std::ostringstream w;
                        w.precision(12);
                        w << "budget " << surfaces[k].n_jumps << " drops by " << -d
                          << " at flat index " << i;
                        r.witness = w.str();
                        break;
                    }
                }
        }
        out.push_back(r);
    }

    {
        CheckReport r{"growth_linear_in_y", true, false, "", 0.0};
        r.tolerance = growth_c;
        for (const auto& s : surfaces) {
            for (std::size_t jt = 0; jt < g.nt() && r.pass; ++jt)
                for (std::size_t ix = 0; ix < g.nx() && r.pass; ++ix)
                    for (std::size_t iy = 0; iy < g.ny() && r.pass; ++iy)
                        for (std::size_t iz = 0; iz < g.nz(); ++iz) {
                            const double v = s.at(jt, ix, iy, iz);
                            const double bound =
                                growth_c * (1.0 + std::abs(g.y_nodes[iy]));
                            if (std::abs(v) > bound) {
                                r.pass = false;
                                r.witness = node_witness(g, jt, ix, iy, iz, v, bound);
                                break;
                            }
                        }
            if (!r.pass) break;
        }
        out.push_back(r);
    }

    {
        CheckReport r{"y_slope_sandwich", true, false, "", 1e-6};
        const ValueSurface& s = surfaces.back();
        for (std::size_t jt = 0; jt < g.nt() && r.pass; ++jt)
            for (std::size_t ix = 0; ix < g.nx() && r.pass; ++ix)
                for (std::size_t iy = 0; iy + 1 < g.ny() && r.pass; ++iy)
                    for (std::size_t iz = 0; iz < g.nz(); ++iz) {
                        const double q =
                            (s.at(jt, ix, iy + 1, iz) - s.at(jt, ix, iy, iz)) /
                            (g.y_nodes[iy + 1] - g.y_nodes[iy]);
                        if (q < lambda - 1e-6 || q > Lambda + 1e-6) {
                            r.pass = false;
                            r.witness = node_witness(g, jt, ix, iy, iz, q, lambda);
                            break;
                        }
                    }
        out.push_back(r);
    }

    {
        // One-sided limits at z = 0: crossing between 0 and the adjacent
        // +-eps1 nodes costs at most one eps1-sized trade, so the value gap
        // is bounded by Lambda times that cost. Checked on the deepest
        // budget, which is the value-function proxy.
        CheckReport r{"zero_one_sided_limits", true, false, "", 0.0};
        const std::size_t iz0 = g.zero_z_index();
        const double arm = std::max(
            std::max(cost.cost(g.z_nodes[iz0 + 1]), cost.cost(-g.z_nodes[iz0 + 1])),
            std::max(cost.cost(g.z_nodes[iz0 - 1]), cost.cost(-g.z_nodes[iz0 - 1])));
        const double tol = Lambda * arm + 1e-9;
        r.tolerance = tol;
        const ValueSurface& s = surfaces.back();
        for (std::size_t jt = 0; jt < g.nt() && r.pass; ++jt)
            for (std::size_t ix = 0; ix < g.nx() && r.pass; ++ix)
                for (std::size_t iy = 0; iy < g.ny(); ++iy) {
                    const double v0 = s.at(jt, ix, iy, iz0);
                    const double vp = s.at(jt, ix, iy, iz0 + 1);
                    const double vm = s.at(jt, ix, iy, iz0 - 1);
                    if (std::abs(vp - v0) > tol || std::abs(vm - v0) > tol) {
                        r.pass = false;
                        r.witness =
                            node_witness(g, jt, ix, iy, iz0, std::max(vp, vm), v0);
                        break;
                    }
                }
        out.push_back(r);
    }

    {
        // k * sup|V^{2k} - V^k| should not grow with k (within slack).
        CheckReport r{"rate_proxy_nonincreasing", true, false, "", 0.2};
        if (surfaces.size() < 8) {
            r.skipped = true;
            r.witness = "needs >= 8 surfaces";
        } else {
            double prev_val = 0.0;
            bool first = true;
            std::ostringstream w;
            w.precision(12);
            for (int k : {1, 2, 4}) {
                double sup = 0.0;
                const auto& a = surfaces[static_cast<std::size_t>(k) - 1];
                const auto& b = surfaces[static_cast<std::size_t>(2 * k) - 1];
                for (std::size_t i = 0; i < a.values.size(); ++i)
                    sup = std::max(sup, std::abs(b.values[i] - a.values[i]));
                const double val = k * sup;
                w << "k=" << k << ": " << val << "; ";
                if (!first && val > prev_val * 1.2 + 1e-12) r.pass = false;
                prev_val = val;
                first = false;
            }
            r.witness = w.str();
        }
        out.push_back(r);
    }

    {
        // Same-sign z increments, normalized by |dz| + rho(|dz|); the worst
        // normalized increment must be stable across transaction budgets.
        CheckReport r{"same_sign_z_modulus_stable", true, false, "", 0.5};
        if (surfaces.size() < 2) {
            r.skipped = true;
            r.witness = "needs >= 2 surfaces";
        } else {
            const std::size_t iz0 = g.zero_z_index();
            std::vector<double> denom(g.nz(), 0.0);
            for (std::size_t iz = 0; iz + 1 < g.nz(); ++iz) {
                if (iz == iz0 || iz + 1 == iz0) continue;  // pairs touching 0
                const double dz = g.z_nodes[iz + 1] - g.z_nodes[iz];
                denom[iz] = dz + modulus(cost, dz, 1);
            }
            auto ratio_for = [&](const ValueSurface& s) {
                double worst = 0.0;
                for (std::size_t jt = 0; jt < g.nt(); ++jt)
                    for (std::size_t ix = 0; ix < g.nx(); ++ix)
                        for (std::size_t iy = 0; iy < g.ny(); ++iy)
                            for (std::size_t iz = 0; iz + 1 < g.nz(); ++iz) {
                                if (iz == iz0 || iz + 1 == iz0) continue;  // same sign only
                                const double d = std::abs(s.at(jt, ix, iy, iz + 1) -
                                                          s.at(jt, ix, iy, iz));
                                worst = std::max(worst, d / denom[iz]);
                            }
                return worst;
            };
            const double r1 = ratio_for(surfaces.front());
            const double rk = ratio_for(surfaces.back());
            std::ostringstream w;
            w.precision(12);
            w << "normalized increment: budget " << surfaces.front().n_jumps << " -> "
              << r1 << ", budget " << surfaces.back().n_jumps << " -> " << rk;
            r.witness = w.str();
            r.pass = rk <= r1 * 1.5 + 1e-9;
        }
        out.push_back(r);
    }

    return out;
}

std::vector<CheckReport> run_strategy_checks(const JumpStats& stats,
                                             const std::vector<StrategyPath>& strategies,
                                             const ConcavityConstants& constants) {
    std::vector<CheckReport> out;

    {
        CheckReport r{"terminal_flatness", true, false, "", 0.0};
        for (const auto& sp : strategies) {
            if (!sp.trades.empty() && sp.trades.back().z_after != 0.0) {
                r.pass = false;
                r.witness = "path " + std::to_string(sp.path_id) + " ends at z=" +
                            std::to_string(sp.trades.back().z_after);
                break;
            }
        }
        out.push_back(r);
    }

    {
        CheckReport r{"geometric_small_jump_tail", true, false, "", 3.0};
        std::ostringstream w;
        w.precision(6);
        const double n = static_cast<double>(stats.n_paths);
        for (int m = 1; m <= 5; ++m) {
            const double bound = std::pow(2.0, -m);
            const double se = std::sqrt(bound * (1.0 - bound) / n);
            const double tail = stats.tail_prob(m);
            w << "m=" << m << ": " << tail << " <= " << bound + 3.0 * se << "; ";
            if (tail > bound + 3.0 * se) r.pass = false;
        }
        r.witness = w.str();
        out.push_back(r);
    }

    {
        CheckReport r{"small_jumps_land_at_zero", stats.land_zero_rate == 1.0, false, "",
                      0.0};
        std::ostringstream w;
        w << stats.n_small << " small jumps, land-zero rate " << stats.land_zero_rate;
        r.witness = w.str();
        out.push_back(r);
    }

    {
        CheckReport r{"jump_count_integrable", true, false, "", 1e6};
        r.pass = std::isfinite(stats.mean_n) && stats.mean_n < 1e6;
        std::ostringstream w;
        w << "mean jumps per path " << stats.mean_n;
        r.witness = w.str();
        out.push_back(r);
    }

    {
        CheckReport r{"conditional_large_jump_bound", true, false, "", 0.5};
        if (!(constants.C1 > 2.0 * constants.C0)) {
            r.skipped = true;
            r.witness = "C1 <= 2*C0 under the configured normalization";
        } else {
            const double bound = constants.C0 / constants.C1;
            r.pass = stats.large_jump_freq <= bound + 3.0 / std::sqrt(static_cast<double>(
                                                        std::max<std::size_t>(
                                                            stats.n_paths, 1)));
            std::ostringstream w;
            w.precision(6);
            w << "freq " << stats.large_jump_freq << " vs C0/C1 = " << bound;
            r.witness = w.str();
        }
        out.push_back(r);
    }

    return out;
}

std::vector<CheckReport> run_refinement_checks(const ValueSurface& coarse,
                                               const ValueSurface& fine, double slack) {
    std::vector<CheckReport> out;
    {
        CheckReport r{"x_lipschitz_stable_under_refinement", true, false, "", slack};
        const double mc = x_modulus(coarse), mf = x_modulus(fine);
        r.pass = mf <= mc * (1.0 + slack) + 1e-9;
        std::ostringstream w;
        w.precision(12);
        w << "coarse " << mc << ", fine " << mf;
        r.witness = w.str();
        out.push_back(r);
    }
    {
        CheckReport r{"t_hoelder_stable_under_refinement", true, false, "", slack};
        const double mc = t_modulus(coarse), mf = t_modulus(fine);
        r.pass = mf <= mc * (1.0 + slack) + 1e-9;
        std::ostringstream w;
        w.precision(12);
        w << "coarse " << mc << ", fine " << mf;
        r.witness = w.str();
        out.push_back(r);
    }
    return out;
}

}  // namespace impact
