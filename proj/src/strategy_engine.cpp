#include "impact/strategy_engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace impact {

std::vector<StrategyPath> execute_policy(const PolicyField& policy, const PathSet& paths,
                                         double y0, double z0, const CostSpec& cost) {
    const GridSpec& g = policy.grid;
    if (paths.n_times() != g.nt())
        throw input_error("execute_policy: path grid does not match policy grid");
    for (std::size_t j = 0; j < g.nt(); ++j)
        if (std::abs(paths.time_grid[j] - g.t_nodes[j]) > 1e-12)
            throw input_error("execute_policy: path grid does not match policy grid");
    const std::size_t iz_start = g.exact_z_index(z0);
    const std::size_t nt = g.nt();

    std::vector<StrategyPath> out(paths.n_paths);
#pragma omp parallel for schedule(static)
    for (long long pi = 0; pi < static_cast<long long>(paths.n_paths); ++pi) {
        const auto p = static_cast<std::size_t>(pi);
        StrategyPath sp;
        sp.path_id = p;
        double y = y0;
        std::size_t iz = iz_start;
        for (std::size_t j = 0; j < nt; ++j) {
            const double x = paths.at(p, j);
            if (j > 0) y += g.z_nodes[iz] * (x - paths.at(p, j - 1));
            if (j == nt - 1) {
                // Hard terminal constraint: flat at the end, whatever the
                // policy said along the way.
                if (g.z_nodes[iz] != 0.0) {
                    const double paid = cost.cost(-g.z_nodes[iz]);
                    y -= paid;
                    sp.trades.push_back({g.t_nodes[j], g.z_nodes[iz], 0.0, paid, y});
                    iz = g.zero_z_index();
                }
                break;
            }
            const std::size_t ix = g.nearest_x_index(x);
            const std::size_t iy = g.nearest_y_index(y);
            const std::size_t at = policy.idx(j, ix, iy, iz);
            if (policy.exercise[at]) {
                const auto tgt = static_cast<std::size_t>(policy.target_idx[at]);
                if (tgt != iz) {
                    const double paid = cost.cost(g.z_nodes[tgt] - g.z_nodes[iz]);
                    y -= paid;
                    sp.trades.push_back(
                        {g.t_nodes[j], g.z_nodes[iz], g.z_nodes[tgt], paid, y});
                    iz = tgt;
                }
            }
        }
        sp.wealth_terminal = y;
        for (const auto& tr : sp.trades)
            if (tr.z_after != tr.z_before) ++sp.n_jumps;
        out[p] = std::move(sp);
    }
    return out;
}

JumpStats jump_statistics(const std::vector<StrategyPath>& strategies, double eps1) {
    if (strategies.empty()) throw input_error("jump_statistics: empty strategy list");
    JumpStats s;
    s.n_paths = strategies.size();
    long long total_jumps = 0, small_landed_zero = 0;
    long long small_followed = 0, small_then_large = 0;
    std::vector<long long> hist;
    for (const auto& sp : strategies) {
        long long small_here = 0;
        for (std::size_t i = 0; i < sp.trades.size(); ++i) {
            const auto& tr = sp.trades[i];
            const double dz = std::abs(tr.z_after - tr.z_before);
            if (dz == 0.0) continue;
            ++total_jumps;
            const bool small = dz > 0.0 && dz < eps1;
            if (small) {
                ++s.n_small;
                ++small_here;
                if (tr.z_after == 0.0) ++small_landed_zero;
                if (i + 1 < sp.trades.size()) {
                    const auto& nx = sp.trades[i + 1];
                    const double dz2 = std::abs(nx.z_after - nx.z_before);
                    if (dz2 > 0.0) {
                        ++small_followed;
                        if (dz2 >= eps1) ++small_then_large;
                    }
                }
            } else {
                ++s.n_large;
            }
        }
        if (hist.size() <= static_cast<std::size_t>(small_here))
            hist.resize(static_cast<std::size_t>(small_here) + 1, 0);
        ++hist[static_cast<std::size_t>(small_here)];
    }
    s.small_jump_counts = std::move(hist);
    s.mean_n = static_cast<double>(total_jumps) / static_cast<double>(s.n_paths);
    s.land_zero_rate =
        s.n_small == 0 ? 1.0
                       : static_cast<double>(small_landed_zero) /
                             static_cast<double>(s.n_small);
    s.large_jump_freq = small_followed == 0
                            ? 0.0
                            : static_cast<double>(small_then_large) /
                                  static_cast<double>(small_followed);
    return s;
}

double JumpStats::tail_prob(int m) const {
    if (n_paths == 0) return 0.0;
    long long atleast = 0;
    for (std::size_t c = 0; c < small_jump_counts.size(); ++c)
        if (static_cast<long long>(c) >= m) atleast += small_jump_counts[c];
    return static_cast<double>(atleast) / static_cast<double>(n_paths);
}

McEstimate mc_value_estimate(const std::vector<StrategyPath>& strategies,
                             const UtilitySpec& utility) {
    if (strategies.size() < 100)
        throw input_error("mc_value_estimate: need >= 100 strategies");
    McEstimate e;
    e.n = strategies.size();
    double sum = 0.0;
    for (const auto& sp : strategies) sum += utility.value(sp.wealth_terminal);
    e.mean = sum / static_cast<double>(e.n);
    double ss = 0.0;
    for (const auto& sp : strategies) {
        const double d = utility.value(sp.wealth_terminal) - e.mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(e.n - 1));
    e.half_width = 1.959963984540054 * sd / std::sqrt(static_cast<double>(e.n));
    return e;
}

void export_trades_csv(const std::vector<StrategyPath>& strategies,
                       const std::string& file) {
    std::ofstream f(file);
    if (!f) throw input_error("export_trades_csv: cannot open " + file);
    f << "path_id,t,z_before,z_after,cost_paid,y_after\n";
    f.precision(17);
    for (const auto& sp : strategies)
        for (const auto& tr : sp.trades)
            f << sp.path_id << ',' << tr.t << ',' << tr.z_before << ',' << tr.z_after
              << ',' << tr.cost_paid << ',' << tr.y_after << '\n';
}

std::string stats_to_json(const JumpStats& stats) {
    nlohmann::json j;
    j["mean_n"] = stats.mean_n;
    j["small_jump_counts"] = stats.small_jump_counts;
    j["large_jump_freq"] = stats.large_jump_freq;
    j["land_zero_rate"] = stats.land_zero_rate;
    j["n_small"] = stats.n_small;
    j["n_large"] = stats.n_large;
    j["n_paths"] = stats.n_paths;
    return j.dump(2);
}

double audit_self_financing(const std::vector<StrategyPath>& strategies,
                            const PathSet& paths, double y0, double z0,
                            const CostSpec& cost) {
    (void)cost;
    double worst = 0.0;
    for (const auto& sp : strategies) {
        const std::size_t p = sp.path_id;
        double pos = z0, gains = 0.0, costs = 0.0;
        std::size_t ti = 0;
        for (std::size_t j = 0; j + 1 < paths.n_times(); ++j) {
            while (ti < sp.trades.size() &&
                   std::abs(sp.trades[ti].t - paths.time_grid[j]) <= 1e-12) {
                costs += sp.trades[ti].cost_paid;
                pos = sp.trades[ti].z_after;
                ++ti;
            }
            gains += pos * (paths.at(p, j + 1) - paths.at(p, j));
        }
        while (ti < sp.trades.size()) {  // terminal liquidation trades
            costs += sp.trades[ti].cost_paid;
            pos = sp.trades[ti].z_after;
            ++ti;
        }
        const double recomputed = y0 + gains - costs;
        const double d = std::abs(recomputed - sp.wealth_terminal);
        worst = std::max(worst, d);
        if (d > 1e-10) {
            std::ostringstream s;
            s.precision(17);
            s << "self-financing audit failed on path " << p << ": recomputed "
              << recomputed << " vs logged " << sp.wealth_terminal;
            throw solver_invariant_error(s.str());
        }
        if (pos != 0.0)
            throw solver_invariant_error("strategy does not end flat on path " +
                                         std::to_string(p));
    }
    return worst;
}

}  // namespace impact
