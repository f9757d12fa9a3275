#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "impact/cost_model.hpp"
#include "impact/lattice.hpp"
#include "impact/market_model.hpp"
#include "impact/payoff_model.hpp"

namespace impact {

struct Trade {
    double t = 0.0;
    double z_before = 0.0;
    double z_after = 0.0;
    double cost_paid = 0.0;
    double y_after = 0.0;
};

struct StrategyPath {
    std::size_t path_id = 0;
    std::vector<Trade> trades;
    double wealth_terminal = 0.0;
    int n_jumps = 0;  // count of trades with z_after != z_before
};

struct JumpStats {
    double mean_n = 0.0;
    std::vector<long long> small_jump_counts;  // histogram of per-path small-jump totals
    double large_jump_freq = 0.0;  // frequency of a large jump right after a small one
    double land_zero_rate = 1.0;   // fraction of small jumps landing exactly at 0
    long long n_small = 0;
    long long n_large = 0;
    std::size_t n_paths = 0;

    // Empirical tail P(small jumps per path >= m).
    double tail_prob(int m) const;
};

// Runs the lattice policy along each simulated path: nearest-node lookup in
// (x, y), exact z tracking, wealth updated by z*dX between trades and debited
// c(dz) at each trade, forced liquidation to z = 0 at the last time.
std::vector<StrategyPath> execute_policy(const PolicyField& policy, const PathSet& paths,
                                         double y0, double z0, const CostSpec& cost);

JumpStats jump_statistics(const std::vector<StrategyPath>& strategies, double eps1);

struct McEstimate {
    double mean = 0.0;
    double half_width = 0.0;  // 95% normal-approximation confidence interval
    std::size_t n = 0;
};

// Sample mean of U(terminal wealth); requires at least 100 strategies.
McEstimate mc_value_estimate(const std::vector<StrategyPath>& strategies,
                             const UtilitySpec& utility);

void export_trades_csv(const std::vector<StrategyPath>& strategies,
                       const std::string& file);
std::string stats_to_json(const JumpStats& stats);

// Recomputes terminal wealth from the trade log and path increments; throws
// solver_invariant_error when it disagrees with the incremental bookkeeping
// beyond 1e-10. Returns the worst absolute discrepancy.
double audit_self_financing(const std::vector<StrategyPath>& strategies,
                            const PathSet& paths, double y0, double z0,
                            const CostSpec& cost);

}  // namespace impact
