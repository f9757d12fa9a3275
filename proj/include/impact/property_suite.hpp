#pragma once

#include <string>
#include <vector>

#include "impact/cost_model.hpp"
#include "impact/lattice.hpp"
#include "impact/strategy_engine.hpp"

namespace impact {

struct CheckReport {
    std::string name;
    bool pass = false;
    bool skipped = false;
    std::string witness;   // worst node / measured value / bound
    double tolerance = 0.0;
};

// Grid sweeps over a solved family V^1..V^k: monotone in the transaction
// budget, linear growth in y, y-slope sandwich [lambda, Lambda], bar/identity
// dominance via budget ordering, one-sided limits at z = 0, same-sign z
// modulus, and the k*sup|V^{2k}-V^k| rate proxy.
std::vector<CheckReport> run_surface_checks(const std::vector<ValueSurface>& surfaces,
                                            double lambda, double Lambda,
                                            const CostSpec& cost, double growth_c);

// Strategy-side checks: terminal flatness, self-financing audit handled by the
// caller, geometric small-jump tail, land-at-zero rate, and the conditional
// large-jump frequency bound (asserted only when C1 > 2*C0).
std::vector<CheckReport> run_strategy_checks(const JumpStats& stats,
                                             const std::vector<StrategyPath>& strategies,
                                             const ConcavityConstants& constants);

// Ratio-stability checks across a refinement pair: measured x/t moduli on the
// fine grid must not exceed those on the coarse grid by more than the slack.
std::vector<CheckReport> run_refinement_checks(const ValueSurface& coarse,
                                               const ValueSurface& fine, double slack);

bool all_pass(const std::vector<CheckReport>& reports);
std::string reports_to_json(const std::vector<CheckReport>& reports);

}  // namespace impact
