#pragma once

#include <cstdint>
#include <vector>

#include "impact/cost_model.hpp"
#include "impact/lattice.hpp"
#include "impact/market_model.hpp"
#include "impact/payoff_model.hpp"

namespace impact {

enum class TiePriority { Stay, ToZero, Nearest };

struct SolverConfig {
    GridSpec grid;
    int n_max = 8;
    double stop_tol = 1e-4;
    // Relative scale: a jump is taken only when it beats continuation by
    // more than exercise_tol * (1 + |value|).
    double exercise_tol = 1e-8;
    int quad_nodes = 7;
    std::vector<TiePriority> tie_break{TiePriority::Stay, TiePriority::ToZero,
                                       TiePriority::Nearest};
};

// One-step transition law per (time step, x node); injectable so toy
// instances (e.g. a two-point binomial tree) can bypass Gauss-Hermite.
struct QuadratureTable {
    std::size_t n_steps = 0;
    std::size_t nx = 0;
    std::vector<std::vector<QuadNode>> entries;  // index j*nx + ix

    const std::vector<QuadNode>& at(std::size_t step, std::size_t ix) const {
        return entries[step * nx + ix];
    }
};

QuadratureTable make_quadrature_table(const MarketModel& market, const GridSpec& grid,
                                      int n_nodes);

struct KernelStats {
    long long y_below_box = 0;   // bar candidates with debited y under y_lo
    long long out_of_box = 0;    // interpolation clamps / extrapolations
};

struct SolveReport {
    int k_done = 0;
    std::vector<double> sup_increments;  // sup|V^k - V^{k-1}|, k = 1..k_done
    KernelStats stats;
    std::vector<double> layer_seconds;
    std::string to_json(std::uint64_t config_hash, std::uint64_t seed) const;
};

struct SolveResult {
    std::vector<ValueSurface> surfaces;  // V^1 .. V^k
    PolicyField policy;                  // exercise + target for the final k
    SolveReport report;
};

// Terminal slice U(y - c(-z)) at every (x, y, z) node.
void terminal_layer(const GridSpec& grid, const UtilitySpec& utility,
                    const CostSpec& cost, double* out);

// Cost matrix c(z_target - z_from), indexed [iz_target * nz + iz_from].
std::vector<double> cost_matrix(const GridSpec& grid, const CostSpec& cost);

// Candidate orderings implementing the deterministic argmax tie-breaking:
// configured priorities, then smaller z as the final key.
std::vector<std::vector<std::int32_t>> tie_orders(const GridSpec& grid,
                                                  const std::vector<TiePriority>& prio);

namespace kernels {
// OpenMP-parallel per-slice kernels. A slice is nx*ny*nz values at one time.
void bar_slice(const GridSpec& g, const double* in, const std::vector<double>& cmat,
               const std::vector<std::vector<std::int32_t>>& order, double* out,
               std::int32_t* psi, KernelStats& stats);
void hat_slice(const GridSpec& g, const double* next, const double* bar,
               const std::vector<QuadNode>* quad_row /* per x node */,
               double exercise_tol, double* out, std::uint8_t* continuation,
               KernelStats& stats);
}  // namespace kernels

namespace serial_ref {
// Plain serial reference implementations kept for testing and benchmarks;
// must agree bitwise with the parallel kernels.
void bar_slice(const GridSpec& g, const double* in, const std::vector<double>& cmat,
               const std::vector<std::vector<std::int32_t>>& order, double* out,
               std::int32_t* psi, KernelStats& stats);
void hat_slice(const GridSpec& g, const double* next, const double* bar,
               const std::vector<QuadNode>* quad_row, double exercise_tol, double* out,
               std::uint8_t* continuation, KernelStats& stats);
}  // namespace serial_ref

// Iterated bar/hat recursion: V^0 is the liquidation value at every time
// slice, V^k = hat(V^{k-1}) by backward induction. Stops at n_max or when
// the sup-norm increment drops below stop_tol (k >= 2). Throws
// solver_invariant_error if monotonicity in k fails beyond 1e-10.
SolveResult solve_vn(const SolverConfig& config, const MarketModel& market,
                     const CostSpec& cost, const UtilitySpec& utility,
                     const QuadratureTable* custom_quadrature = nullptr);

// Collapses chained same-instant jumps in the raw policy: if a target state
// is itself an exercise state, follow its target, guarded by a visited set.
// Throws solver_invariant_error naming the states on a cycle.
PolicyField extract_policy(const SolveResult& result, const SolverConfig& config,
                           const CostSpec& cost);

}  // namespace impact
