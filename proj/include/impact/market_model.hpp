#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "impact/common.hpp"

namespace impact {

enum class CoefKind { Constant, AffineClamped };

// Stock-price dynamics dX = b(t,x) dt + sigma(t,x) dW with bounded,
// Lipschitz coefficients. Two concrete families are shipped so the sup
// bounds entering the concavity constants are exact, not estimated.
struct MarketModel {
    CoefKind drift_kind = CoefKind::Constant;
    double drift_level = 0.0;   // constant term
    double drift_slope = 0.0;   // affine slope in x (AffineClamped only)
    CoefKind vol_kind = CoefKind::Constant;
    double vol_level = 0.0;
    double vol_slope = 0.0;
    double b_sup = 0.0;         // |b| <= b_sup everywhere
    double s_sup = 0.0;         // 0 <= sigma <= s_sup everywhere
    double lipschitz_k = 0.0;

    static MarketModel constant(double b, double sigma);
    static MarketModel affine(double drift_level, double drift_slope, double b_sup,
                              double vol_level, double vol_slope, double s_sup);

    double drift(double t, double x) const;
    double vol(double t, double x) const;
    // Throws input_error on non-finite x.
    std::pair<double, double> coefficients(double t, double x) const;
};

struct PathSet {
    double t0 = 0.0;
    std::vector<double> time_grid;   // strictly increasing, first entry = t0
    std::size_t n_paths = 0;
    std::vector<double> x_values;    // row-major (path, time)
    std::uint64_t seed = 0;

    double at(std::size_t path, std::size_t step) const {
        return x_values[path * time_grid.size() + step];
    }
    std::size_t n_times() const { return time_grid.size(); }
};

// Euler-Maruyama on the given grid, one normal draw per step. Paths are
// partitioned across workers with independently seeded streams and merged
// by path index, so the result does not depend on the worker count.
PathSet simulate_paths(const MarketModel& model, double t0, double x0,
                       const std::vector<double>& time_grid, std::size_t n_paths,
                       std::uint64_t seed);

void export_paths_csv(const PathSet& paths, const std::string& file);

struct QuadNode {
    double x_next;
    double weight;
};

// Gauss-Hermite discretization of the one-step conditional law of X.
// n_nodes must be odd and >= 3; sigma = 0 degenerates to a single node.
std::vector<QuadNode> transition_quadrature(const MarketModel& model, double t,
                                            double x, double dt, int n_nodes);

// Physicists' Gauss-Hermite rule (weight e^{-u^2}), weights normalized to sum 1.
void gauss_hermite_rule(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace impact
