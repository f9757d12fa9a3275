#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "impact/cost_model.hpp"
#include "impact/lattice.hpp"

namespace impact {

// Dimension-reduced problem for exponential utility with constant drift and
// volatility: the full value factorizes as V(t,x,y,z) = -exp(-a*y) * W(t,z)
// with W independent of x, so the solve collapses to a (t,z) lattice.
struct CaraProblem {
    double b0 = 0.0;
    double s0 = 0.0;
    double risk_aversion = 1.0;
    CostSpec cost;
    std::vector<double> t_nodes;
    std::vector<double> z_nodes;  // symmetric, includes 0
    double M = 2.0;
    int jump_rounds = 8;  // transaction budget of the reduced recursion

    void validate() const;
};

struct CaraSolution {
    std::vector<double> t_nodes;
    std::vector<double> z_nodes;
    // log W(t,z), indexed jt*nz + iz; stored in log space to avoid overflow.
    std::vector<double> log_w;
    std::vector<std::uint8_t> exercise;   // jump taken at (t,z)
    std::vector<std::int32_t> target_idx; // z-node index of the jump target

    std::size_t idx(std::size_t jt, std::size_t iz) const {
        return jt * z_nodes.size() + iz;
    }
    double w(std::size_t jt, std::size_t iz) const;
    void export_csv(const std::string& file) const;
};

// Backward induction: terminal log W(T,z) = a*c(-z); each step minimizes over
// holding (exact Gaussian moment generating function, log E exp(-a z dX) =
// -a*b0*z*dt + a^2*s0^2*z^2*dt/2) and jumping (transitive relaxation of
// log W(t, z~) + a*c(z~ - z) within the slice, up to jump_rounds passes).
CaraSolution solve_cara(const CaraProblem& problem);

// Max over (t,z) of |V(t,x0,y0,z) + exp(-a*y0) W(t,z)| / (1 + |W(t,z)|),
// sampling the generic surface at its reference (x0, y0) column. Throws
// input_error when the (t,z) grids disagree.
double cross_check_factorization(const ValueSurface& generic, double x0, double y0,
                                 double risk_aversion, const CaraSolution& reduced);

}  // namespace impact
