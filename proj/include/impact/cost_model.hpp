#pragma once

#include <string>
#include <vector>

#include "impact/common.hpp"
#include "impact/market_model.hpp"

namespace impact {

enum class CostKind { Power, FixedPlusPower, Proportional, Tabulated };

// Trade-size cost c(z): c(0) = 0, c > 0 off zero, nondecreasing in |z| on
// each side, subadditive on [-2M, 2M] for the shipped concave kinds.
struct CostSpec {
    CostKind kind = CostKind::Power;
    double c0 = 1.0;      // power coefficient
    double alpha = 0.5;   // exponent, in (0,1] for power kinds
    double fixed = 0.0;   // fixed cost floor (FixedPlusPower)
    double M = 2.0;       // position bound; cost domain is [-2M, 2M]
    double eps0 = 1.0;    // concavity radius
    double L0 = 0.0;      // Lipschitz constant outside (-eps0, eps0)
    std::vector<double> tab_z, tab_c;  // Tabulated kind

    static CostSpec power(double c0, double alpha, double M, double eps0);
    static CostSpec fixed_plus_power(double fixed, double c0, double alpha, double M,
                                     double eps0);
    static CostSpec proportional(double c0, double M);
    static CostSpec tabulated(std::vector<double> z, std::vector<double> c, double M,
                              double eps0);
    static CostSpec tabulated_from_csv(const std::string& file, double M, double eps0);

    // Throws on |z| > 2M.
    double cost(double z) const;
    double max_cost() const;  // sup over [-2M, 2M]
    bool has_fixed_floor() const;
};

// Modulus of continuity rho(h) for n = 1; for n > 1 the supremum over
// convex splittings sum rho(theta_i h), computed on a splitting grid.
double modulus(const CostSpec& spec, double h, int n);

// Subadditive envelope by split-round dynamic programming on a symmetric grid:
// round k+1 takes min over grid splits z = z1 + z2 of round-k values.
std::vector<double> subadditive_envelope(const CostSpec& spec,
                                         const std::vector<double>& z_grid,
                                         int max_splits);
std::vector<double> envelope_round(const std::vector<double>& z_grid,
                                   const std::vector<double>& values);

enum class Normalization { Literal, Positivized };

struct ConcavityConstants {
    double eta_32 = 0.0, eta_2 = 0.0, eta_3 = 0.0;
    double gamma = 0.0;
    double alpha1 = 0.0, beta1 = 0.0;
    double C0 = 0.0, C1 = 0.0;
    double eps1 = 0.0;
    Normalization normalization = Normalization::Literal;
    bool c1_nonpositive = false;  // flagged, non-fatal diagnostic
};

ConcavityConstants concavity_constants(const CostSpec& spec, const MarketModel& market,
                                       double lambda, double Lambda, double T,
                                       Normalization norm);

struct AssumptionClause {
    std::string clause;
    bool pass = false;
    std::string witness;
};

struct AssumptionReport {
    std::vector<AssumptionClause> entries;
    bool all_pass() const;
    std::string to_json() const;
};

AssumptionReport check_assumptions(const CostSpec& spec, int z_samples);

}  // namespace impact
