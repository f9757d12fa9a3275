#pragma once

#include <string>
#include <vector>

#include "impact/common.hpp"

namespace impact {

enum class UtilityKind { BoundedSlope, Cara };

// Terminal payoff U. The bounded-slope form is
//   U(y) = Lambda*y - (Lambda - lambda)*softplus(y),
// concave increasing with lambda < U' < Lambda everywhere. The CARA form
// U(y) = -exp(-a*y) violates the lower slope bound and is admitted only
// for the reduced-problem cross check.
struct UtilitySpec {
    UtilityKind kind = UtilityKind::BoundedSlope;
    double lambda = 0.5;
    double Lambda = 1.5;
    double risk_aversion = 1.0;

    static UtilitySpec bounded_slope(double lambda, double Lambda);
    static UtilitySpec cara(double risk_aversion);

    // Throws input_error on non-finite y.
    double value(double y) const;
};

struct H2Clause {
    std::string clause;
    bool pass = false;
    std::string witness;
};

struct H2Report {
    std::vector<H2Clause> entries;
    bool all_pass() const;
};

H2Report check_h2(const UtilitySpec& u, int y_samples);

}  // namespace impact
