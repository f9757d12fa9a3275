#include "impact/payoff_model.hpp"

#include <cmath>
#include <sstream>

namespace impact {

namespace {

// ln(1 + e^y) without overflow for large |y|.
double softplus(double y) {
    if (y > 0.0) return y + std::log1p(std::exp(-y));
    return std::log1p(std::exp(y));
}

}  // namespace

UtilitySpec UtilitySpec::bounded_slope(double lambda, double Lambda) {
    if (!(lambda > 0.0) || !(Lambda >= lambda))
        throw input_error("utility: need 0 < lambda <= Lambda");
    UtilitySpec u;
    u.kind = UtilityKind::BoundedSlope;
    u.lambda = lambda;
    u.Lambda = Lambda;
    return u;
}

UtilitySpec UtilitySpec::cara(double risk_aversion) {
    if (!(risk_aversion > 0.0)) throw input_error("utility: risk aversion must be > 0");
    UtilitySpec u;
    u.kind = UtilityKind::Cara;
    u.risk_aversion = risk_aversion;
    return u;
}

double UtilitySpec::value(double y) const {
    if (!std::isfinite(y)) throw input_error("utility: non-finite y");
    if (kind == UtilityKind::Cara) return -std::exp(-risk_aversion * y);
    // Concave increasing with slope strictly inside (lambda, Lambda):
    // U'(y) = Lambda - (Lambda - lambda) * sigmoid(y).
    return Lambda * y - (Lambda - lambda) * softplus(y);
}

bool H2Report::all_pass() const {
    for (const auto& e : entries)
        if (!e.pass) return false;
    return true;
}

H2Report check_h2(const UtilitySpec& u, int y_samples) {
    if (y_samples < 100) throw input_error("check_h2: y_samples must be >= 100");
    H2Report rep;
    const double lo = -20.0, hi = 20.0;
    const double h = (hi - lo) / y_samples;
    std::ostringstream w;
    w.precision(12);

    bool slope_ok = true, concave_ok = true, increasing_ok = true;
    std::string slope_wit, concave_wit, inc_wit;
    double prev = u.value(lo), prev_slope = 0.0;
    for (int i = 1; i <= y_samples; ++i) {
        const double y = lo + h * i;
        const double v = u.value(y);
        const double slope = (v - prev) / h;
        if (slope <= 0.0 && increasing_ok) {
            increasing_ok = false;
            w.str("");
            w << "nonpositive slope at y=" << y;
            inc_wit = w.str();
        }
        if ((slope < u.lambda - 1e-9 || slope > u.Lambda + 1e-9) && slope_ok) {
            slope_ok = false;
            w.str("");
            w << "slope " << slope << " outside [lambda, Lambda] at y=" << y;
            slope_wit = w.str();
        }
        if (i >= 2 && slope > prev_slope + 1e-9 && concave_ok) {
            concave_ok = false;
            w.str("");
            w << "slope increases at y=" << y;
            concave_wit = w.str();
        }
        prev = v;
        prev_slope = slope;
    }
    rep.entries.push_back({"increasing", increasing_ok, inc_wit});
    rep.entries.push_back({"slope_sandwich", slope_ok, slope_wit});
    rep.entries.push_back({"concave", concave_ok, concave_wit});
    return rep;
}

}  // namespace impact
