#include "impact/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace impact {

namespace {

constexpr double kNodeTol = 1e-9;

void check_common(const CostSpec& s) {
    if (s.M <= 0.0) throw input_error("cost: M must be > 0");
    if (s.eps0 <= 0.0 || s.eps0 > s.M)
        throw input_error("cost: eps0 must lie in (0, M]");
}

// Linear interpolation on the tabulated nodes.
double tab_eval(const std::vector<double>& zs, const std::vector<double>& cs, double z) {
    if (z <= zs.front()) return cs.front();
    if (z >= zs.back()) return cs.back();
    const auto it = std::upper_bound(zs.begin(), zs.end(), z);
    const std::size_t i = static_cast<std::size_t>(it - zs.begin()) - 1;
    const double w = (z - zs[i]) / (zs[i + 1] - zs[i]);
    return cs[i] * (1.0 - w) + cs[i + 1] * w;
}

std::size_t find_node(const std::vector<double>& zs, double z) {
    const auto it = std::lower_bound(zs.begin(), zs.end(), z - kNodeTol);
    if (it != zs.end() && std::abs(*it - z) <= kNodeTol)
        return static_cast<std::size_t>(it - zs.begin());
    return zs.size();
}

}  // namespace

CostSpec CostSpec::power(double c0, double alpha, double M, double eps0) {
    if (c0 <= 0.0) throw input_error("power cost: c0 must be > 0");
    if (alpha <= 0.0 || alpha > 1.0) throw input_error("power cost: alpha must be in (0,1]");
    CostSpec s;
    s.kind = CostKind::Power;
    s.c0 = c0;
    s.alpha = alpha;
    s.M = M;
    s.eps0 = eps0;
    check_common(s);
    s.L0 = c0 * alpha * std::pow(eps0, alpha - 1.0);
    return s;
}

CostSpec CostSpec::fixed_plus_power(double fixed, double c0, double alpha, double M,
                                    double eps0) {
    CostSpec s = power(c0, alpha, M, eps0);
    if (fixed <= 0.0) throw input_error("fixed cost: floor must be > 0");
    s.kind = CostKind::FixedPlusPower;
    s.fixed = fixed;
    return s;
}

CostSpec CostSpec::proportional(double c0, double M) {
    if (c0 <= 0.0) throw input_error("proportional cost: c0 must be > 0");
    CostSpec s;
    s.kind = CostKind::Proportional;
    s.c0 = c0;
    s.alpha = 1.0;
    s.M = M;
    s.eps0 = M;
    check_common(s);
    s.L0 = c0;
    return s;
}

CostSpec CostSpec::tabulated(std::vector<double> z, std::vector<double> c, double M,
                             double eps0) {
    if (z.size() != c.size() || z.size() < 3)
        throw input_error("tabulated cost: need matching z,c with >= 3 rows");
    for (std::size_t i = 1; i < z.size(); ++i)
        if (!(z[i] > z[i - 1]))
            throw input_error("tabulated cost: z column must be strictly increasing");
    if (std::abs(z.front() + z.back()) > kNodeTol)
        throw input_error("tabulated cost: z range must be symmetric");
    CostSpec s;
    s.kind = CostKind::Tabulated;
    s.M = M;
    s.eps0 = eps0;
    check_common(s);
    if (z.front() > -2.0 * M + kNodeTol)
        throw input_error("tabulated cost: z range must cover [-2M, 2M]");
    s.tab_z = std::move(z);
    s.tab_c = std::move(c);
    // Steepest tabulated slope outside (-eps0, eps0).
    double l0 = 0.0;
    for (std::size_t i = 1; i < s.tab_z.size(); ++i) {
        const double mid = 0.5 * (s.tab_z[i] + s.tab_z[i - 1]);
        if (std::abs(mid) < eps0) continue;
        l0 = std::max(l0, std::abs(s.tab_c[i] - s.tab_c[i - 1]) /
                              (s.tab_z[i] - s.tab_z[i - 1]));
    }
    s.L0 = l0;
    return s;
}

CostSpec CostSpec::tabulated_from_csv(const std::string& file, double M, double eps0) {
    std::ifstream f(file);
    if (!f) throw input_error("tabulated cost: cannot open " + file);
    std::string line;
    std::vector<double> zs, cs;
    bool first = true;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (first && line.find("z") != std::string::npos) {
            first = false;
            continue;  // header row
        }
        first = false;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
            throw input_error("tabulated cost: bad row '" + line + "'");
        zs.push_back(std::stod(a));
        cs.push_back(std::stod(b));
    }
    return tabulated(std::move(zs), std::move(cs), M, eps0);
}

double CostSpec::cost(double z) const {
    if (!std::isfinite(z)) throw input_error("cost: non-finite z");
    if (std::abs(z) > 2.0 * M + kNodeTol)
        throw input_error("cost: |z| exceeds 2M domain");
    if (z == 0.0) return 0.0;
    switch (kind) {
        case CostKind::Power:
            return c0 * std::pow(std::abs(z), alpha);
        case CostKind::FixedPlusPower:
            return fixed + c0 * std::pow(std::abs(z), alpha);
        case CostKind::Proportional:
            return c0 * std::abs(z);
        case CostKind::Tabulated:
            return tab_eval(tab_z, tab_c, z);
    }
    return 0.0;
}

double CostSpec::max_cost() const {
    if (kind == CostKind::Tabulated)
        return *std::max_element(tab_c.begin(), tab_c.end());
    return cost(2.0 * M);
}

bool CostSpec::has_fixed_floor() const {
    return kind == CostKind::FixedPlusPower && fixed > 0.0;
}

double modulus(const CostSpec& spec, double h, int n) {
    if (h < 0.0) throw input_error("modulus: h must be >= 0");
    if (n < 1) throw input_error("modulus: n must be >= 1");
    if (h == 0.0) return 0.0;
    const double lim = 2.0 * spec.M;
    const double hc = std::min(h, 2.0 * lim);

    auto rho1 = [&](double g) {
        if (g <= 0.0) return 0.0;
        double worst = 0.0;
        const int ns = 2000;
        for (int i = 0; i <= ns; ++i) {
            const double z1 = -lim + (2.0 * lim) * i / ns;
            const double z2 = z1 + g;
            if (z2 > lim + kNodeTol) break;
            worst = std::max(worst, std::abs(spec.cost(z2) - spec.cost(z1)));
        }
        // The step straddling 0 exactly is the worst case for cost kinds
        // that rise fastest from the origin.
        if (g <= lim) worst = std::max(worst, spec.cost(g));
        return worst;
    };

    if (n == 1) return rho1(hc);

    // rho_n(h) = sup over convex splittings of h; dynamic programming on a
    // fractional grid: best[k] = max_g best_{k-1}(h - g) + rho(g).
    const int ng = 240;
    std::vector<double> rho_grid(ng + 1);
    for (int i = 0; i <= ng; ++i) rho_grid[i] = rho1(hc * i / ng);
    std::vector<double> best = rho_grid;
    for (int k = 2; k <= n; ++k) {
        std::vector<double> next(ng + 1, 0.0);
        for (int i = 0; i <= ng; ++i)
            for (int j = 0; j <= i; ++j)
                next[i] = std::max(next[i], best[i - j] + rho_grid[j]);
        best = std::move(next);
    }
    return best[ng];
}

std::vector<double> envelope_round(const std::vector<double>& z_grid,
                                   const std::vector<double>& values) {
    if (z_grid.size() != values.size())
        throw input_error("envelope_round: size mismatch");
    const std::size_t n = z_grid.size();
    std::vector<double> out = values;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double z2 = z_grid[i] - z_grid[j];
            const std::size_t k = find_node(z_grid, z2);
            if (k == n) continue;
            out[i] = std::min(out[i], values[j] + values[k]);
        }
    }
    return out;
}

std::vector<double> subadditive_envelope(const CostSpec& spec,
                                         const std::vector<double>& z_grid,
                                         int max_splits) {
    if (z_grid.empty()) throw input_error("envelope: empty grid");
    for (std::size_t i = 1; i < z_grid.size(); ++i)
        if (!(z_grid[i] > z_grid[i - 1]))
            throw input_error("envelope: grid must be strictly increasing");
    for (double z : z_grid) {
        if (std::abs(z) > 2.0 * spec.M + kNodeTol)
            throw input_error("envelope: grid exceeds [-2M, 2M]");
        if (find_node(z_grid, -z) == z_grid.size())
            throw input_error("envelope: grid must be symmetric about 0");
    }
    std::vector<double> vals(z_grid.size());
    for (std::size_t i = 0; i < z_grid.size(); ++i) vals[i] = spec.cost(z_grid[i]);
    for (int r = 0; r < max_splits; ++r) {
        std::vector<double> next = envelope_round(z_grid, vals);
        double change = 0.0;
        for (std::size_t i = 0; i < vals.size(); ++i)
            change = std::max(change, vals[i] - next[i]);
        vals = std::move(next);
        if (change < 1e-15) break;  // fixed point
    }
    return vals;
}

ConcavityConstants concavity_constants(const CostSpec& spec, const MarketModel& market,
                                       double lambda, double Lambda, double T,
                                       Normalization norm) {
    if (!(lambda > 0.0) || !(Lambda >= lambda))
        throw input_error("constants: need 0 < lambda <= Lambda");
    if (T <= 0.0) throw input_error("constants: T must be > 0");

    // limsup of ratio(z) as z -> 0+, estimated on z_k = eps0 * 2^{-k} with a
    // tail maximum over the deepest entries.
    auto tail_limsup = [&](auto ratio) {
        double worst = 0.0;
        for (int k = 20; k <= 40; ++k) {
            const double z = spec.eps0 * std::pow(2.0, -k);
            worst = std::max(worst, ratio(z));
        }
        return worst;
    };

    ConcavityConstants c;
    c.normalization = norm;
    c.eta_32 = tail_limsup([&](double z) { return spec.cost(1.5 * z) / spec.cost(z); });
    c.eta_2 = tail_limsup([&](double z) { return spec.cost(2.0 * z) / spec.cost(z); });
    c.eta_3 = tail_limsup([&](double z) { return spec.cost(3.0 * z) / spec.cost(z); });
    c.gamma = tail_limsup(
        [&](double z) { return (spec.cost(-2.0 * z) - spec.cost(-z)) / spec.cost(z); });

    const double eta2_used = (norm == Normalization::Positivized) ? c.eta_2 / 2.0 : c.eta_2;
    c.alpha1 = (1.0 - eta2_used) / eta2_used;
    c.beta1 = (1.0 - eta2_used) / (1.0 + c.gamma);
    c.C0 = (Lambda / lambda) * (market.b_sup * T + market.s_sup * std::sqrt(T) + spec.L0) +
           1.0;
    if (c.alpha1 != 0.0 && c.beta1 != 0.0)
        c.C1 = c.C0 * (2.0 + Lambda * (1.0 / c.alpha1 + 1.0 / c.beta1));
    c.c1_nonpositive = !(c.C1 > 0.0);

    if (spec.has_fixed_floor()) {
        c.eps1 = spec.eps0;  // cost floor makes the per-unit bound hold trivially
        return c;
    }
    // Largest eps in (0, eps0] with c(z) >= C0*z on (0, eps), by bisection
    // over a sampled predicate.
    auto holds_up_to = [&](double e) {
        for (int j = 1; j <= 200; ++j) {
            const double z = e * j / 200.0;
            if (spec.cost(z) < c.C0 * z - 1e-12) return false;
        }
        return true;
    };
    if (!holds_up_to(spec.eps0 * 1e-9)) {
        c.eps1 = 0.0;
        return c;
    }
    double lo = spec.eps0 * 1e-9, hi = spec.eps0;
    if (holds_up_to(hi)) {
        c.eps1 = hi;
        return c;
    }
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (holds_up_to(mid) ? lo : hi) = mid;
    }
    c.eps1 = lo;
    return c;
}

bool AssumptionReport::all_pass() const {
    for (const auto& e : entries)
        if (!e.pass) return false;
    return true;
}

std::string AssumptionReport::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& e : entries)
        j.push_back({{"clause", e.clause}, {"pass", e.pass}, {"witness", e.witness}});
    return j.dump(2);
}

AssumptionReport check_assumptions(const CostSpec& spec, int z_samples) {
    if (z_samples < 100) throw input_error("check_assumptions: z_samples must be >= 100");
    AssumptionReport rep;
    const double lim = 2.0 * spec.M;
    auto add = [&](const std::string& clause, bool pass, const std::string& witness) {
        rep.entries.push_back({clause, pass, witness});
    };
    std::ostringstream w;
    w.precision(12);

    bool ok = spec.cost(0.0) == 0.0;
    std::string wit = ok ? "" : "c(0) != 0";
    for (int i = 1; i <= z_samples && ok; ++i) {
        const double z = lim * i / z_samples;
        if (!(spec.cost(z) > 0.0) || !(spec.cost(-z) > 0.0)) {
            ok = false;
            w.str("");
            w << "c not positive at |z|=" << z;
            wit = w.str();
        }
    }
    add("positivity", ok, wit);

    ok = true;
    wit = "";
    for (int i = 1; i < z_samples && ok; ++i) {
        const double z1 = lim * i / z_samples, z2 = lim * (i + 1) / z_samples;
        if (spec.cost(z2) < spec.cost(z1) - 1e-12 ||
            spec.cost(-z2) < spec.cost(-z1) - 1e-12) {
            ok = false;
            w.str("");
            w << "cost decreases in |z| near " << z1;
            wit = w.str();
        }
    }
    add("one_sided_monotonicity", ok, wit);

    ok = true;
    wit = "";
    for (int i = 1; i <= z_samples && ok; ++i) {
        for (int j = i; j <= z_samples && ok; ++j) {
            const double z1 = spec.M * i / z_samples;
            const double z2 = spec.M * j / z_samples;
            for (double s1 : {z1, -z1}) {
                for (double s2 : {z2, -z2}) {
                    if (std::abs(s1 + s2) > lim) continue;
                    if (spec.cost(s1) + spec.cost(s2) < spec.cost(s1 + s2) - 1e-10) {
                        ok = false;
                        w.str("");
                        w << "subadditivity fails at z1=" << s1 << " z2=" << s2;
                        wit = w.str();
                    }
                }
            }
        }
    }
    add("subadditivity", ok, wit);

    ok = true;
    wit = "";
    const double reach = std::min(2.0 * spec.eps0, lim);
    for (int i = 1; i + 1 < z_samples && ok; ++i) {
        const double h = reach / z_samples;
        for (int sgn : {1, -1}) {
            const double z = sgn * (h * i);
            const double second =
                spec.cost(z + sgn * h) - 2.0 * spec.cost(z) + spec.cost(z - sgn * h);
            // Second difference of a concave function is nonpositive; the
            // node adjacent to 0 is skipped for fixed-floor kinds.
            if (i == 1 && spec.has_fixed_floor()) continue;
            if (second > 1e-9 * std::max(1.0, spec.max_cost())) {
                ok = false;
                w.str("");
                w << "convex second difference at z=" << z;
                wit = w.str();
            }
        }
    }
    add("concavity_near_zero", ok, wit);

    ok = true;
    wit = "";
    for (int i = 0; i < z_samples && ok; ++i) {
        const double z1 = spec.eps0 + (lim - spec.eps0) * i / z_samples;
        const double z2 = std::min(z1 + (lim - spec.eps0) / z_samples, lim);
        for (int sgn : {1, -1}) {
            const double d = std::abs(spec.cost(sgn * z2) - spec.cost(sgn * z1));
            if (d > spec.L0 * (z2 - z1) + 1e-9) {
                ok = false;
                w.str("");
                w << "Lipschitz bound exceeded near z=" << sgn * z1;
                wit = w.str();
            }
        }
    }
    add("lipschitz_outside_eps0", ok, wit);

    return rep;
}

}  // namespace impact
